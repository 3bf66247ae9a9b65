"""Command-line interface.

Subcommands::

    hierarchy   derive the constraint subset (and component sizes) only
    simulate    run the noisy simulation and write the measurement files
    mitigate    consume measurement + subset files, write mitigated series
    scan        sweep an (l0, m/g) grid end to end
    verify      run the built-in consistency checks

Exit codes: 0 success, 2 configuration/validation error, 3 resource-limit
error, 4 numerical failure. All runs with the same seed and inputs produce
byte-identical output files.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import verify as verify_checks
from .config import ExperimentConfig, load_config
from .errors import ConfigError, IllPosedFitError, ResourceLimitError
from .hierarchy import HierarchySubset, decompose, select_subset
from .jsonio import dump_csv, dump_json, load_json
from .mitigation import run_mitigation, zne_baseline
from .pauli import ObservableCombination
from .schwinger import (
    build_hamiltonian,
    charge_observable,
    default_initial_state,
    hierarchy_seeds,
    particle_number_observable,
    run_scan,
)
from .simulator import MeasurementSet, evolve_exact, evolve_noisy


def _subset_for(config: ExperimentConfig):
    ham = build_hamiltonian(config.schwinger)
    seeds = config.hierarchy_seeds or hierarchy_seeds(config.schwinger.n_qubits)
    return ham, select_subset(ham, seeds, config.mitigation.radius)


def cmd_hierarchy(config: ExperimentConfig, out_dir: Path) -> int:
    ham, subset = _subset_for(config)
    dump_json(subset.to_dict(), out_dir / "subset.json")
    listing = [str(eq) for eq in subset.equations]
    (out_dir / "equations.txt").parent.mkdir(parents=True, exist_ok=True)
    from .jsonio import atomic_write_text

    atomic_write_text(out_dir / "equations.txt", "\n".join(listing) + "\n")
    if config.schwinger.n_qubits <= 6:
        dump_json({"sizes": decompose(ham)}, out_dir / "components.json")
    print(f"wrote {out_dir / 'subset.json'}")
    return 0


def cmd_simulate(config: ExperimentConfig, out_dir: Path) -> int:
    ham, subset = _subset_for(config)
    measurements = evolve_noisy(
        ham, config.initial_state, config.plan, config.noise, subset.correlators
    )
    dump_json(subset.to_dict(), out_dir / "subset.json")
    dump_json(measurements.to_dict(), out_dir / "measurements.json")
    header, rows = measurements.csv_rows()
    dump_csv(out_dir / "measurements.csv", header, rows)

    n = config.schwinger.n_qubits
    named = [("Q", charge_observable(n)), ("P", particle_number_observable(n))]
    observables = [combo for _, combo in named] + [
        ObservableCombination(0.0, ((1.0, c),)) for c in subset.correlators
    ]
    reference = evolve_exact(ham, config.initial_state, config.plan.times, observables)
    dump_json(
        {
            "times": list(config.plan.times),
            "observables": [
                {"name": name, "series": reference[i].tolist()}
                for i, (name, _) in enumerate(named)
            ],
            "correlators": [
                {"string": c.token(), "series": reference[len(named) + i].tolist()}
                for i, c in enumerate(subset.correlators)
            ],
        },
        out_dir / "reference.json",
    )
    print(f"wrote {out_dir / 'measurements.json'}")
    return 0


def _save_npz_atomic(path: Path, **arrays) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp.npz")
    os.close(fd)
    try:
        np.savez(tmp_name, **arrays)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def cmd_mitigate(
    config: ExperimentConfig,
    measurements_path: Path,
    subset_path: Path,
    out_dir: Path,
    zne_only: bool = False,
    dump_matrix: Path | None = None,
) -> int:
    measurements = MeasurementSet.from_dict(load_json(measurements_path))
    subset = HierarchySubset.from_dict(load_json(subset_path))

    degree = config.mitigation.degree
    dt = config.plan.dt
    # fails fast when some step's error levels cannot support the degree,
    # instead of silently writing a min-norm artifact
    zne_baseline(measurements, degree)
    constrained_subset = None if zne_only else subset
    constrained = run_mitigation(
        measurements, constrained_subset, degree, dt, config.mitigation.g_weight
    )
    plain = run_mitigation(measurements, None, degree, dt)
    if dump_matrix is not None:
        _save_npz_atomic(
            dump_matrix,
            matrix=constrained.problem.matrix,
            target=constrained.problem.target,
        )

    n = config.schwinger.n_qubits
    ham = build_hamiltonian(config.schwinger)
    named = [("Q", charge_observable(n)), ("P", particle_number_observable(n))]
    measured = set(measurements.correlators)
    named = [
        (name, combo)
        for name, combo in named
        if all(s in measured for s in combo.strings)
    ]
    if named:
        references = evolve_exact(
            ham,
            config.initial_state,
            config.plan.times,
            [combo for _, combo in named],
        )

    from .mitigation import error_norm, observable_covariance, observable_series

    result_doc: dict = {}
    csv_rows = []
    for label, output in (("zne", plain), ("bbgky", constrained)):
        doc = {
            "correlators": [c.token() for c in measurements.correlators],
            "extrapolations": output.result.extrapolations.tolist(),
            "std": output.result.std.tolist(),
            "observables": [],
        }
        for o_index, (name, combo) in enumerate(named):
            series = observable_series(
                combo,
                measurements.correlators,
                measurements.initial,
                output.result.extrapolations,
            )
            cov = observable_covariance(
                combo, measurements.correlators, output.covariance, measurements.n_steps
            )
            std_series = np.sqrt(np.clip(np.diag(cov), 0.0, None))
            norm, d_norm = error_norm(series, references[o_index], dt, cov)
            doc["observables"].append(
                {
                    "name": name,
                    "L": norm,
                    "dL": d_norm,
                    "series": series.tolist(),
                    "std_series": std_series.tolist(),
                }
            )
            for s in range(measurements.n_steps + 1):
                csv_rows.append(
                    (
                        label,
                        name,
                        s,
                        s * dt,
                        series[s],
                        float(std_series[s]),
                        float(references[o_index][s]),
                    )
                )
        result_doc[label] = doc

    dump_json(result_doc, out_dir / "mitigated.json")
    dump_csv(
        out_dir / "mitigated.csv",
        ["method", "observable", "step", "time", "value", "std", "reference"],
        csv_rows,
    )
    print(f"wrote {out_dir / 'mitigated.json'}")
    return 0


def cmd_scan(config: ExperimentConfig, out_dir: Path) -> int:
    grid = run_scan(
        config.scan.l0_values,
        config.scan.mass_values,
        config.schwinger,
        config.plan,
        config.noise,
        config.mitigation.radius,
        config.mitigation.degree,
        config.seed,
        config.mitigation.g_weight,
        config.initial_state,
    )
    header, rows = grid.csv_rows()
    dump_csv(out_dir / "scan.csv", header, rows)
    dump_json(grid.summary(), out_dir / "summary.json")
    print(f"wrote {out_dir / 'scan.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bbgky-zne",
        description="hierarchy-constrained zero-noise extrapolation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override the RNG seed")
        p.add_argument("--out-dir", type=Path, default=None, help="output directory")
        p.add_argument(
            "--radius", type=int, default=None, help="override the subset radius"
        )
        p.add_argument(
            "--degree", type=int, default=None, help="override the fit degree"
        )
        p.add_argument(
            "--shots", type=int, default=None, help="override the shot count"
        )
        p.add_argument(
            "--infinite-shots",
            action="store_true",
            help="exact expectations: no sampling, no level shift",
        )

    for name in ("hierarchy", "simulate", "mitigate", "scan"):
        p = sub.add_parser(name)
        add_common(p)
        if name == "mitigate":
            p.add_argument("--measurements", type=Path, required=True)
            p.add_argument("--subset", type=Path, required=True)
            p.add_argument(
                "--zne-only",
                action="store_true",
                help="drop the constraint rows from the joint problem",
            )
            p.add_argument(
                "--dump-matrix",
                type=Path,
                default=None,
                help="write the assembled matrix and target to an .npz file",
            )

    p = sub.add_parser("verify")
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return 0 if verify_checks.run_all(args.seed) else 4
        config = load_config(
            args.config,
            seed=args.seed,
            shots=args.shots,
            infinite_shots=args.infinite_shots,
            out_dir=str(args.out_dir) if args.out_dir is not None else None,
            radius=args.radius,
            degree=args.degree,
        )
        out_dir = Path(config.out_dir)
        if args.command == "hierarchy":
            return cmd_hierarchy(config, out_dir)
        if args.command == "simulate":
            return cmd_simulate(config, out_dir)
        if args.command == "mitigate":
            return cmd_mitigate(
                config,
                args.measurements,
                args.subset,
                out_dir,
                zne_only=args.zne_only,
                dump_matrix=args.dump_matrix,
            )
        if args.command == "scan":
            return cmd_scan(config, out_dir)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (IllPosedFitError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except (ValueError, FileNotFoundError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
