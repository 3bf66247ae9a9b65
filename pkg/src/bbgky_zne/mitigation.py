"""Joint zero-noise extrapolation with equation-of-motion constraints.

Every measured correlator q at every step s gets its own polynomial model in
the error level,

    <Q_q>(eps) = a_{q,s,d} eps^d + ... + a_{q,s,1} eps + <Q_q>^0_s,

whose constant term is the mitigated (zero-noise) estimate. All models are
fitted in one linear least-squares problem. The top block of the design
matrix holds one Vandermonde row per measured (q, s, level) point; below it,
one row per (equation, time point) couples the constant terms of different
correlators through the hierarchy equations, with the time derivative taken
on the Bernstein polynomial that interpolates the mitigated time series:

    sum_{s'=1..N} <L>^0_{s'} beta_{s'N}(t/T) - sum_k c_k <R_k>^0_{t/dt}
        = -beta_{0N}(t/T) <L>_0  (+ sum_k c_k <R_k>_0 at t = 0),

where the known exact t=0 values sit on the right-hand side. The unknown
vector stacks the per-(q, s) coefficient blocks in descending powers, so the
mitigated estimate of block (q, s) lives at flat index
``(q * N + s - 1) * (d + 1) + d``.

The solver returns the minimum-norm least-squares solution; singular values
below ``1e-10`` times the largest are treated as zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import IllPosedFitError
from .hierarchy import BbgkyEquation, HierarchySubset
from .pauli import ObservableCombination, PauliString
from .simulator import MeasurementSet

#: relative singular-value cutoff shared by every solve in this module
RCOND = 1e-10


def bernstein_value(s: int, degree: int, x: float) -> float:
    """Bernstein basis polynomial ``C(degree, s) x^s (1-x)^(degree-s)``."""
    if int(degree) != degree or degree < 0:
        raise ValueError(f"degree must be a non-negative integer, got {degree}")
    if int(s) != s or not 0 <= s <= degree:
        raise ValueError(f"index must lie in 0..{degree}, got {s}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    return math.comb(int(degree), int(s)) * x**s * (1.0 - x) ** (degree - s)


def bernstein_deriv_weight(s: int, degree: int, x: float, dt: float) -> float:
    """Weight of sample s in the exact derivative of the Bernstein fit.

    For samples ``f_0 .. f_degree`` on a uniform grid with spacing dt,
    ``sum_s f_s * bernstein_deriv_weight(s, degree, x, dt)`` is the exact
    t-derivative of the Bernstein polynomial through those samples at
    ``t = degree * dt * x``. Affine sequences are differentiated exactly.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if int(degree) != degree or degree < 1:
        raise ValueError(f"degree must be a positive integer, got {degree}")
    if int(s) != s or not 0 <= s <= degree:
        raise ValueError(f"index must lie in 0..{degree}, got {s}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if s == 0:
        value = -((1.0 - x) ** (degree - 1))
    elif s == degree:
        value = x ** (degree - 1)
    else:
        value = bernstein_value(s - 1, degree - 1, x) - bernstein_value(s, degree - 1, x)
    return value / dt


@dataclass(frozen=True)
class BernsteinBasis:
    """Bernstein basis on ``[0, horizon]`` with ``degree + 1`` uniform samples."""

    degree: int
    horizon: float

    def __post_init__(self) -> None:
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError(f"degree must be a positive integer, got {self.degree}")
        if not float(self.horizon) > 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def dt(self) -> float:
        return self.horizon / self.degree

    def value(self, s: int, x: float) -> float:
        return bernstein_value(s, self.degree, x)

    def deriv_weight(self, s: int, x: float) -> float:
        return bernstein_deriv_weight(s, self.degree, x, self.dt)

    def derivative(self, samples: Sequence[float], x: float) -> float:
        samples = np.asarray(samples, dtype=float)
        if samples.shape != (self.degree + 1,):
            raise ValueError(f"expected {self.degree + 1} samples, got {samples.shape}")
        weights = np.array(
            [self.deriv_weight(s, x) for s in range(self.degree + 1)]
        )
        return float(weights @ samples)


@dataclass(frozen=True)
class ProblemLayout:
    """Row/column bookkeeping of the joint mitigation problem."""

    n_correlators: int
    n_steps: int
    n_levels: int
    degree: int
    n_equations: int

    @property
    def n_rows(self) -> int:
        return (
            self.n_levels * self.n_steps * self.n_correlators
            + self.n_equations * (self.n_steps + 1)
        )

    @property
    def n_cols(self) -> int:
        return (self.degree + 1) * self.n_steps * self.n_correlators

    def col_block(self, q: int, s: int) -> int:
        return (q * self.n_steps + (s - 1)) * (self.degree + 1)

    def extraction_index(self, q: int, s: int) -> int:
        """Flat column of the mitigated estimate of correlator q at step s."""
        return self.col_block(q, s) + self.degree

    def zne_row(self, q: int, s: int, level: int) -> int:
        return (q * self.n_steps + (s - 1)) * self.n_levels + level

    def g_row(self, equation: int, step: int) -> int:
        return (
            self.n_levels * self.n_steps * self.n_correlators
            + equation * (self.n_steps + 1)
            + step
        )

    def extraction_indices(self) -> np.ndarray:
        base = np.arange(self.n_correlators * self.n_steps) * (self.degree + 1)
        return (base + self.degree).reshape(self.n_correlators, self.n_steps)


@dataclass
class MitigationProblem:
    """Dense least-squares system ``matrix @ a ~= target``."""

    matrix: np.ndarray
    target: np.ndarray
    layout: ProblemLayout

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=float)
        self.target = np.asarray(self.target, dtype=float)
        expected = (self.layout.n_rows, self.layout.n_cols)
        if self.matrix.shape != expected:
            raise ValueError(f"matrix shape {self.matrix.shape} != layout shape {expected}")
        if self.target.shape != (expected[0],):
            raise ValueError("target length must match the number of rows")

    @cached_property
    def solution_operator(self) -> np.ndarray:
        """Pseudoinverse with the shared singular-value cutoff."""
        return np.linalg.pinv(self.matrix, rcond=RCOND)


@dataclass(frozen=True)
class MitigationResult:
    """Solution vector plus the extracted zero-noise estimates."""

    coefficients: np.ndarray
    extrapolations: np.ndarray
    std: np.ndarray | None = None


def assemble(
    measurements: MeasurementSet,
    subset: HierarchySubset | None,
    degree: int,
    dt: float,
    g_weight: float = 1.0,
) -> MitigationProblem:
    """Build the joint problem from measured data and optional constraints.

    ``subset`` may be ``None`` (or carry no equations) for plain per-slice
    extrapolation. When present, its correlators must be a prefix of the
    measured correlators so column indices agree. ``dt`` is the step length
    of the measurement grid; ``g_weight`` scales the constraint rows.
    """
    if int(degree) != degree or degree < 0:
        raise ValueError(f"degree must be a non-negative integer, got {degree}")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not g_weight >= 0.0:
        raise ValueError(f"g_weight must be >= 0, got {g_weight}")
    degree = int(degree)

    n_corr = measurements.n_correlators
    n_steps = measurements.n_steps
    n_levels = measurements.n_levels

    equations: tuple[BbgkyEquation, ...] = ()
    if subset is not None and subset.n_equations:
        if subset.n_correlators > n_corr or any(
            subset.correlators[i] != measurements.correlators[i]
            for i in range(subset.n_correlators)
        ):
            raise ValueError(
                "subset correlators must be a prefix of the measured correlators"
            )
        equations = subset.equations

    layout = ProblemLayout(n_corr, n_steps, n_levels, degree, len(equations))
    matrix = np.zeros((layout.n_rows, layout.n_cols))
    target = np.zeros(layout.n_rows)

    powers = np.arange(degree, -1, -1)
    for q in range(n_corr):
        for s in range(1, n_steps + 1):
            row = layout.zne_row(q, s, 0)
            col = layout.col_block(q, s)
            matrix[row : row + n_levels, col : col + degree + 1] = (
                measurements.eps[s - 1][:, None] ** powers[None, :]
            )
            target[row : row + n_levels] = measurements.values[q, s - 1]

    index = {string: i for i, string in enumerate(measurements.correlators)}
    for e, equation in enumerate(equations):
        q_lhs = index[equation.lhs]
        for step in range(n_steps + 1):
            x = step / n_steps
            row = layout.g_row(e, step)
            for s in range(1, n_steps + 1):
                matrix[row, layout.extraction_index(q_lhs, s)] += g_weight * (
                    bernstein_deriv_weight(s, n_steps, x, dt)
                )
            value = -bernstein_deriv_weight(0, n_steps, x, dt) * measurements.initial[q_lhs]
            for coeff, string in equation.terms:
                q_rhs = index[string]
                if step >= 1:
                    matrix[row, layout.extraction_index(q_rhs, step)] -= g_weight * coeff
                else:
                    value += coeff * measurements.initial[q_rhs]
            target[row] = g_weight * value

    return MitigationProblem(matrix, target, layout)


def solve(problem: MitigationProblem) -> MitigationResult:
    """Minimum-norm least-squares solution and the extracted estimates."""
    if not (np.isfinite(problem.matrix).all() and np.isfinite(problem.target).all()):
        raise ValueError("problem contains non-finite entries")
    coefficients = problem.solution_operator @ problem.target
    extrapolations = coefficients[problem.layout.extraction_indices()]
    return MitigationResult(coefficients, extrapolations)


def zne_baseline(measurements: MeasurementSet, degree: int) -> np.ndarray:
    """Independent per-(q, s) polynomial extrapolations to eps = 0.

    This is the reference the joint problem decouples to when no constraint
    rows are present. Requires at least ``degree + 1`` distinct error levels
    in every step column.
    """
    if int(degree) != degree or degree < 0:
        raise ValueError(f"degree must be a non-negative integer, got {degree}")
    degree = int(degree)
    out = np.empty((measurements.n_correlators, measurements.n_steps))
    for s in range(1, measurements.n_steps + 1):
        eps = measurements.eps[s - 1]
        distinct = 1 + int(np.sum(np.diff(np.sort(eps)) > 1e-12))
        if distinct < degree + 1:
            raise IllPosedFitError(
                f"step {s}: {distinct} distinct error levels cannot support degree {degree}"
            )
        vander = np.vander(eps, degree + 1)
        stacked = measurements.values[:, s - 1, :].T  # (levels, correlators)
        coeffs, *_ = np.linalg.lstsq(vander, stacked, rcond=RCOND)
        out[:, s - 1] = coeffs[-1]
    return out


def measurement_variances(measurements: MeasurementSet, layout: ProblemLayout) -> np.ndarray:
    """Shot-noise variance of every target row; constraint rows carry zero.

    Uses the binomial estimate ``(1 - e^2) / shots`` per measured point and
    all zeros in infinite-shot mode.
    """
    variances = np.zeros(layout.n_rows)
    if measurements.shots is None:
        return variances
    for q in range(layout.n_correlators):
        for s in range(1, layout.n_steps + 1):
            row = layout.zne_row(q, s, 0)
            e = measurements.values[q, s - 1]
            variances[row : row + layout.n_levels] = (1.0 - e**2) / measurements.shots
    return variances


def _checked_variances(problem: MitigationProblem, row_variances: Sequence[float]) -> np.ndarray:
    variances = np.asarray(row_variances, dtype=float)
    if variances.shape != (problem.layout.n_rows,):
        raise ValueError(
            f"need one variance per row ({problem.layout.n_rows}), got {variances.shape}"
        )
    if np.any(variances < 0.0) or not np.isfinite(variances).all():
        raise ValueError("row variances must be finite and non-negative")
    return variances


def propagate_std(problem: MitigationProblem, row_variances: Sequence[float]) -> np.ndarray:
    """Standard deviation of each extracted estimate under row noise."""
    variances = _checked_variances(problem, row_variances)
    operator = problem.solution_operator
    rows = operator[problem.layout.extraction_indices().ravel()]
    out = (rows**2) @ variances
    return np.sqrt(out).reshape(problem.layout.n_correlators, problem.layout.n_steps)


def extrapolation_covariance(
    problem: MitigationProblem, row_variances: Sequence[float]
) -> np.ndarray:
    """Full covariance of the extracted estimates, flattened (q-major)."""
    variances = _checked_variances(problem, row_variances)
    operator = problem.solution_operator
    rows = operator[problem.layout.extraction_indices().ravel()]
    return (rows * variances) @ rows.T


def error_norm(
    estimates: Sequence[float],
    references: Sequence[float],
    dt: float,
    covariance: np.ndarray | Sequence[float] | None = None,
) -> tuple[float, float]:
    """Time-integrated deviation ``L = sqrt(dt * sum_s (est_s - ref_s)^2)``.

    When a covariance (full matrix or per-point variances) of the estimate
    series is given, the uncertainty of L is propagated to leading order.
    """
    estimates = np.asarray(estimates, dtype=float)
    references = np.asarray(references, dtype=float)
    if estimates.ndim != 1 or estimates.shape != references.shape:
        raise ValueError("estimates and references must be 1-D arrays of equal length")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    diffs = estimates - references
    norm = math.sqrt(dt * float(diffs @ diffs))
    if covariance is None:
        return norm, 0.0
    cov = np.asarray(covariance, dtype=float)
    if cov.ndim == 1:
        if cov.shape != estimates.shape:
            raise ValueError("variance vector must match the series length")
        cov = np.diag(cov)
    if cov.shape != (estimates.size, estimates.size):
        raise ValueError("covariance must be square and match the series length")
    if norm == 0.0:
        return 0.0, 0.0
    grad = dt * diffs / norm
    variance = float(grad @ cov @ grad)
    return norm, math.sqrt(max(variance, 0.0))


def observable_series(
    observable: ObservableCombination,
    correlators: Sequence[PauliString],
    initial: Sequence[float],
    extrapolations: np.ndarray,
) -> np.ndarray:
    """Mitigated time series of an affine observable, exact value at t=0."""
    index = {string: i for i, string in enumerate(correlators)}
    missing = [s.token() for s in observable.strings if s not in index]
    if missing:
        raise ValueError(f"observable strings not measured: {missing}")
    initial = np.asarray(initial, dtype=float)
    n_steps = extrapolations.shape[1]
    series = np.full(n_steps + 1, observable.constant_offset)
    for weight, string in observable.terms:
        q = index[string]
        series[0] += weight * initial[q]
        series[1:] += weight * extrapolations[q]
    return series


def observable_covariance(
    observable: ObservableCombination,
    correlators: Sequence[PauliString],
    extrap_cov: np.ndarray,
    n_steps: int,
) -> np.ndarray:
    """Covariance of the observable series; the exact t=0 point is noiseless."""
    index = {string: i for i, string in enumerate(correlators)}
    weights = np.zeros((n_steps + 1, len(correlators) * n_steps))
    for weight, string in observable.terms:
        if string not in index:
            raise ValueError(f"observable string {string.token()!r} not measured")
        q = index[string]
        for s in range(1, n_steps + 1):
            weights[s, q * n_steps + (s - 1)] = weight
    return weights @ extrap_cov @ weights.T


@dataclass
class MitigationOutput:
    """Problem, solution with propagated std, and the estimate covariance."""

    problem: MitigationProblem
    result: MitigationResult
    covariance: np.ndarray


def run_mitigation(
    measurements: MeasurementSet,
    subset: HierarchySubset | None,
    degree: int,
    dt: float,
    g_weight: float = 1.0,
) -> MitigationOutput:
    """Assemble, solve and propagate uncertainties in one call."""
    problem = assemble(measurements, subset, degree, dt, g_weight)
    result = solve(problem)
    variances = measurement_variances(measurements, problem.layout)
    std = propagate_std(problem, variances)
    covariance = extrapolation_covariance(problem, variances)
    return MitigationOutput(problem, replace(result, std=std), covariance)
