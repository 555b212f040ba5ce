"""Optimization of the post-selection magnitudes over the probability simplex."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInitError, UnsupportedError
from .states import PureState, SimplexWeights
from .stateavg import avg_error_volume_closed, avg_information

MAX_ITER = 100_000
INITIAL_STEP = 0.1


@dataclass(frozen=True)
class OptimizationResult:
    weights: SimplexWeights
    objective: float
    iterations: int
    converged: bool
    gradient_norm: float
    trace: list[float] = field(default_factory=list, repr=False)


def _check_init(n: int, init) -> np.ndarray:
    if init is None:
        return np.full(n, 1.0 / n)
    p = init.p if isinstance(init, SimplexWeights) else np.asarray(init, dtype=float)
    if p.size != n:
        raise InvalidInitError(f"init has {p.size} weights, expected {n}")
    if np.any(p <= 0):
        raise InvalidInitError("initial weights must be strictly inside the simplex")
    return p / p.sum()


def _log_gain(p: np.ndarray, q: np.ndarray) -> float:
    """Change of sum_i ln(p_i / sum p) from p to q, accurate when q is within a few ulp of p.

    Normalizing by the sum removes the rounding error in sum q = 1, which
    near the optimum is larger than the true second-order gain.
    """
    d = q - p  # exact for nearby entries
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log1p(d / p))) - p.size * math.log1p(math.fsum(d) / math.fsum(p))


def _mirror_descent(p: np.ndarray, tol: float):
    """Exponentiated-gradient ascent of sum_i ln p_i on the simplex.

    Both optimization targets depend on the weights only through
    sum_i ln p_i, so a step is accepted when it does not lower that sum; the
    comparison uses :func:`_log_gain` because near the optimum the change in
    the objective is far below its rounding error. Rejected steps halve the
    step size. Returns the final weights, iteration count, convergence flag,
    projected-gradient norm, and the accepted log-gains.
    """
    eta = INITIAL_STEP
    gains = []
    gnorm = math.inf
    for it in range(MAX_ITER):
        g = 1.0 / p
        gnorm = float(np.max(np.abs(g - g.mean())))
        if gnorm <= tol:
            return p, it, True, gnorm, gains
        while True:
            logits = np.log(p) + eta * g
            logits -= logits.max()
            q = np.exp(logits)
            q /= q.sum()
            gain = _log_gain(p, q) if np.all(q > 0) else -math.inf
            if gain >= 0:
                break
            eta /= 2
            if eta < 1e-300:
                return p, it, False, gnorm, gains
        if np.array_equal(q, p):
            return p, it, False, gnorm, gains
        p = q
        gains.append(gain)
        eta = min(2 * eta, INITIAL_STEP)
    return p, MAX_ITER, False, gnorm, gains


def minimize_avg_error(n: int, delta_s: float, init=None, tol: float = 1e-10) -> OptimizationResult:
    """Minimize the state-averaged error volume C / prod p_i over the simplex.

    Convergence is declared when the projected gradient of ln(objective),
    -1/p_i + mean(1/p), is below ``tol`` in max norm. ``trace`` holds the
    objective after every accepted step.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    p0 = _check_init(n, init)
    f0 = avg_error_volume_closed(n, p0, delta_s)
    p, it, ok, gn, gains = _mirror_descent(p0, tol)
    trace = [f0] + list(f0 * np.exp(-np.cumsum(gains)))
    w = SimplexWeights.normalized(p)
    return OptimizationResult(w, avg_error_volume_closed(n, w, delta_s), it, ok, gn, trace)


def maximize_avg_information(n: int, delta_s: float, init=None, tol: float = 1e-10) -> OptimizationResult:
    """Maximize the state-averaged information, whose weight dependence is sum ln p_i."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    p0 = _check_init(n, init)
    f0 = avg_information(n, p0, delta_s)
    p, it, ok, gn, gains = _mirror_descent(p0, tol)
    trace = [f0] + list(f0 + np.cumsum(gains))
    w = SimplexWeights.normalized(p)
    return OptimizationResult(w, avg_information(n, w, delta_s), it, ok, gn, trace)


# Fixed-state problem (not usable for tomography: it needs the unknown state) ---------

def fixed_state_error_volume(p, psi: PureState, delta_s: float) -> float:
    """16 delta_s^2 |<b|psi>|^4 / (p_1 p_2) for N = 2, with the phases of b matched to psi."""
    if psi.dim != 2:
        raise UnsupportedError("fixed-state error volume is implemented for N = 2 only")
    p = np.asarray(p, dtype=float)
    overlap = float(np.sum(np.sqrt(p) * np.abs(psi.amps)))
    return 16 * delta_s**2 * overlap**4 / (p[0] * p[1])


def fixed_state_stationary_qubit(psi: PureState) -> SimplexWeights:
    """Stationary post-selection weights |b_+|^2 = |psi_-|^2, |b_-|^2 = |psi_+|^2."""
    if psi.dim != 2:
        raise UnsupportedError(f"only N = 2 is supported, got N = {psi.dim}")
    a = np.abs(psi.amps) ** 2
    return SimplexWeights.normalized(a[::-1])


def fixed_state_curvature(psi: PureState, delta_s: float = 1.0, h: float = 1e-4) -> tuple[float, float]:
    """First and second derivative of the fixed-state error volume along the simplex.

    Evaluated at the stationary weights by fourth-order central differences
    in p_1; a positive second derivative marks a local minimum.
    """
    p1 = fixed_state_stationary_qubit(psi).p[0]
    if not 2 * h < p1 < 1 - 2 * h:
        raise UnsupportedError("stationary point lies on the simplex boundary")
    f = lambda t: fixed_state_error_volume([t, 1 - t], psi, delta_s)
    fm2, fm1, f0, fp1, fp2 = (f(p1 + k * h) for k in (-2, -1, 0, 1, 2))
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h**2)
    return d1, d2


# Lattice sweep -----------------------------------------------------------------

def simplex_lattice(n: int, grid: int) -> np.ndarray:
    """Interior points k / (grid - 1) with integer k_i >= 1 summing to grid - 1."""
    if grid < 2:
        raise ValueError("grid must be >= 2")
    total = grid - 1
    if total < n:
        raise ValueError(f"grid={grid} has no interior points for N={n}")
    rows = []
    # stars and bars over the N - 1 cut positions
    for cuts in itertools.combinations(range(1, total), n - 1):
        edges = (0,) + cuts + (total,)
        rows.append(np.diff(edges))
    return np.array(rows, dtype=float) / total


@dataclass(frozen=True)
class SweepRow:
    weights: np.ndarray
    avg_error_volume: float
    avg_information: float


def sweep_simplex(n: int, delta_s: float, grid: int) -> list[SweepRow]:
    rows = []
    for p in simplex_lattice(n, grid):
        rows.append(SweepRow(p, avg_error_volume_closed(n, p, delta_s), avg_information(n, p, delta_s)))
    return rows


def nearest_to_uniform(points: np.ndarray) -> np.ndarray:
    """Indices of the lattice points closest to the barycentre."""
    d = np.linalg.norm(points - 1.0 / points.shape[1], axis=1)
    return np.flatnonzero(np.isclose(d, d.min(), rtol=0, atol=1e-12))
