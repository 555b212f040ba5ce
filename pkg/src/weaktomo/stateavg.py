"""State-space volumes, state-averaged error volumes and information.

Closed forms come from the radial reduction of the weak-value integrals:
eliminating w_N, S = x^T M x + y^T M y + c_N - 2 c_N 1^T x with
M_ij = c_i delta_ij + c_N, c_i = 1 / |b_i|^2, and completing the square turns
every integral of S^(-m) into a one-dimensional radial integral. The Monte
Carlo routines average over Haar-random states instead, which is the
unitarily invariant measure and never touches the chart.
"""

from __future__ import annotations

import math
from functools import lru_cache
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

from .errors import DegenerateInputError, QuadratureError, SingularPostSelectionError, UnsupportedError
from .geometry import GeometryPoint, error_volume, volume_element, weighted_norm
from .states import PostSelection, RngSeed, SimplexWeights, sample_haar_amplitudes
from .weakvalues import weak_values_array

REJECT_OVERLAP2 = 1e-14
CHUNK = 1 << 16
DEFAULT_WIDTH = 0.7  # importance-density width; ~0.15% stderr at 2e5 samples


def _weights(b) -> np.ndarray:
    if isinstance(b, PostSelection):
        return b.weights.p
    if isinstance(b, SimplexWeights):
        return b.p
    return np.asarray(b, dtype=float)


@dataclass(frozen=True)
class QuadraticReduction:
    M: np.ndarray
    D: np.ndarray
    c: np.ndarray

    @property
    def center(self) -> np.ndarray:
        """Minimizer x0 = c_N M^-1 1 of S over real x (it equals the first N-1 weights)."""
        return self.c[-1] * np.linalg.solve(self.M, self.D)

    def denominator(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """S written as the quadratic form in real chart coordinates."""
        cN = self.c[-1]
        return (np.einsum("...i,ij,...j->...", x, self.M, x)
                + np.einsum("...i,ij,...j->...", y, self.M, y)
                + cN - 2 * cN * x @ self.D)

    def determinant_residual(self) -> float:
        """Relative gap between det M and prod_i |b_i|^-2."""
        target = np.prod(self.c)
        return float(abs(np.linalg.det(self.M) - target) / target)

    def offset_residual(self) -> float:
        """|c_N - c_N^2 1^T M^-1 1 - 1|."""
        cN = self.c[-1]
        return float(abs(cN - cN**2 * self.D @ np.linalg.solve(self.M, self.D) - 1.0))


def build_reduction(b) -> QuadraticReduction:
    p = _weights(b)
    if np.any(p <= 0):
        raise SingularPostSelectionError("all post-selection components must be nonzero")
    c = 1.0 / p
    n = p.size - 1
    M = np.diag(c[:-1]) + c[-1]
    return QuadraticReduction(M, np.ones(n), c)


def solid_angle(p: int) -> float:
    """Area of the unit sphere in R^p."""
    return 2 * math.pi ** (p / 2) / math.gamma(p / 2)


def _radial_quadrature(n: int, m: float, weight=None) -> float:
    # int_0^inf R^(2n-3) (1 + R^2)^(-m) dR  =  1/2 int_0^inf x^(n-2) (1 + x)^(-m) dx
    if m <= n - 1:
        raise UnsupportedError(f"radial integral diverges for M={m}, N={n}")
    g = weight or (lambda x: 1.0)
    val, err, *rest = integrate.quad(lambda x: 0.5 * x ** (n - 2) * g(x) / (1 + x) ** m,
                                     0, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200,
                                     full_output=1)
    if len(rest) > 1 and err > 1e-8:
        raise QuadratureError(f"radial quadrature did not converge: {rest[1]}")
    return val


def radial_integral_closed(n: int, m: int) -> float:
    """Omega_{2N-2} * int_0^inf R^(2N-3) / (R^2 + 1)^M dR.

    Exact for M = N and M = 2N; other M fall back to quadrature.
    """
    if n < 2:
        raise ValueError(f"N must be >= 2, got {n}")
    omega = solid_angle(2 * n - 2)
    if m == n:
        return omega / (2 * (n - 1))
    if m == 2 * n:
        return omega * math.factorial(n - 2) * math.factorial(n) / (2 * math.factorial(2 * n - 1))
    return omega * _radial_quadrature(n, m)


def total_volume_closed(n: int) -> float:
    """V_N = 4^(N-1) pi^(N-1) / ((N-1) Gamma(N-1)), independent of the post-selection."""
    if n < 2:
        raise ValueError(f"N must be >= 2, got {n}")
    return 4.0 ** (n - 1) * math.pi ** (n - 1) / ((n - 1) * math.factorial(n - 2))


def avg_error_coefficient(n: int) -> Fraction:
    """Exact 4^(2N-2) Gamma(N) Gamma(N+1) / Gamma(2N)."""
    return Fraction(4 ** (2 * n - 2) * math.factorial(n - 1) * math.factorial(n),
                    math.factorial(2 * n - 1))


def avg_error_volume_closed(n: int, b, delta_s: float) -> float:
    """State-averaged error volume 4^(2N-2) delta_s^(2N-2) Gamma(N)Gamma(N+1) / (Gamma(2N) prod p_i)."""
    if not delta_s > 0:
        raise ValueError(f"delta_s must be positive, got {delta_s}")
    p = _weights(b)
    if p.size != n:
        raise ValueError(f"weights have N={p.size}, expected {n}")
    return float(avg_error_coefficient(n)) * delta_s ** (2 * n - 2) / np.prod(p)


def total_volume_quadrature(b) -> float:
    """Numerical volume of the state space in the weak-value chart of ``b``.

    N = 2 integrates the volume element directly over the plane; larger N
    integrate the radial profile numerically after the quadratic reduction.
    """
    b = b if isinstance(b, PostSelection) else PostSelection.from_weights(_weights(b))
    n = b.dim
    if n == 2:
        def dens(y, x):
            return volume_element(GeometryPoint.from_free([x + 1j * y], b))
        x0 = b.weights.p[0]
        total = 0.0
        # split at the peak so the adaptive rule sees it
        for xa, xb in ((-np.inf, x0), (x0, np.inf)):
            for ya, yb in ((-np.inf, 0.0), (0.0, np.inf)):
                val, _ = integrate.dblquad(dens, xa, xb, ya, yb, epsabs=1e-11, epsrel=1e-11)
                total += val
        return total
    red = build_reduction(b)
    jac = 1.0 / np.linalg.det(red.M)
    return 4.0 ** (n - 1) * np.prod(red.c) * jac * solid_angle(2 * n - 2) * _radial_quadrature(n, n)


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    stderr: float
    samples: int
    rejected: int = 0


def _as_seed(rng) -> RngSeed | np.random.Generator:
    if isinstance(rng, (RngSeed, np.random.Generator)):
        return rng
    return RngSeed(int(rng))


def _chunk_streams(rng, n_chunks: int):
    rng = _as_seed(rng)
    if isinstance(rng, RngSeed):
        return [rng.substream(k) for k in range(n_chunks)]
    return rng.spawn(n_chunks)


def _haar_chunk(f, b: PostSelection, size: int, stream):
    amps = sample_haar_amplitudes(b.dim, size, stream)
    w, overlap = weak_values_array(amps, b)
    keep = np.abs(overlap) ** 2 >= REJECT_OVERLAP2
    vals = np.asarray(f(GeometryPoint(w[keep], b)), dtype=float)
    vals = np.broadcast_to(vals, (int(keep.sum()),))
    k = vals.size
    mean = float(vals.mean()) if k else 0.0
    m2 = float(np.sum((vals - mean) ** 2)) if k else 0.0
    return k, mean, m2, size - k


def mc_state_average(f, b: PostSelection, n_samples: int, rng, workers: int = 1,
                     chunk: int = CHUNK) -> IntegralEstimate:
    """Average ``f`` over Haar-random pure states, evaluated in the weak-value chart of ``b``.

    ``f`` receives a batched :class:`GeometryPoint` and returns one value per
    row. Samples are drawn in fixed-size chunks, each from its own stream, and
    merged in chunk order, so the result depends on the seed but not on
    ``workers``.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    sizes = [chunk] * (n_samples // chunk)
    if n_samples % chunk:
        sizes.append(n_samples % chunk)
    streams = _chunk_streams(rng, len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _haar_chunk(f, b, *a), zip(sizes, streams)))
    else:
        parts = [_haar_chunk(f, b, s, st) for s, st in zip(sizes, streams)]
    count, mean, m2, rejected = 0, 0.0, 0.0, 0
    for k, mk, m2k, rej in parts:
        rejected += rej
        if k == 0:
            continue
        tot = count + k
        delta = mk - mean
        mean += delta * k / tot
        m2 += m2k + delta**2 * count * k / tot
        count = tot
    if count == 0:
        raise DegenerateInputError("every sample was rejected")
    stderr = math.sqrt(m2 / (count - 1) / count) if count > 1 else 0.0
    return IntegralEstimate(mean, stderr, count, rejected)


def mc_total_volume(b: PostSelection, n_samples: int, rng, workers: int = 1,
                    width: float | None = None) -> IntegralEstimate:
    """Total volume from Haar samples via V = 1 / E[h / sqrt(g)].

    The identity holds for any probability density h on the chart; here h is
    a Gaussian centred on the peak of the volume element with covariance
    ``width**2 * M^-1`` in both the x and y blocks.
    """
    n = b.dim
    red = build_reduction(b)
    x0 = red.center
    width2 = (width if width is not None else DEFAULT_WIDTH) ** 2
    norm = np.linalg.det(red.M) / (2 * math.pi * width2) ** (n - 1)

    def ratio(pt: GeometryPoint):
        f = pt.free
        u, y = f.real - x0, f.imag
        q = np.einsum("...i,ij,...j->...", u, red.M, u) + np.einsum("...i,ij,...j->...", y, red.M, y)
        return norm * np.exp(-q / (2 * width2)) / volume_element(pt)

    est = mc_state_average(ratio, b, n_samples, rng, workers=workers)
    value = 1.0 / est.value
    return IntegralEstimate(value, est.stderr * value**2, est.samples, est.rejected)


# Information -------------------------------------------------------------------

def information(point: GeometryPoint, delta_s: float):
    """-ln of the error volume, expanded term by term."""
    if not delta_s > 0:
        raise ValueError(f"delta_s must be positive, got {delta_s}")
    n = point.dim
    return (-(2 * n - 2) * math.log(2) + np.sum(np.log(point.weights))
            + n * np.log(weighted_norm(point)) - (2 * n - 2) * math.log(2 * delta_s))


@lru_cache(maxsize=None)
def tilde_integral(n: int) -> float:
    """int_0^inf R^(2N-3) ln(1 + R^2) / (1 + R^2)^N dR, by adaptive quadrature."""
    if n < 2:
        raise ValueError(f"N must be >= 2, got {n}")
    val, err, *rest = integrate.quad(lambda x: 0.5 * x ** (n - 2) * np.log1p(x) / (1 + x) ** n,
                                     0, np.inf, epsabs=1e-10, limit=200, full_output=1)
    if len(rest) > 1 or err > 1e-8:
        raise QuadratureError(f"tilde integral quadrature did not converge (err {err:.3g})")
    return val


def avg_information(n: int, b, delta_s: float) -> float:
    """State average of :func:`information`.

    The only state-dependent term is N ln S, whose average is
    N 2^(2N-2) Omega_{2N-2} / V_N times :func:`tilde_integral`.
    """
    if not delta_s > 0:
        raise ValueError(f"delta_s must be positive, got {delta_s}")
    p = _weights(b)
    if p.size != n:
        raise ValueError(f"weights have N={p.size}, expected {n}")
    log_term = n * 2.0 ** (2 * n - 2) * solid_angle(2 * n - 2) / total_volume_closed(n) * tilde_integral(n)
    return (-(2 * n - 2) * math.log(2) - (2 * n - 2) * math.log(2 * delta_s)
            + log_term + float(np.sum(np.log(p))))
