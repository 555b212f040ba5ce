"""Pure states, post-selections, density matrices and Haar sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidStateError,
    SingularPostSelectionError,
)
from .linalg import GeneratorBasis, inner, make_generator_basis, outer

NORM_ATOL = 1e-12
PIVOT_THRESHOLD = 1e-9


def _as_amplitudes(amps) -> np.ndarray:
    a = np.array(amps, dtype=complex)
    if a.ndim != 1:
        raise InvalidStateError(f"amplitudes must be one-dimensional, got shape {a.shape}")
    if a.size < 2:
        raise InvalidDimensionError(f"state dimension must be >= 2, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise InvalidStateError("amplitudes must be finite")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SimplexWeights:
    """A probability vector, used for the post-selection magnitudes |b_i|^2."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise InvalidDimensionError(f"weights need shape (N,), N >= 2; got {p.shape}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > NORM_ATOL:
            raise InvalidStateError(f"weights must be nonnegative and sum to 1, got {p}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def uniform(cls, n: int) -> SimplexWeights:
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def normalized(cls, p) -> SimplexWeights:
        p = np.asarray(p, dtype=float)
        return cls(p / p.sum())

    @property
    def dim(self) -> int:
        return self.p.size

    def is_interior(self) -> bool:
        return bool(np.all(self.p > 0))


@dataclass(frozen=True)
class PureState:
    """Normalized amplitudes (alpha_1, ..., alpha_N) in the measured observable's eigenbasis."""

    amps: np.ndarray

    def __post_init__(self):
        a = _as_amplitudes(self.amps)
        norm = np.sum(np.abs(a) ** 2)
        if abs(norm - 1.0) > NORM_ATOL:
            raise InvalidStateError(f"state not normalized: sum |a|^2 = {norm!r}")
        object.__setattr__(self, "amps", a)

    @classmethod
    def from_unnormalized(cls, amps) -> PureState:
        a = np.asarray(amps, dtype=complex)
        norm = np.linalg.norm(a)
        if norm == 0:
            raise InvalidStateError("zero vector is not a state")
        return cls(a / norm)

    @property
    def dim(self) -> int:
        return self.amps.size

    def __len__(self) -> int:
        return self.amps.size


@dataclass(frozen=True)
class PostSelection:
    """Post-selected state |b> = sum_i amps_i |i>.

    The weak-value formulas use the overlaps <b|i> = conj(amps_i); they are
    exposed as :attr:`overlaps`. Every component must be nonzero because the
    weak-value chart divides by it.
    """

    amps: np.ndarray

    def __post_init__(self):
        a = _as_amplitudes(self.amps)
        norm = np.sum(np.abs(a) ** 2)
        if abs(norm - 1.0) > NORM_ATOL:
            raise InvalidStateError(f"post-selection not normalized: sum |b|^2 = {norm!r}")
        if np.any(np.abs(a) == 0):
            idx = int(np.flatnonzero(np.abs(a) == 0)[0])
            raise SingularPostSelectionError(f"post-selection component {idx} vanishes")
        object.__setattr__(self, "amps", a)

    @classmethod
    def from_unnormalized(cls, amps) -> PostSelection:
        a = np.asarray(amps, dtype=complex)
        return cls(a / np.linalg.norm(a))

    @classmethod
    def from_weights(cls, weights, phases=None) -> PostSelection:
        p = weights.p if isinstance(weights, SimplexWeights) else np.asarray(weights, float)
        phases = np.zeros(p.size) if phases is None else np.asarray(phases, float)
        amps = np.sqrt(p) * np.exp(1j * phases)
        return cls(amps / np.linalg.norm(amps))

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def overlaps(self) -> np.ndarray:
        """<b|i> for each basis vector |i>."""
        return self.amps.conj()

    @cached_property
    def weights(self) -> SimplexWeights:
        return SimplexWeights.normalized(np.abs(self.amps) ** 2)


@dataclass(frozen=True)
class DensityMatrix:
    mat: np.ndarray
    basis: GeneratorBasis = field(repr=False)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @cached_property
    def bloch(self) -> np.ndarray:
        """Coordinates <T_i> = Tr(rho L_i / 2)."""
        return self.basis.expectations(self.mat)

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))


@dataclass(frozen=True)
class RngSeed:
    """Seed plus stream id; equal pairs give identical sample sequences."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed & 0xFFFFFFFFFFFFFFFF,
                                    spawn_key=(self.stream & 0xFFFFFFFFFFFFFFFF,))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, k: int) -> RngSeed:
        """Independent stream for worker or chunk ``k``."""
        return RngSeed(self.seed, (self.stream << 20) + k + 1)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    return np.random.default_rng(rng)


def density_from_state(psi: PureState, basis: GeneratorBasis | None = None) -> DensityMatrix:
    if basis is None:
        basis = make_generator_basis(psi.dim)
    elif basis.dim != psi.dim:
        raise DimensionMismatchError(f"basis is for N={basis.dim}, state has N={psi.dim}")
    return DensityMatrix(outer(psi.amps, psi.amps), basis)


def fourier_mub(n: int, k: int = 0) -> PostSelection:
    """k-th vector of the discrete Fourier basis, unbiased to the computational basis."""
    if n < 2:
        raise InvalidDimensionError(f"N must be >= 2, got {n}")
    if not 0 <= k < n:
        raise ValueError(f"k must lie in 0..{n - 1}, got {k}")
    j = np.arange(n)
    return PostSelection(np.exp(2j * np.pi * j * k / n) / np.sqrt(n))


def is_unbiased(b: PostSelection, tol: float = 1e-12) -> bool:
    p = np.abs(np.asarray(b.amps if isinstance(b, PostSelection) else b)) ** 2
    return bool(np.max(np.abs(p - 1.0 / p.size)) <= tol)


def sample_haar_amplitudes(n: int, size: int, rng) -> np.ndarray:
    """``size`` Haar-random unit vectors in C^n as rows of an array."""
    if n < 2:
        raise InvalidDimensionError(f"N must be >= 2, got {n}")
    gen = as_generator(rng)
    z = gen.standard_normal((size, n)) + 1j * gen.standard_normal((size, n))
    norms = np.linalg.norm(z, axis=1)
    bad = norms == 0
    while np.any(bad):
        z[bad] = gen.standard_normal((bad.sum(), n)) + 1j * gen.standard_normal((bad.sum(), n))
        norms = np.linalg.norm(z, axis=1)
        bad = norms == 0
    return z / norms[:, None]


def sample_haar_state(n: int, rng) -> PureState:
    return PureState.from_unnormalized(sample_haar_amplitudes(n, 1, rng)[0])


def phase_fix(psi: PureState) -> PureState:
    """Remove the global phase: the first amplitude above 1e-9 in modulus becomes real positive."""
    a = psi.amps
    big = np.flatnonzero(np.abs(a) > PIVOT_THRESHOLD)
    if big.size == 0:
        raise InvalidStateError("no amplitude above pivot threshold")
    pivot = a[big[0]]
    fixed = a * (abs(pivot) / pivot)
    fixed[big[0]] = abs(pivot)
    return PureState.from_unnormalized(fixed)


def state_distance(psi1: PureState, psi2: PureState) -> float:
    """sqrt(1 - |<psi1|psi2>|^2); zero iff the states agree up to a global phase."""
    if psi1.dim != psi2.dim:
        raise DimensionMismatchError(f"dimensions differ: {psi1.dim} vs {psi2.dim}")
    overlap = abs(inner(psi1.amps, psi2.amps)) ** 2
    # 1 - |<.|.>|^2 loses precision near zero; the norm of the difference of
    # phase-aligned vectors does not.
    if overlap > 0.5:
        ov = inner(psi1.amps, psi2.amps)
        aligned = psi2.amps * (abs(ov) / ov)
        d = np.linalg.norm(psi1.amps - aligned)
        # |a - b|^2 = 2 - 2|<a|b>|  ->  1 - |<a|b>|^2 = (1 - c)(1 + c), c = 1 - d^2/2
        c = 1.0 - d * d / 2.0
        return float(np.sqrt(max((d * d / 2.0) * (1.0 + c), 0.0)))
    return float(np.sqrt(max(1.0 - overlap, 0.0)))
