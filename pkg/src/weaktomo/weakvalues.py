"""Weak values of the eigenprojectors, their inversion, and a noisy pointer simulator.

Convention: for a post-selection with components b_i = <i|b>, the weak value
of the projector |i><i| is

    w_i = <b|i><i|psi> / <b|psi> = conj(b_i) alpha_i / sum_j conj(b_j) alpha_j,

so sum_i w_i = 1 and alpha_i is proportional to w_i / conj(b_i). The last
component w_N is the one eliminated by the sum rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    DimensionMismatchError,
    InconsistentWeakValuesError,
    InvalidStateError,
    SingularPostSelectionError,
)
from .linalg import ATOL
from .states import PostSelection, PureState, as_generator, phase_fix

SINGULAR_OVERLAP = 1e-12
SUM_RULE_ATOL = 1e-6


@dataclass(frozen=True)
class WeakValueVector:
    """N complex weak values summing to one.

    The chart coordinates are the first N - 1 entries (:attr:`free`).
    """

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=complex)
        if w.ndim != 1 or w.size < 2:
            raise InconsistentWeakValuesError(f"weak values need shape (N,), N >= 2; got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InconsistentWeakValuesError("weak values must be finite")
        total = w.sum()
        if abs(total - 1.0) > SUM_RULE_ATOL:
            raise InconsistentWeakValuesError(f"weak values sum to {total}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_free(cls, free) -> WeakValueVector:
        free = np.asarray(free, dtype=complex)
        return cls(np.append(free, 1.0 - free.sum()))

    @property
    def dim(self) -> int:
        return self.w.size

    @property
    def free(self) -> np.ndarray:
        return self.w[:-1]

    def __len__(self) -> int:
        return self.w.size


@dataclass(frozen=True)
class PointerModel:
    """Gaussian pointer of width ``delta`` averaged over ``ensemble`` shots per quadrature."""

    delta: float
    ensemble: int = 1

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"pointer width must be positive, got {self.delta}")
        if int(self.ensemble) != self.ensemble or self.ensemble < 1:
            raise ValueError(f"ensemble size must be a positive integer, got {self.ensemble}")

    @property
    def delta_s(self) -> float:
        return self.delta / np.sqrt(self.ensemble)


@dataclass(frozen=True)
class WeakMeasurement:
    """Noisy weak values and the standard error of each quadrature of each component."""

    values: WeakValueVector
    stderr: np.ndarray


@dataclass(frozen=True)
class SingleProjectorData:
    """Weak values W_j of |phi><phi| post-selected on each member of an orthonormal basis.

    ``basis`` holds the basis vectors |b_j> as rows.
    """

    phi: PureState
    basis: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        basis = np.array(self.basis, dtype=complex)
        n = self.phi.dim
        if basis.shape != (n, n):
            raise DimensionMismatchError(f"basis must have shape ({n}, {n}), got {basis.shape}")
        if np.max(np.abs(basis.conj() @ basis.T - np.eye(n))) > ATOL:
            raise InvalidStateError("basis is not orthonormal")
        W = np.array(self.W, dtype=complex)
        if W.shape != (n,):
            raise DimensionMismatchError(f"need {n} weak values, got shape {W.shape}")
        basis.setflags(write=False)
        W.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "W", W)


def _overlap_batch(amps: np.ndarray, b: PostSelection) -> np.ndarray:
    return amps @ b.overlaps


def weak_values_array(amps: np.ndarray, b: PostSelection) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized weak values for states stored as rows of ``amps``.

    Returns ``(w, overlap)`` with ``overlap = <b|psi>``; rows with vanishing
    overlap come back as ``nan`` and the caller decides what to do with them.
    """
    amps = np.asarray(amps, dtype=complex)
    numer = amps * b.overlaps
    overlap = numer.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = numer / overlap[..., None]
    w[np.abs(overlap) <= SINGULAR_OVERLAP] = np.nan
    return w, overlap


def weak_values(psi: PureState, b: PostSelection) -> WeakValueVector:
    if psi.dim != b.dim:
        raise DimensionMismatchError(f"state has N={psi.dim}, post-selection N={b.dim}")
    numer = b.overlaps * psi.amps
    overlap = numer.sum()
    if abs(overlap) <= SINGULAR_OVERLAP:
        raise SingularPostSelectionError(f"|<b|psi>| = {abs(overlap):.3g} is too small")
    w = numer / overlap
    # restore the sum rule exactly on the eliminated component
    w[-1] = 1.0 - w[:-1].sum()
    return WeakValueVector(w)


def state_from_projective(z) -> PureState:
    """Normalize homogeneous coordinates and remove the global phase."""
    z = np.asarray(z, dtype=complex)
    norm = np.linalg.norm(z)
    if not norm > 0 or not np.isfinite(norm):
        raise DegenerateInputError("homogeneous coordinates vanish")
    return phase_fix(PureState.from_unnormalized(z / norm))


def reconstruct_state(w: WeakValueVector, b: PostSelection) -> PureState:
    """Invert :func:`weak_values`: alpha_i is proportional to w_i / <b|i>."""
    if not isinstance(w, WeakValueVector):
        raw = np.asarray(w, dtype=complex)
        if raw.size and not np.any(raw != 0):
            raise DegenerateInputError("all weak values vanish")
        w = WeakValueVector(raw)
    if w.dim != b.dim:
        raise DimensionMismatchError(f"weak values have N={w.dim}, post-selection N={b.dim}")
    return state_from_projective(w.w / b.overlaps)


def _as_basis(basis, n: int) -> np.ndarray:
    basis = np.array([np.asarray(v.amps if hasattr(v, "amps") else v, dtype=complex)
                      for v in basis])
    if basis.shape != (n, n):
        raise DimensionMismatchError(f"basis must have shape ({n}, {n}), got {basis.shape}")
    return basis


def single_projector_weak_values(psi: PureState, phi: PureState, basis) -> SingleProjectorData:
    """W_j = <b_j|phi><phi|psi> / <b_j|psi> for every basis vector |b_j>."""
    if psi.dim != phi.dim:
        raise DimensionMismatchError(f"psi has N={psi.dim}, phi has N={phi.dim}")
    B = _as_basis(basis, psi.dim)
    b_psi = B.conj() @ psi.amps
    b_phi = B.conj() @ phi.amps
    if np.min(np.abs(b_psi)) <= SINGULAR_OVERLAP:
        j = int(np.argmin(np.abs(b_psi)))
        raise SingularPostSelectionError(f"<b_{j}|psi> vanishes")
    if np.min(np.abs(b_phi)) <= SINGULAR_OVERLAP:
        j = int(np.argmin(np.abs(b_phi)))
        raise SingularPostSelectionError(f"<b_{j}|phi> vanishes")
    phi_psi = np.vdot(phi.amps, psi.amps)
    return SingleProjectorData(phi, B, b_phi * phi_psi / b_psi)


def convert_single_projector(d: SingleProjectorData) -> WeakValueVector:
    """w~_j = |<phi|b_j>|^2 / W_j, the weak values of |b_j><b_j| post-selected on |phi>."""
    zero = np.flatnonzero(d.W == 0)
    if zero.size:
        raise ZeroDivisionError(f"W_{int(zero[0])} vanishes")
    b_phi = d.basis.conj() @ d.phi.amps
    w = np.abs(b_phi) ** 2 / d.W
    w[-1] = 1.0 - w[:-1].sum()
    return WeakValueVector(w)


def reconstruct_single_projector(d: SingleProjectorData) -> PureState:
    """Recover |psi> from single-projector data.

    In the basis {|b_j>} the converted values are ordinary weak values with
    post-selection |phi>, whose components there are <b_j|phi>.
    """
    w = convert_single_projector(d)
    b_phi = PostSelection.from_unnormalized(d.basis.conj() @ d.phi.amps)
    coeffs = reconstruct_state(w, b_phi).amps
    return phase_fix(PureState.from_unnormalized(coeffs @ d.basis))


def simulate_weak_measurement(psi: PureState, b: PostSelection, pointer: PointerModel,
                              rng) -> WeakMeasurement:
    """Add independent Gaussian readout noise of width delta_s to Re and Im of the free components.

    The real and imaginary parts are read from separate ensembles of
    ``pointer.ensemble`` shots each. The eliminated component absorbs the sum
    rule, so its error is sqrt(N - 1) times larger.
    """
    exact = weak_values(psi, b)
    gen = as_generator(rng)
    n = exact.dim
    ds = pointer.delta_s
    noise = gen.standard_normal((n - 1, 2)) * ds
    free = exact.free + noise[:, 0] + 1j * noise[:, 1]
    stderr = np.full(n, ds)
    stderr[-1] = ds * np.sqrt(n - 1)
    return WeakMeasurement(WeakValueVector.from_free(free), stderr)
