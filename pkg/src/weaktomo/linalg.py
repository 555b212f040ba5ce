"""Small dense complex linear algebra helpers and SU(N) generators.

Vectors and matrices are plain ``numpy`` complex arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidDimensionError

ATOL = 1e-12


@dataclass(frozen=True)
class GeneratorBasis:
    """Generalized Gell-Mann matrices for SU(N), normalized to Tr(L_i L_j) = 2 delta_ij.

    ``generators`` has shape ``(N**2 - 1, N, N)``. Ordering is symmetric
    off-diagonal pairs (lexicographic in (j, k), j < k), then antisymmetric
    pairs in the same order, then the N - 1 diagonal matrices.
    """

    dim: int
    generators: np.ndarray

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, i):
        return self.generators[i]

    def expectations(self, rho: np.ndarray) -> np.ndarray:
        """Return Tr(rho L_i / 2) for every generator; ``rho`` may carry leading batch axes."""
        # Tr(rho L) = sum_jk rho_jk L_kj
        return 0.5 * np.einsum("...jk,ikj->...i", rho, self.generators).real

    def synthesize(self, coords: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`expectations` for unit-trace Hermitian matrices."""
        coords = np.asarray(coords, dtype=float)
        eye = np.eye(self.dim) / self.dim
        return eye + np.einsum("...i,ijk->...jk", coords, self.generators)


def make_generator_basis(n: int) -> GeneratorBasis:
    if int(n) != n or n < 2:
        raise InvalidDimensionError(f"generator basis needs N >= 2, got {n!r}")
    n = int(n)
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    mats = []
    for j, k in pairs:
        m = np.zeros((n, n), dtype=complex)
        m[j, k] = m[k, j] = 1.0
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((n, n), dtype=complex)
        m[j, k] = -1j
        m[k, j] = 1j
        mats.append(m)
    for l in range(1, n):
        diag = np.zeros(n)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(np.sqrt(2.0 / (l * (l + 1))) * diag).astype(complex))
    gens = np.array(mats)
    gens.setflags(write=False)
    return GeneratorBasis(n, gens)


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatchError(f"dimensions differ: {a.shape[-1]} vs {b.shape[-1]}")
    return a, b


def inner(a, b) -> complex:
    """<a|b>, conjugate-linear in ``a``. Broadcasts over leading axes."""
    a, b = _check_pair(a, b)
    out = np.sum(a.conj() * b, axis=-1)
    return complex(out) if out.ndim == 0 else out


def outer(a, b) -> np.ndarray:
    """|a><b|, i.e. M_jk = a_j conj(b_k)."""
    a, b = _check_pair(a, b)
    return a[..., :, None] * b[..., None, :].conj()


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - np.swapaxes(m, -1, -2).conj()), initial=0.0) <= atol)
