"""Generalized Gell-Mann matrices, the traceless Hermitian generators of SU(n)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GGMBasis", "ggm_basis", "transition"]


def transition(n: int, a: int, b: int) -> np.ndarray:
    """|a><b| in dimension n (0-based)."""
    T = np.zeros((n, n), dtype=complex)
    T[a, b] = 1.0
    return T


@dataclass(frozen=True)
class GGMBasis:
    """The n^2 - 1 generators, ordered symmetric, antisymmetric, diagonal.

    ``labels[k]`` is ``("s", a, b)``, ``("a", a, b)`` with a < b, or
    ``("d", m, m)`` for the m-th diagonal generator (m = 1 .. n-1).
    Level indices are 0-based.
    """

    n: int
    matrices: tuple
    labels: tuple

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, k):
        return self.matrices[k]

    def __iter__(self):
        return iter(self.matrices)

    def index(self, kind: str, a: int, b: int | None = None) -> int:
        key = (kind, a, a if b is None else b)
        try:
            return self.labels.index(key)
        except ValueError:
            raise KeyError(f"no generator {key} for n = {self.n}") from None

    def stack(self) -> np.ndarray:
        return np.array(self.matrices)

    def coefficients(self, A) -> np.ndarray:
        """c_k = tr(A Lambda_k) / 2; exact for traceless Hermitian A."""
        A = np.asarray(A)
        return np.einsum("ij,kji->k", A, self.stack()).real / 2

    def compose(self, coeffs) -> np.ndarray:
        """sum_k c_k Lambda_k (complex weights allowed)."""
        return np.tensordot(np.asarray(coeffs), self.stack(), axes=(0, 0))


def ggm_basis(n: int) -> GGMBasis:
    """Generalized Gell-Mann basis of SU(n).

    For n = 2 this is (sigma_x, sigma_y, sigma_z), for n = 3 the usual
    eight Gell-Mann matrices (up to ordering).
    """
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    n = int(n)
    mats, labels = [], []
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    for a, b in pairs:
        mats.append(transition(n, a, b) + transition(n, b, a))
        labels.append(("s", a, b))
    for a, b in pairs:
        mats.append(-1j * transition(n, a, b) + 1j * transition(n, b, a))
        labels.append(("a", a, b))
    for m in range(1, n):
        d = np.zeros(n)
        d[:m] = 1.0
        d[m] = -m
        mats.append(np.diag(np.sqrt(2.0 / (m * (m + 1))) * d).astype(complex))
        labels.append(("d", m, m))
    for M in mats:
        M.setflags(write=False)
    return GGMBasis(n, tuple(mats), tuple(labels))
