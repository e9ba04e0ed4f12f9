"""Collective phonon modes of a trapped atom chain with nearest-neighbour
mechanical coupling.

The chain Hamiltonian is

    H_M = sum_i p_i^2 / 2m + (m w_t^2 / 2 + g_m / L_c^2) x_i^2 - (g_m / L_c^2) x_i x_{i+1}

with hbar = 1.  Its normal modes are given by a type-I discrete sine
transform; the eigenfrequencies are returned in ascending order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MechanicalChain",
    "PhononSpectrum",
    "InstabilityError",
    "sine_transform",
    "stiffness_matrix",
    "phonon_spectrum",
    "closed_form_frequencies",
]


class InstabilityError(ValueError):
    """Raised when a mechanical mode has a non-positive squared frequency."""


@dataclass(frozen=True)
class MechanicalChain:
    """Open chain of ``n`` atoms of mass ``mass`` in traps of frequency ``w_t``.

    ``g_m`` is the mechanical coupling f^2 * Delta_vdW (rad/s) and ``l_c``
    the localization length (m).  Any consistent unit system works; only the
    combination ``g_m / (mass * l_c**2)`` enters the spectrum.
    """

    n: int
    mass: float
    w_t: float
    g_m: float
    l_c: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"chain needs at least one atom, got n={self.n}")
        for name in ("mass", "w_t", "l_c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not np.isfinite(self.g_m):
            raise ValueError("g_m must be finite")

    @property
    def coupling(self) -> float:
        """Spring constant of the nearest-neighbour bond, g_m / L_c^2."""
        return self.g_m / self.l_c**2

    @classmethod
    def from_frequencies(cls, n: int, w_t: float, bond: float) -> "MechanicalChain":
        """Chain parametrized directly by ``w_t`` and ``bond = 2 g_m / (m L_c^2)``.

        Convenient for dimensionless studies; uses unit mass and unit L_c.
        """
        return cls(n=n, mass=1.0, w_t=w_t, g_m=bond / 2.0, l_c=1.0)


@dataclass(frozen=True)
class PhononSpectrum:
    """Mode frequencies ``eps`` (ascending, rad/s) and mode matrix ``B``.

    ``B[i, l]`` is the amplitude of mode ``l`` on site ``i``; columns are
    ordered to match ``eps``.
    """

    eps: np.ndarray
    B: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.eps)

    @property
    def bandwidth(self) -> float:
        return float(self.eps[-1] - self.eps[0])

    @property
    def min_spacing(self) -> float:
        if self.n < 2:
            return np.inf
        return float(np.min(np.diff(self.eps)))


def sine_transform(n: int) -> np.ndarray:
    """Orthonormal DST-I matrix, ``B[j, l] = sqrt(2/(n+1)) sin(pi j l / (n+1))``.

    Indices ``j, l`` run from 1 to ``n``.  The matrix is symmetric and is
    its own inverse.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"sine transform needs n >= 1, got {n}")
    k = np.arange(1, n + 1)
    return np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(k, k) / (n + 1))


def stiffness_matrix(chain: MechanicalChain) -> np.ndarray:
    """Tridiagonal stiffness matrix M with omega^2 = eig(M) / m."""
    c = chain.coupling
    diag = chain.mass * chain.w_t**2 + 2.0 * c
    M = np.diag(np.full(chain.n, diag))
    off = np.full(chain.n - 1, -c)
    M += np.diag(off, 1) + np.diag(off, -1)
    return M


def closed_form_frequencies(chain: MechanicalChain) -> np.ndarray:
    """Squared-root closed form for the mode frequencies, in site-mode order l=1..n.

    Uses the (1 - cos) branch that comes out of diagonalizing the stiffness
    matrix with the sine transform; the (1 + cos) form is the same set under
    l -> n + 1 - l.
    """
    n = chain.n
    l = np.arange(1, n + 1)
    w2 = chain.w_t**2 + 2.0 * chain.coupling / chain.mass * (1.0 - np.cos(np.pi * l / (n + 1)))
    bad = np.flatnonzero(w2 <= 0)
    if bad.size:
        raise InstabilityError(
            f"mode l={int(l[bad[0]])} has omega^2={w2[bad[0]]:.3e} <= 0; chain is unstable"
        )
    return np.sqrt(w2)


def phonon_spectrum(chain: MechanicalChain) -> PhononSpectrum:
    """Closed-form phonon spectrum with the matching mode matrix.

    For a positive bond the (1 - cos) branch is already ascending in l and
    B is the plain sine transform.  A negative bond reverses the order, in
    which case the columns of B are permuted along with the frequencies.
    """
    eps = closed_form_frequencies(chain)
    B = sine_transform(chain.n)
    order = np.argsort(eps, kind="stable")
    return PhononSpectrum(eps=eps[order], B=B[:, order])
