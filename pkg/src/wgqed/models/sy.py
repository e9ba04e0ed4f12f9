"""Random all-to-all SU(n) Heisenberg magnet and its sign-split stroboscopic evolution.

Only couplings of one sign can be produced at a time by the gauge-mediated
exchange, so the random Hamiltonian is split into its positive and negative
bonds and the two halves are alternated in a symmetric (Strang) sequence.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .gauge import sun_heisenberg

__all__ = [
    "SYModel",
    "StrobeStep",
    "sample_sy_couplings",
    "sy_sample",
    "sy_hamiltonian",
    "sy_split",
    "sy_strobe_step",
    "sy_strobe_evolution",
    "sy_exact_propagator",
    "MAX_SY_DIM",
]

MAX_SY_DIM = 4096


def sample_sy_couplings(n_spins: int, scale: float, rng) -> np.ndarray:
    """Symmetric matrix with i.i.d. N(0, scale^2) entries above the diagonal, zero diagonal."""
    rng = np.random.default_rng(rng)
    upper = np.triu(rng.normal(0.0, scale, size=(n_spins, n_spins)), k=1)
    return upper + upper.T


@dataclass(frozen=True)
class SYModel:
    """``n_spins`` SU(n) spins with couplings ``couplings[i, j]`` of spread ``scale``."""

    n_spins: int
    n: int
    couplings: np.ndarray
    scale: float

    def __post_init__(self):
        J = np.asarray(self.couplings, dtype=float)
        if J.shape != (self.n_spins, self.n_spins):
            raise ValueError(f"couplings must be {self.n_spins}x{self.n_spins}")
        if not np.allclose(J, J.T, atol=0) or np.any(np.diag(J) != 0):
            raise ValueError("couplings must be symmetric with zero diagonal")
        J = J.copy()
        J.setflags(write=False)
        object.__setattr__(self, "couplings", J)

    @property
    def dim(self) -> int:
        return self.n**self.n_spins

    def bonds(self) -> np.ndarray:
        iu = np.triu_indices(self.n_spins, k=1)
        return self.couplings[iu]


def sy_sample(n_spins: int, n: int, scale: float, seed=None) -> SYModel:
    """Draw a model; identical ``seed`` gives identical couplings."""
    if scale <= 0:
        raise ValueError("coupling spread must be positive")
    if n < 2 or n_spins < 2:
        raise ValueError("need at least two SU(n) spins with n >= 2")
    return SYModel(n_spins, n, sample_sy_couplings(n_spins, scale, seed), float(scale))


def _check_dim(model: SYModel):
    if model.dim > MAX_SY_DIM:
        raise ValueError(f"logical dimension {model.dim} exceeds {MAX_SY_DIM}")


def sy_hamiltonian(model: SYModel, couplings=None) -> np.ndarray:
    """(1/sqrt(n)) sum_{i<j} J_ij sum_a Lambda_a^(i) Lambda_a^(j), dense."""
    _check_dim(model)
    J = model.couplings if couplings is None else couplings
    return sun_heisenberg(J, model.n) / np.sqrt(model.n)


def sy_split(model: SYModel):
    """(H_plus, H_minus): the positive- and negative-bond parts, H_plus + H_minus = H."""
    J = model.couplings
    return sy_hamiltonian(model, np.where(J > 0, J, 0.0)), sy_hamiltonian(model, np.where(J < 0, J, 0.0))


@dataclass
class StrobeStep:
    """One coarse-grained step: ``segments`` lists (part, duration) in time order."""

    dt: float
    segments: list
    unitary: np.ndarray


def sy_strobe_step(model: SYModel, dt: float, parts=None) -> StrobeStep:
    """H_plus for dt/2, H_minus for dt, H_plus for dt/2.

    The middle segment lasts dt (not 3 dt / 2), which makes the step
    symmetric and its error O(dt^3) against exp(-i H dt).
    """
    Hp, Hm = sy_split(model) if parts is None else parts
    half = expm(-0.5j * dt * Hp)
    U = half @ expm(-1j * dt * Hm) @ half
    return StrobeStep(dt, [("+", dt / 2), ("-", dt), ("+", dt / 2)], U)


def sy_exact_propagator(model: SYModel, t: float) -> np.ndarray:
    return expm(-1j * t * sy_hamiltonian(model))


def sy_strobe_evolution(model: SYModel, total_time: float, dt: float) -> np.ndarray:
    """Product of round(total_time / dt) strobe steps."""
    steps = int(round(total_time / dt))
    if steps < 1 or not np.isclose(steps * dt, total_time, rtol=1e-9):
        raise ValueError("total_time must be a positive multiple of dt")
    U = sy_strobe_step(model, dt).unitary
    return np.linalg.matrix_power(U, steps)
