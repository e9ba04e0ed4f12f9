"""Expectation values, fidelities and reduced states."""
from __future__ import annotations

import numpy as np

from .space import HilbertSpace

__all__ = [
    "expectation",
    "state_fidelity",
    "mean_phonon_number",
    "reduced_site_state",
    "truncation_check",
]


def _check(op_dim, state):
    d = state.shape[-1]
    if op_dim != d:
        raise ValueError(f"dimension mismatch: operator {op_dim}, state {d}")


def expectation(op, state):
    """<op> for a state vector or density matrix (complex in general)."""
    state = np.asarray(state)
    _check(op.shape[0], state)
    if state.ndim == 1:
        return complex(np.vdot(state, op @ state))
    return complex(np.trace(op @ state))


def state_fidelity(rho, psi) -> float:
    """F = <psi| rho |psi> for a pure target; a pure ``rho`` vector gives |<psi|phi>|^2."""
    rho = np.asarray(rho)
    psi = np.asarray(psi)
    _check(len(psi), rho)
    if rho.ndim == 1:
        return float(abs(np.vdot(psi, rho)) ** 2)
    return float(np.vdot(psi, rho @ psi).real)


def mean_phonon_number(state, mode: int, space: HilbertSpace) -> float:
    state = np.asarray(state)
    _check(space.dim, state)
    occ = np.tile(space.phonon_number_diag(mode), space.spin_dim)
    if state.ndim == 1:
        return float(np.sum(occ * np.abs(state) ** 2))
    return float(np.sum(occ * np.diag(state).real))


def reduced_site_state(state, site: int, space: HilbertSpace) -> np.ndarray:
    """2x2 reduced density matrix of one spin (phonons and other spins traced out)."""
    state = np.asarray(state)
    _check(space.dim, state)
    n = space.n_spins
    left, right = 2**site, 2 ** (n - site - 1) * space.phonon_dim
    if state.ndim == 1:
        psi = state.reshape(left, 2, right)
        return np.einsum("aib,ajb->ij", psi, psi.conj())
    rho = state.reshape(left, 2, right, left, 2, right)
    return np.einsum("aibajb->ij", rho)


def truncation_check(run, space: HilbertSpace, bigger: HilbertSpace | None = None, tol: float = 1e-4):
    """Re-run ``run(space) -> {name: array}`` on an enlarged truncation.

    Returns ``(converged, max_abs_change, results_small, results_big)``;
    ``bigger`` defaults to :meth:`HilbertSpace.doubled`.
    """
    bigger = bigger or space.doubled()
    a = run(space)
    b = run(bigger)
    change = max(float(np.max(np.abs(np.asarray(a[k]) - np.asarray(b[k])))) for k in a)
    return change < tol, change, a, b
