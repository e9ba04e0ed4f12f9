"""Pure-state evolution under static or time-dependent Hamiltonians."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

from .hamiltonians import TimeDependentHamiltonian
from .space import OperatorExpr

__all__ = ["EvolutionError", "evolve_unitary", "as_schedule"]


class EvolutionError(RuntimeError):
    """The integrator gave up (step size underflow or similar)."""


def as_schedule(H):
    """Normalize a Hamiltonian argument to either a sparse matrix or a schedule."""
    if isinstance(H, TimeDependentHamiltonian):
        return H.static if H.is_static else H
    if isinstance(H, OperatorExpr):
        return H.matrix
    return sp.csr_matrix(H)


def _is_uniform(times):
    if len(times) < 3:
        return True
    d = np.diff(times)
    return np.allclose(d, d[0], rtol=1e-12, atol=0)


def _static_evolve(H, psi0, times, t0=0.0):
    times = np.asarray(times, dtype=float)
    A = -1j * sp.csr_matrix(H)
    out = np.empty((len(times),) + psi0.shape, dtype=complex)
    if A.nnz == 0:
        out[:] = psi0
        return out
    if len(times) > 1 and _is_uniform(times) and times[0] == t0:
        return np.asarray(expm_multiply(A, psi0, start=0.0, stop=times[-1] - t0, num=len(times),
                                        endpoint=True))
    psi = psi0
    t_prev = t0
    for k, t in enumerate(times):
        if t != t_prev:
            psi = expm_multiply(A * (t - t_prev), psi)
            t_prev = t
        out[k] = psi
    return out


def evolve_unitary(H, psi0, times, rtol: float = 1e-10, atol: float = 1e-12,
                   max_step: float = np.inf, method: str = "DOP853", t0: float = 0.0) -> np.ndarray:
    """States psi(t) for every t in ``times``, given psi(t0) = ``psi0``.

    Static Hamiltonians use Krylov exponentiation; time-dependent
    schedules use an adaptive high-order Runge-Kutta method.  ``psi0``
    may hold several states as columns (dim, k); they are propagated
    together.

    Returns an array of shape (len(times),) + psi0.shape.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.ndim not in (1, 2):
        raise ValueError("psi0 must be a vector or a (dim, k) array of columns")
    nrm = np.linalg.norm(psi0, axis=0)
    if np.any(np.abs(nrm - 1.0) > 1e-10):
        raise ValueError(f"initial state is not normalized (|psi| = {nrm})")
    dim = psi0.shape[0]
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < t0):
        raise ValueError("times must be increasing and not before t0")
    H = as_schedule(H)
    if not isinstance(H, TimeDependentHamiltonian):
        if H.shape[0] != dim:
            raise ValueError(f"state has dimension {dim}, Hamiltonian {H.shape[0]}")
        return _static_evolve(H, psi0, times, t0)
    if H.dim != dim:
        raise ValueError(f"state has dimension {dim}, Hamiltonian {H.dim}")
    shape = psi0.shape

    def rhs(t, y):
        return -1j * H.matvec(t, y.reshape(shape)).ravel()

    t_end = float(times[-1]) if times.size else t0
    if t_end == t0:
        return np.broadcast_to(psi0, (len(times),) + shape).copy()
    sol = solve_ivp(rhs, (float(t0), t_end), psi0.ravel(), method=method, t_eval=times, rtol=rtol,
                    atol=atol, max_step=max_step)
    if not sol.success:
        raise EvolutionError(f"integration failed at t = {sol.t[-1] if sol.t.size else t0:.6g}: {sol.message}")
    return sol.y.T.reshape((len(times),) + shape).copy()
