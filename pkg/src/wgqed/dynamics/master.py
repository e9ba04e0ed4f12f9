"""Lindblad master equations with correlated (matrix-valued) dissipators.

A channel is a rate matrix gamma together with operators c_1 ... c_K and
contributes

    D[rho] = sum_ij gamma_ij (c_j rho c_i^dagger - 1/2 {c_i^dagger c_j, rho}).

Density matrices are vectorized row-major, vec(A rho B) = (A kron B^T) vec(rho).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

from .hamiltonians import TimeDependentHamiltonian
from .space import HilbertSpace
from .unitary import EvolutionError, as_schedule

__all__ = [
    "InvalidChannelError",
    "Channel",
    "OpenSystemModel",
    "diagonalize_rate_matrix",
    "liouvillian",
    "evolve_master",
    "check_density_matrix",
    "phonon_loss_rates",
    "spin_loss_channel",
    "fort_channels",
]


class InvalidChannelError(ValueError):
    """Rate matrix is not Hermitian positive semidefinite."""


def diagonalize_rate_matrix(gamma, ops=None, tol_psd: float = 1e-10):
    """Eigen-decompose a rate matrix into independent jump operators.

    With gamma = U diag(lam) U^dagger the dissipator becomes
    sum_k lam_k (L_k rho L_k^dagger - ...) with L_k = sum_j conj(U[j, k]) c_j.

    Negative eigenvalues smaller than ``tol_psd * max(lam)`` in magnitude
    are clipped to zero; larger ones raise :class:`InvalidChannelError`.

    Returns ``(lam, U, jumps)`` where ``jumps`` is ``None`` if ``ops`` is
    not given, else the list of L_k (all k, including zero rates).
    """
    g = np.atleast_2d(np.asarray(gamma, dtype=complex))
    if g.shape[0] != g.shape[1]:
        raise InvalidChannelError("rate matrix must be square")
    herm_err = np.max(np.abs(g - g.conj().T)) if g.size else 0.0
    scale = np.max(np.abs(g)) if g.size else 0.0
    if herm_err > 1e-12 * max(scale, 1e-300) and herm_err > 0:
        raise InvalidChannelError(f"rate matrix is not Hermitian (max |g - g^+| = {herm_err:.3e})")
    g = 0.5 * (g + g.conj().T)
    if not np.any(g):
        lam, U = np.zeros(len(g)), np.eye(len(g), dtype=complex)
    elif np.count_nonzero(g - np.diag(np.diag(g))) == 0:
        lam, U = np.diag(g).real.copy(), np.eye(len(g), dtype=complex)
    else:
        lam, U = np.linalg.eigh(g)
    top = max(np.max(lam), 0.0)
    worst = np.min(lam) if lam.size else 0.0
    if worst < 0:
        if top == 0.0 or -worst > tol_psd * top:
            raise InvalidChannelError(
                f"rate matrix has eigenvalue {worst:.3e} (max {top:.3e}); not positive semidefinite"
            )
        lam = np.where(lam < 0, 0.0, lam)
    jumps = None
    if ops is not None:
        if len(ops) != len(lam):
            raise ValueError(f"{len(ops)} operators for a {len(lam)}x{len(lam)} rate matrix")
        jumps = []
        for k in range(len(lam)):
            L = None
            for j, c in enumerate(ops):
                coef = np.conj(U[j, k])
                if coef != 0:
                    term = coef * sp.csr_matrix(c)
                    L = term if L is None else L + term
            jumps.append(sp.csr_matrix(ops[0].shape, dtype=complex) if L is None else L.tocsr())
    return lam, U, jumps


@dataclass
class Channel:
    """Rate matrix ``rates`` (K x K) over operators ``ops`` (K operators)."""

    rates: np.ndarray
    ops: list
    name: str = ""

    def __post_init__(self):
        self.rates = np.atleast_2d(np.asarray(self.rates, dtype=complex))
        if self.rates.shape != (len(self.ops), len(self.ops)):
            raise ValueError(f"channel {self.name!r}: rate matrix shape {self.rates.shape} "
                             f"does not match {len(self.ops)} operators")

    def jump_operators(self, tol_psd: float = 1e-10):
        """[(rate_k, L_k)] for the non-zero eigen-rates."""
        lam, _, jumps = diagonalize_rate_matrix(self.rates, self.ops, tol_psd)
        return [(float(l), L) for l, L in zip(lam, jumps) if l > 0]


@dataclass
class OpenSystemModel:
    H: object
    channels: list = field(default_factory=list)
    tol_psd: float = 1e-10

    def __post_init__(self):
        # validate every rate matrix up front
        for ch in self.channels:
            diagonalize_rate_matrix(ch.rates, None, self.tol_psd)

    @property
    def dim(self):
        H = as_schedule(self.H)
        return H.dim if isinstance(H, TimeDependentHamiltonian) else H.shape[0]

    def jump_operators(self):
        out = []
        for ch in self.channels:
            out.extend(ch.jump_operators(self.tol_psd))
        return out

    def effective_hamiltonian(self):
        """H - (i/2) sum_k rate_k L_k^dagger L_k for a static H."""
        H = as_schedule(self.H)
        if isinstance(H, TimeDependentHamiltonian):
            raise ValueError("effective Hamiltonian needs a static H")
        Heff = sp.csr_matrix(H, dtype=complex)
        for rate, L in self.jump_operators():
            Heff = Heff - 0.5j * rate * (L.conj().T @ L)
        return Heff.tocsr()


def _dissipator_superop(rate, L, dim):
    I = sp.identity(dim, dtype=complex, format="csr")
    LdL = (L.conj().T @ L).tocsr()
    return rate * (sp.kron(L, L.conj(), format="csr")
                   - 0.5 * sp.kron(LdL, I, format="csr")
                   - 0.5 * sp.kron(I, LdL.T, format="csr"))


def liouvillian(model: OpenSystemModel, H=None) -> sp.csr_matrix:
    """Superoperator acting on row-major vec(rho); ``H`` overrides the model Hamiltonian."""
    H = sp.csr_matrix(as_schedule(model.H) if H is None else H, dtype=complex)
    dim = H.shape[0]
    I = sp.identity(dim, dtype=complex, format="csr")
    L = -1j * (sp.kron(H, I, format="csr") - sp.kron(I, H.T, format="csr"))
    for rate, J in model.jump_operators():
        L = L + _dissipator_superop(rate, J, dim)
    return L.tocsr()


def check_density_matrix(rho, tol: float = 1e-8) -> dict:
    """Trace error, Hermiticity error and minimum eigenvalue of ``rho``."""
    rho = np.asarray(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    ev = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    return {"trace_error": float(abs(np.trace(rho) - 1.0)), "hermiticity_error": herm,
            "min_eigenvalue": float(ev[0]),
            "ok": abs(np.trace(rho) - 1.0) < tol and herm < tol and ev[0] >= -tol}


def evolve_master(model: OpenSystemModel, rho0, times, rtol: float = 1e-10, atol: float = 1e-12,
                  check: bool = True) -> np.ndarray:
    """Density matrices at every t in ``times`` (from t = 0).

    Static Hamiltonians are propagated with Krylov exponentiation of the
    Liouvillian; time-dependent schedules are integrated with an adaptive
    Runge-Kutta method on the matrix form of the equation.  With ``check``
    the trace, Hermiticity and positivity bounds (1e-8) are asserted at
    every grid point.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.ndim == 1:
        rho0 = np.outer(rho0, rho0.conj())
    info = check_density_matrix(rho0)
    if not info["ok"]:
        raise ValueError(f"initial state is not a density matrix: {info}")
    dim = rho0.shape[0]
    times = np.asarray(times, dtype=float)
    H = as_schedule(model.H)
    if not isinstance(H, TimeDependentHamiltonian):
        Lv = liouvillian(model, H)
        v0 = rho0.ravel()
        out = np.empty((len(times), dim, dim), dtype=complex)
        uniform = len(times) > 1 and times[0] == 0 and np.allclose(np.diff(times), times[1] - times[0], rtol=1e-12, atol=0)
        if uniform:
            vs = expm_multiply(Lv, v0, start=0.0, stop=times[-1], num=len(times), endpoint=True)
            out[:] = np.asarray(vs).reshape(len(times), dim, dim)
        else:
            v, t_prev = v0, 0.0
            for k, t in enumerate(times):
                if t != t_prev:
                    v = expm_multiply(Lv * (t - t_prev), v)
                    t_prev = t
                out[k] = v.reshape(dim, dim)
    else:
        jumps = model.jump_operators()
        LdL = sum((r * (L.conj().T @ L) for r, L in jumps), sp.csr_matrix((dim, dim), dtype=complex))

        def rhs(t, y):
            rho = y.reshape(dim, dim)
            Hr = H.matvec(t, rho)
            d = -1j * (Hr - Hr.conj().T)  # [H, rho] with rho Hermitian
            for r, L in jumps:
                Lr = L @ rho
                d = d + r * (L @ (Lr.conj().T)).conj().T
            d = d - 0.5 * (LdL @ rho + (LdL @ rho).conj().T)
            return d.ravel()

        sol = solve_ivp(rhs, (0.0, float(times[-1])), rho0.ravel(), method="DOP853", t_eval=times,
                        rtol=rtol, atol=atol)
        if not sol.success:
            raise EvolutionError(f"master equation integration failed: {sol.message}")
        out = sol.y.T.reshape(len(times), dim, dim)
    if check:
        for k, rho in enumerate(out):
            info = check_density_matrix(rho)
            if not info["ok"]:
                raise EvolutionError(f"state at t = {times[k]:.6g} left the physical set: {info}")
    return out


def phonon_loss_rates(prog, gamma_m: float) -> np.ndarray:
    """Correlated spin loss rates inherited from phonon loss.

    Eliminating a lossy mode l turns its decay into the collective jump
    sqrt(gamma_m) A_l / Delta_l with A_l = sum conj(Omega~[a, i, l]) sigma_a^i.
    Returns the (3N x 3N) rate matrix over the Pauli operators ordered
    (axis, site),

        Gamma[(a,i), (b,j)] = gamma_m sum_l Omega~[a,i,l] conj(Omega~[b,j,l]) / Delta_l^2,

    which is positive semidefinite by construction.  For identical Delta_l
    its real off-site part is (gamma_m / Delta_l) J / 2.
    """
    n = prog.n
    W = prog.omega_tilde.reshape(3 * n, n)
    return gamma_m * (W / prog.delta_l[None, :] ** 2) @ W.conj().T


def spin_loss_channel(prog, gamma_m: float, space: HilbertSpace) -> Channel:
    """Channel built from :func:`phonon_loss_rates` over sigma_(x,y,z)^(i)."""
    ops = [space.sigma(i, a) for a in ("x", "y", "z") for i in range(prog.n)]
    return Channel(phonon_loss_rates(prog, gamma_m), ops, name="phonon-loss")


def fort_channels(space: HilbertSpace, gamma_fort: float, sites=None) -> list:
    """Local Raman scattering in the trap: sigma_- and sigma_+ on each site at rate gamma_fort.

    Together they relax every spin to the maximally mixed state.
    """
    sites = range(space.n_spins) if sites is None else sites
    chans = []
    for i in sites:
        chans.append(Channel([[gamma_fort]], [space.sigma(i, "-")], name=f"fort-down-{i}"))
        chans.append(Channel([[gamma_fort]], [space.sigma(i, "+")], name=f"fort-up-{i}"))
    return chans
