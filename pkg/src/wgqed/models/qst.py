"""Mirror-symmetric XX chain for perfect state transfer."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from ..compiler import SpinNetworkSpec, forward_couplings
from ..dynamics.hamiltonians import RampEnvelope, build_effective_spin_hamiltonian, build_full_hamiltonian
from ..dynamics.space import HilbertSpace
from ..dynamics.unitary import evolve_unitary

__all__ = ["qst_chain", "qst_bond_strengths", "transfer_amplitude", "transfer_fidelity", "locate_transfer_time",
           "qst_analytic_times", "transfer_channel_fidelity", "simulate_full_transfer",
           "FullTransferResult"]


def qst_bond_strengths(n: int, alpha: float) -> np.ndarray:
    """alpha * sqrt(i (n - i)) for bonds i = 1 .. n-1."""
    i = np.arange(1, n)
    return alpha * np.sqrt(i * (n - i))


def qst_chain(n: int, alpha: float) -> SpinNetworkSpec:
    """XX chain H = sum_i (J_i / 2)(s_x s_x + s_y s_y) with J_i = alpha sqrt(i (n - i))."""
    if n < 2:
        raise ValueError("a transfer chain needs at least two sites")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    spec = SpinNetworkSpec(n)
    for k, Jb in enumerate(qst_bond_strengths(n, alpha)):
        spec.add("x", "x", k, k + 1, Jb / 2)
        spec.add("y", "y", k, k + 1, Jb / 2)
    return spec


def qst_analytic_times(alpha: float):
    """The two candidate transfer times pi / (2 alpha) and pi / alpha."""
    return np.pi / (2 * alpha), np.pi / alpha


def _single_excitation(n, site):
    space = HilbertSpace(n)
    bits = ["g"] * n
    bits[site] = "s"
    return space.basis_state("".join(bits))


def _amplitude_fn(spec: SpinNetworkSpec):
    """t -> <s_N g...| exp(-i H t) |s_1 g...> from one diagonalization of H."""
    n = spec.n
    H = build_effective_spin_hamiltonian(spec).matrix.toarray()
    E, V = np.linalg.eigh(H)
    left = V.conj().T @ _single_excitation(n, n - 1)
    right = V.conj().T @ _single_excitation(n, 0)
    w = left.conj() * right
    return lambda t: complex(np.sum(w * np.exp(-1j * E * t)))


def transfer_amplitude(spec: SpinNetworkSpec, t: float) -> complex:
    """<s_N g...| exp(-i H t) |s_1 g...>, with the rest of the chain in |g>."""
    return _amplitude_fn(spec)(t)


def _fidelity(a: complex, mode: str) -> float:
    if mode == "excitation":
        return float(abs(a) ** 2)
    if mode == "average":
        return float(0.5 + abs(a) / 3 + abs(a) ** 2 / 6)
    if mode == "average_raw":
        return float(0.5 + a.real / 3 + abs(a) ** 2 / 6)
    raise ValueError(f"unknown mode {mode!r}")


def transfer_fidelity(spec: SpinNetworkSpec, t: float, mode: str = "excitation") -> float:
    """Fidelity of moving a qubit from the first to the last site in time t.

    ``mode``:

    * ``"excitation"``: |a|^2 with a the :func:`transfer_amplitude`;
      the fidelity for the input |s> (|g> is stationary).
    * ``"average"``: Bloch-sphere average 1/2 + |a|/3 + |a|^2/6, reached
      after a fixed local phase correction on the last site.
    * ``"average_raw"``: the same average without phase correction,
      1/2 + Re(a)/3 + |a|^2/6.
    """
    return _fidelity(transfer_amplitude(spec, t), mode)


def locate_transfer_time(spec: SpinNetworkSpec, t_max: float, n_grid: int = 400):
    """Time in (0, t_max] maximizing :func:`transfer_fidelity`, with its fidelity."""
    amp = _amplitude_fn(spec)
    grid = np.linspace(t_max / n_grid, t_max, n_grid)
    vals = np.array([abs(amp(t)) ** 2 for t in grid])
    k = int(np.argmax(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, n_grid - 1)]
    res = minimize_scalar(lambda t: -abs(amp(t)) ** 2, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * t_max})
    if -res.fun >= vals[k]:
        return float(res.x), float(-res.fun)
    return float(grid[k]), float(vals[k])


# ---------------------------------------------------------------------------
# transfer through the full spin-phonon model


def _last_site_rows(state: np.ndarray, space) -> np.ndarray:
    """(2, rest) view of a full state with the last spin as the row index."""
    n = space.n_spins
    return state.reshape(2 ** (n - 1), 2, space.phonon_dim).transpose(1, 0, 2).reshape(2, -1)


def transfer_channel_fidelity(psi_s, psi_g, space, phase: float = 0.0, n_grid: int = 48):
    """Fidelities of the qubit transfer defined by two full final states.

    ``psi_s`` and ``psi_g`` are the final states for the inputs |s> and
    |g> on the first site (everything else in |g>, phonons in vacuum).
    The output qubit on the last site is compared with the input after
    the fixed phase correction |s> -> exp(-1j phase)|s>.

    Returns a dict with ``min`` (worst pure input, found on a grid over
    the Bloch sphere and polished), ``s`` (input |s>), ``minus`` (input
    (|g> - |s>)/sqrt 2) and ``average``.
    """
    Xs = _last_site_rows(psi_s, space)
    Xg = _last_site_rows(psi_g, space)
    rot = np.exp(-1j * phase)

    def fid(theta, phi):
        c, d = np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)
        X = c * Xs + d * Xg
        v = np.conj(c) * rot * X[0] + np.conj(d) * X[1]
        return float(np.vdot(v, v).real)

    th = np.linspace(0, np.pi, n_grid + 1)
    ph = np.linspace(0, 2 * np.pi, 2 * n_grid, endpoint=False)
    vals = np.array([[fid(a, b) for b in ph] for a in th])
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    res = minimize(lambda x: fid(*x), [th[i], ph[j]], method="Nelder-Mead",
                   options={"xatol": 1e-8, "fatol": 1e-12})
    f_min = min(float(res.fun), float(vals[i, j]))
    # F is quadratic in the Bloch vector, so the six axis states average it exactly
    axes = [(0.0, 0.0), (np.pi, 0.0)] + [(np.pi / 2, k * np.pi / 2) for k in range(4)]
    return {"min": f_min, "s": fid(0.0, 0.0), "minus": fid(np.pi / 2, np.pi),
            "average": float(np.mean([fid(*a) for a in axes]))}


@dataclass
class FullTransferResult:
    """Outcome of :func:`simulate_full_transfer`.

    ``times``, ``arrival`` (population of |s> on the last site for the
    input |s>) and ``phonons`` (total mean phonon number, maximum over the
    two inputs) sample the main run; ``candidates`` lists
    ``(t_eff, t_end, fidelities)`` for every tried end of the pulse and
    ``best`` indexes the one with the largest worst-case fidelity.
    """

    times: np.ndarray
    arrival: np.ndarray
    phonons: np.ndarray
    phonons_per_mode: np.ndarray
    candidates: list
    best: int
    t_ramp: float
    phase: float

    @property
    def fidelity(self) -> dict:
        return self.candidates[self.best][2]

    @property
    def t_end(self) -> float:
        return self.candidates[self.best][1]

    @property
    def max_phonons(self) -> float:
        return float(np.max(self.phonons))


def simulate_full_transfer(prog, spectrum, space, t_eff: float, t_ramp: float, target=None,
                           keep_offresonant="mismatched", scan=(1.0,), n_samples: int = 41,
                           rtol: float = 1e-8, atol: float = 1e-10) -> FullTransferResult:
    """Transfer a qubit along the chain with the full spin-phonon Hamiltonian.

    The Raman fields rise over ``t_ramp``, stay on, and fall over
    ``t_ramp`` so that the integral of the squared envelope equals
    ``t_eff * f`` for every factor f in ``scan``.  The common rise and
    flat part is integrated once; each candidate only integrates its
    own fall.  ``target`` (the ideal spin model) fixes the output phase
    correction; by default it is the chain implied by ``prog``.
    """
    n = space.n_spins
    target = forward_couplings(prog, warn=False) if target is None else target
    base = build_full_hamiltonian(prog, spectrum, space, keep_offresonant, envelope=RampEnvelope(t_ramp))
    vac = space.basis_state("s" + "g" * (n - 1)), space.basis_state("g" * n)
    psi0 = np.stack(vac, axis=1)
    env0 = RampEnvelope(t_ramp)
    falls = sorted(env0.fall_start(t_eff * f) for f in scan)
    grid = np.linspace(0.0, falls[-1], n_samples)
    times = np.union1d(grid, falls)
    states = evolve_unitary(base, psi0, times, rtol=rtol, atol=atol)

    k_last = space.spin_index("g" * (n - 1) + "s")
    pd = space.phonon_dim
    arrival = np.array([np.sum(np.abs(st[:, 0].reshape(space.spin_dim, pd)[k_last]) ** 2) for st in states])
    nums = [space.number(l) for l in range(n)]
    minus = (states[:, :, 1] - states[:, :, 0]) / np.sqrt(2)
    per_mode = np.array([[max(np.vdot(st[:, 0], N @ st[:, 0]).real, np.vdot(m, N @ m).real) for N in nums]
                         for st, m in zip(states, minus)])
    totals = np.array([max(np.vdot(st[:, 0], sum(N @ st[:, 0] for N in nums)).real,
                           np.vdot(m, sum(N @ m for N in nums)).real) for st, m in zip(states, minus)])

    candidates = []
    for f in scan:
        te = t_eff * f
        td = env0.fall_start(te)
        env = RampEnvelope(t_ramp, td + t_ramp)
        k = int(np.searchsorted(times, td))
        start = states[k] / np.linalg.norm(states[k], axis=0)  # drop integrator norm drift
        end = evolve_unitary(base.with_envelope(env), start, [env.t_total], rtol=rtol, atol=atol, t0=td)[-1]
        phase = float(np.angle(transfer_amplitude(target, te)))
        fids = transfer_channel_fidelity(end[:, 0], end[:, 1], space, phase)
        candidates.append((te, env.t_total, fids))
    best = int(np.argmax([c[2]["min"] for c in candidates]))
    phase = float(np.angle(transfer_amplitude(target, candidates[best][0])))
    return FullTransferResult(times, arrival, totals, per_mode, candidates, best, t_ramp, phase)
