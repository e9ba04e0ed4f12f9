"""Quantum-jump unraveling of static Lindblad models."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.optimize import brentq

from .master import OpenSystemModel
from .unitary import as_schedule

__all__ = ["TrajectoryResult", "sample_trajectories", "default_threads"]


def default_threads() -> int:
    """Thread count from WGQED_THREADS, else 1."""
    try:
        return max(1, int(os.environ.get("WGQED_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class TrajectoryResult:
    times: np.ndarray
    mean: dict
    stderr: dict
    n_traj: int
    resampled: int

    def within(self, name, reference, n_sigma=3.0, floor=0.0):
        """True where |mean - reference| <= n_sigma * stderr (+ floor) at every time."""
        dev = np.abs(self.mean[name] - np.asarray(reference))
        return bool(np.all(dev <= n_sigma * self.stderr[name] + floor))


class _Propagator:
    """exp(-i H_eff dt) with the grid steps precomputed (read-only afterwards)."""

    def __init__(self, heff: np.ndarray, times):
        self.A = -1j * heff
        steps = np.unique(np.diff(np.concatenate([[0.0], times])))
        self._grid = {float(d): la.expm(self.A * d) for d in steps if d > 0}

    def step(self, dt):
        U = self._grid.get(float(dt))
        return U if U is not None else la.expm(self.A * dt)


def _one_trajectory(idx, seed, psi0, times, prop, jumps, obs, max_jumps):
    rng = np.random.default_rng(np.random.SeedSequence([seed, idx]))
    psi = psi0.copy()
    t = 0.0
    r = rng.random()
    resampled = 0
    out = np.empty((len(obs), len(times)))
    rates = [j[0] for j in jumps]
    mats = [j[1] for j in jumps]
    for k, t_next in enumerate(times):
        n_jumps = 0
        while t < t_next:
            phi = prop.step(t_next - t) @ psi
            p_end = np.vdot(phi, phi).real
            if p_end > r or not mats:
                psi, t = phi, t_next
                break
            # the norm falls through r inside (t, t_next]; locate the jump
            def f(tau):
                u = la.expm(prop.A * tau) @ psi
                return np.vdot(u, u).real - r
            tau = brentq(f, 0.0, t_next - t, xtol=1e-14 * max(1.0, t_next), rtol=1e-12)
            u = la.expm(prop.A * tau) @ psi
            u = u / np.linalg.norm(u)
            w = np.array([rt * np.vdot(L @ u, L @ u).real for rt, L in zip(rates, mats)])
            total = w.sum()
            t = t + tau
            if total <= 0 or not np.isfinite(total):
                # numerically empty jump: keep the no-jump branch and redraw
                resampled += 1
                psi = u
                r = rng.random()
                continue
            ch = int(np.searchsorted(np.cumsum(w) / total, rng.random(), side="right"))
            ch = min(ch, len(mats) - 1)
            v = mats[ch] @ u
            psi = v / np.linalg.norm(v)
            r = rng.random()
            n_jumps += 1
            if n_jumps > max_jumps:
                raise RuntimeError(f"trajectory {idx}: more than {max_jumps} jumps in one interval")
        nrm = np.linalg.norm(psi)
        phi = psi / nrm
        for m, O in enumerate(obs):
            out[m, k] = np.vdot(phi, O @ phi).real
    return out, resampled


def sample_trajectories(model: OpenSystemModel, psi0, times, observables: dict, n_traj: int,
                        seed: int = 0, threads: int | None = None, max_jumps: int = 10_000) -> TrajectoryResult:
    """Ensemble averages of Hermitian ``observables`` over quantum-jump trajectories.

    Waiting times come from the decaying norm under the effective
    non-Hermitian Hamiltonian; jump instants are located by root finding
    on the exactly propagated norm.  Trajectory k draws from the stream
    ``SeedSequence([seed, k])`` and results are reduced in index order, so
    the output is bitwise identical for any thread count.
    """
    H = as_schedule(model.H)
    if not sp.issparse(H) and not isinstance(H, np.ndarray):
        raise ValueError("trajectories need a static Hamiltonian")
    heff = np.asarray(model.effective_hamiltonian().toarray())
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError("initial state is not normalized")
    times = np.asarray(times, dtype=float)
    jumps = [(r, sp.csr_matrix(L)) for r, L in model.jump_operators()]
    names = list(observables)
    obs = [sp.csr_matrix(observables[k]) for k in names]
    threads = threads or default_threads()

    prop = _Propagator(heff, times)

    def run(idx):
        return _one_trajectory(idx, seed, psi0, times, prop, jumps, obs, max_jumps)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, range(n_traj)))
    else:
        results = [run(i) for i in range(n_traj)]
    data = np.stack([r[0] for r in results])  # (n_traj, n_obs, n_t), index order
    resampled = sum(r[1] for r in results)
    mean = data.mean(axis=0)
    err = data.std(axis=0, ddof=1) / np.sqrt(n_traj) if n_traj > 1 else np.zeros_like(mean)
    return TrajectoryResult(times, {k: mean[m] for m, k in enumerate(names)},
                            {k: err[m] for m, k in enumerate(names)}, n_traj, resampled)
