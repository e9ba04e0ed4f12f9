"""Raman sideband compiler.

Forward direction: a sideband program (complex Rabi matrices per spin
component, site and phonon mode) fixes the phonon-mediated exchange tensor
and local fields

    J[a, b, i, j] = 2 Re sum_l  W[a, i, l] conj(W[b, j, l]) / delta_l      (i < j)
    h[c, i]       = -2 Im sum_l W[a, i, l] conj(W[b, i, l]) / delta_l      ((a, b, c) cyclic)

with W[a, i, l] = eta_o * omega[a, i, l] * B[i, l].

Inverse direction: find the minimal-intensity program reproducing a target
(J, h) by nonlinear least squares with multi-start.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .phonons import PhononSpectrum

log = logging.getLogger(__name__)

__all__ = [
    "AXES",
    "SpinNetworkSpec",
    "SidebandProgram",
    "CompileOptions",
    "CompileResult",
    "CompilationError",
    "FrequencyCollisionError",
    "AdiabaticityWarning",
    "forward_couplings",
    "xy_from_pm",
    "pm_from_xy",
    "compile_sidebands",
    "assign_sideband_frequencies",
    "count_unknowns",
    "count_constraints",
    "two_site_obstruction",
]

AXES = ("x", "y", "z")
# (a, b) -> c for the cyclic triples of the Levi-Civita symbol
_CYCLIC = ((1, 2, 0), (2, 0, 1), (0, 1, 2))


class CompilationError(RuntimeError):
    """No restart reached the residual tolerance.

    Attributes ``residual`` and ``program`` carry the best attempt.
    """

    def __init__(self, message, residual=None, program=None):
        super().__init__(message)
        self.residual = residual
        self.program = program


class FrequencyCollisionError(ValueError):
    """Two sideband frequencies are closer than the requested minimum gap."""


class AdiabaticityWarning(UserWarning):
    """Some |Omega~| is not smaller than its mode detuning."""


@dataclass
class SpinNetworkSpec:
    """Two-local spin Hamiltonian  sum_{i<j} J[a,b,i,j] s_a^i s_b^j + sum h[c,i] s_c^i.

    ``J`` has shape (3, 3, n, n) and only entries with i < j are used.
    Passing a J with entries below the diagonal folds them onto the
    canonical i < j slots (J[b, a, j, i] -> J[a, b, i, j]).
    """

    n: int
    J: np.ndarray = None
    h: np.ndarray = None

    def __post_init__(self):
        n = self.n
        J = np.zeros((3, 3, n, n)) if self.J is None else np.array(self.J, dtype=float)
        h = np.zeros((3, n)) if self.h is None else np.array(self.h, dtype=float)
        if J.shape != (3, 3, n, n):
            raise ValueError(f"J must have shape (3, 3, {n}, {n}), got {J.shape}")
        if h.shape != (3, n):
            raise ValueError(f"h must have shape (3, {n}), got {h.shape}")
        if not (np.all(np.isfinite(J)) and np.all(np.isfinite(h))):
            raise ValueError("couplings must be finite")
        if np.any(J[:, :, np.arange(n), np.arange(n)] != 0):
            raise ValueError("on-site entries J[:, :, i, i] must be zero; use h for fields")
        lower = np.tril(np.ones((n, n), dtype=bool), -1)
        folded = J * np.triu(np.ones((n, n)), 1)
        folded += np.where(lower, J, 0.0).transpose(1, 0, 3, 2)
        self.J = folded
        self.h = h

    def copy(self) -> "SpinNetworkSpec":
        return SpinNetworkSpec(self.n, self.J.copy(), self.h.copy())

    def pairs(self):
        iu, ju = np.triu_indices(self.n, 1)
        return list(zip(iu.tolist(), ju.tolist()))

    def as_vector(self) -> np.ndarray:
        """Independent parameters: J over i<j (pair-major, then a, b), then h."""
        iu, ju = np.triu_indices(self.n, 1)
        Jv = self.J[:, :, iu, ju].transpose(2, 0, 1).ravel()
        return np.concatenate([Jv, self.h.T.ravel()])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_vector()))

    def add(self, a: str, b: str, i: int, j: int, value: float) -> None:
        """Accumulate ``value`` onto the s_a^i s_b^j coefficient."""
        ia, ib = AXES.index(a), AXES.index(b)
        if i == j:
            raise ValueError("use add_field for on-site terms")
        if i < j:
            self.J[ia, ib, i, j] += value
        else:
            self.J[ib, ia, j, i] += value

    def add_field(self, c: str, i: int, value: float) -> None:
        self.h[AXES.index(c), i] += value

    def scaled(self, s: float) -> "SpinNetworkSpec":
        return SpinNetworkSpec(self.n, self.J * s, self.h * s)


@dataclass
class SidebandProgram:
    """Frequency-domain Raman program.

    omega:    complex (3, n, n) Rabi frequencies indexed [axis, site, mode]
    delta_l:  (n,) detunings of the sidebands from their phonon modes
    delta_gs: (n,) site Zeeman splittings used for addressing
    eta_o:    Lamb-Dicke parameter of the Raman wavevector
    B:        (n, n) phonon mode matrix B[site, mode]
    """

    omega: np.ndarray
    delta_l: np.ndarray
    delta_gs: np.ndarray
    eta_o: float
    B: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=complex)
        n = self.omega.shape[1]
        self.delta_l = np.broadcast_to(np.asarray(self.delta_l, dtype=float), (n,)).copy()
        self.delta_gs = np.broadcast_to(np.asarray(self.delta_gs, dtype=float), (n,)).copy()
        self.B = np.asarray(self.B, dtype=float)
        if self.omega.shape != (3, n, n) or self.B.shape != (n, n):
            raise ValueError("omega must be (3, n, n) and B (n, n)")
        if np.any(self.delta_l == 0):
            raise ValueError("sideband detunings must be non-zero")

    @property
    def n(self) -> int:
        return self.omega.shape[1]

    @property
    def omega_tilde(self) -> np.ndarray:
        """eta_o * omega[a, i, l] * B[i, l]."""
        return self.eta_o * self.omega * self.B[None, :, :]

    def intensity(self) -> float:
        return float(np.sum(np.abs(self.omega) ** 2))

    def max_adiabaticity_ratio(self) -> float:
        """max |Omega~[a, i, l]| / |delta_l|."""
        return float(np.max(np.abs(self.omega_tilde) / np.abs(self.delta_l)[None, None, :]))

    def zeeman_spacing(self) -> float:
        if self.n < 2:
            return np.inf
        return float(np.min(np.abs(np.diff(self.delta_gs))))


def _gram(wt: np.ndarray, delta_l: np.ndarray) -> np.ndarray:
    """M[(a,i), (b,j)] = sum_l W[a,i,l] conj(W[b,j,l]) / delta_l, as (3, 3, n, n)."""
    return np.einsum("ail,bjl,l->abij", wt, wt.conj(), 1.0 / delta_l)


def _couplings_from_gram(M: np.ndarray, n: int) -> SpinNetworkSpec:
    mask = np.triu(np.ones((n, n)), 1)
    J = 2.0 * M.real * mask
    idx = np.arange(n)
    h = np.zeros((3, n))
    for a, b, c in _CYCLIC:
        h[c] = -2.0 * M[a, b, idx, idx].imag
    return SpinNetworkSpec(n, J, h)


def forward_couplings(prog: SidebandProgram, warn: bool = True) -> SpinNetworkSpec:
    """Exchange tensor and fields generated by ``prog`` after eliminating phonons.

    Emits :class:`AdiabaticityWarning` when some |Omega~| reaches its mode
    detuning; the result is still returned.
    """
    wt = prog.omega_tilde
    if warn and prog.max_adiabaticity_ratio() >= 1.0:
        warnings.warn(
            f"adiabaticity violated: max |Omega~|/|Delta_l| = {prog.max_adiabaticity_ratio():.3g}",
            AdiabaticityWarning,
            stacklevel=2,
        )
    return _couplings_from_gram(_gram(wt, prog.delta_l), prog.n)


def xy_from_pm(omega_plus, omega_minus):
    """Rabi frequencies of the sigma_x / sigma_y couplings from the +/- sidebands."""
    op = np.asarray(omega_plus, dtype=complex)
    om = np.asarray(omega_minus, dtype=complex)
    if op.shape != om.shape:
        raise ValueError("omega_plus and omega_minus must have the same shape")
    return (op + om) / 2.0, 1j * (op - om) / 2.0


def pm_from_xy(omega_x, omega_y):
    """Inverse of :func:`xy_from_pm`."""
    ox = np.asarray(omega_x, dtype=complex)
    oy = np.asarray(omega_y, dtype=complex)
    return ox - 1j * oy, ox + 1j * oy


def count_unknowns(n: int) -> int:
    """Real degrees of freedom of the sideband matrices, 6 n^2."""
    return 6 * n * n


def count_constraints(n: int) -> int:
    """Independent couplings of a general two-local spin-1/2 model, 3(3n^2 - n)/2."""
    return 3 * (3 * n * n - n) // 2


@dataclass
class CompileOptions:
    """Knobs for :func:`compile_sidebands`.

    ``components`` restricts which spin axes may carry sidebands.  Set
    ``min_intensity=False`` to accept the first feasible point of each
    restart.
    """

    tol_rel: float = 1e-6
    restarts: int = 8
    seed: int = 0
    components: tuple = AXES
    min_intensity: bool = True
    max_iter: int = 300
    intensity_iters: int = 60
    warmup_iters: int = 8
    refine_top: int = 2
    b_tol: float = 1e-12


@dataclass
class CompileResult:
    program: SidebandProgram
    residual: float
    intensity: float
    restart: int
    attempts: list


class _Problem:
    """Dimensionless least-squares problem in the scaled variables

        y[a, i, l] = eta_o * omega[a, i, l] / sqrt(|delta_l| * scale)

    so that the target, divided by ``scale``, is matched by
    2 Re / -2 Im of  sum_l y y* B B sign(delta_l).
    """

    def __init__(self, target: SpinNetworkSpec, B, delta_l, components, b_tol):
        n = target.n
        self.n = n
        self.B = np.asarray(B, dtype=float)
        self.delta_l = np.asarray(delta_l, dtype=float)
        self.sign = np.sign(self.delta_l)
        self.scale = max(target.norm(), np.finfo(float).tiny)
        self.t = target.as_vector() / self.scale
        axes = [AXES.index(c) for c in components]
        coupled = np.abs(self.B) > b_tol
        # free variables: (a, i, l) with an allowed axis and B[i, l] != 0
        mask = np.zeros((3, n, n), dtype=bool)
        mask[axes] = coupled[None]
        self.mask = mask
        self.nvar = int(mask.sum())
        self.var_c, self.var_k, self.var_l = np.nonzero(mask)
        self._rows()

    def _rows(self):
        """Row r of the residual reads M[a_r, b_r, i_r, j_r] (Re for J rows, Im for h rows)."""
        n = self.n
        iu, ju = np.triu_indices(n, 1)
        rows = [(a, b, i, j) for i, j in zip(iu, ju) for a in range(3) for b in range(3)]
        self.n_j = len(rows)
        cyc = {c: (a, b) for a, b, c in _CYCLIC}
        rows += [(*cyc[c], i, i) for i in range(n) for c in range(3)]
        self.ra, self.rb, self.ri, self.rj = (np.array(x, dtype=int) for x in zip(*rows))

    def unpack(self, p) -> np.ndarray:
        y = np.zeros((3, self.n, self.n), dtype=complex)
        k = self.nvar
        y[self.mask] = p[:k] + 1j * p[k:]
        return y

    def pack(self, y) -> np.ndarray:
        v = y[self.mask]
        return np.concatenate([v.real, v.imag])

    def _project(self, m):
        # m: complex values of the selected M entries (rows first)
        out = np.empty(m.shape, dtype=float)
        out[: self.n_j] = 2.0 * m[: self.n_j].real
        out[self.n_j:] = -2.0 * m[self.n_j:].imag
        return out

    def forward(self, p) -> np.ndarray:
        Y = self.unpack(p) * self.B[None]
        left = Y[self.ra, self.ri]  # (rows, l)
        right = Y[self.rb, self.rj].conj()
        return self._project(np.sum(left * right * self.sign[None], axis=1))

    def residual(self, p) -> np.ndarray:
        return self.forward(p) - self.t

    def jacobian(self, p) -> np.ndarray:
        # M[a,b,i,j] = sum_l Y[a,i,l] conj(Y[b,j,l]) s_l with Y = y B.  For the
        # variable y[c,k,l]:  dM/dRe y = d1 + d2,  dM/dIm y = i d1 - i d2, where
        #   d1 = [a=c, i=k] B[k,l] s_l conj(Y[b,j,l])
        #   d2 = [b=c, j=k] Y[a,i,l] s_l B[k,l]
        Y = self.unpack(p) * self.B[None]
        c, k, l = self.var_c, self.var_k, self.var_l
        Bk = self.B[k, l] * self.sign[l]
        hit1 = (self.ra[:, None] == c[None]) & (self.ri[:, None] == k[None])
        hit2 = (self.rb[:, None] == c[None]) & (self.rj[:, None] == k[None])
        d1 = np.where(hit1, Bk[None] * Y[self.rb[:, None], self.rj[:, None], l[None]].conj(), 0.0)
        d2 = np.where(hit2, Bk[None] * Y[self.ra[:, None], self.ri[:, None], l[None]], 0.0)
        return np.hstack([self._project(d1 + d2), self._project(1j * (d1 - d2))])

    def weights(self) -> np.ndarray:
        """Intensity weight of each real variable, proportional to |delta_l|."""
        _, _, lidx = np.nonzero(self.mask)
        w = np.abs(self.delta_l[lidx]) / np.mean(np.abs(self.delta_l))
        return np.concatenate([w, w])


def _intensity_scaled(prob: _Problem, p) -> float:
    return float(np.sum(prob.weights() * p**2))


def _levenberg(prob: _Problem, p, tol, iters):
    """Damped Gauss-Newton with minimum-norm steps for the underdetermined residual.

    Returns the final point and its relative residual.
    """
    tnorm = max(np.linalg.norm(prob.t), 1.0)
    r = prob.residual(p)
    nr = np.linalg.norm(r)
    mu = 1e-3
    for _ in range(iters):
        if nr <= tol * tnorm:
            break
        Jm = prob.jacobian(p)
        G = Jm @ Jm.T
        g0 = np.trace(G) / len(G)
        while mu <= 1e8:
            Gd = G + mu * g0 * np.eye(len(G))
            step = -Jm.T @ np.linalg.solve(Gd, r)
            rn = prob.residual(p + step)
            nrn = np.linalg.norm(rn)
            if nrn < nr:
                p, r, nr = p + step, rn, nrn
                mu = max(mu / 10.0, 1e-12)
                break
            mu *= 10.0
        else:
            break
    return p, nr / tnorm


def _min_intensity(prob: _Problem, p, tol, iters):
    """Lower the weighted intensity while staying on the solution set.

    Each step jumps to the minimum-weighted-norm point of the linearized
    constraint set, J (p' - p) = -r, then restores feasibility.  Fixed
    points satisfy W p = J^T lambda, the stationarity condition of
    min p^T W p subject to forward(p) = target.
    """
    winv = 1.0 / prob.weights()
    inten = _intensity_scaled(prob, p)
    for _ in range(iters):
        Jm = prob.jacobian(p)
        r = prob.residual(p)
        JW = Jm * winv[None, :]
        lam, *_ = np.linalg.lstsq(JW @ Jm.T, Jm @ p - r, rcond=None)
        target = JW.T @ lam
        t = 1.0
        improved = False
        while t > 1e-3:
            q, res = _levenberg(prob, p + t * (target - p), tol, 30)
            qi = _intensity_scaled(prob, q)
            if res <= tol and qi < inten * (1.0 - 1e-10):
                improved = True
                break
            t *= 0.5
        if not improved:
            break
        rel = (inten - qi) / inten
        p, inten = q, qi
        if rel < 1e-6:
            break
    return p


def two_site_obstruction(spec: SpinNetworkSpec) -> float:
    """h1 . J h2 - det J for two sites, relative to |J|^3.

    Every two-site program obeys h^(1)^T J^(1,2) h^(2) = det J^(1,2), so a
    non-zero value means the target lies outside the reachable set when
    each (axis, site, mode) carries a single sideband.
    """
    if spec.n != 2:
        raise ValueError("defined for two sites only")
    J = spec.J[:, :, 0, 1]
    scale = max(np.linalg.norm(J), np.linalg.norm(spec.h), np.finfo(float).tiny)
    return float((spec.h[:, 0] @ J @ spec.h[:, 1] - np.linalg.det(J)) / scale**3)


def compile_sidebands(
    target: SpinNetworkSpec,
    spectrum: PhononSpectrum,
    delta_l,
    eta_o: float,
    opts: CompileOptions | None = None,
    delta_gs=None,
) -> CompileResult:
    """Find a sideband program whose forward couplings reproduce ``target``.

    Each restart draws a seeded random start and reaches the solution set
    by damped minimum-norm Gauss-Newton, then takes a few steps down the
    intensity sum |Omega|^2 while staying on it.  The ``refine_top``
    lowest-intensity restarts are walked on to a local minimum.  The
    reported program is the best restart under the order (unconverged,
    intensity, restart index), so the outcome is deterministic for a
    fixed seed.

    Raises
    ------
    CompilationError
        If no restart reaches ``opts.tol_rel``.
    """
    opts = opts or CompileOptions()
    n = target.n
    if spectrum.n != n:
        raise ValueError(f"target has {n} sites but spectrum has {spectrum.n} modes")
    delta_l = np.broadcast_to(np.asarray(delta_l, dtype=float), (n,)).copy()
    if delta_gs is None:
        delta_gs = np.zeros(n)
    prob = _Problem(target, spectrum.B, delta_l, opts.components, opts.b_tol)

    def make_program(p):
        y = prob.unpack(p)
        omega = y * np.sqrt(np.abs(delta_l) * prob.scale)[None, None, :] / eta_o
        return SidebandProgram(omega, delta_l, delta_gs, eta_o, spectrum.B)

    if target.norm() == 0.0:
        p0 = np.zeros(2 * prob.nvar)
        return CompileResult(make_program(p0), 0.0, 0.0, 0, [(0, 0.0, 0.0)])

    # converge well below the tolerance so the min-intensity walk has room
    inner_tol = opts.tol_rel * 1e-3
    rng = np.random.default_rng(opts.seed)
    # stage 1: every restart reaches the solution set and takes a few
    # intensity-lowering steps
    cands = []
    for k in range(opts.restarts):
        p0 = rng.normal(size=2 * prob.nvar)
        p, res = _levenberg(prob, p0, inner_tol, opts.max_iter)
        if res <= inner_tol and opts.min_intensity:
            p = _min_intensity(prob, p, inner_tol, opts.warmup_iters)
        cands.append([k, p, res])
    # stage 2: walk the most promising feasible candidates to a local minimum
    feasible = sorted((c for c in cands if c[2] <= inner_tol),
                      key=lambda c: (_intensity_scaled(prob, c[1]), c[0]))
    if opts.min_intensity:
        for c in feasible[: opts.refine_top]:
            c[1] = _min_intensity(prob, c[1], inner_tol, opts.intensity_iters)
    attempts = []
    best = None
    for k, p, res in cands:
        if res <= inner_tol:
            p, res = _levenberg(prob, p, inner_tol * 1e-3, 20)
        inten = _intensity_scaled(prob, p)
        attempts.append((k, float(res), inten))
        log.debug("restart %d: residual %.3e intensity %.6g", k, res, inten)
        key = (res > opts.tol_rel, inten if res <= opts.tol_rel else res, k)
        if best is None or key < best[0]:
            best = (key, p, res, k)

    _, p, res, k = best
    prog = make_program(p)
    if res > opts.tol_rel:
        msg = f"no restart converged: best relative residual {res:.3e} > {opts.tol_rel:.1e}"
        if n == 2:
            msg += (f"; two-site obstruction h1.J.h2 - det J = {two_site_obstruction(target):.3e}"
                    " (relative), target is not reachable")
        raise CompilationError(msg, residual=float(res), program=prog)
    return CompileResult(prog, float(res), prog.intensity(), k, attempts)


def assign_sideband_frequencies(prog: SidebandProgram, spectrum: PhononSpectrum, min_gap: float = 0.0):
    """Sideband frequency table nu[axis, site, mode] for axes (+, -, z).

    nu_(+/-)[i, l] = +/- delta_gs[i] - eps_l + delta_l and
    nu_z[i, l] = -eps_l + delta_l.

    The +/- sidebands of all sites are checked together: each site's band
    of n mode frequencies must not overlap another site's band, and all
    2 n^2 frequencies must be pairwise separated by more than ``min_gap``.
    The z sidebands carry no site label in their frequency (they are
    shared by all sites), so only their n mode frequencies are checked.

    Raises
    ------
    FrequencyCollisionError
        Names the colliding (axis, site, mode) entries.
    """
    n = prog.n
    eps = np.asarray(spectrum.eps, dtype=float)
    if len(eps) != n:
        raise ValueError(f"spectrum has {len(eps)} modes, program has {n}")
    base = -eps[None, :] + prog.delta_l[None, :]
    nu = np.empty((3, n, n))
    nu[0] = prog.delta_gs[:, None] + base
    nu[1] = -prog.delta_gs[:, None] + base
    nu[2] = np.broadcast_to(base, (n, n))

    labels = [(s, i, l) for s in "+-" for i in range(n) for l in range(n)]
    pm = nu[:2].ravel()
    # site bands: interval [min_l nu, max_l nu] for each (sign, site)
    lo = nu[:2].min(axis=2).ravel()
    hi = nu[:2].max(axis=2).ravel()
    order = np.argsort(lo, kind="stable")
    for a, b in zip(order[:-1], order[1:]):
        if lo[b] <= hi[a] + min_gap:
            sa, ia = divmod(int(a), n)
            sb, ib = divmod(int(b), n)
            raise FrequencyCollisionError(
                f"sideband bands of ({'+-'[sa]}, i={ia}) and ({'+-'[sb]}, i={ib}) overlap; "
                "the Zeeman spacing must exceed the phonon bandwidth"
            )
    _check_gaps(pm, labels, min_gap)
    _check_gaps(nu[2, 0], [("z", "*", l) for l in range(n)], min_gap)
    return nu


def _check_gaps(values, labels, min_gap):
    order = np.argsort(values, kind="stable")
    gaps = np.diff(values[order])
    bad = np.flatnonzero(gaps <= min_gap)
    if bad.size:
        pairs = [f"{labels[order[b]]} ~ {labels[order[b + 1]]}" for b in bad[:5]]
        raise FrequencyCollisionError(
            f"sideband frequency collision (gap <= {min_gap:g}): " + ", ".join(pairs)
        )
