"""Effective spin Hamiltonians and the interaction-picture spin-phonon Hamiltonian."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..compiler import AXES, SidebandProgram, SpinNetworkSpec, pm_from_xy
from ..phonons import PhononSpectrum
from .space import HilbertSpace, OperatorExpr, spin_operator

__all__ = [
    "build_effective_spin_hamiltonian",
    "build_full_hamiltonian",
    "TimeDependentHamiltonian",
    "RampEnvelope",
    "OFFRESONANT_LEVELS",
]

OFFRESONANT_LEVELS = ("none", "mismatched", "all")


def build_effective_spin_hamiltonian(spec: SpinNetworkSpec, space: HilbertSpace | None = None) -> OperatorExpr:
    """sum_{i<j} J[a,b,i,j] s_a^i s_b^j + sum h[c,i] s_c^i on ``space``.

    Defaults to the bare spin space of ``spec.n`` sites.
    """
    space = space or HilbertSpace(spec.n)
    if space.n_spins != spec.n:
        raise ValueError(f"space has {space.n_spins} spins, spec has {spec.n}")
    n = spec.n
    H = sp.csr_matrix((2**n, 2**n), dtype=complex)
    for i, j in spec.pairs():
        for a in range(3):
            for b in range(3):
                v = spec.J[a, b, i, j]
                if v != 0:
                    H = H + v * spin_operator(n, {i: AXES[a], j: AXES[b]})
    for i in range(n):
        for c in range(3):
            v = spec.h[c, i]
            if v != 0:
                H = H + v * spin_operator(n, {i: AXES[c]})
    return OperatorExpr(space.embed_spin(H))


class TimeDependentHamiltonian:
    """H(t) = static + sum_k [c_k(t) O_k + conj(c_k(t)) O_k^dagger].

    Each coefficient is a finite sum of exponentials,
    ``c_k(t) = f(t) sum_m amps[k][m] exp(-1j * freqs[k][m] * t)``, so H(t)
    is Hermitian for every t whenever ``static`` is.  The real envelope
    f defaults to 1.
    """

    def __init__(self, dim, static=None, ops=(), amps=(), freqs=(), labels=None, envelope=None):
        self.dim = dim
        self.envelope = envelope
        self.static = sp.csr_matrix((dim, dim), dtype=complex) if static is None else sp.csr_matrix(static)
        self.ops = [sp.csr_matrix(o, dtype=complex) for o in ops]
        self.labels = list(labels) if labels is not None else [None] * len(self.ops)
        self.amps = [np.asarray(a, dtype=complex) for a in amps]
        self.freqs = [np.asarray(f, dtype=float) for f in freqs]
        if not (len(self.ops) == len(self.amps) == len(self.freqs)):
            raise ValueError("ops, amps and freqs must have equal length")
        # flattened exponential table: coefficient index of every term
        if self.ops:
            self._idx = np.concatenate([np.full(len(a), k) for k, a in enumerate(self.amps)])
            self._a = np.concatenate(self.amps) if self._idx.size else np.zeros(0, complex)
            self._w = np.concatenate(self.freqs) if self._idx.size else np.zeros(0)
            stack = [o for o in self.ops] + [o.conj().T.tocsr() for o in self.ops]
            self._stack = sp.vstack(stack, format="csr")
        else:
            self._idx = np.zeros(0, dtype=int)
            self._a = np.zeros(0, complex)
            self._w = np.zeros(0)
            self._stack = None

    @property
    def n_terms(self) -> int:
        return len(self.ops)

    @property
    def is_static(self) -> bool:
        return self._stack is None

    def coefficients(self, t: float) -> np.ndarray:
        c = np.zeros(len(self.ops), dtype=complex)
        if self._idx.size:
            np.add.at(c, self._idx, self._a * np.exp(-1j * self._w * t))
        if self.envelope is not None:
            c *= self.envelope(t)
        return c

    def at(self, t: float) -> sp.csr_matrix:
        H = self.static.copy()
        for ck, o in zip(self.coefficients(t), self.ops):
            if ck != 0:
                H = H + ck * o + np.conj(ck) * o.conj().T
        return H.tocsr()

    def matvec(self, t: float, psi: np.ndarray) -> np.ndarray:
        out = self.static @ psi
        if self._stack is not None:
            c = self.coefficients(t)
            cc = np.concatenate([c, c.conj()])
            v = (self._stack @ psi).reshape(len(cc), self.dim, *psi.shape[1:])
            out = out + np.tensordot(cc, v, axes=(0, 0))
        return out

    def max_frequency(self) -> float:
        return float(np.max(np.abs(self._w))) if self._w.size else 0.0

    def scaled(self, s: float) -> "TimeDependentHamiltonian":
        """Same schedule with every coefficient (and the static part) multiplied by s."""
        return TimeDependentHamiltonian(self.dim, s * self.static, self.ops,
                                        [s * a for a in self.amps], self.freqs, self.labels, self.envelope)

    def with_envelope(self, envelope) -> "TimeDependentHamiltonian":
        return TimeDependentHamiltonian(self.dim, self.static, self.ops, self.amps, self.freqs,
                                        self.labels, envelope)


class RampEnvelope:
    """Pulse with a sin^2 rise of length ``t_ramp``, a flat top, and (if
    ``t_total`` is given) a sin^2 fall ending at ``t_total``.

    Switching the Raman fields on suddenly leaves each phonon mode with a
    free oscillation set by the initial spin state; once the spins have
    moved it no longer cancels, so the modes end up entangled with the
    spins.  Ramps slow compared with 1/Delta_l avoid this.
    """

    def __init__(self, t_ramp: float, t_total: float | None = None):
        if t_ramp < 0 or (t_total is not None and t_total < 2 * t_ramp):
            raise ValueError("need 0 <= 2 t_ramp <= t_total")
        self.t_ramp = float(t_ramp)
        self.t_total = None if t_total is None else float(t_total)

    @classmethod
    def for_area(cls, t_eff: float, t_ramp: float) -> "RampEnvelope":
        """Envelope with integral of f^2 equal to ``t_eff`` (second-order couplings scale as f^2)."""
        return cls(t_ramp, t_eff + 1.25 * t_ramp)

    def fall_start(self, t_eff: float) -> float:
        """Start of the fall that makes the integral of f^2 equal ``t_eff``."""
        return t_eff + 0.25 * self.t_ramp

    def _edge(self, x):
        return 1.0 if x >= self.t_ramp else float(np.sin(0.5 * np.pi * x / self.t_ramp) ** 2)

    def __call__(self, t):
        if t <= 0:
            return 0.0
        if self.t_total is None:
            return self._edge(t) if self.t_ramp else 1.0
        if t >= self.t_total:
            return 0.0
        if self.t_ramp == 0:
            return 1.0
        return self._edge(min(t, self.t_total - t))

    def area(self) -> float:
        """Integral of f^2 (infinite without a fall)."""
        return np.inf if self.t_total is None else self.t_total - 1.25 * self.t_ramp


def build_full_hamiltonian(prog: SidebandProgram, spectrum: PhononSpectrum, space: HilbertSpace,
                           keep_offresonant="mismatched", envelope=None) -> TimeDependentHamiltonian:
    """Interaction-picture spin-phonon Hamiltonian driven by ``prog``.

    Each sideband (site j, axis a in {+, -, z}, mode l) is a global field
    whose spin operator S_+ = sigma_-, S_- = sigma_+, S_z = sigma_z acts on
    any site i together with b_l'^dagger of any mode l'.  The coupling is
    conj(Omega^(j)_(a,l)) eta_o B[i, l'] with phase
    exp(-1j (nu^(j)_(a,l) - zeta_a Delta_gs^(i) + eps_l') t), plus the
    Hermitian conjugate.  Terms detuned by about 2 Delta_gs or 2 eps (the
    counter-rotating partners) are never included.

    ``keep_offresonant`` selects which pairings are kept:

    * ``"none"``: resonant pairings only (l' = l, and i = j for +/-),
      each rotating at exp(-1j Delta_l t).
    * ``"mismatched"``: also the sideband-mode mismatches l' != l
      (offset eps_l' - eps_l).
    * ``"all"``: also the +/- sidebands of other sites (offset of the
      Zeeman difference).

    z sidebands carry no Zeeman offset, so they reach every site at the
    same detuning and are kept for all i.  ``True``/``False`` map to
    ``"mismatched"``/``"none"``.  ``envelope`` (for instance a
    :class:`RampEnvelope`) multiplies every Raman amplitude.
    """
    if spectrum is None:
        raise ValueError("a phonon spectrum is required")
    if keep_offresonant is True:
        keep_offresonant = "mismatched"
    elif keep_offresonant is False:
        keep_offresonant = "none"
    if keep_offresonant not in OFFRESONANT_LEVELS:
        raise ValueError(f"keep_offresonant must be one of {OFFRESONANT_LEVELS}")
    n = prog.n
    if space.n_spins != n or space.n_modes != n:
        raise ValueError(f"space must hold {n} spins and {n} modes, got {space}")
    eps = np.asarray(spectrum.eps, dtype=float)
    B = np.asarray(spectrum.B, dtype=float)

    om_plus, om_minus = pm_from_xy(prog.omega[0], prog.omega[1])
    fields = {"+": om_plus, "-": om_minus, "z": prog.omega[2]}
    spin_of = {"+": "-", "-": "+", "z": "z"}
    zeta = {"+": 1.0, "-": -1.0, "z": 0.0}
    dgs = prog.delta_gs

    ops, amps, freqs, labels = [], [], [], []
    for i in range(n):
        for a in ("+", "-", "z"):
            Om = fields[a]
            for lp in range(n):
                coupling = prog.eta_o * B[i, lp]
                if coupling == 0:
                    continue
                A, W = [], []
                for j in range(n):
                    if a != "z" and j != i and keep_offresonant != "all":
                        continue
                    for l in range(n):
                        if Om[j, l] == 0:
                            continue
                        if l != lp and keep_offresonant == "none":
                            continue
                        nu = zeta[a] * dgs[j] - eps[l] + prog.delta_l[l]
                        A.append(np.conj(Om[j, l]) * coupling)
                        W.append(nu - zeta[a] * dgs[i] + eps[lp])
                if not A:
                    continue
                ops.append(space.spin_phonon({i: spin_of[a]}, lp, raising=True))
                amps.append(A)
                freqs.append(W)
                labels.append((i, a, lp))
    return TimeDependentHamiltonian(space.dim, None, ops, amps, freqs, labels, envelope)
