"""Four-point out-of-time-order correlators of SU(n) spins read out on one ancilla qubit.

The ancilla is put in (|g> + |s>)/sqrt(2); controlled gates then write

    |A> = Lambda_a'^(i) Lambda_b'^(j)(tau) |psi>     on the |s> branch,
    |B> = Lambda_b^(j)(tau) Lambda_a^(i) |psi>       on the |g> branch,

with O(tau) = exp(iH tau) O exp(-iH tau), and the ancilla coherence
<sigma_+> = <A|B> / 2 returns

    C = <Lambda_b'(tau) Lambda_a' Lambda_b(tau) Lambda_a> = <sigma_x> + i <sigma_y>.

Backward evolution is forward evolution under -H.  Generators that are not
unitary (every GGM for n > 2) are written as (s/2)(U + U^dagger) with
U = exp(i arccos(Lambda / s)), s the operator norm, and the correlator is
reassembled from the 2-16 unitary circuits this produces.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .dynamics.space import PAULI, spin_operator
from .models.gauge import HierarchyWarning, logical_operator
from .models.ggm import ggm_basis

__all__ = [
    "NonUnitaryGateError",
    "OtocCircuit",
    "controlled_ggm",
    "controlled_ggm_via_gauge",
    "gauge_gate_on_sector",
    "gate_fidelity",
    "unitary_dilation",
    "pair_unitary",
    "otoc_circuit",
    "otoc_run",
    "otoc_direct",
    "otoc_composite_direct",
    "otoc_weighted_sum",
    "MAX_OTOC_DIM",
]

MAX_OTOC_DIM = 4096
# Hadamard with |g> as the computational zero, in the (|s>, |g>) ordering
_HADAMARD = np.array([[-1, 1], [1, 1]], dtype=complex) / np.sqrt(2)
_P_S = PAULI["ss"]
_P_G = PAULI["gg"]


class NonUnitaryGateError(ValueError):
    """A controlled gate was requested for an operator that is not unitary."""


def _is_unitary(U, tol=1e-12) -> bool:
    return np.allclose(U @ U.conj().T, np.eye(len(U)), atol=tol, rtol=0)


def controlled_ggm(Lambda, require_unitary: bool = True) -> np.ndarray:
    """|g><g| (x) I + |s><s| (x) Lambda, ancilla first.

    By default only unitary operators are accepted: the n = 2 generators,
    or any unitary stand-in.  For n > 2 write the generator as a sum of
    unitaries (see :func:`unitary_dilation`) and control each one.
    ``require_unitary=False`` returns the block operator as is.
    """
    L = np.asarray(Lambda, dtype=complex)
    if require_unitary and not _is_unitary(L):
        raise NonUnitaryGateError(
            "operator is not unitary; split it with unitary_dilation() and control each term")
    return np.kron(_P_G, np.eye(len(L))) + np.kron(_P_S, L)


def unitary_dilation(Lambda):
    """(scale, U) with Lambda = scale * (U + U^dagger) / 2 and U unitary.

    Unitary Hermitian input returns (1, Lambda).
    """
    L = np.asarray(Lambda, dtype=complex)
    if _is_unitary(L):
        return 1.0, L
    w, v = np.linalg.eigh(L)
    s = float(np.max(np.abs(w)))
    theta = np.arccos(np.clip(w / s, -1.0, 1.0))
    return s, (v * np.exp(1j * theta)) @ v.conj().T


def pair_unitary(Lambda) -> np.ndarray:
    """Lambda + (I - Lambda^2): an off-diagonal generator completed by identity off its support."""
    L = np.asarray(Lambda, dtype=complex)
    U = L + np.eye(len(L)) - L @ L
    if not _is_unitary(U):
        raise NonUnitaryGateError("only symmetric or antisymmetric generators have a pair unitary")
    return U


# --- physical realization through the blockade ------------------------------

def controlled_ggm_via_gauge(chi_a: complex, chi_b: complex, lambda_G: float, n: int = 3,
                             alpha: int = 0, beta: int = 1, max_ratio: float = 0.1):
    """Ancilla-block Hamiltonian whose evolution is C-Lambda on the gauge sector.

    Sites: the ancilla (site 0) and one block of ``n`` atoms (sites 1..n).
    The drive chi_a s_ss^A s_+^(alpha) + chi_b s_ss^A s_+^(beta) + h.c.
    leaves the sector; returning through a state of charge +-1 gives, with
    the ancilla in |s>,

        -(|chi_a|^2 + |chi_b|^2) / lambda_G  -  2 |chi~| (cos(phi) Lambda^(s) + sin(phi) Lambda^(a))

    with chi~ = conj(chi_a) chi_b / lambda_G = |chi~| e^(i phi), on the pair
    (alpha, beta), alpha < beta.  After t = pi / (4 |chi~|) the pair has
    picked up exp(i pi/2 Lambda) = i Lambda.  Two extra diagonal terms,
    an ancilla-controlled Stark shift on the spectator atoms and an ancilla
    phase, turn that into C-U with U = :func:`pair_unitary` (Lambda), i.e.
    Lambda on the pair and identity on the spectators (C-Lambda for n = 2).

    Returns ``(H, t)``; ``H`` is sparse on the (n+1)-atom space and includes
    the blockade term.
    """
    if not 0 <= alpha < beta < n:
        raise ValueError("need 0 <= alpha < beta < n")
    chi_t = np.conj(chi_a) * chi_b / lambda_G
    if chi_t == 0:
        raise ValueError("both couplings must be non-zero to produce a gate")
    ratio = max(abs(chi_a), abs(chi_b)) / abs(lambda_G)
    if ratio > max_ratio:
        warnings.warn(f"drive is {ratio:.3g} of lambda_G (limit {max_ratio})", HierarchyWarning, stacklevel=2)
    N = n + 1
    H = _blockade(n, lambda_G)
    for site, chi in ((alpha + 1, chi_a), (beta + 1, chi_b)):
        term = chi * spin_operator(N, {0: "ss", site: "+"})
        H = H + term + term.conj().T
    t = np.pi / (4 * abs(chi_t))
    shift = -(abs(chi_a) ** 2 + abs(chi_b) ** 2) / lambda_G
    # pair acquires i * Lambda; spectators get the same factor i from the Stark shift
    stark = -np.pi / (2 * t)
    for c in range(n):
        if c not in (alpha, beta):
            H = H + stark * spin_operator(N, {0: "ss", c + 1: "ss"})
    # remove the branch phase exp(-i t shift) * i
    H = H + (-shift + np.pi / (2 * t)) * spin_operator(N, {0: "ss"})
    return H.tocsr(), t


def _blockade(n: int, lambda_G: float) -> sp.csr_matrix:
    """lambda_G G^2 for one block on sites 1..n (site 0 is the ancilla)."""
    N = n + 1
    z = sum(spin_operator(N, {i: "z"}) for i in range(1, N))
    G = 0.5 * z + (n - 2) / 2 * sp.identity(2**N, format="csr", dtype=complex)
    return (lambda_G * (G @ G)).tocsr()


def gauge_gate_on_sector(H, t: float, n: int) -> np.ndarray:
    """exp(-iHt) compressed to ancilla (x) single-excitation block states (ancilla first)."""
    N = n + 1
    cols = []
    for anc in (0, 1):  # |s>, |g>
        for a in range(n):
            bits = np.ones(N, dtype=int)
            bits[0] = anc
            bits[1 + a] = 0
            cols.append(int(bits @ (1 << np.arange(N - 1, -1, -1))))
    U = expm(-1j * t * H.toarray())
    return U[np.ix_(cols, cols)]


def gate_fidelity(U, target) -> float:
    """|tr(target^dagger U)|^2 / d^2 (1 only for equality up to a global phase)."""
    d = len(target)
    return float(abs(np.trace(np.asarray(target).conj().T @ U)) ** 2 / d**2)


# --- circuit -----------------------------------------------------------------

@dataclass
class OtocCircuit:
    """Gate list for one correlator C_{a b a' b'} on ``n_sites`` SU(n) spins plus an ancilla.

    ``terms`` holds (weight, gates) pairs whose weighted sum of ancilla
    readouts gives C; each gate is ``("h",)``, ``("x",)``,
    ``("evolve", sign)`` or ``("c", site, k, choice)``, the latter a
    controlled version of generator k on ``site`` with ``choice`` 0 for the
    generator itself, +1 / -1 for its dilation U / U^dagger.
    """

    n: int
    n_sites: int
    i: int
    alpha: int
    alpha_p: int
    j: int
    beta: int
    beta_p: int
    tau: float
    H: np.ndarray = field(repr=False)
    terms: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return 2 * self.n**self.n_sites

    def to_text(self) -> str:
        lines = [f"n {self.n}", f"sites {self.n_sites}", f"tau {self.tau!r}",
                 f"correlator {self.i} {self.alpha} {self.alpha_p} {self.j} {self.beta} {self.beta_p}"]
        for w, gates in self.terms:
            lines.append(f"term {w!r}")
            for g in gates:
                lines.append(" ".join(str(x) for x in g))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, H) -> "OtocCircuit":
        head, terms = {}, []
        for raw in text.splitlines():
            parts = raw.split()
            if not parts:
                continue
            key = parts[0]
            if key in ("n", "sites"):
                head[key] = int(parts[1])
            elif key == "tau":
                head[key] = float(parts[1])
            elif key == "correlator":
                head[key] = tuple(int(p) for p in parts[1:7])
            elif key == "term":
                terms.append((float(parts[1]), []))
            elif key in ("h", "x"):
                terms[-1][1].append((key,))
            elif key == "evolve":
                terms[-1][1].append((key, int(parts[1])))
            elif key == "c":
                terms[-1][1].append((key,) + tuple(int(p) for p in parts[1:4]))
            else:
                raise ValueError(f"unknown circuit record {raw!r}")
        i, a, ap, j, b, bp = head["correlator"]
        return cls(head["n"], head["sites"], i, a, ap, j, b, bp, head["tau"], np.asarray(H), terms)


def otoc_circuit(i, alpha, alpha_p, j, beta, beta_p, H, tau, n: int, n_sites: int) -> OtocCircuit:
    """Gate sequence measuring <Lambda_b'(tau) Lambda_a' Lambda_b(tau) Lambda_a> (generator indices into ggm_basis(n))."""
    H = np.asarray(H, dtype=complex)
    if H.shape != (n**n_sites,) * 2:
        raise ValueError(f"H must be {n**n_sites} x {n**n_sites}")
    if 2 * n**n_sites > MAX_OTOC_DIM:
        raise ValueError(f"circuit dimension exceeds {MAX_OTOC_DIM}")
    basis = ggm_basis(n)
    scales, unit = [], []
    for k in (alpha, beta, beta_p, alpha_p):
        s, _ = unitary_dilation(basis[k])
        scales.append(s)
        unit.append(s == 1.0 and _is_unitary(basis[k]))
    choices = [(0,) if u else (1, -1) for u in unit]
    terms = []
    for ca, cb, cbp, cap in itertools.product(*choices):
        w = float(np.prod([s if u else s / 2 for s, u in zip(scales, unit)]))
        # primed operators enter <A| conjugated, so U^dagger on the ket gives U in C
        gates = [("h",),
                 ("x",), ("c", i, alpha, ca), ("x",),
                 ("evolve", 1),
                 ("x",), ("c", j, beta, cb), ("x",),
                 ("c", j, beta_p, -cbp),
                 ("evolve", -1),
                 ("c", i, alpha_p, -cap)]
        terms.append((w, gates))
    return OtocCircuit(n, n_sites, i, alpha, alpha_p, j, beta, beta_p, float(tau), H, terms)


def _site_operator(n, n_sites, site, op):
    return logical_operator(n, n_sites, {site: op})


def _ancilla_readout(state, dim_sys, shots, rng):
    psi = state.reshape(2, dim_sys)
    sp_ = np.vdot(psi[0], psi[1])  # <sigma_+> = <psi|s><g|psi>
    sx, sy = 2 * sp_.real, 2 * sp_.imag
    if shots:
        sx = 2 * rng.binomial(shots, (1 + sx) / 2) / shots - 1
        sy = 2 * rng.binomial(shots, (1 + sy) / 2) / shots - 1
    return sx, sy


def otoc_run(circuit: OtocCircuit, psi0, shots: int | None = None, seed=None) -> complex:
    """Execute the circuit from |psi0> (x) |g>_A and return <sigma_x> + i <sigma_y> (weighted over terms).

    With ``shots`` each ancilla expectation is replaced by a seeded
    binomial estimate from that many projective measurements.
    """
    n, m = circuit.n, circuit.n_sites
    d = n**m
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (d,):
        raise ValueError(f"psi0 must have length {d}")
    if not np.isclose(np.linalg.norm(psi0), 1.0, atol=1e-10):
        raise ValueError("psi0 must be normalized")
    rng = np.random.default_rng(seed)
    basis = ggm_basis(n)
    w, v = np.linalg.eigh(circuit.H)
    U_fwd = (v * np.exp(-1j * w * circuit.tau)) @ v.conj().T
    U_bwd = (v * np.exp(1j * w * circuit.tau)) @ v.conj().T  # forward in time under -H
    X = np.kron(PAULI["x"], np.eye(d))
    Had = np.kron(_HADAMARD, np.eye(d))
    ev = {1: np.kron(np.eye(2), U_fwd), -1: np.kron(np.eye(2), U_bwd)}
    cache = {}

    def ctrl(site, k, choice):
        key = (site, k, choice)
        if key not in cache:
            if choice == 0:
                op = basis[k]
            else:
                _, U = unitary_dilation(basis[k])
                op = U if choice > 0 else U.conj().T
            cache[key] = controlled_ggm(_site_operator(n, m, site, op))
        return cache[key]

    total = 0j
    for weight, gates in circuit.terms:
        state = np.kron(np.array([0, 1], dtype=complex), psi0)  # ancilla |g>
        for g in gates:
            if g[0] == "h":
                state = Had @ state
            elif g[0] == "x":
                state = X @ state
            elif g[0] == "evolve":
                state = ev[g[1]] @ state
            else:
                state = ctrl(*g[1:]) @ state
        sx, sy = _ancilla_readout(state, d, shots, rng)
        total += weight * (sx + 1j * sy)
    return complex(total)


# --- direct oracle -------------------------------------------------------------

def _heisenberg(op, H, tau):
    w, v = np.linalg.eigh(H)
    U = (v * np.exp(-1j * w * tau)) @ v.conj().T
    return U.conj().T @ op @ U


def otoc_direct(i, alpha, alpha_p, j, beta, beta_p, H, tau, psi0, n: int, n_sites: int) -> complex:
    """<psi0| Lambda_b'^(j)(tau) Lambda_a'^(i) Lambda_b^(j)(tau) Lambda_a^(i) |psi0> by exact exponentiation."""
    H = np.asarray(H, dtype=complex)
    if n**n_sites > MAX_OTOC_DIM:
        raise ValueError(f"dimension exceeds {MAX_OTOC_DIM}")
    basis = ggm_basis(n)
    Va = _site_operator(n, n_sites, i, basis[alpha])
    Vap = _site_operator(n, n_sites, i, basis[alpha_p])
    Wb = _heisenberg(_site_operator(n, n_sites, j, basis[beta]), H, tau)
    Wbp = _heisenberg(_site_operator(n, n_sites, j, basis[beta_p]), H, tau)
    psi0 = np.asarray(psi0, dtype=complex)
    return complex(np.vdot(psi0, Wbp @ Vap @ Wb @ Va @ psi0))


def otoc_composite_direct(v, w, i, j, H, tau, psi0, n: int, n_sites: int) -> complex:
    """<W(tau)^dagger V^dagger W(tau) V> for V = sum v_a Lambda_a^(i), W = sum w_b Lambda_b^(j)."""
    basis = ggm_basis(n)
    V = _site_operator(n, n_sites, i, basis.compose(v))
    W = _heisenberg(_site_operator(n, n_sites, j, basis.compose(w)), np.asarray(H, dtype=complex), tau)
    psi0 = np.asarray(psi0, dtype=complex)
    return complex(np.vdot(psi0, W.conj().T @ V.conj().T @ W @ V @ psi0))


def otoc_weighted_sum(v, w, i, j, H, tau, psi0, n: int, n_sites: int, correlator=None) -> complex:
    """sum conj(w_b') conj(v_a') w_b v_a C_{a b a' b'}; ``correlator`` defaults to :func:`otoc_direct`.

    Terms with a zero weight are skipped.
    """
    corr = otoc_direct if correlator is None else correlator
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    nz_v = np.flatnonzero(v)
    nz_w = np.flatnonzero(w)
    total = 0j
    for a, ap in itertools.product(nz_v, nz_v):
        for b, bp in itertools.product(nz_w, nz_w):
            c = corr(i, a, ap, j, b, bp, H, tau, psi0, n, n_sites)
            total += np.conj(w[bp]) * np.conj(v[ap]) * w[b] * v[a] * c
    return complex(total)
