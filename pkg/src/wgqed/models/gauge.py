"""SU(n) spins encoded in blocks of n two-level atoms under a blockade constraint.

Each logical spin is a block of n physical spins restricted to its
single-excitation states |alpha> = |s> on atom alpha and |g> elsewhere.
The block charge G = (number of |s> in the block) - 1 vanishes exactly
on those states, and H_G = lambda_G sum G^2 gaps everything else out.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..dynamics.space import spin_operator
from .ggm import ggm_basis, transition

__all__ = [
    "GaugeEncoding",
    "HierarchyWarning",
    "gauge_blocks",
    "sector_isometry",
    "logical_operator",
    "sun_heisenberg",
    "effective_sun_heisenberg",
    "global_generators",
    "low_band_spectrum",
]

MAX_PHYSICAL_SPINS = 16


class HierarchyWarning(UserWarning):
    """Perturbative couplings are not small compared with the gauge gap."""


@dataclass
class GaugeEncoding:
    """``n_blocks`` logical SU(n) spins on ``n * n_blocks`` physical atoms.

    ``blocks`` defaults to consecutive runs of n atoms.
    """

    n: int
    n_blocks: int
    lambda_G: float
    blocks: list = field(default=None)

    def __post_init__(self):
        if self.n < 2 or self.n_blocks < 1:
            raise ValueError("need n >= 2 and at least one block")
        if self.blocks is None:
            self.blocks = [list(range(b * self.n, (b + 1) * self.n)) for b in range(self.n_blocks)]
        self.blocks = [list(map(int, b)) for b in self.blocks]
        if len(self.blocks) != self.n_blocks or any(len(b) != self.n for b in self.blocks):
            raise ValueError(f"expected {self.n_blocks} blocks of size {self.n}")
        flat = sorted(itertools.chain.from_iterable(self.blocks))
        if flat != list(range(self.n * self.n_blocks)):
            raise ValueError("every physical site must sit in exactly one block")

    @property
    def n_sites(self) -> int:
        return self.n * self.n_blocks

    @property
    def charge(self) -> float:
        """Q = (n - 2) / 2."""
        return (self.n - 2) / 2

    @property
    def logical_dim(self) -> int:
        return self.n ** self.n_blocks

    def _check_cap(self, cap=MAX_PHYSICAL_SPINS):
        if self.n_sites > cap:
            raise ValueError(f"{self.n_sites} physical spins exceed the cap of {cap}")


def gauge_blocks(enc: GaugeEncoding):
    """Block charges, blockade Hamiltonian and the projector onto the gauge sector.

    With sigma_z = +1 on |s>, G = sum sigma_z / 2 + Q counts excitations
    minus one.  Returns ``(G, H_G, P)`` with ``G`` a list of sparse
    operators, one per block, and ``P`` of rank n ** n_blocks.
    """
    enc._check_cap()
    N = enc.n_sites
    dim = 2**N
    eye = sp.identity(dim, format="csr", dtype=complex)
    G = []
    for blk in enc.blocks:
        z = sum(spin_operator(N, {i: "z"}) for i in blk)
        G.append((0.5 * z + enc.charge * eye).tocsr())
    H_G = enc.lambda_G * sum(g @ g for g in G)
    V = sector_isometry(enc)
    P = (V @ V.conj().T).tocsr()
    return G, H_G.tocsr(), P


def _physical_index(enc: GaugeEncoding, levels) -> int:
    """Physical basis index of the product of |alpha_b> over blocks (|s> is bit 0)."""
    N = enc.n_sites
    bits = np.ones(N, dtype=int)
    for blk, a in zip(enc.blocks, levels):
        bits[blk[a]] = 0
    return int(bits @ (1 << np.arange(N - 1, -1, -1)))


def sector_isometry(enc: GaugeEncoding) -> sp.csr_matrix:
    """Columns are the physical images of the logical basis, block 0 most significant."""
    enc._check_cap()
    rows = [_physical_index(enc, lv) for lv in itertools.product(range(enc.n), repeat=enc.n_blocks)]
    cols = np.arange(len(rows))
    return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(2**enc.n_sites, len(rows)), dtype=complex)


def logical_operator(n: int, n_blocks: int, ops: dict) -> np.ndarray:
    """kron of n x n operators ``ops[block]`` (identity elsewhere) on the logical space."""
    out = np.ones((1, 1), dtype=complex)
    for b in range(n_blocks):
        out = np.kron(out, ops.get(b, np.eye(n)))
    return out


def sun_heisenberg(couplings, n: int) -> np.ndarray:
    """sum_{i<j} J_ij sum_a Lambda_a^(i) Lambda_a^(j) on (C^n)^(n_sites)."""
    Jm = np.asarray(couplings, dtype=float)
    m = Jm.shape[0]
    basis = ggm_basis(n)
    H = np.zeros((n**m, n**m), dtype=complex)
    for i in range(m):
        for j in range(i + 1, m):
            if Jm[i, j] != 0:
                for L in basis:
                    H += Jm[i, j] * logical_operator(n, m, {i: L, j: L})
    return H


def global_generators(n: int, n_blocks: int) -> list:
    """sum over blocks of each GGM; these commute with any SU(n)-invariant Hamiltonian."""
    return [sum(logical_operator(n, n_blocks, {b: L}) for b in range(n_blocks)) for L in ggm_basis(n)]


def effective_sun_heisenberg(enc: GaugeEncoding, D, O, max_ratio: float = 0.1, compensate: bool = True):
    """Physical coupling H_I and the logical Hamiltonian it produces below the gauge gap.

    For each pair of blocks (b, c), b < c,

        H_I = D_phys sum_alpha s_ss^(b,alpha) s_ss^(c,alpha)
              + O sum_alpha (s_+^(b,alpha) s_-^(c,alpha) + h.c.),

    and to second order in O the gauge sector sees

        H_eff = D sum_alpha T_aa^(b) T_aa^(c) + J sum_(alpha != beta) T_ab^(b) T_ba^(c),

    with J = -O^2 / lambda_G, up to a constant.  Hopping an excitation
    out of a block and back also lowers every state with the two blocks in
    different levels by |J|; with ``compensate`` the physical density
    coupling is set to D_phys = D + J so that the logical diagonal coupling
    is exactly D.  D = J then gives the SU(n) Heisenberg magnet.

    ``D`` and ``O`` are symmetric (n_blocks x n_blocks) arrays (or scalars
    for two blocks).  Returns ``(H_I, H_eff)``: a sparse physical operator
    and a dense logical matrix.
    """
    enc._check_cap()
    m = enc.n_blocks
    D = np.broadcast_to(np.asarray(D, dtype=float), (m, m)) if np.ndim(D) else np.full((m, m), float(D))
    O = np.broadcast_to(np.asarray(O, dtype=float), (m, m)) if np.ndim(O) else np.full((m, m), float(O))
    lam = enc.lambda_G
    off = ~np.eye(m, dtype=bool)
    worst = max(np.max(np.abs(D[off])), np.max(np.abs(O[off]))) / abs(lam) if m > 1 else 0.0
    if worst > max_ratio:
        warnings.warn(f"couplings reach {worst:.3g} of lambda_G (limit {max_ratio})", HierarchyWarning,
                      stacklevel=2)
    N = enc.n_sites
    n = enc.n
    H_I = sp.csr_matrix((2**N, 2**N), dtype=complex)
    H_eff = np.zeros((n**m, n**m), dtype=complex)
    for b in range(m):
        for c in range(b + 1, m):
            J = -O[b, c] ** 2 / lam
            d_phys = D[b, c] + J if compensate else D[b, c]
            for a in range(n):
                ib, ic = enc.blocks[b][a], enc.blocks[c][a]
                if d_phys:
                    H_I = H_I + d_phys * spin_operator(N, {ib: "ss", ic: "ss"})
                if O[b, c]:
                    hop = spin_operator(N, {ib: "+", ic: "-"})
                    H_I = H_I + O[b, c] * (hop + hop.conj().T)
            for a in range(n):
                for bb in range(n):
                    if a == bb:
                        w = D[b, c]
                    else:
                        w = J
                    if w:
                        H_eff += w * logical_operator(n, m, {b: transition(n, a, bb), c: transition(n, bb, a)})
    return H_I.tocsr(), H_eff


def low_band_spectrum(H, enc: GaugeEncoding, tol: float = 1e-15, max_iter: int = 50) -> np.ndarray:
    """Eigenvalues of ``H`` continuing the gauge sector, to near machine precision.

    Plain diagonalization carries absolute errors of order eps * lambda_G,
    which swamps the tiny corrections of interest.  Instead each level is
    found from the energy-dependent sector Hamiltonian

        H_PP + H_PQ (E - H_QQ)^-1 H_QP,

    iterating E to self-consistency (Loewdin partitioning); the errors are
    then set by the sector couplings only.
    """
    H = sp.csr_matrix(H)
    V = sector_isometry(enc)
    inside = np.zeros(H.shape[0], dtype=bool)
    inside[V.nonzero()[0]] = True
    order = V.nonzero()[0][np.argsort(V.nonzero()[1])]
    out_idx = np.nonzero(~inside)[0]
    Hd = H.toarray()
    Hpp = Hd[np.ix_(order, order)]
    Hpq = Hd[np.ix_(order, out_idx)]
    Hqq = Hd[np.ix_(out_idx, out_idx)]
    e0 = np.linalg.eigvalsh(Hpp)
    levels = np.empty_like(e0)
    for k, E in enumerate(e0):
        for _ in range(max_iter):
            K = np.linalg.solve(E * np.eye(len(Hqq)) - Hqq, Hpq.conj().T)
            E_new = np.linalg.eigvalsh(Hpp + Hpq @ K)[k]
            if abs(E_new - E) <= tol * max(1.0, abs(E)):
                E = E_new
                break
            E = E_new
        levels[k] = E
    return np.sort(levels)
