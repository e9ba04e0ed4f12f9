"""XXZ antiferromagnet with vector chirality on Kagome clusters."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from ..compiler import SpinNetworkSpec
from ..dynamics.hamiltonians import build_effective_spin_hamiltonian
from ..dynamics.space import spin_operator

__all__ = [
    "KagomeLattice",
    "LatticeError",
    "star_of_david",
    "kagome_csl",
    "vector_chirality",
    "scalar_chirality",
    "ground_states",
]


class LatticeError(ValueError):
    """Malformed edge or triangle records."""


def _turn(p):
    """z component of (p1 - p0) x (p2 - p0); negative for a clockwise triple."""
    a, b = p[1] - p[0], p[2] - p[0]
    return a[0] * b[1] - a[1] * b[0]


@dataclass
class KagomeLattice:
    """Sites, nearest-neighbour edges and oriented triangles.

    Each triangle (i, j, k) lists its corners in circulation order; its
    oriented edges are i->j, j->k, k->i.  ``positions`` (optional, (n, 2))
    lets :meth:`validate` check that every triangle runs clockwise.
    """

    n_sites: int
    edges: list
    triangles: list
    positions: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.edges = [tuple(int(x) for x in e) for e in self.edges]
        self.triangles = [tuple(int(x) for x in t) for t in self.triangles]
        self.validate()

    @classmethod
    def from_text(cls, text_or_path) -> "KagomeLattice":
        from ..io import read_lattice

        n, edges, tris = read_lattice(text_or_path)
        return cls(n, edges, tris)

    def oriented_edges(self):
        for i, j, k in self.triangles:
            yield from ((i, j), (j, k), (k, i))

    def validate(self) -> None:
        n = self.n_sites
        und = set()
        for e in self.edges:
            if len(e) != 2 or e[0] == e[1] or not all(0 <= x < n for x in e):
                raise LatticeError(f"bad edge {e} for {n} sites")
            und.add(frozenset(e))
        for t in self.triangles:
            if len(t) != 3 or len(set(t)) != 3 or not all(0 <= x < n for x in t):
                raise LatticeError(f"bad triangle {t}")
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                if frozenset((a, b)) not in und:
                    raise LatticeError(f"triangle {t} uses ({a}, {b}), which is not an edge")
            if self.positions is not None:
                if _turn(np.asarray(self.positions)[list(t)]) >= 0:
                    raise LatticeError(f"triangle {t} is not clockwise")


def star_of_david() -> KagomeLattice:
    """12-site Kagome cluster: a hexagon (sites 0-5) with a triangle on each side.

    Outer site 6 + k caps the hexagon edge (k, k+1).  All 18 bonds are
    nearest neighbours and the six triangles are listed clockwise.
    """
    ang = np.pi / 2 - np.arange(6) * np.pi / 3
    inner = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    outer = inner + np.roll(inner, -1, axis=0)  # apex of the equilateral triangle on each side
    pos = np.vstack([inner, outer])
    edges, tris = [], []
    for k in range(6):
        a, b, c = k, (k + 1) % 6, 6 + k
        edges += [(a, b), (b, c), (c, a)]
        tris.append((a, b, c) if _turn(pos[[a, b, c]]) < 0 else (a, c, b))
    return KagomeLattice(12, edges, tris, pos)


def kagome_csl(lattice: KagomeLattice | None, J_perp: float, J_zz: float, lam: float) -> SpinNetworkSpec:
    """sum_<ij> [J_perp (s_x s_x + s_y s_y) + J_zz s_z s_z] + lam * vector chirality.

    The chirality adds lam (s_x^i s_y^j - s_y^i s_x^j) for each oriented
    triangle edge i->j, once per triangle containing it.  ``None`` selects
    :func:`star_of_david`.
    """
    lat = star_of_david() if lattice is None else lattice
    spec = SpinNetworkSpec(lat.n_sites)
    for i, j in lat.edges:
        spec.add("x", "x", i, j, J_perp)
        spec.add("y", "y", i, j, J_perp)
        spec.add("z", "z", i, j, J_zz)
    for i, j in lat.oriented_edges():
        spec.add("x", "y", i, j, lam)
        spec.add("y", "x", i, j, -lam)
    return spec


def vector_chirality(lattice: KagomeLattice) -> sp.csr_matrix:
    """sum over oriented triangle edges of z . (s^i x s^j)."""
    n = lattice.n_sites
    op = sp.csr_matrix((2**n, 2**n), dtype=complex)
    for i, j in lattice.oriented_edges():
        op = op + spin_operator(n, {i: "x", j: "y"}) - spin_operator(n, {i: "y", j: "x"})
    return op.tocsr()


def scalar_chirality(lattice: KagomeLattice) -> sp.csr_matrix:
    """sum over triangles (i, j, k) of s^i . (s^j x s^k).

    Three-body, so it is a measurement operator only; the two-local
    compiler cannot realize it.
    """
    n = lattice.n_sites
    eps = {("x", "y", "z"): 1, ("y", "z", "x"): 1, ("z", "x", "y"): 1,
           ("x", "z", "y"): -1, ("z", "y", "x"): -1, ("y", "x", "z"): -1}
    op = sp.csr_matrix((2**n, 2**n), dtype=complex)
    for i, j, k in lattice.triangles:
        for (a, b, c), s in eps.items():
            op = op + s * spin_operator(n, {i: a, j: b, k: c})
    return op.tocsr()


def ground_states(spec: SpinNetworkSpec, k: int = 4, dense_below: int = 1024):
    """Lowest ``k`` eigenpairs of the spin model (sparse Lanczos above ``dense_below``)."""
    H = build_effective_spin_hamiltonian(spec).matrix
    if H.shape[0] <= dense_below:
        w, v = np.linalg.eigh(H.toarray())
        return w[:k], v[:, :k]
    w, v = eigsh(H, k=k, which="SA", tol=1e-12)
    order = np.argsort(w)
    return w[order], v[:, order]
