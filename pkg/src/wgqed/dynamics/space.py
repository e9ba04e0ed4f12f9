"""Composite spin (x) phonon Hilbert space and operator construction.

Spin basis per site: index 0 = |s>, index 1 = |g>, so sigma_z |s> = +|s>
and sigma_+ = |s><g|.  Spins come first in the tensor product, then phonon
modes; site 0 is the leftmost (most significant) factor.
"""
from __future__ import annotations

import itertools
from functools import reduce

import numpy as np
import scipy.sparse as sp

__all__ = [
    "PAULI",
    "DimensionError",
    "NonHermitianError",
    "HilbertSpace",
    "OperatorExpr",
    "spin_operator",
    "kron_all",
]

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "+": np.array([[0, 1], [0, 0]], dtype=complex),
    "-": np.array([[0, 0], [1, 0]], dtype=complex),
    "ss": np.array([[1, 0], [0, 0]], dtype=complex),
    "gg": np.array([[0, 0], [0, 1]], dtype=complex),
}

DEFAULT_CAP = 2**20


class DimensionError(ValueError):
    """Requested space exceeds the configured dimension cap."""


class NonHermitianError(ValueError):
    pass


def kron_all(mats):
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), mats)


def spin_operator(n: int, ops: dict) -> sp.csr_matrix:
    """Tensor product over ``n`` spins with ``ops[site]`` (2x2) and identity elsewhere."""
    eye = sp.identity(2, dtype=complex, format="csr")
    mats = []
    for k in range(n):
        m = ops.get(k)
        if m is None:
            mats.append(eye)
        else:
            mats.append(sp.csr_matrix(PAULI[m] if isinstance(m, str) else m))
    if not mats:
        return sp.identity(1, dtype=complex, format="csr")
    return kron_all(mats)


class HilbertSpace:
    """Spins (x) truncated phonon modes.

    Each mode holds at most ``n_max`` quanta; ``max_total`` optionally caps
    the total phonon number as well, which keeps multi-mode spaces small
    when the occupation is low.  The phonon basis is the list of allowed
    occupation tuples in lexicographic order (mode 0 most significant),
    which coincides with the plain Kronecker ordering when no total cap is
    set.
    """

    def __init__(self, n_spins: int, n_modes: int = 0, n_max: int = 3,
                 max_total: int | None = None, cap: int = DEFAULT_CAP):
        if n_spins < 0 or n_modes < 0 or n_max < 0:
            raise ValueError("counts must be non-negative")
        self.n_spins = int(n_spins)
        self.n_modes = int(n_modes)
        self.n_max = int(n_max)
        self.max_total = None if max_total is None else int(max_total)
        self.cap = cap
        # cheap dimension check before enumerating anything
        per_mode = (n_max + 1) ** n_modes
        if 2**n_spins * (per_mode if max_total is None else 1) > cap:
            raise DimensionError(
                f"dimension {2**n_spins * per_mode} exceeds cap {cap} "
                f"({n_spins} spins, {n_modes} modes, n_max={n_max})"
            )
        if n_modes:
            occ = np.array(list(itertools.product(range(n_max + 1), repeat=n_modes)), dtype=int)
            if max_total is not None:
                occ = occ[occ.sum(axis=1) <= max_total]
        else:
            occ = np.zeros((1, 0), dtype=int)
        self.phonon_states = occ
        self.spin_dim = 2**n_spins
        self.phonon_dim = len(occ)
        self.dim = self.spin_dim * self.phonon_dim
        if self.dim > cap:
            raise DimensionError(f"dimension {self.dim} exceeds cap {cap}")
        self._lookup = {tuple(s): k for k, s in enumerate(occ.tolist())}
        self._cache = {}

    def __repr__(self):
        extra = f", max_total={self.max_total}" if self.max_total is not None else ""
        return (f"HilbertSpace(n_spins={self.n_spins}, n_modes={self.n_modes}, "
                f"n_max={self.n_max}{extra}; dim={self.dim})")

    def doubled(self) -> "HilbertSpace":
        """Same space with every phonon truncation doubled."""
        return HilbertSpace(self.n_spins, self.n_modes, max(1, 2 * self.n_max),
                            None if self.max_total is None else max(1, 2 * self.max_total), self.cap)

    # -- phonon operators on the phonon factor only
    def phonon_lowering(self, mode: int) -> sp.csr_matrix:
        key = ("a", mode)
        if key not in self._cache:
            if not 0 <= mode < self.n_modes:
                raise IndexError(f"mode {mode} out of range")
            rows, cols, vals = [], [], []
            for k, s in enumerate(self.phonon_states):
                m = s[mode]
                if m == 0:
                    continue
                t = s.copy()
                t[mode] -= 1
                rows.append(self._lookup[tuple(t)])
                cols.append(k)
                vals.append(np.sqrt(m))
            n = self.phonon_dim
            self._cache[key] = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)
        return self._cache[key]

    def phonon_number_diag(self, mode: int) -> np.ndarray:
        return self.phonon_states[:, mode].astype(float)

    # -- full-space operators
    def embed_spin(self, op_spin) -> sp.csr_matrix:
        """Spin-space operator (2^N square) tensored with the phonon identity."""
        op_spin = sp.csr_matrix(op_spin)
        if self.phonon_dim == 1:
            return op_spin
        return sp.kron(op_spin, sp.identity(self.phonon_dim, dtype=complex), format="csr")

    def sigma(self, site: int, which: str) -> sp.csr_matrix:
        """Single-site Pauli-type operator (``x y z + - ss gg``) on the full space."""
        if not 0 <= site < self.n_spins:
            raise IndexError(f"site {site} out of range")
        key = ("s", site, which)
        if key not in self._cache:
            self._cache[key] = self.embed_spin(spin_operator(self.n_spins, {site: which}))
        return self._cache[key]

    def lowering(self, mode: int) -> sp.csr_matrix:
        key = ("A", mode)
        if key not in self._cache:
            self._cache[key] = sp.kron(sp.identity(self.spin_dim, dtype=complex),
                                       self.phonon_lowering(mode), format="csr")
        return self._cache[key]

    def number(self, mode: int) -> sp.csr_matrix:
        d = np.tile(self.phonon_number_diag(mode), self.spin_dim)
        return sp.diags(d.astype(complex), format="csr")

    def spin_phonon(self, spin_ops: dict, mode: int, raising: bool) -> sp.csr_matrix:
        """Spin operator times b_mode^dagger (``raising``) or b_mode."""
        a = self.phonon_lowering(mode)
        ph = a.conj().T.tocsr() if raising else a
        return sp.kron(spin_operator(self.n_spins, spin_ops), ph, format="csr")

    # -- states
    def spin_index(self, bits) -> int:
        """Index of a spin product state; ``bits`` uses 0 for |s>, 1 for |g> (or 's'/'g')."""
        if isinstance(bits, str):
            bits = [0 if c == "s" else 1 for c in bits]
        if len(bits) != self.n_spins:
            raise ValueError("wrong number of spins")
        k = 0
        for b in bits:
            k = 2 * k + int(b)
        return k

    def basis_state(self, bits, phonons=None) -> np.ndarray:
        ph = tuple(phonons) if phonons is not None else (0,) * self.n_modes
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.spin_index(bits) * self.phonon_dim + self._lookup[ph]] = 1.0
        return psi

    def product_state(self, site_states, phonons=None) -> np.ndarray:
        """Spin product of 2-vectors (ordered (s, g)) times a phonon Fock state."""
        spin = reduce(np.kron, [np.asarray(v, dtype=complex) for v in site_states], np.ones(1, complex))
        ph = np.zeros(self.phonon_dim, dtype=complex)
        ph[self._lookup[tuple(phonons) if phonons is not None else (0,) * self.n_modes]] = 1.0
        return np.kron(spin, ph)


class OperatorExpr:
    """Sparse operator with a verified Hermiticity flag."""

    def __init__(self, matrix, hermitian: bool = True, tol: float = 1e-12):
        self.matrix = sp.csr_matrix(matrix, dtype=complex)
        if hermitian:
            diff = self.matrix - self.matrix.conj().T
            nd = sp.linalg.norm(diff) if diff.nnz else 0.0
            na = sp.linalg.norm(self.matrix) if self.matrix.nnz else 0.0
            if nd > tol * max(na, 1e-300) and nd > 0:
                raise NonHermitianError(f"operator is not Hermitian: |A - A^+| = {nd:.3e}, |A| = {na:.3e}")
        self.hermitian = hermitian

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def dim(self):
        return self.matrix.shape[0]

    def toarray(self):
        return self.matrix.toarray()

    def __matmul__(self, other):
        return self.matrix @ other

    def __add__(self, other):
        o = other.matrix if isinstance(other, OperatorExpr) else other
        herm = self.hermitian and (not isinstance(other, OperatorExpr) or other.hermitian)
        return OperatorExpr(self.matrix + o, hermitian=herm)

    def __neg__(self):
        return OperatorExpr(-self.matrix, hermitian=self.hermitian)

    def __mul__(self, s):
        return OperatorExpr(self.matrix * s, hermitian=self.hermitian and np.isreal(s))

    __rmul__ = __mul__
