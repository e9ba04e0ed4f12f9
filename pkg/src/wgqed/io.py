"""Text formats: spin networks, sideband programs, CSV series, state dumps, lattices.

Spin network (JSON)::

    {"n": 3,
     "J": [{"i": 0, "j": 1, "a": "x", "b": "x", "value": "0.5 kHz"}, ...],
     "h": [{"i": 2, "axis": "z", "value": "100 Hz"}, ...]}

Entries with i > j are folded onto the canonical i < j slot.  Values are
unit strings or plain numbers in rad/s.

Sideband program (JSON): angular frequencies as plain numbers, complex
numbers as ``[re, im]`` pairs, ``omega`` keyed by axis and indexed
``[site][mode]``.

State dump: one ``index re im`` line per amplitude, ``#`` comments.

Lattice edge list: ``edge i j`` and ``triangle i j k`` lines (triangle
vertices listed in their orientation), ``#`` comments.
"""
from __future__ import annotations

import json

import numpy as np

from .compiler import AXES, SidebandProgram, SpinNetworkSpec
from .units import UnitError, parse_quantity

__all__ = [
    "SchemaError",
    "spec_to_dict",
    "spec_from_dict",
    "program_to_dict",
    "program_from_dict",
    "write_csv",
    "read_csv",
    "format_float",
    "dump_state",
    "load_state",
    "read_lattice",
    "write_lattice",
]


class SchemaError(ValueError):
    """Configuration problem located at a dotted field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _index(v, n, path):
    if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < n:
        raise SchemaError(path, f"expected a site index in [0, {n})")
    return v


def _axis(v, path):
    if v not in AXES:
        raise SchemaError(path, f"expected one of {AXES}, got {v!r}")
    return v


def _value(v, path):
    try:
        return parse_quantity(v, "frequency")
    except UnitError as e:
        raise SchemaError(path, str(e)) from None


def spec_to_dict(spec: SpinNetworkSpec, tol: float = 0.0) -> dict:
    J = []
    for i, j in spec.pairs():
        for a in range(3):
            for b in range(3):
                v = spec.J[a, b, i, j]
                if abs(v) > tol:
                    J.append({"i": i, "j": j, "a": AXES[a], "b": AXES[b], "value": float(v)})
    h = [{"i": i, "axis": AXES[c], "value": float(spec.h[c, i])}
         for i in range(spec.n) for c in range(3) if abs(spec.h[c, i]) > tol]
    return {"n": spec.n, "J": J, "h": h}


def spec_from_dict(d: dict, path: str = "spec") -> SpinNetworkSpec:
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    if "n" not in d:
        raise SchemaError(f"{path}.n", "missing required field")
    n = d["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SchemaError(f"{path}.n", "expected a positive integer")
    spec = SpinNetworkSpec(n)
    for k, e in enumerate(d.get("J", [])):
        p = f"{path}.J[{k}]"
        for key in ("i", "j", "a", "b", "value"):
            if key not in e:
                raise SchemaError(f"{p}.{key}", "missing required field")
        i, j = _index(e["i"], n, f"{p}.i"), _index(e["j"], n, f"{p}.j")
        if i == j:
            raise SchemaError(p, "i == j; on-site terms belong in h")
        spec.add(_axis(e["a"], f"{p}.a"), _axis(e["b"], f"{p}.b"), i, j, _value(e["value"], f"{p}.value"))
    for k, e in enumerate(d.get("h", [])):
        p = f"{path}.h[{k}]"
        for key in ("i", "axis", "value"):
            if key not in e:
                raise SchemaError(f"{p}.{key}", "missing required field")
        spec.add_field(_axis(e["axis"], f"{p}.axis"), _index(e["i"], n, f"{p}.i"), _value(e["value"], f"{p}.value"))
    return spec


def _pairs(z):
    z = np.asarray(z)
    return np.stack([z.real, z.imag], axis=-1).tolist()


def program_to_dict(prog: SidebandProgram) -> dict:
    return {
        "n": prog.n,
        "eta_o": prog.eta_o,
        "delta_l": prog.delta_l.tolist(),
        "delta_gs": prog.delta_gs.tolist(),
        "B": prog.B.tolist(),
        "omega": {AXES[a]: _pairs(prog.omega[a]) for a in range(3)},
    }


def program_from_dict(d: dict, path: str = "program") -> SidebandProgram:
    try:
        n = int(d["n"])
        omega = np.zeros((3, n, n), dtype=complex)
        for a, ax in enumerate(AXES):
            arr = np.asarray(d["omega"][ax], dtype=float)
            omega[a] = arr[..., 0] + 1j * arr[..., 1]
        return SidebandProgram(omega, d["delta_l"], d["delta_gs"], float(d["eta_o"]), np.asarray(d["B"]))
    except KeyError as e:
        raise SchemaError(f"{path}.{e.args[0]}", "missing required field") from None
    except (TypeError, ValueError, IndexError) as e:
        raise SchemaError(path, str(e)) from None


def write_csv(path, time, columns: dict) -> None:
    """Header row then one row per time point; complex columns split into _re/_im."""
    names = ["time"]
    data = [np.asarray(time, dtype=float)]
    for name, col in columns.items():
        col = np.asarray(col)
        if np.iscomplexobj(col):
            names += [f"{name}_re", f"{name}_im"]
            data += [col.real, col.imag]
        else:
            names.append(name)
            data.append(col.astype(float))
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*data):
            fh.write(",".join(format_float(x) for x in row) + "\n")


def read_csv(path):
    """Return (header, array) for a file written by :func:`write_csv`."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, arr


def dump_state(path, psi) -> None:
    psi = np.asarray(psi).ravel()
    with open(path, "w") as fh:
        fh.write(f"# dim {psi.size}\n# index re im\n")
        for k, z in enumerate(psi):
            fh.write(f"{k} {format_float(z.real)} {format_float(z.imag)}\n")


def load_state(path) -> np.ndarray:
    arr = np.loadtxt(path, comments="#", ndmin=2)
    psi = np.zeros(int(arr[:, 0].max()) + 1, dtype=complex)
    psi[arr[:, 0].astype(int)] = arr[:, 1] + 1j * arr[:, 2]
    return psi


def read_lattice(path_or_text):
    """Parse an edge-list lattice; returns (n_sites, edges, triangles)."""
    text = path_or_text
    if "\n" not in str(path_or_text):
        with open(path_or_text) as fh:
            text = fh.read()
    edges, tris = [], []
    n = 0
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, nums = parts[0], parts[1:]
        try:
            idx = [int(x) for x in nums]
        except ValueError:
            raise SchemaError(f"line {ln}", f"non-integer site in {line!r}") from None
        if kind == "edge" and len(idx) == 2:
            edges.append(tuple(idx))
        elif kind == "triangle" and len(idx) == 3:
            tris.append(tuple(idx))
        elif kind == "sites" and len(idx) == 1:
            n = max(n, idx[0])
            continue
        else:
            raise SchemaError(f"line {ln}", f"expected 'edge i j' or 'triangle i j k', got {line!r}")
        if min(idx) < 0:
            raise SchemaError(f"line {ln}", "negative site index")
        n = max(n, max(idx) + 1)
    return n, edges, tris


def write_lattice(path, n, edges, triangles) -> None:
    with open(path, "w") as fh:
        fh.write(f"sites {n}\n")
        for i, j in edges:
            fh.write(f"edge {i} {j}\n")
        for t in triangles:
            fh.write("triangle {} {} {}\n".format(*t))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)
