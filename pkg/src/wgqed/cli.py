"""Scenario runner.

Usage::

    wgqed <command> --config scenario.json [--seed N] [--out DIR]
          [--threads N] [--strict-hierarchy]

Commands: ``device`` (derived rates and hierarchy report), ``phonons``
(mode spectrum CSV), ``compile`` (sideband program and residual),
``evolve`` (time series), ``otoc``, ``sy`` and ``validate`` (schema check
only).  Bundled scenarios are addressed as ``bundled:<name>``.

Exit codes: 0 success, 1 runtime failure, 2 schema error, 3 hierarchy
failure under ``--strict-hierarchy``.

Scenario file (JSON).  Numeric fields accept plain numbers (rad/s for
frequencies, seconds for times) or unit strings such as ``"0.5 kHz"`` or
``"3 ms"``; frequency strings are cyclic and converted to rad/s::

    {
      "name": "qst_n6",
      "seed": 0,                       # default 0
      "budget_s": 900,                 # declared wall-time budget, informational
      "device": "reference",           # "reference", a file path, or an inline object
      "model": {"kind": "qst", "N": 6, "alpha": "67.5 Hz"},
      "compiler": {"components": ["x", "y"], "restarts": 8, "tol_rel": 1e-6},
      "dynamics": {...},
      "observables": ["pop_s:0", "pop_s:5"],
      "otoc": {...}, "sy": {...},      # only read by those commands
      "strict_hierarchy": false
    }

Model kinds:

* ``qst``: ``N``, ``alpha``.
* ``kagome``: ``J_perp``, ``J_zz``, ``lambda``, optional ``lattice`` (edge-list file;
  default the 12-site star).
* ``custom``: ``spec`` (spin-network object, see :mod:`wgqed.io`).
* ``sun_heisenberg``: ``n``, ``n_blocks``, ``lambda_G``, ``D``, ``O`` (scalars or
  matrices); runs on the logical space.
* ``sy``: ``n_spins``, ``n``, ``scale``; couplings drawn from the seed.

Dynamics (``evolve``):

* ``solver``: ``effective`` (ideal spin model, default), ``master``,
  ``trajectories`` or ``full`` (spin-phonon model, ``qst`` only).
* ``t_final``, ``n_steps`` (default 200): output grid.
* ``initial``: product state as a string over ``s``/``g`` (default ``s`` then ``g``s);
  logical models take ``levels`` (one integer per site, default 0, 1, 2, ...
  modulo n); ``otoc`` starts from the same product state.
* ``gamma_fort``: local depolarization rate (master / trajectories).
* ``phonon_loss``: include the correlated phonon-loss channel (needs the device).
* ``n_traj``: trajectory count (default 1000).
* full solver: ``n_max`` (3), ``max_total`` (2), ``offresonant``
  (``none``/``mismatched``/``all``), ``zeeman_step`` ("20 MHz"), ``ramp_periods`` (5),
  ``scan`` (list of time factors, default [1.0]), ``n_samples`` (61).

Observables: ``pop_s:<site>``, ``sz:<site>``, ``pop:<site>:<level>``
(logical models), ``n:<mode>`` and ``n_total`` (full solver, reported by default).

Outputs go to ``--out`` (default ``output.dir`` in the file, else the
current directory).  CSV files have a header row, time (or the natural
abscissa) first, and 17 significant digits.  ``manifest.json`` records the
tool version, config hash, seed and wall time next to every output.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .compiler import AXES, CompilationError, CompileOptions, compile_sidebands
from .device import check_hierarchy, derive_rates, device_from_mapping, load_device, magnitude_cascade, vdw_discrepancy
from .io import SchemaError, dumps, format_float, program_to_dict, spec_from_dict, spec_to_dict, write_csv
from .phonons import phonon_spectrum
from .units import UnitError, parse_quantity

log = logging.getLogger("wgqed")

COMMANDS = ("device", "phonons", "compile", "evolve", "otoc", "sy", "validate")
MODEL_KINDS = ("qst", "kagome", "custom", "sun_heisenberg", "sy")
SOLVERS = ("effective", "master", "trajectories", "full")
EXIT_SCHEMA = 2
EXIT_HIERARCHY = 3


class HierarchyFailure(RuntimeError):
    pass


# --- schema ------------------------------------------------------------------

def _require(d, key, path):
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    if key not in d:
        raise SchemaError(f"{path}.{key}", "missing required field")
    return d[key]


def _int(v, path, lo=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(path, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise SchemaError(path, f"must be >= {lo}")
    return v


def _qty(v, path, kind="frequency", positive=False):
    try:
        x = parse_quantity(v, kind)
    except UnitError as e:
        raise SchemaError(path, str(e)) from None
    if positive and not x > 0:
        raise SchemaError(path, "must be positive")
    return x


def _matrix(v, m, path):
    if isinstance(v, (int, float, str)):
        x = _qty(v, path)
        return np.full((m, m), x)
    try:
        arr = np.array([[_qty(x, f"{path}[{a}][{b}]") for b, x in enumerate(row)] for a, row in enumerate(v)])
    except TypeError:
        raise SchemaError(path, "expected a number or a square matrix") from None
    if arr.shape != (m, m):
        raise SchemaError(path, f"expected a {m}x{m} matrix")
    return arr


def load_config(path) -> dict:
    """Read a scenario; ``bundled:<name>`` selects a shipped scenario."""
    path = str(path)
    try:
        if path.startswith("bundled:"):
            text = resources.files("wgqed").joinpath("scenarios", path.split(":", 1)[1] + ".json").read_text()
        else:
            text = Path(path).read_text()
    except (FileNotFoundError, OSError) as e:
        raise SchemaError("config", f"cannot read {path}: {e}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("config", f"invalid JSON at line {e.lineno}: {e.msg}") from None
    if not isinstance(cfg, dict):
        raise SchemaError("config", "top level must be an object")
    return cfg


def bundled_scenarios() -> list:
    root = resources.files("wgqed").joinpath("scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def validate(cfg: dict, command: str = "evolve") -> dict:
    """Check every field the command will read; returns the parsed scenario."""
    out = {"name": cfg.get("name", "scenario")}
    seed = cfg.get("seed", 0)
    out["seed"] = _int(seed, "seed", 0)
    out["strict_hierarchy"] = bool(cfg.get("strict_hierarchy", False))
    out["device"] = _device(cfg.get("device", "reference"))
    model = _require(cfg, "model", "config")
    out["model"] = _model(model)
    out["compiler"] = _compiler(cfg.get("compiler", {}))
    out["dynamics"] = _dynamics(cfg.get("dynamics", {}), out["model"])
    obs = cfg.get("observables", [])
    if not isinstance(obs, list):
        raise SchemaError("observables", "expected a list")
    out["observables"] = [_observable(o, f"observables[{k}]", out["model"], out["dynamics"])
                          for k, o in enumerate(obs)]
    if command == "otoc" or "otoc" in cfg:
        out["otoc"] = _otoc(cfg.get("otoc", {}), out["model"])
    if command == "sy" or "sy" in cfg:
        out["sy"] = _sy(cfg.get("sy", {}), out["model"])
    out["output_dir"] = (cfg.get("output") or {}).get("dir")
    return out


def _device(v):
    if v == "reference":
        return load_device()
    if isinstance(v, str):
        try:
            return load_device(v)
        except FileNotFoundError:
            raise SchemaError("device", f"no device file {v}") from None
    if isinstance(v, dict):
        return device_from_mapping({k: x for k, x in v.items() if not k.startswith("_")}, "device")
    raise SchemaError("device", "expected 'reference', a path, or an object")


def _model(m):
    kind = _require(m, "kind", "model")
    if kind not in MODEL_KINDS:
        raise SchemaError("model.kind", f"expected one of {MODEL_KINDS}, got {kind!r}")
    out = {"kind": kind}
    if kind == "qst":
        out["N"] = _int(_require(m, "N", "model"), "model.N", 2)
        out["alpha"] = _qty(_require(m, "alpha", "model"), "model.alpha", positive=True)
    elif kind == "kagome":
        for key in ("J_perp", "J_zz", "lambda"):
            out[key] = _qty(_require(m, key, "model"), f"model.{key}")
        out["lattice"] = m.get("lattice")
    elif kind == "custom":
        out["spec"] = spec_from_dict(_require(m, "spec", "model"), "model.spec")
    elif kind == "sun_heisenberg":
        out["n"] = _int(_require(m, "n", "model"), "model.n", 2)
        out["n_blocks"] = _int(_require(m, "n_blocks", "model"), "model.n_blocks", 2)
        out["lambda_G"] = _qty(_require(m, "lambda_G", "model"), "model.lambda_G", positive=True)
        for key in ("D", "O"):
            out[key] = _matrix(_require(m, key, "model"), out["n_blocks"], f"model.{key}")
    elif kind == "sy":
        out["n_spins"] = _int(_require(m, "n_spins", "model"), "model.n_spins", 2)
        out["n"] = _int(_require(m, "n", "model"), "model.n", 2)
        out["scale"] = _qty(_require(m, "scale", "model"), "model.scale", positive=True)
    return out


def _compiler(c):
    if not isinstance(c, dict):
        raise SchemaError("compiler", "expected an object")
    kw = {}
    for key, cast in (("tol_rel", float), ("restarts", int), ("max_iter", int), ("refine_top", int)):
        if key in c:
            kw[key] = cast(c[key])
    if "min_intensity" in c:
        kw["min_intensity"] = bool(c["min_intensity"])
    if "components" in c:
        comps = tuple(c["components"])
        for k, a in enumerate(comps):
            if a not in AXES:
                raise SchemaError(f"compiler.components[{k}]", f"expected one of {AXES}")
        kw["components"] = comps
    return kw


def _dynamics(d, model):
    if not isinstance(d, dict):
        raise SchemaError("dynamics", "expected an object")
    out = dict(d)
    solver = d.get("solver", "effective")
    if solver not in SOLVERS:
        raise SchemaError("dynamics.solver", f"expected one of {SOLVERS}")
    logical = model["kind"] in ("sun_heisenberg", "sy")
    if solver == "full" and model["kind"] != "qst":
        raise SchemaError("dynamics.solver", "the full spin-phonon solver runs the qst model only")
    if logical and solver != "effective":
        raise SchemaError("dynamics.solver", "logical SU(n) models run with the effective solver")
    out["solver"] = solver
    if "t_final" in d:
        out["t_final"] = _qty(d["t_final"], "dynamics.t_final", "time", positive=True)
    out["n_steps"] = _int(d.get("n_steps", 200), "dynamics.n_steps", 1)
    out["n_traj"] = _int(d.get("n_traj", 1000), "dynamics.n_traj", 2)
    out["gamma_fort"] = _qty(d.get("gamma_fort", 0.0), "dynamics.gamma_fort")
    out["phonon_loss"] = bool(d.get("phonon_loss", False))
    out["n_max"] = _int(d.get("n_max", 3), "dynamics.n_max", 1)
    out["max_total"] = _int(d.get("max_total", 2), "dynamics.max_total", 1)
    out["offresonant"] = d.get("offresonant", "mismatched")
    if out["offresonant"] not in ("none", "mismatched", "all"):
        raise SchemaError("dynamics.offresonant", "expected none, mismatched or all")
    out["zeeman_step"] = _qty(d.get("zeeman_step", "20 MHz"), "dynamics.zeeman_step", positive=True)
    out["ramp_periods"] = float(d.get("ramp_periods", 5))
    out["scan"] = [float(x) for x in d.get("scan", [1.0])]
    out["n_samples"] = _int(d.get("n_samples", 61), "dynamics.n_samples", 2)
    n_sites = _n_sites(model)
    if logical:
        lv = d.get("levels", [i % model["n"] for i in range(n_sites)])
        if len(lv) != n_sites or not all(isinstance(x, int) and 0 <= x < model["n"] for x in lv):
            raise SchemaError("dynamics.levels", f"expected {n_sites} levels in [0, {model['n']})")
        out["levels"] = list(lv)
    else:
        init = d.get("initial", "s" + "g" * (n_sites - 1))
        if not isinstance(init, str) or len(init) != n_sites or set(init) - {"s", "g"}:
            raise SchemaError("dynamics.initial", f"expected a string of {n_sites} characters s/g")
        out["initial"] = init
    return out


def _n_sites(model):
    k = model["kind"]
    if k == "qst":
        return model["N"]
    if k == "kagome":
        return _kagome_lattice(model).n_sites
    if k == "custom":
        return model["spec"].n
    if k == "sun_heisenberg":
        return model["n_blocks"]
    return model["n_spins"]


def _kagome_lattice(model):
    from .models.kagome import KagomeLattice, LatticeError, star_of_david

    if model.get("lattice") is None:
        return star_of_david()
    try:
        return KagomeLattice.from_text(model["lattice"])
    except (OSError, LatticeError) as e:
        raise SchemaError("model.lattice", str(e)) from None


def _observable(o, path, model, dyn):
    if not isinstance(o, str):
        raise SchemaError(path, "expected a string")
    parts = o.split(":")
    n = _n_sites(model)
    logical = model["kind"] in ("sun_heisenberg", "sy")
    try:
        if parts[0] in ("pop_s", "sz") and len(parts) == 2 and not logical:
            if 0 <= int(parts[1]) < n:
                return o
        elif parts[0] == "pop" and len(parts) == 3 and logical:
            if 0 <= int(parts[1]) < n and 0 <= int(parts[2]) < model["n"]:
                return o
        elif parts[0] == "n" and len(parts) == 2 and dyn["solver"] == "full":
            if 0 <= int(parts[1]) < n:
                return o
        elif o == "n_total" and dyn["solver"] == "full":
            return o
    except ValueError:
        pass
    raise SchemaError(path, f"observable {o!r} is not defined for this model and solver")


def _otoc(c, model):
    if model["kind"] not in ("sy", "sun_heisenberg"):
        raise SchemaError("model.kind", "otoc needs a logical SU(n) model (sy or sun_heisenberg)")
    if _n_sites(model) < 2:
        raise SchemaError("model", "otoc needs at least two SU(n) sites")
    n = model["n"]
    out = {"i": _int(c.get("i", 0), "otoc.i", 0), "j": _int(c.get("j", 1), "otoc.j", 0)}
    corr = c.get("correlator", [0, 0, 0, 0])
    if len(corr) != 4 or not all(isinstance(x, int) and 0 <= x < n * n - 1 for x in corr):
        raise SchemaError("otoc.correlator", f"expected [alpha, beta, alpha', beta'] in [0, {n * n - 1})")
    out["correlator"] = corr
    out["t_final"] = _qty(c.get("t_final", 1.0), "otoc.t_final", "time", positive=True)
    out["n_steps"] = _int(c.get("n_steps", 50), "otoc.n_steps", 1)
    out["shots"] = c.get("shots")
    if out["shots"] is not None:
        _int(out["shots"], "otoc.shots", 1)
    return out


def _sy(c, model):
    if model["kind"] != "sy":
        raise SchemaError("model.kind", "the sy command needs model.kind = 'sy'")
    dts = c.get("dt", [0.2, 0.1, 0.05, 0.025])
    out = {"dt": [_qty(x, f"sy.dt[{k}]", "time", positive=True) for k, x in enumerate(dts)]}
    out["t_total"] = _qty(c.get("t_total", 1.0), "sy.t_total", "time", positive=True)
    return out


# --- pipeline pieces -----------------------------------------------------------

def target_spec(sc):
    m = sc["model"]
    if m["kind"] == "qst":
        from .models.qst import qst_chain

        return qst_chain(m["N"], m["alpha"])
    if m["kind"] == "kagome":
        from .models.kagome import kagome_csl

        return kagome_csl(_kagome_lattice(m), m["J_perp"], m["J_zz"], m["lambda"])
    if m["kind"] == "custom":
        return m["spec"]
    raise SchemaError("model.kind", f"{m['kind']} is not a two-level spin network")


def logical_hamiltonian(sc):
    m = sc["model"]
    if m["kind"] == "sy":
        from .models.sy import sy_hamiltonian, sy_sample

        model = sy_sample(m["n_spins"], m["n"], m["scale"], sc["seed"])
        return sy_hamiltonian(model), model
    from .models.gauge import GaugeEncoding, effective_sun_heisenberg

    enc = GaugeEncoding(m["n"], m["n_blocks"], m["lambda_G"])
    # H_eff lives on the logical space; the physical operator is not needed here
    _, H = effective_sun_heisenberg(enc, m["D"], m["O"])
    return H, enc


def spectrum_for(sc, n):
    return phonon_spectrum(sc["device"].mechanical_chain(n))


def compile_target(sc, spec, spectrum):
    p = sc["device"]
    opts = CompileOptions(seed=sc["seed"], **sc["compiler"])
    res = compile_sidebands(spec, spectrum, p.delta_l, p.eta_o, opts)
    res.program.delta_gs = sc["dynamics"]["zeeman_step"] * np.arange(spec.n)
    return res


def hierarchy_gate(sc, report, strict):
    if report.passed:
        return
    msg = "hierarchy check failed: " + ", ".join(r.name for r in report.failures())
    if strict or sc["strict_hierarchy"]:
        raise HierarchyFailure(msg)
    warnings.warn(msg, stacklevel=2)


def time_grid(sc, default):
    d = sc["dynamics"]
    return np.linspace(0.0, d.get("t_final", default), d["n_steps"] + 1)


# --- commands -------------------------------------------------------------------

def cmd_validate(sc, out, args):
    print(f"{sc['name']}: ok")
    return []


def cmd_device(sc, out, args):
    p = sc["device"]
    r = derive_rates(p)
    n = _n_sites(sc["model"])
    spec = spectrum_for(sc, n)
    report = check_hierarchy(p, r, mode_spacing=spec.min_spacing,
                             zeeman_spacing=sc["dynamics"]["zeeman_step"])
    payload = {"rates": r.as_dict(), "hierarchy": report.as_dict(),
               "cascade": {k: {"hz": v[0], "typical_hz": v[1], "decades_off": v[2]}
                           for k, v in magnitude_cascade(p, r).items()}}
    _, note = vdw_discrepancy(r)
    payload["vdw_note"] = note
    path = out / "device.json"
    path.write_text(dumps(payload) + "\n")
    print(report.format())
    print(note)
    hierarchy_gate(sc, report, args.strict_hierarchy)
    return [path]


def _write_table(path, names, columns):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*columns):
            fh.write(",".join(format_float(x) for x in row) + "\n")


def cmd_phonons(sc, out, args):
    n = _n_sites(sc["model"])
    spec = spectrum_for(sc, n)
    path = out / "phonons.csv"
    _write_table(path, ["mode", "eps_rad_s", "eps_hz"],
                 [np.arange(n), spec.eps, spec.eps / (2 * np.pi)])
    return [path]


def cmd_compile(sc, out, args):
    spec = target_spec(sc)
    spectrum = spectrum_for(sc, spec.n)
    res = compile_target(sc, spec, spectrum)
    prog = res.program
    report = check_hierarchy(sc["device"], omega_tilde_max=float(np.max(np.abs(prog.omega_tilde))),
                             mode_spacing=spectrum.min_spacing, zeeman_spacing=prog.zeeman_spacing())
    p1 = out / "program.json"
    p1.write_text(dumps(program_to_dict(prog)) + "\n")
    p2 = out / "compile.json"
    p2.write_text(dumps({"residual": res.residual, "intensity": res.intensity, "restart": res.restart,
                         "target": spec_to_dict(spec), "hierarchy": report.as_dict()}) + "\n")
    print(f"relative residual {res.residual:.3e}")
    hierarchy_gate(sc, report, args.strict_hierarchy)
    return [p1, p2]


def _spin_observables(names, space):
    ops = {}
    for name in names:
        kind, site = name.split(":")
        ops[name] = space.sigma(int(site), "ss" if kind == "pop_s" else "z")
    return ops


def cmd_evolve(sc, out, args):
    d = sc["dynamics"]
    if sc["model"]["kind"] in ("sun_heisenberg", "sy"):
        return _evolve_logical(sc, out)
    if d["solver"] == "full":
        return _evolve_full(sc, out, args)
    from .dynamics import (HilbertSpace, OpenSystemModel, build_effective_spin_hamiltonian, evolve_master,
                           evolve_unitary, expectation, fort_channels, sample_trajectories, spin_loss_channel)

    spec = target_spec(sc)
    space = HilbertSpace(spec.n)
    H = build_effective_spin_hamiltonian(spec, space).matrix
    scale = max(float(np.max(np.abs(spec.J))), 1e-300)
    times = time_grid(sc, 10 * np.pi / scale)
    names = sc["observables"] or [f"pop_s:{i}" for i in range(spec.n)]
    ops = _spin_observables(names, space)
    psi0 = space.basis_state(d["initial"])
    cols = {}
    if d["solver"] == "effective":
        states = evolve_unitary(H, psi0, times)
        for k, op in ops.items():
            cols[k] = np.array([expectation(op, s).real for s in states])
    else:
        channels = fort_channels(space, d["gamma_fort"]) if d["gamma_fort"] > 0 else []
        if d["phonon_loss"]:
            res = compile_target(sc, spec, spectrum_for(sc, spec.n))
            channels.append(spin_loss_channel(res.program, derive_rates(sc["device"]).gamma_m, space))
        model = OpenSystemModel(H, channels)
        if d["solver"] == "master":
            rhos = evolve_master(model, psi0, times)
            for k, op in ops.items():
                cols[k] = np.array([expectation(op, r).real for r in rhos])
        else:
            res = sample_trajectories(model, psi0, times, ops, d["n_traj"], seed=sc["seed"],
                                      threads=args.threads)
            for k in names:
                cols[k] = res.mean[k]
                cols[k + "_stderr"] = res.stderr[k]
    path = out / "evolve.csv"
    write_csv(path, times, cols)
    return [path]


def _evolve_logical(sc, out):
    from .models.gauge import logical_operator
    from .models.ggm import transition

    H, _ = logical_hamiltonian(sc)
    m = sc["model"]
    n, sites = m["n"], _n_sites(m)
    w, v = np.linalg.eigh(H)
    scale = max(float(np.max(np.abs(w))), 1e-300)
    times = time_grid(sc, 10 * np.pi / scale)
    psi0 = np.zeros(n**sites, dtype=complex)
    psi0[int(np.ravel_multi_index(sc["dynamics"]["levels"], (n,) * sites))] = 1.0
    c0 = v.conj().T @ psi0
    states = (v @ (c0[:, None] * np.exp(-1j * np.outer(w, times)))).T
    names = sc["observables"] or [f"pop:{i}:{a}" for i in range(sites) for a in range(n)]
    cols = {}
    for name in names:
        _, i, a = name.split(":")
        P = logical_operator(n, sites, {int(i): transition(n, int(a), int(a))})
        cols[name] = np.einsum("ti,ij,tj->t", states.conj(), P, states).real
    path = out / "evolve.csv"
    write_csv(path, times, cols)
    return [path]


def _evolve_full(sc, out, args):
    from .dynamics import HilbertSpace
    from .models.qst import simulate_full_transfer

    d = sc["dynamics"]
    spec = target_spec(sc)
    n = spec.n
    spectrum = spectrum_for(sc, n)
    res = compile_target(sc, spec, spectrum)
    prog = res.program
    report = check_hierarchy(sc["device"], omega_tilde_max=float(np.max(np.abs(prog.omega_tilde))),
                             mode_spacing=spectrum.min_spacing, zeeman_spacing=prog.zeeman_spacing())
    hierarchy_gate(sc, report, args.strict_hierarchy)
    space = HilbertSpace(n, n, n_max=d["n_max"], max_total=d["max_total"])
    t_star = np.pi / (2 * sc["model"]["alpha"])
    t_ramp = d["ramp_periods"] * 2 * np.pi / float(np.min(np.abs(prog.delta_l)))
    r = simulate_full_transfer(prog, spectrum, space, t_star, t_ramp, spec, d["offresonant"],
                               scan=d["scan"], n_samples=d["n_samples"])
    cols = {"arrival": r.arrival, "n_total": r.phonons}
    for l in range(n):
        cols[f"n:{l}"] = r.phonons_per_mode[:, l]
    if sc["observables"]:
        cols = {k: v for k, v in cols.items() if k in sc["observables"] or k == "arrival"}
    p1 = out / "evolve.csv"
    write_csv(p1, r.times, cols)
    p2 = out / "transfer.json"
    p2.write_text(dumps({
        "fidelity": r.fidelity, "t_end": r.t_end, "max_phonons": r.max_phonons,
        "output_phase": r.phase, "t_ramp": r.t_ramp, "compile_residual": res.residual,
        "candidates": [{"t_eff": c[0], "t_end": c[1], **c[2]} for c in r.candidates],
    }) + "\n")
    print(f"transfer fidelity (worst input) {r.fidelity['min']:.6f}, max phonons {r.max_phonons:.4f}")
    return [p1, p2]


def cmd_otoc(sc, out, args):
    from .otoc import otoc_circuit, otoc_direct, otoc_run

    c = sc["otoc"]
    H, _ = logical_hamiltonian(sc)
    m = sc["model"]
    n, sites = m["n"], _n_sites(m)
    psi0 = np.zeros(n**sites, dtype=complex)
    psi0[int(np.ravel_multi_index(sc["dynamics"]["levels"], (n,) * sites))] = 1.0
    a, b, ap, bp = c["correlator"]
    taus = np.linspace(0.0, c["t_final"], c["n_steps"] + 1)
    circ_vals, direct_vals = [], []
    for k, tau in enumerate(taus):
        circ = otoc_circuit(c["i"], a, ap, c["j"], b, bp, H, tau, n, sites)
        shot_seed = None if c["shots"] is None else [sc["seed"], k]
        circ_vals.append(otoc_run(circ, psi0, shots=c["shots"], seed=shot_seed))
        direct_vals.append(otoc_direct(c["i"], a, ap, c["j"], b, bp, H, tau, psi0, n, sites))
    p1 = out / "otoc.csv"
    write_csv(p1, taus, {"C_circuit": np.array(circ_vals), "C_direct": np.array(direct_vals)})
    p2 = out / "otoc_circuit.txt"
    p2.write_text(otoc_circuit(c["i"], a, ap, c["j"], b, bp, H, taus[-1], n, sites).to_text())
    return [p1, p2]


def cmd_sy(sc, out, args):
    from .models.sy import sy_exact_propagator, sy_sample, sy_strobe_evolution, sy_strobe_step

    m = sc["model"]
    model = sy_sample(m["n_spins"], m["n"], m["scale"], sc["seed"])
    c = sc["sy"]
    T = c["t_total"]
    U_T = sy_exact_propagator(model, T)
    step_err, glob_err = [], []
    for dt in c["dt"]:
        step_err.append(np.linalg.norm(sy_strobe_step(model, dt).unitary - sy_exact_propagator(model, dt), 2))
        steps = max(1, int(round(T / dt)))
        glob_err.append(np.linalg.norm(sy_strobe_evolution(model, steps * dt, dt) - U_T, 2)
                        if np.isclose(steps * dt, T) else np.nan)
    p1 = out / "sy_strobe.csv"
    _write_table(p1, ["dt", "step_error", "global_error"], [c["dt"], step_err, glob_err])
    iu = np.triu_indices(model.n_spins, k=1)
    p2 = out / "sy_couplings.csv"
    _write_table(p2, ["i", "j", "coupling"], [iu[0], iu[1], model.couplings[iu]])
    return [p1, p2]


HANDLERS = {"device": cmd_device, "phonons": cmd_phonons, "compile": cmd_compile, "evolve": cmd_evolve,
            "otoc": cmd_otoc, "sy": cmd_sy, "validate": cmd_validate}


def write_manifest(out: Path, command, cfg, seed, wall, outputs):
    manifest = {"tool": "wgqed", "version": __version__, "command": command, "config_sha256": config_hash(cfg),
                "seed": seed, "wall_time_s": wall, "outputs": [p.name for p in outputs],
                "finished_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    (out / "manifest.json").write_text(dumps(manifest) + "\n")


def build_parser():
    ap = argparse.ArgumentParser(prog="wgqed", description="Phonon-mediated spin-network scenarios.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="scenario JSON file or bundled:<name>")
    ap.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--threads", type=int, default=None, help="worker threads (default from WGQED_THREADS)")
    ap.add_argument("--strict-hierarchy", action="store_true", help="abort when a hierarchy ratio fails")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_SCHEMA
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = {**cfg, "seed": args.seed}
        sc = validate(cfg, args.command)
    except SchemaError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    if args.command == "validate":
        cmd_validate(sc, None, args)
        return 0
    out = Path(args.out or sc["output_dir"] or ".")
    out.mkdir(parents=True, exist_ok=True)
    try:
        outputs = HANDLERS[args.command](sc, out, args)
    except SchemaError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except HierarchyFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_HIERARCHY
    except (CompilationError, ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    write_manifest(out, args.command, cfg, sc["seed"], time.perf_counter() - t0, outputs)
    for p in outputs:
        print(p)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
