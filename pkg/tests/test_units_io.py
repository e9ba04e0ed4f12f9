import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgqed.compiler import SidebandProgram, SpinNetworkSpec
from wgqed.io import (SchemaError, dump_state, format_float, load_state, program_from_dict, program_to_dict,
                      read_csv, read_lattice, spec_from_dict, spec_to_dict, write_csv, write_lattice)
from wgqed.units import UnitError, format_frequency, parse_quantity, to_hz


@pytest.mark.parametrize("text, expected", [
    ("1 Hz", 2 * math.pi),
    ("0.5 kHz", 2 * math.pi * 500),
    ("620 MHz", 2 * math.pi * 620e6),
    ("0.4 THz", 2 * math.pi * 0.4e12),
    ("3 rad/s", 3.0),
    ("1e3 Hz", 2 * math.pi * 1e3),
])
def test_parse_frequency(text, expected):
    assert parse_quantity(text) == pytest.approx(expected, rel=1e-15)


def test_parse_other_kinds():
    assert parse_quantity("366 nm", "length") == pytest.approx(366e-9)
    assert parse_quantity("2 s", "time") == 2.0
    assert parse_quantity("2.1 s/m^2", "effective_mass") == 2.1
    assert parse_quantity(7.5) == 7.5


@pytest.mark.parametrize("bad", ["fast", "1 furlong", "", True, None, "1 Hz Hz"])
def test_parse_rejects(bad):
    with pytest.raises(UnitError):
        parse_quantity(bad)


@given(st.floats(min_value=1e-6, max_value=1e12, allow_nan=False))
def test_frequency_string_round_trip(hz):
    w = 2 * math.pi * hz
    assert parse_quantity(format_frequency(w)) == pytest.approx(w, rel=1e-14)
    assert to_hz(w) == pytest.approx(hz, rel=1e-15)


def test_format_float_round_trips_exactly():
    for x in (0.1, 1 / 3, np.pi * 1e-17, -2.5e300):
        assert float(format_float(x)) == x


def test_spec_dict_round_trip(rng):
    from conftest import random_spec

    spec = random_spec(4, rng)
    back = spec_from_dict(spec_to_dict(spec))
    np.testing.assert_array_equal(back.J, spec.J)
    np.testing.assert_array_equal(back.h, spec.h)


def test_spec_from_dict_units_and_folding():
    d = {"n": 3,
         "J": [{"i": 2, "j": 0, "a": "x", "b": "y", "value": "1 kHz"}],
         "h": [{"i": 1, "axis": "z", "value": 5.0}]}
    spec = spec_from_dict(d)
    assert spec.J[1, 0, 0, 2] == pytest.approx(2 * math.pi * 1e3)
    assert spec.h[2, 1] == 5.0


@pytest.mark.parametrize("d, path", [
    ({"J": []}, "spec.n"),
    ({"n": 2, "J": [{"i": 0, "j": 5, "a": "x", "b": "x", "value": 1}]}, "spec.J[0].j"),
    ({"n": 2, "h": [{"i": 0, "axis": "w", "value": 1}]}, "spec.h[0].axis"),
])
def test_spec_schema_errors_name_the_field(d, path):
    with pytest.raises(SchemaError) as e:
        spec_from_dict(d)
    assert e.value.path == path


def test_program_round_trip(rng):
    n = 3
    omega = rng.normal(size=(3, n, n)) + 1j * rng.normal(size=(3, n, n))
    prog = SidebandProgram(omega, 10.0, np.arange(n) * 1e3, 0.05, np.eye(n))
    back = program_from_dict(program_to_dict(prog))
    np.testing.assert_array_equal(back.omega, prog.omega)
    np.testing.assert_array_equal(back.delta_gs, prog.delta_gs)
    with pytest.raises(SchemaError):
        program_from_dict({"n": 2})


def test_csv_round_trip_full_precision(tmp_path):
    t = np.linspace(0, 1, 7)
    z = np.exp(1j * t) / 3
    write_csv(tmp_path / "a.csv", t, {"pop": t**2 / 7, "amp": z})
    header, arr = read_csv(tmp_path / "a.csv")
    assert header == ["time", "pop", "amp_re", "amp_im"]
    np.testing.assert_array_equal(arr[:, 0], t)
    np.testing.assert_array_equal(arr[:, 1], t**2 / 7)
    np.testing.assert_array_equal(arr[:, 2] + 1j * arr[:, 3], z)


def test_state_dump_round_trip(tmp_path, rng):
    psi = rng.normal(size=9) + 1j * rng.normal(size=9)
    dump_state(tmp_path / "psi.txt", psi)
    np.testing.assert_array_equal(load_state(tmp_path / "psi.txt"), psi)


def test_lattice_round_trip(tmp_path):
    write_lattice(tmp_path / "lat.txt", 3, [(0, 1), (1, 2), (2, 0)], [(0, 2, 1)])
    n, edges, tris = read_lattice(tmp_path / "lat.txt")
    assert (n, edges, tris) == (3, [(0, 1), (1, 2), (2, 0)], [(0, 2, 1)])
    with pytest.raises(SchemaError) as e:
        read_lattice("edge 0 1\nsquare 0 1 2 3\n")
    assert e.value.path == "line 2"
