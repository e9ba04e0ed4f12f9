import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_spec
from wgqed.compiler import (AdiabaticityWarning, CompilationError, CompileOptions, FrequencyCollisionError,
                            SidebandProgram, SpinNetworkSpec, assign_sideband_frequencies, compile_sidebands,
                            count_constraints, count_unknowns, forward_couplings, pm_from_xy,
                            two_site_obstruction, xy_from_pm)
from wgqed.models.qst import qst_bond_strengths, qst_chain
from wgqed.phonons import MechanicalChain, phonon_spectrum

KHZ = 2 * np.pi * 1e3


def chain_spectrum(ref_device, n):
    return phonon_spectrum(ref_device.mechanical_chain(n))


def random_program(n, rng, delta_l=10 * KHZ, eta_o=0.05, scale=1e4):
    omega = scale * (rng.normal(size=(3, n, n)) + 1j * rng.normal(size=(3, n, n)))
    B = phonon_spectrum(MechanicalChain.from_frequencies(n, 1.0, 0.5)).B
    return SidebandProgram(omega, delta_l, np.arange(n) * 1e8, eta_o, B)


def relative_error(a: SpinNetworkSpec, b: SpinNetworkSpec):
    return np.linalg.norm(a.as_vector() - b.as_vector()) / b.norm()


def test_zero_program_gives_zero_couplings(rng):
    prog = random_program(3, rng, scale=0.0)
    out = forward_couplings(prog)
    assert out.norm() == 0.0


def test_single_mode_exchange_by_hand():
    B = np.array([[0.6, 0.8], [0.8, -0.6]])
    omega = np.zeros((3, 2, 2), dtype=complex)
    omega[0, :, 0] = 3.0
    delta, eta = 7.0, 0.1
    out = forward_couplings(SidebandProgram(omega, delta, [0, 1], eta, B))
    expected = np.zeros((3, 3, 2, 2))
    expected[0, 0, 0, 1] = 2 * eta**2 * 9.0 * B[0, 0] * B[1, 0] / delta
    np.testing.assert_allclose(out.J, expected, atol=1e-15)
    np.testing.assert_array_equal(out.h, 0.0)


def test_real_rabi_frequencies_give_no_field(rng):
    prog = random_program(3, rng)
    prog.omega = prog.omega.real.astype(complex)
    assert np.all(forward_couplings(prog).h == 0.0)


@given(st.integers(1, 5), st.floats(0.1, 10.0), st.integers(0, 2**31))
def test_forward_map_scales_quadratically(n, s, seed):
    prog = random_program(n, np.random.default_rng(seed))
    base = forward_couplings(prog, warn=False)
    prog.omega = prog.omega * s
    out = forward_couplings(prog, warn=False)
    np.testing.assert_allclose(out.J, s**2 * base.J, rtol=1e-12, atol=1e-12 * np.abs(base.J).max())
    np.testing.assert_allclose(out.h, s**2 * base.h, rtol=1e-12, atol=1e-12 * np.abs(base.h).max())
    assert out.J.dtype == float and out.h.dtype == float


def test_adiabaticity_warning(rng):
    prog = random_program(2, rng, delta_l=1.0, scale=1e3)
    with pytest.warns(AdiabaticityWarning):
        forward_couplings(prog)


def test_xy_pm_examples():
    ox, oy = xy_from_pm(1.0, 1.0)
    assert (ox, oy) == (1.0, 0.0)
    ox, oy = xy_from_pm(1.0, -1.0)
    assert ox == 0.0 and oy == 1j


@given(st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False),
                min_size=2, max_size=12))
def test_xy_pm_round_trip(vals):
    a = np.array(vals[: len(vals) // 2])
    b = np.array(vals[len(vals) // 2: 2 * (len(vals) // 2)])
    p, m = pm_from_xy(*xy_from_pm(a, b))
    scale = max(1.0, np.max(np.abs(vals)))
    np.testing.assert_allclose(p, a, atol=1e-15 * scale)
    np.testing.assert_allclose(m, b, atol=1e-15 * scale)


def test_xy_pm_shape_mismatch():
    with pytest.raises(ValueError):
        xy_from_pm(np.ones(2), np.ones(3))


@given(st.integers(1, 200))
def test_degree_of_freedom_counting(n):
    assert count_unknowns(n) == 6 * n * n
    assert count_constraints(n) == 3 * (3 * n * n - n) // 2
    assert count_unknowns(n) >= count_constraints(n)


def test_zero_target_compiles_to_zero(ref_device):
    res = compile_sidebands(SpinNetworkSpec(3), chain_spectrum(ref_device, 3), ref_device.delta_l, ref_device.eta_o)
    assert res.residual == 0.0
    assert np.all(res.program.omega == 0)


@pytest.mark.parametrize("n", [1, 3, 4])
def test_random_target_round_trip(ref_device, n):
    target = random_spec(n, np.random.default_rng(100 + n))
    res = compile_sidebands(target, chain_spectrum(ref_device, n), ref_device.delta_l, ref_device.eta_o)
    out = forward_couplings(res.program, warn=False)
    assert relative_error(out, target) < 1e-6
    assert res.residual < 1e-6


@settings(max_examples=8, deadline=None)
@given(n=st.integers(1, 4), seed=st.integers(0, 2**31))
def test_reachable_targets_always_recompile(ref_device, n, seed):
    """Anything produced by the forward map, two sites included, compiles back."""
    spectrum = chain_spectrum(ref_device, n)
    rng = np.random.default_rng(seed)
    omega = 1e4 * (rng.normal(size=(3, n, n)) + 1j * rng.normal(size=(3, n, n)))
    prog = SidebandProgram(omega, ref_device.delta_l, np.zeros(n), ref_device.eta_o, spectrum.B)
    target = forward_couplings(prog, warn=False)
    res = compile_sidebands(target, spectrum, ref_device.delta_l, ref_device.eta_o, CompileOptions(seed=seed))
    assert relative_error(forward_couplings(res.program, warn=False), target) < 1e-6
    # the intensity walk never ends above the program we started from
    assert res.intensity <= prog.intensity() * (1 + 1e-9)


def test_two_site_identity_holds_for_every_program(rng):
    for _ in range(20):
        out = forward_couplings(random_program(2, rng), warn=False)
        assert abs(two_site_obstruction(out)) < 1e-12


def test_generic_two_site_target_is_rejected(ref_device):
    target = random_spec(2, np.random.default_rng(7))
    assert abs(two_site_obstruction(target)) > 1e-3
    with pytest.raises(CompilationError, match="obstruction") as e:
        compile_sidebands(target, chain_spectrum(ref_device, 2), ref_device.delta_l, ref_device.eta_o)
    assert e.value.residual > 1e-6 and e.value.program is not None


def test_qst_chain_compiles_to_its_bond_pattern(ref_device):
    n, alpha = 6, KHZ
    target = qst_chain(n, alpha)
    res = compile_sidebands(target, chain_spectrum(ref_device, n), ref_device.delta_l, ref_device.eta_o,
                            CompileOptions(components=("x", "y")))
    out = forward_couplings(res.program, warn=False)
    bonds = [2 * out.J[0, 0, i, i + 1] for i in range(n - 1)]
    np.testing.assert_allclose(bonds, qst_bond_strengths(n, alpha), rtol=1e-6)
    np.testing.assert_allclose(out.J[1, 1].diagonal(1), out.J[0, 0].diagonal(1), rtol=1e-6)
    assert np.all(res.program.omega[2] == 0)


def test_compile_is_deterministic(ref_device):
    target = random_spec(3, np.random.default_rng(3))
    spec = chain_spectrum(ref_device, 3)
    a = compile_sidebands(target, spec, ref_device.delta_l, ref_device.eta_o, CompileOptions(seed=11))
    b = compile_sidebands(target, spec, ref_device.delta_l, ref_device.eta_o, CompileOptions(seed=11))
    np.testing.assert_array_equal(a.program.omega, b.program.omega)


def test_compile_rejects_mismatched_spectrum(ref_device):
    with pytest.raises(ValueError):
        compile_sidebands(SpinNetworkSpec(3), chain_spectrum(ref_device, 4), 1.0, 0.05)


def test_spec_folding_and_validation():
    J = np.zeros((3, 3, 2, 2))
    J[0, 1, 1, 0] = 2.0
    spec = SpinNetworkSpec(2, J)
    assert spec.J[1, 0, 0, 1] == 2.0 and spec.J[0, 1, 1, 0] == 0.0
    with pytest.raises(ValueError):
        SpinNetworkSpec(2, np.ones((3, 3, 2, 2)))
    with pytest.raises(ValueError):
        SpinNetworkSpec(2, h=np.full((3, 2), np.nan))


def test_frequency_table_single_site(ref_device):
    spec = chain_spectrum(ref_device, 1)
    prog = SidebandProgram(np.ones((3, 1, 1)), ref_device.delta_l, [1e8], 0.05, spec.B)
    nu = assign_sideband_frequencies(prog, spec)
    assert nu.shape == (3, 1, 1)
    assert len(set(nu.ravel())) == 3


def test_frequency_table_four_sites(ref_device):
    spec = chain_spectrum(ref_device, 4)
    step = 20 * spec.bandwidth
    prog = SidebandProgram(np.ones((3, 4, 4)), ref_device.delta_l, step * np.arange(1, 5), 0.05, spec.B)
    nu = assign_sideband_frequencies(prog, spec, min_gap=0.0)
    pm = np.sort(nu[:2].ravel())
    assert len(pm) == 32 and np.all(np.diff(pm) > 0)
    # z sidebands are shared by all sites: one per mode
    assert np.all(nu[2] == nu[2, 0]) and len(set(nu[2, 0])) == 4


def test_frequency_collision_when_zeeman_spacing_is_too_small(ref_device):
    spec = chain_spectrum(ref_device, 3)
    prog = SidebandProgram(np.ones((3, 3, 3)), ref_device.delta_l, 0.5 * spec.bandwidth * np.arange(3), 0.05,
                           spec.B)
    with pytest.raises(FrequencyCollisionError, match="overlap"):
        assign_sideband_frequencies(prog, spec)
