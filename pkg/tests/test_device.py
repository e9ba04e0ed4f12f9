import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgqed.device import (DeviceParams, HierarchyError, check_hierarchy, derive_rates, device_from_mapping,
                          magnitude_cascade, vdw_discrepancy, vdw_profile)
from wgqed.io import SchemaError

TWO_PI = 2 * math.pi


def test_zero_coupling_cooperativity_is_delta_over_kappa0(ref_device):
    p = replace(ref_device, g_c=0.0)
    r = derive_rates(p)
    assert r.c_m == p.delta / p.kappa0
    assert r.kappa_prime == 0.0
    assert r.t_tunnel == 0.0 and r.gamma_m == 0.0


def test_reference_lengths_and_lamb_shift(ref_device):
    r = derive_rates(ref_device)
    assert 0.5 < r.L_c / 0.77e-6 < 2.0
    ratio, note = vdw_discrepancy(r)
    assert 0.5 < ratio < 2.0
    assert "620 MHz" in note and "within" in note


def test_reference_loss_ratio(ref_device):
    r = derive_rates(ref_device)
    assert 1e-5 < r.gamma_m / ref_device.delta_l < 1e-3


def test_reference_heating_rate(ref_device):
    r = derive_rates(ref_device)
    assert 0.02 < r.gamma_heat / TWO_PI < 2.0


def test_cooperativity_is_coupling_independent(ref_device):
    r = derive_rates(ref_device)
    J = np.array([1.0, 10.0, -3.0])
    np.testing.assert_allclose(r.c_s(J), ref_device.delta_l / r.gamma_m)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_rates_scale_with_frequency_units(s):
    from wgqed.device import load_device

    p = load_device()
    r0, r1 = derive_rates(p), derive_rates(p.scaled(s))
    for name in ("delta_vdw", "t_tunnel", "kappa_prime", "kappa_eff", "gamma_m", "gamma_1d"):
        assert getattr(r1, name) == pytest.approx(s * getattr(r0, name), rel=1e-12)
    assert r1.c_m == pytest.approx(r0.c_m, rel=1e-12)
    # the recoil frequency enters through the mass; rescale it as well
    r2 = derive_rates(replace(p.scaled(s), mass=p.mass / s))
    assert r2.gamma_heat == pytest.approx(s * r0.gamma_heat, rel=1e-12)


def test_vdw_profile_examples(ref_device):
    r = derive_rates(ref_device)
    assert vdw_profile(3, 3, ref_device) == r.delta_vdw
    p = replace(ref_device, a0=math.log(2) * r.L_c)
    assert vdw_profile(0, 1, p) == pytest.approx(r.delta_vdw / 2, rel=1e-14)
    p = replace(ref_device, a0=0.5 * r.L_c)
    assert vdw_profile(2, 6, p) == pytest.approx(r.delta_vdw * math.exp(-2), rel=1e-14)


@given(st.integers(0, 40), st.integers(0, 40))
def test_vdw_profile_symmetric_and_decaying(i, j):
    from wgqed.device import load_device

    p = load_device()
    assert vdw_profile(i, j, p) == vdw_profile(j, i, p)
    assert vdw_profile(i, j + 1 if j >= i else j - 1, p) <= vdw_profile(i, j, p)


def test_hierarchy_all_pass_well_inside(ref_device):
    p = replace(ref_device, f=0.01, g_c=0.01 * ref_device.delta / 0.01)
    rep = check_hierarchy(p, omega_tilde_max=0.01 * p.delta_l, mode_spacing=p.delta_l / 0.01,
                          zeeman_spacing=p.delta_l / 1e-4)
    assert rep.passed
    assert [round(r.ratio, 12) for r in rep.rows] == [0.01] * 5


def test_hierarchy_reports_failing_row(ref_device):
    p = replace(ref_device, f=0.5)
    rep = check_hierarchy(p)
    assert not rep.passed
    assert rep["f << 1"].ratio == 0.5
    assert [r.name for r in rep.failures()] == ["f << 1"]
    assert "FAIL" in rep.format()


def test_hierarchy_threshold_is_configurable(ref_device):
    assert not check_hierarchy(ref_device, eps_h=0.05).passed
    assert check_hierarchy(ref_device, eps_h=0.1).passed


def test_magnitude_cascade_tiers(ref_device):
    tiers = magnitude_cascade(ref_device)
    assert set(tiers) == {"g_c", "t_tunnel", "J", "gamma_spin"}
    for name, (hz, typical, off) in tiers.items():
        assert abs(off) <= 1.0, name


def test_invalid_inputs(ref_device):
    with pytest.raises(ValueError):
        replace(ref_device, g_c=-1.0)
    with pytest.raises(ValueError):
        replace(ref_device, kappa0=0.0)
    with pytest.raises(HierarchyError):
        replace(ref_device, f=1.5)
    with pytest.raises(HierarchyError):
        replace(ref_device, eta_l=1.0)


def test_device_mapping_errors():
    with pytest.raises(SchemaError) as e:
        device_from_mapping({"g_c": "1 GHz"})
    assert e.value.path.startswith("device.")
    with pytest.raises(SchemaError) as e:
        device_from_mapping({"g_c": "1 GHz", "warp": 9})
    assert e.value.path == "device.warp"
