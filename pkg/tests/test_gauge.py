import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from wgqed.models.gauge import (GaugeEncoding, HierarchyWarning, effective_sun_heisenberg, gauge_blocks,
                                global_generators, logical_operator, low_band_spectrum, sector_isometry,
                                sun_heisenberg)
from wgqed.models.ggm import ggm_basis, transition


def low_band_residual(n_blocks, ratio, O=1.0):
    lam = ratio * O
    enc = GaugeEncoding(3, n_blocks, lam)
    _, H_G, _ = gauge_blocks(enc)
    H_I, H_eff = effective_sun_heisenberg(enc, -O**2 / lam, O)
    diff = low_band_spectrum(H_G + H_I, enc) - np.linalg.eigvalsh(H_eff)
    return float(np.max(np.abs(diff - diff.mean())))


def fitted_slope(n_blocks):
    ratios = np.array([1e2, 1e3, 1e4])
    res = [low_band_residual(n_blocks, r) for r in ratios]
    return np.polyfit(np.log10(ratios), np.log10(res), 1)[0], res


def test_two_level_block():
    enc = GaugeEncoding(2, 1, 5.0)
    G, H_G, P = gauge_blocks(enc)
    assert enc.charge == 0.0
    V = sector_isometry(enc).toarray()
    # logical |0> = |s g>, logical |1> = |g s>
    np.testing.assert_array_equal(np.nonzero(V[:, 0])[0], [0b01])
    np.testing.assert_array_equal(np.nonzero(V[:, 1])[0], [0b10])
    assert sp.linalg.norm(G[0] @ P) == 0


def test_three_level_block_charge_and_sector():
    enc = GaugeEncoding(3, 1, 1.0)
    G, H_G, P = gauge_blocks(enc)
    assert enc.charge == 0.5
    assert round(np.trace(P.toarray()).real) == 3
    w = np.linalg.eigvalsh(H_G.toarray())
    assert np.count_nonzero(np.abs(w) < 1e-12) == 3


def test_two_block_projector_rank_by_counting():
    enc = GaugeEncoding(3, 2, 1.0)
    _, H_G, P = gauge_blocks(enc)
    count = sum(1 for bits in itertools.product((0, 1), repeat=6)
                if bits[:3].count(0) == 1 and bits[3:].count(0) == 1)
    assert count == 9
    assert round(np.trace(P.toarray()).real) == 9
    np.testing.assert_allclose((P @ P - P).toarray(), 0)
    assert sp.linalg.norm(H_G @ P) == 0


def test_encoding_validation():
    with pytest.raises(ValueError):
        GaugeEncoding(1, 2, 1.0)
    with pytest.raises(ValueError):
        GaugeEncoding(2, 2, 1.0, blocks=[[0, 1], [1, 2]])
    with pytest.raises(ValueError):
        gauge_blocks(GaugeEncoding(3, 6, 1.0))


def test_exchange_constant():
    enc = GaugeEncoding(3, 2, 10.0)
    _, H_eff = effective_sun_heisenberg(enc, 0.0, 0.1)
    T = logical_operator(3, 2, {0: transition(3, 0, 1), 1: transition(3, 1, 0)})
    coeff = np.vdot(T, H_eff) / np.vdot(T, T)
    assert coeff.real == pytest.approx(-0.001, rel=1e-14)


def test_no_hopping_means_diagonal():
    enc = GaugeEncoding(3, 2, 10.0)
    H_I, H_eff = effective_sun_heisenberg(enc, 0.3, 0.0)
    np.testing.assert_array_equal(H_eff, np.diag(np.diag(H_eff)))


def test_hierarchy_warning():
    enc = GaugeEncoding(2, 2, 1.0)
    with pytest.warns(HierarchyWarning):
        effective_sun_heisenberg(enc, 0.0, 0.5)


def test_heisenberg_point_is_su_n_symmetric():
    lam, O = 1e3, 1.0
    enc = GaugeEncoding(3, 2, lam)
    _, H_eff = effective_sun_heisenberg(enc, -O**2 / lam, O)
    for g in global_generators(3, 2):
        assert np.linalg.norm(H_eff @ g - g @ H_eff) < 1e-10
    # up to a constant it is J / 2 times the GGM exchange
    ref = -O**2 / lam / 2 * sun_heisenberg(np.array([[0, 1], [1, 0]]), 3)
    shift = np.trace(H_eff - ref) / 9
    np.testing.assert_allclose(H_eff - ref, shift * np.eye(9), atol=1e-15)


def test_uncompensated_density_breaks_symmetry():
    lam, O = 1e3, 1.0
    enc = GaugeEncoding(3, 2, lam)
    _, H_eff = effective_sun_heisenberg(enc, 0.5, O)
    comm = max(np.linalg.norm(H_eff @ g - g @ H_eff) for g in global_generators(3, 2))
    assert comm > 1e-4


@pytest.mark.parametrize("n_blocks", [2, 3])
def test_low_band_matches_effective_model(n_blocks):
    O = 1.0
    res = low_band_residual(n_blocks, 1e3, O)
    # c O^3 / lambda^2 with c of order one (measured c = 8 for three blocks)
    assert res < 10.0 * O**3 / (1e3 * O) ** 2


def test_two_block_residual_is_fourth_order():
    slope, res = fitted_slope(2)
    assert slope == pytest.approx(-3.0, abs=0.1)
    # O^4 / lambda^3 with a coefficient of 4/3
    np.testing.assert_allclose(np.array(res) * np.array([1e2, 1e3, 1e4]) ** 3, 4 / 3, rtol=2e-3)


def test_three_block_residual_is_third_order():
    slope, _ = fitted_slope(3)
    assert slope == pytest.approx(-2.0, abs=0.1)


def test_gauge_protection_leakage():
    O = 1.0
    out = []
    for ratio in (1e2, 1e3):
        enc = GaugeEncoding(3, 2, ratio * O)
        _, H_G, P = gauge_blocks(enc)
        H_I, _ = effective_sun_heisenberg(enc, -O / ratio, O)
        w, v = np.linalg.eigh((H_G + H_I).toarray())
        low = v[:, :9]
        leak = 1 - np.min(np.sum(np.abs(P @ low) ** 2, axis=0))
        out.append(leak * ratio**2)
    # leakage is c' (O / lambda)^2 with the same c' at both ratios
    assert 0.1 < out[0] < 10
    assert out[1] == pytest.approx(out[0], rel=0.05)
