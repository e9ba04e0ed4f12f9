import numpy as np
import pytest
from hypothesis import given, strategies as st

from wgqed.dynamics import HilbertSpace
from wgqed.models.qst import (locate_transfer_time, qst_analytic_times, qst_bond_strengths, qst_chain,
                              transfer_amplitude, transfer_channel_fidelity, transfer_fidelity)


def test_bond_strength_examples():
    np.testing.assert_allclose(qst_bond_strengths(2, 1.7), [1.7])
    np.testing.assert_allclose(qst_bond_strengths(6, 1.0), [2.2360679775, 2.8284271247, 3.0, 2.8284271247,
                                                            2.2360679775], rtol=1e-10)


@given(st.integers(2, 40), st.floats(0.01, 100.0))
def test_bonds_are_mirror_symmetric(n, alpha):
    b = qst_bond_strengths(n, alpha)
    np.testing.assert_allclose(b, b[::-1], rtol=1e-15)


def test_chain_is_xx_with_half_bonds():
    spec = qst_chain(4, 2.0)
    np.testing.assert_allclose(spec.J[0, 0].diagonal(1), qst_bond_strengths(4, 2.0) / 2)
    np.testing.assert_array_equal(spec.J[0, 0], spec.J[1, 1])
    assert not spec.J[2].any() and not spec.h.any()
    with pytest.raises(ValueError):
        qst_chain(1, 1.0)
    with pytest.raises(ValueError):
        qst_chain(3, 0.0)


@pytest.mark.parametrize("n", range(2, 9))
def test_perfect_transfer_time(n):
    alpha = 2 * np.pi * 50.0
    spec = qst_chain(n, alpha)
    short, long_ = qst_analytic_times(alpha)
    t, f = locate_transfer_time(spec, 1.2 * long_)
    assert f >= 1 - 1e-6
    assert t == pytest.approx(short, rel=1e-6)
    # the longer candidate is a return to the first site, not a transfer
    assert transfer_fidelity(spec, long_) < 1e-6


def test_transfer_phase_and_average_modes():
    spec = qst_chain(5, 1.0)
    t = np.pi / 2
    a = transfer_amplitude(spec, t)
    assert abs(a) == pytest.approx(1.0, abs=1e-12)
    assert transfer_fidelity(spec, t, "average") == pytest.approx(1.0, abs=1e-12)
    raw = transfer_fidelity(spec, t, "average_raw")
    assert raw == pytest.approx(0.5 + a.real / 3 + 1 / 6, abs=1e-12)
    with pytest.raises(ValueError):
        transfer_fidelity(spec, t, "bogus")


@given(st.floats(0.0, 2 * np.pi))
def test_channel_fidelity_of_ideal_output(phase):
    n = 3
    space = HilbertSpace(n)
    psi_s = np.exp(1j * phase) * space.basis_state("ggs")
    psi_g = space.basis_state("ggg")
    fids = transfer_channel_fidelity(psi_s, psi_g, space, phase, n_grid=8)
    for v in fids.values():
        assert v == pytest.approx(1.0, abs=1e-10)


def test_channel_fidelity_without_transfer():
    space = HilbertSpace(2)
    fids = transfer_channel_fidelity(space.basis_state("sg"), space.basis_state("gg"), space, 0.0, n_grid=8)
    assert fids["s"] == pytest.approx(0.0, abs=1e-12)
    assert fids["min"] == pytest.approx(0.0, abs=1e-8)
    assert fids["average"] == pytest.approx(0.5, abs=1e-12)
