import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgqed.phonons import (InstabilityError, MechanicalChain, closed_form_frequencies, phonon_spectrum,
                           sine_transform, stiffness_matrix)


def dense_frequencies(chain):
    return np.sqrt(np.linalg.eigvalsh(stiffness_matrix(chain)) / chain.mass)


def test_sine_transform_small_cases():
    np.testing.assert_allclose(sine_transform(1), [[1.0]], atol=1e-15)
    B = sine_transform(2)
    np.testing.assert_allclose(np.abs(B), np.sqrt(2 / 3) * np.sin(np.pi / 3), atol=1e-15)
    np.testing.assert_allclose(B.T @ B, np.eye(2), atol=1e-15)


def test_sine_transform_is_an_involution():
    B = sine_transform(5)
    np.testing.assert_allclose(B, B.T, atol=0)
    np.testing.assert_allclose(B @ B, np.eye(5), atol=1e-14)


def test_uncoupled_traps():
    chain = MechanicalChain(4, mass=2.0, w_t=3.0, g_m=0.0, l_c=1.0)
    np.testing.assert_allclose(stiffness_matrix(chain), 18.0 * np.eye(4))
    np.testing.assert_allclose(phonon_spectrum(chain).eps, 3.0)


def test_two_site_frequencies():
    chain = MechanicalChain.from_frequencies(2, 1.0, 1.0)
    expected = [1.224744871391589, 1.5811388300841898]
    np.testing.assert_allclose(phonon_spectrum(chain).eps, expected, rtol=1e-14)
    np.testing.assert_allclose(dense_frequencies(chain), expected, rtol=1e-14)


def test_three_site_toeplitz_formula():
    chain = MechanicalChain(3, mass=1.5, w_t=2.0, g_m=0.7, l_c=0.9)
    M = stiffness_matrix(chain)
    d, o = M[0, 0], M[0, 1]
    l = np.arange(1, 4)
    np.testing.assert_allclose(np.sort(d + 2 * o * np.cos(np.pi * l / 4)), np.linalg.eigvalsh(M), rtol=1e-14)


def test_fifty_sites_against_dense():
    chain = MechanicalChain.from_frequencies(50, 1.0, 0.8)
    np.testing.assert_allclose(phonon_spectrum(chain).eps, dense_frequencies(chain), rtol=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 50), w_t=st.floats(0.1, 10.0), bond=st.floats(-0.2, 5.0))
def test_closed_form_matches_dense(n, w_t, bond):
    chain = MechanicalChain.from_frequencies(n, w_t, bond * w_t**2)
    spec = phonon_spectrum(chain)
    ref = dense_frequencies(chain)
    assert np.max(np.abs(spec.eps - ref) / ref) < 1e-10
    assert np.all(np.diff(spec.eps) >= 0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 30), bond=st.floats(-0.2, 5.0))
def test_mode_matrix_diagonalizes_stiffness(n, bond):
    chain = MechanicalChain.from_frequencies(n, 1.0, bond)
    spec = phonon_spectrum(chain)
    M = stiffness_matrix(chain)
    D = spec.B.T @ M @ spec.B
    assert np.max(np.abs(D - np.diag(np.diag(D)))) < 1e-10 * np.linalg.norm(M)
    np.testing.assert_allclose(np.sqrt(np.diag(D)), spec.eps, rtol=1e-12)


@given(n=st.integers(1, 30))
def test_relabeling_l_to_mirror(n):
    chain = MechanicalChain.from_frequencies(n, 1.0, 0.6)
    w = closed_form_frequencies(chain)
    l = np.arange(1, n + 1)
    plus = np.sqrt(1.0 + 0.6 * (1 + np.cos(np.pi * l / (n + 1))))
    np.testing.assert_allclose(np.sort(plus), np.sort(w), rtol=1e-14)
    np.testing.assert_allclose(w[::-1], np.sqrt(1.0 + 0.6 * (1 + np.cos(np.pi * l / (n + 1)))), rtol=1e-14)


@given(st.lists(st.integers(0, 1000), min_size=2, max_size=6, unique=True))
def test_bandwidth_grows_with_coupling(bonds):
    widths = [phonon_spectrum(MechanicalChain.from_frequencies(8, 1.0, b / 100)).bandwidth for b in sorted(bonds)]
    assert np.all(np.diff(widths) > 0)


def test_unstable_chain():
    with pytest.raises(InstabilityError, match="unstable"):
        phonon_spectrum(MechanicalChain.from_frequencies(10, 1.0, -0.6))


def test_invalid_chain():
    with pytest.raises(ValueError):
        MechanicalChain(0, 1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        sine_transform(0)
