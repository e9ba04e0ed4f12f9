import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgqed.dynamics.space import PAULI
from wgqed.models.gauge import HierarchyWarning
from wgqed.models.ggm import ggm_basis
from wgqed.otoc import (NonUnitaryGateError, OtocCircuit, controlled_ggm, controlled_ggm_via_gauge,
                        gate_fidelity, gauge_gate_on_sector, otoc_circuit, otoc_composite_direct, otoc_direct,
                        otoc_run, otoc_weighted_sum, pair_unitary, unitary_dilation)


def random_instance(n, seed, sites=2):
    rng = np.random.default_rng(seed)
    d = n**sites
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    H = (A + A.conj().T) / 2
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    k = n * n - 1
    idx = rng.integers(0, k, size=4)
    return H, psi / np.linalg.norm(psi), tuple(int(x) for x in idx), float(rng.uniform(0.1, 2.0))


def block(U, n):
    z = np.zeros((n, n))
    return np.block([[U, z], [z, np.eye(n)]])


# --- gates ----------------------------------------------------------------------

def test_controlled_x_is_cnot_with_s_as_control():
    C = controlled_ggm(PAULI["x"])
    # ancilla |s> (index 0) flips the target; |g> leaves it alone
    expected = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    np.testing.assert_array_equal(C, expected)


def test_control_off_is_identity():
    L = ggm_basis(2)[1]
    C = controlled_ggm(L)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    state = np.kron([0, 1], psi)
    np.testing.assert_allclose(C @ state, state, atol=0)


def test_controlled_three_level_generator_by_hand():
    basis = ggm_basis(3)
    L = basis[basis.index("s", 0, 1)]
    with pytest.raises(NonUnitaryGateError):
        controlled_ggm(L)
    C = controlled_ggm(L, require_unitary=False)
    expected = np.zeros((6, 6))
    expected[0, 1] = expected[1, 0] = 1
    expected[3, 3] = expected[4, 4] = expected[5, 5] = 1
    np.testing.assert_array_equal(C, expected)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_unitary_dilation(n):
    for L in ggm_basis(n):
        s, U = unitary_dilation(L)
        np.testing.assert_allclose(U @ U.conj().T, np.eye(n), atol=1e-12)
        np.testing.assert_allclose(s * (U + U.conj().T) / 2, L, atol=1e-12)


def test_pair_unitary():
    basis = ggm_basis(3)
    U = pair_unitary(basis[basis.index("a", 0, 2)])
    np.testing.assert_allclose(U @ U.conj().T, np.eye(3), atol=1e-15)
    assert U[1, 1] == 1
    with pytest.raises(NonUnitaryGateError):
        pair_unitary(basis[basis.index("d", 2)])


# --- blockade realization ---------------------------------------------------------

@pytest.mark.parametrize("ratio", [100.0, 1000.0])
def test_gauge_gate_fidelity_scales_with_hierarchy(ratio):
    chi = 1.0
    H, t = controlled_ggm_via_gauge(chi, chi, ratio * chi, n=3)
    U = gauge_gate_on_sector(H, t, 3)
    basis = ggm_basis(3)
    target = block(pair_unitary(basis[basis.index("s", 0, 1)]), 3)
    infidelity = 1 - gate_fidelity(U, target)
    assert infidelity < 2.0 * (chi / ratio) ** 2
    assert infidelity > 0.5 * (chi / ratio) ** 2


def test_imaginary_coupling_gives_antisymmetric_gate():
    H, t = controlled_ggm_via_gauge(1.0, 1j, 1e3, n=3)
    U = gauge_gate_on_sector(H, t, 3)
    basis = ggm_basis(3)
    anti = block(pair_unitary(basis[basis.index("a", 0, 1)]), 3)
    sym = block(pair_unitary(basis[basis.index("s", 0, 1)]), 3)
    assert gate_fidelity(U, anti) > 1 - 1e-5
    assert gate_fidelity(U, sym) < 0.6


def test_opposite_sign_flips_generator():
    H, t = controlled_ggm_via_gauge(1.0, -1.0, 1e3, n=3)
    U = gauge_gate_on_sector(H, t, 3)
    L = ggm_basis(3)[0]
    assert gate_fidelity(U, block(pair_unitary(-L), 3)) > 1 - 1e-5


def test_two_level_block_gives_controlled_generator():
    H, t = controlled_ggm_via_gauge(0.5, 0.5, 500.0, n=2)
    U = gauge_gate_on_sector(H, t, 2)
    assert gate_fidelity(U, controlled_ggm(PAULI["x"])) > 1 - 1e-5


def test_gauge_gate_needs_both_drives():
    with pytest.raises(ValueError):
        controlled_ggm_via_gauge(1.0, 0.0, 100.0)
    with pytest.warns(HierarchyWarning):
        controlled_ggm_via_gauge(1.0, 1.0, 5.0)


# --- correlators -------------------------------------------------------------------

def test_commuting_diagonal_operators():
    n = 2
    z = ggm_basis(2).index("d", 1)
    H = np.zeros((4, 4))
    psi = np.array([0, 0, 0, 1.0])
    circ = otoc_circuit(0, z, z, 1, z, z, H, 0.7, n, 2)
    assert otoc_run(circ, psi) == pytest.approx(1.0, abs=1e-14)
    assert otoc_direct(0, z, z, 1, z, z, H, 0.7, psi, n, 2) == pytest.approx(1.0, abs=1e-14)


def test_squared_generators_give_one():
    H, psi, _, tau = random_instance(2, 3)
    for k in range(3):
        assert otoc_direct(0, k, k, 0, k, k, np.zeros_like(H), tau, psi, 2, 2) == pytest.approx(1.0, abs=1e-13)


def test_zero_time_equals_static_correlator():
    n = 3
    H, psi, (a, b, ap, bp), _ = random_instance(n, 5)
    basis = ggm_basis(n)
    I = np.eye(n)
    Va, Vap = np.kron(basis[a], I), np.kron(basis[ap], I)
    Wb, Wbp = np.kron(I, basis[b]), np.kron(I, basis[bp])
    static = np.vdot(psi, Wbp @ Vap @ Wb @ Va @ psi)
    assert otoc_run(otoc_circuit(0, a, ap, 1, b, bp, H, 0.0, n, 2), psi) == pytest.approx(static, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(n=st.sampled_from([2, 3]), seed=st.integers(0, 2**31), i=st.integers(0, 1), j=st.integers(0, 1))
def test_circuit_matches_direct(n, seed, i, j):
    H, psi, (a, b, ap, bp), tau = random_instance(n, seed)
    circ = otoc_circuit(i, a, ap, j, b, bp, H, tau, n, 2)
    c_run = otoc_run(circ, psi)
    c_dir = otoc_direct(i, a, ap, j, b, bp, H, tau, psi, n, 2)
    assert abs(c_run - c_dir) < 1e-8


@settings(max_examples=15, deadline=None)
@given(n=st.sampled_from([2, 3, 4]), seed=st.integers(0, 2**31))
def test_correlator_bounded_by_operator_norms(n, seed):
    H, psi, (a, b, ap, bp), tau = random_instance(n, seed)
    basis = ggm_basis(n)
    bound = np.prod([np.linalg.norm(basis[k], 2) for k in (a, b, ap, bp)])
    assert abs(otoc_direct(0, a, ap, 1, b, bp, H, tau, psi, n, 2)) <= bound * (1 + 1e-12)


def test_unitary_invariance():
    n = 3
    H, psi, (a, b, _, _), tau = random_instance(n, 11)
    rng = np.random.default_rng(12)
    from scipy.stats import unitary_group

    u = unitary_group.rvs(n, random_state=rng)
    U = np.kron(u, u)
    basis = ggm_basis(n)
    v = basis.coefficients(u @ basis[a] @ u.conj().T)
    w = basis.coefficients(u @ basis[b] @ u.conj().T)
    before = otoc_direct(0, a, a, 1, b, b, H, tau, psi, n, 2)
    after = otoc_composite_direct(v, w, 0, 1, U @ H @ U.conj().T, tau, U @ psi, n, 2)
    assert abs(before - after) < 1e-10


def test_backward_evolution_undoes_forward():
    n = 3
    H, psi, _, tau = random_instance(n, 21)
    circ = OtocCircuit(n, 2, 0, 0, 0, 1, 0, 0, tau, H, [(1.0, [("h",), ("evolve", 1), ("evolve", -1)])])
    assert abs(otoc_run(circ, psi) - 1.0) < 1e-10


@pytest.mark.parametrize("n", [2, 3])
def test_weighted_sum_reconstruction(n):
    H, psi, _, tau = random_instance(n, 31)
    rng = np.random.default_rng(32)
    k = n * n - 1
    v = rng.normal(size=k) + 1j * rng.normal(size=k)
    w = rng.normal(size=k) + 1j * rng.normal(size=k)
    v[rng.random(k) < 0.4] = 0
    total = otoc_weighted_sum(v, w, 0, 1, H, tau, psi, n, 2)
    assert abs(total - otoc_composite_direct(v, w, 0, 1, H, tau, psi, n, 2)) < 1e-10


def test_weighted_sum_from_circuits():
    n = 2
    H, psi, _, tau = random_instance(n, 41)
    v = np.array([0.3, 0.0, 1.0 - 0.5j])
    w = np.array([0.0, 2.0, 0.4j])

    def by_circuit(i, a, ap, j, b, bp, H, tau, psi0, n, n_sites):
        return otoc_run(otoc_circuit(i, a, ap, j, b, bp, H, tau, n, n_sites), psi0)

    total = otoc_weighted_sum(v, w, 0, 1, H, tau, psi, n, 2, correlator=by_circuit)
    assert abs(total - otoc_composite_direct(v, w, 0, 1, H, tau, psi, n, 2)) < 1e-10


def test_dilated_circuit_term_count():
    H, _, _, _ = random_instance(3, 0)
    assert len(otoc_circuit(0, 0, 1, 1, 2, 3, H, 0.5, 3, 2).terms) == 16
    H, _, _, _ = random_instance(2, 0)
    assert len(otoc_circuit(0, 0, 1, 1, 2, 0, H, 0.5, 2, 2).terms) == 1


def test_circuit_text_round_trip():
    H, psi, (a, b, ap, bp), tau = random_instance(3, 51)
    circ = otoc_circuit(1, a, ap, 0, b, bp, H, tau, 3, 2)
    text = circ.to_text()
    back = OtocCircuit.from_text(text, H)
    assert back.terms == circ.terms and back.tau == circ.tau
    assert back.to_text() == text
    assert otoc_run(back, psi) == otoc_run(circ, psi)
    with pytest.raises(ValueError):
        OtocCircuit.from_text("n 2\nwarp 9\n", H)


def test_shot_sampling_is_seeded_and_unbiased():
    H, psi, (a, b, ap, bp), tau = random_instance(2, 61)
    circ = otoc_circuit(0, a, ap, 1, b, bp, H, tau, 2, 2)
    exact = otoc_run(circ, psi)
    s1 = otoc_run(circ, psi, shots=200_000, seed=3)
    assert s1 == otoc_run(circ, psi, shots=200_000, seed=3)
    assert abs(s1 - exact) < 5 * np.sqrt(2 / 200_000)


def test_input_validation():
    H, psi, _, _ = random_instance(2, 0)
    with pytest.raises(ValueError):
        otoc_circuit(0, 0, 0, 1, 0, 0, np.eye(3), 1.0, 2, 2)
    circ = otoc_circuit(0, 0, 0, 1, 0, 0, H, 1.0, 2, 2)
    with pytest.raises(ValueError):
        otoc_run(circ, 2 * psi)
