"""Out-of-time-order correlators of a random SU(3) magnet, read out on one ancilla."""
import numpy as np

from wgqed.models.sy import sy_hamiltonian, sy_sample
from wgqed.otoc import (controlled_ggm_via_gauge, gate_fidelity, gauge_gate_on_sector, otoc_circuit, otoc_direct,
                        otoc_run, pair_unitary)
from wgqed.models.ggm import ggm_basis

n, sites = 3, 3
model = sy_sample(sites, n, 1.0, seed=4)
H = sy_hamiltonian(model)
psi = np.zeros(n**sites, dtype=complex)
psi[np.ravel_multi_index((0, 1, 2), (n,) * sites)] = 1.0

# the controlled gate itself, made from the blockade
basis = ggm_basis(n)
H_gate, t = controlled_ggm_via_gauge(1.0, 1.0, 100.0, n)
U = gauge_gate_on_sector(H_gate, t, n)
target = np.block([[pair_unitary(basis[0]), np.zeros((n, n))], [np.zeros((n, n)), np.eye(n)]])
print(f"gate from blockade: fidelity {gate_fidelity(U, target):.5f} after {t:.3g} time units")

# C(tau) for Lambda_0 on site 0 against Lambda_0 on site 2
for tau in np.linspace(0, 3, 7):
    c = otoc_run(otoc_circuit(0, 0, 0, 2, 0, 0, H, tau, n, sites), psi)
    ref = otoc_direct(0, 0, 0, 2, 0, 0, H, tau, psi, n, sites)
    print(f"tau {tau:4.1f}   circuit {c.real:+.5f}{c.imag:+.5f}j   direct {ref.real:+.5f}{ref.imag:+.5f}j")

# a finite number of shots
c = otoc_run(otoc_circuit(0, 0, 0, 2, 0, 0, H, 1.5, n, sites), psi, shots=2000, seed=1)
print(f"2000 shots at tau 1.5: {c:.3f}")
