"""Moving one qubit down a six-atom chain.

First the ideal spin chain, then the same chain compiled into Raman
sidebands, and finally the trap-induced depolarization that slowly
erases the transferred state.  The full spin-phonon run lives in the
bundled ``qst_n6`` scenario (about ten minutes on one core):

    wgqed evolve --config bundled:qst_n6 --out out/qst_n6
"""
import numpy as np

from wgqed.compiler import CompileOptions, compile_sidebands, forward_couplings
from wgqed.device import load_device
from wgqed.dynamics import (HilbertSpace, OpenSystemModel, build_effective_spin_hamiltonian, evolve_master,
                            evolve_unitary, expectation, fort_channels)
from wgqed.models.qst import locate_transfer_time, qst_analytic_times, qst_bond_strengths, qst_chain
from wgqed.phonons import phonon_spectrum

N = 6
alpha = 2 * np.pi * 67.5
print("bonds / alpha:", np.round(qst_bond_strengths(N, 1.0), 4))

spec = qst_chain(N, alpha)
short, long_ = qst_analytic_times(alpha)
t_star, F = locate_transfer_time(spec, 1.2 * long_)
print(f"best transfer at {t_star * 1e3:.4f} ms (pi/(2 alpha) = {short * 1e3:.4f} ms), fidelity {F:.12f}")

# population of each site along the way
space = HilbertSpace(N)
H = build_effective_spin_hamiltonian(spec, space).matrix
times = np.linspace(0, t_star, 7)
states = evolve_unitary(H, space.basis_state("s" + "g" * (N - 1)), times)
for t, psi in zip(times, states):
    pops = [expectation(space.sigma(i, "ss"), psi).real for i in range(N)]
    print(f"{t * 1e3:6.3f} ms  " + " ".join(f"{p:.3f}" for p in pops))

# what the lasers have to do
dev = load_device()
modes = phonon_spectrum(dev.mechanical_chain(N))
res = compile_sidebands(spec, modes, dev.delta_l, dev.eta_o, CompileOptions(components=("x", "y")))
back = forward_couplings(res.program)
print(f"compiled: residual {res.residual:.1e}, "
      f"max |Omega~|/Delta_l {res.program.max_adiabaticity_ratio():.3f}, "
      f"recovered nearest-neighbour xx {np.round(np.diag(back.J[0, 0], 1) / alpha, 4)}")

# the trap scatters photons; every spin drifts to the fully mixed state
model = OpenSystemModel(H, fort_channels(space, 2 * np.pi * 1.0))
late = evolve_master(model, space.basis_state("s" + "g" * (N - 1)), [0.0, t_star, 0.5, 2.0])
for t, rho in zip([0.0, t_star, 0.5, 2.0], late):
    print(f"t = {t:7.4f} s   last-site |s> population {expectation(space.sigma(N - 1, 'ss'), rho).real:.4f}")
