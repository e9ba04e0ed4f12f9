"""Random all-to-all SU(4) magnet built from one sign of coupling at a time."""
import numpy as np

from wgqed.models.sy import sy_exact_propagator, sy_sample, sy_split, sy_strobe_evolution, sy_strobe_step

model = sy_sample(3, 4, 1.0, seed=0)
print("couplings:", np.round(model.bonds(), 3))
Hp, Hm = sy_split(model)

print("  dt      one step     ratio")
prev = None
for dt in 0.2 / 2.0 ** np.arange(5):
    err = np.linalg.norm(sy_strobe_step(model, dt, (Hp, Hm)).unitary - sy_exact_propagator(model, dt), 2)
    print(f"{dt:7.4f}  {err:.3e}  " + ("" if prev is None else f"{prev / err:.3f}"))
    prev = err

T = 1.0
U = sy_exact_propagator(model, T)
for steps in (8, 16, 32, 64):
    err = np.linalg.norm(sy_strobe_evolution(model, T, T / steps) - U, 2)
    print(f"{steps:3d} steps to t = {T}: error {err:.2e}")
