"""XXZ antiferromagnet with vector chirality on the twelve-site star of David."""
import numpy as np

from wgqed.dynamics.space import spin_operator
from wgqed.models.kagome import ground_states, kagome_csl, scalar_chirality, star_of_david, vector_chirality

lat = star_of_david()
print(f"{lat.n_sites} sites, {len(lat.edges)} bonds, {len(lat.triangles)} triangles")

KHZ = 2 * np.pi * 1e3
chi_v = vector_chirality(lat)
chi_s = scalar_chirality(lat)
Sz = sum(spin_operator(lat.n_sites, {i: "z"}) for i in range(lat.n_sites))

# at lambda = 0 the lowest level is doubly degenerate, so the chirality of the
# returned vector is one arbitrary member of that pair
for lam in (0.0, 0.1, 0.3):
    spec = kagome_csl(lat, 0.5 * KHZ, 0.5 * KHZ, lam * KHZ)
    w, v = ground_states(spec, k=4)
    g = v[:, 0]
    print(f"lambda = {lam:.1f} kHz: lowest levels (kHz) {np.round(w / KHZ, 4)}  "
          f"<S_z> {np.vdot(g, Sz @ g).real / 2:+.3f}  "
          f"<chi_vec> {np.vdot(g, chi_v @ g).real:+.4f}  <chi_scal> {np.vdot(g, chi_s @ g).real:+.4f}")
