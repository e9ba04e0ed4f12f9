"""Rates of the reference device and whether its operating point respects the hierarchy."""
import numpy as np

from wgqed.device import check_hierarchy, derive_rates, load_device, magnitude_cascade, vdw_discrepancy
from wgqed.phonons import phonon_spectrum

dev = load_device()
r = derive_rates(dev)

for name, value in r.as_dict().items():
    print(f"{name:>12s} = {value:.4g}")

# typical tier of each scale and how many decades we are off
for name, (hz, typical, off) in magnitude_cascade(dev, r).items():
    print(f"{name:>12s}: {hz:10.4g} Hz   tier {typical:g} Hz   {off:+.2f} decades")

print(vdw_discrepancy(r)[1])
print(f"motional loss per detuning: {r.gamma_m / dev.delta_l:.2e}")

# a six-atom chain: are the sidebands far enough from neighbouring modes?
spec = phonon_spectrum(dev.mechanical_chain(6))
print("modes (kHz):", np.round(spec.eps / (2 * np.pi * 1e3), 2))
print(check_hierarchy(dev, r, mode_spacing=spec.min_spacing, zeeman_spacing=2 * np.pi * 20e6).format())
