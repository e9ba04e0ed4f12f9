"""SU(3) spins out of blocks of three atoms.

A strong blockade keeps exactly one excitation per block; hopping between
blocks then only survives as a second-order exchange.  Here we compare the
exact low band with the effective SU(3) Heisenberg model.
"""
import numpy as np

from wgqed.models.gauge import (GaugeEncoding, effective_sun_heisenberg, gauge_blocks, global_generators,
                                low_band_spectrum)

O = 1.0
for blocks in (2, 3):
    print(f"{blocks} blocks of three atoms")
    for ratio in (1e2, 1e3, 1e4):
        lam = ratio * O
        enc = GaugeEncoding(3, blocks, lam)
        _, H_G, _ = gauge_blocks(enc)
        J = -O**2 / lam
        H_I, H_eff = effective_sun_heisenberg(enc, J, O)
        diff = low_band_spectrum(H_G + H_I, enc) - np.linalg.eigvalsh(H_eff)
        res = np.max(np.abs(diff - diff.mean()))
        comm = max(np.linalg.norm(H_eff @ g - g @ H_eff) for g in global_generators(3, blocks))
        print(f"  lambda/O = {ratio:.0e}: exchange {J:.1e}, residual {res:.2e}, "
              f"O^3/lambda^2 = {O**3 / lam**2:.1e}, O^4/lambda^3 = {O**4 / lam**3:.1e}, [H, G] {comm:.0e}")

# two blocks: a closed loop needs three hops, so only even orders survive and the
# residual falls like O^4/lambda^3; three blocks close a loop at third order
