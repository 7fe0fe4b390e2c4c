"""
Bifurcation boundaries from the distance functions
===================================================

Each boundary is the damping-to-pumping ratio eps/beta at which the
oscillating part of the distance function stops outweighing the dissipative
offset. The homoclinic curve bounds the chaotic band from below; rotational
subharmonics peel off above it, oscillatory ones below.
"""

from pathlib import Path

import numpy as np

from varpend import homoclinic_threshold, osc_threshold, rot_threshold
from varpend.melnikov import homoclinic_result

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

omegas = np.linspace(0.3, 3.0, 541)
hom = np.array([homoclinic_threshold(om) for om in omegas])
i = int(np.argmin(hom))
print(f"homoclinic threshold minimum {hom[i]:.4f} at omega {omegas[i]:.3f}")

# subharmonic curves converge to the homoclinic one as the order grows
print("\nomega   hom      rot q=1  rot q=3  rot q=20 osc q=2  osc q=20")
for om in (0.6, 0.8, 1.2, 2.0):
    row = [homoclinic_threshold(om), rot_threshold(om, 1), rot_threshold(om, 3),
           rot_threshold(om, 20), osc_threshold(om, 2), osc_threshold(om, 20)]
    print(f"{om:4.1f} " + " ".join(f"{x:8.4f}" for x in row))

# sign changes of the distance function flag a crossing; above threshold the
# distance oscillates through zero, below it keeps one sign
res = homoclinic_result(eps=0.1, beta=0.05, omega=0.8)
taus = np.linspace(0.0, 2 * np.pi, 9)
print("\ndistance over tau0 at eps/beta =", 0.1 / 0.05,
      "(threshold", f"{homoclinic_threshold(0.8):.3f}):")
print(np.array2string(np.array([res.distance(t) for t in taus]), precision=2))
print("sign changing:", res.sign_changing)

table = np.column_stack([omegas, hom])
path = out_dir / "homoclinic_threshold.csv"
np.savetxt(path, table, delimiter=",", header="omega,eps_over_beta", comments="")
print("\nwrote", path)
