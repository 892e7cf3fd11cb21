"""A single sech pulse (k = 1) acting on the |+> state.

With N sech(tau) coupling the pulse area is 2 N pi, so at zero detuning the
state returns to |+> after the pulse; detuning leaves a partial rotation.
"""
import numpy as np

from cnoidal import exact
from cnoidal.model import FieldParams
from cnoidal.oracle import IntegratorConfig, integrate

tau = np.linspace(-8.0, 8.0, 17)

for N, delta in ((1, 0.0), (1, 2.0), (2, 1.5)):
    pair = exact.amplitudes_soliton(N, delta, tau)
    traj = integrate(FieldParams.from_detuning(N, 1.0, delta), IntegratorConfig(tuple(tau), start_tau=-20.0))
    cp, cm = traj.rotating()
    gap = max(np.max(np.abs(pair.c_plus - cp)), np.max(np.abs(pair.c_minus - cm)))
    s3 = np.abs(pair.c_plus) ** 2 - np.abs(pair.c_minus) ** 2
    print(f"N={N}, delta={delta}: closed form vs integration {gap:.1e}")
    print("  S3: " + " ".join(f"{v:+.3f}" for v in s3[::2]))

# Population transfer is largest mid-pulse, not after it.
mid = exact.amplitudes_soliton(1, 0.0, 0.0)
print(f"\nN=1, delta=0 at the pulse peak: |C-|^2 = {abs(mid.c_minus) ** 2:.6f}")
print(f"N=1, delta=0 after the pulse:   |C-|^2 = {abs(exact.amplitudes_soliton(1, 0.0, 30.0).c_minus) ** 2:.3e}")
