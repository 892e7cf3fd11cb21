"""Resonance conditions of the cnoidal drive, solved and then checked dynamically."""
import numpy as np

from cnoidal import exact, resonance, specfun
from cnoidal.model import FieldParams


def main():
    print("Chebyshev moduli (zero detuning):")
    for N in range(2, 6):
        ks = resonance.chebyshev_resonance_moduli(N)
        print(f"  N={N}: " + ", ".join(f"{k:.5f}" for k in ks))

    # Each modulus should drive a full inversion within one period.
    for N, k in ((2, resonance.chebyshev_resonance_moduli(2)[0]), (3, resonance.chebyshev_resonance_moduli(3)[0])):
        tau = np.linspace(0, 4 * specfun.complete_K(k), 801)
        traj = exact.exact_trajectory(FieldParams.from_detuning(N, k, 0.0), tau)
        tau0, s3min, hit = resonance.detect_resonance(traj)
        print(f"  N={N}, k={k:.5f}: min S3 = {s3min:+.10f} at tau = {tau0:.4f} (resonant: {hit})")

    print("\nRabi resonances, N=2:")
    for m in (1, 2, 3, 4):
        sol = resonance.solve_rabi_resonance_k(2, m)
        print(f"  m={m}: k = {sol.k:.6f}   residual {sol.residual:.1e}")

    print("\nBloch-Siegert ratio w0/nu against its series:")
    for k in (0.05, 0.1, 0.2, 0.3, 0.6):
        exact_ratio = resonance.bloch_siegert_ratio(k)
        series = resonance.bloch_siegert_series(k)
        print(f"  k={k:4.2f}: {exact_ratio:.10f}  series {series:.10f}  gap/k^6 {abs(exact_ratio - series) / k ** 6:.3f}")


if __name__ == "__main__":
    main()
