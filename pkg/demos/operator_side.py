"""From a matrix to Dixmier weights.

Singular values of a finite matrix enter the function side as a step
function with unit pieces.  The weights (mu(0) + ... + mu(n)) / psi(n + 1)
are then values of the a-profile at integer t, and the Marcinkiewicz norm
is their supremum.

Run with ``python demos/operator_side.py``.
"""

import math

import numpy as np

from dixmier.averaging import a_profile
from dixmier.psi import PsiLog
from dixmier.spectra import dixmier_weight_sequence, marcinkiewicz_norm, singular_values
from dixmier.stepfn import pi_embed


def main():
    psi = PsiLog()
    # a diagonal operator with mu(k) = 1/(k+1), sandwiched between rotations
    n = 64
    rng = np.random.default_rng(2024)
    q1, _ = np.linalg.qr(rng.normal(size=(n, n)))
    q2, _ = np.linalg.qr(rng.normal(size=(n, n)))
    A = q1 @ np.diag(1.0 / np.arange(1, n + 1)) @ q2
    mu = singular_values(A)
    err = np.max(np.abs(mu.values - 1.0 / np.arange(1, n + 1)))
    print(f"recovered 1/(k+1) singular values, max error {err:.2e}")

    f = pi_embed(mu.values)
    print("\n  n   weight      a(n+1, pi(mu))")
    for k in (0, 1, 7, 31, 63):
        w = dixmier_weight_sequence(mu, psi, k)
        print(f"{k:>3}   {w:.9f}  {a_profile(f, psi, math.log2(k + 1)):.9f}")

    norm = marcinkiewicz_norm(mu, psi)
    print(f"\nMarcinkiewicz norm {norm.value:.6f} attained at n={int(norm.argmax)}")
    print("harmonic partial sums over log(n+1) tend to 1, slowly:")
    big = 1.0 / np.arange(1, 2 ** 20 + 1)
    for k in (2 ** 10, 2 ** 15, 2 ** 20):
        print(f"  n={k:>8}  {dixmier_weight_sequence(big, psi, k - 1):.6f}")


if __name__ == "__main__":
    main()
