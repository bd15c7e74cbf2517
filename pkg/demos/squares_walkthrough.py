"""The squares example under psi(t) = 2**sqrt(log2(1 + t)) - 1.

Here the Cesaro mean of the a-profile converges (to 1/log 2) although the
a-profile itself keeps oscillating, so the operator is Connes-Dixmier
measurable without being Dixmier measurable.  This psi grows too fast for
the log-derivative bound, which is what makes the two notions part ways.

Run with ``python demos/squares_walkthrough.py`` (a few seconds).
"""

import math

from dixmier.averaging import (a_profile, connes_dixmier_bounds,
                               dixmier_verdict, squares_x_profile,
                               uniform_cesaro_diagnostic)
from dixmier.profile import cesaro_log_mean
from dixmier.psi import PsiSqrt, check_taub
from dixmier.stepfn import squares_example

LN2 = math.log(2.0)


def main():
    f = squares_example()
    psi = PsiSqrt()
    g = check_taub(psi)
    print(f"log-derivative bound for this psi: {g.verdict} "
          f"(value {g.g[-1]:.1f} at t = 2**{math.log2(g.t[-1]):.0f})")

    print("\na at u = n**2 and u = (n + 1/2)**2:")
    for n in (10, 100, 1000, 2000):
        print(f"  n={n:>4}  {a_profile(f, psi, float(n * n)):.6f}"
              f"  {a_profile(f, psi, (n + 0.5) ** 2):.6f}")

    x = squares_x_profile(2001)
    print(f"\n(Mx)(2**(2000**2)) = {cesaro_log_mean(x, 2000.0 ** 2):.6f}"
          f"  (limit 1/(2 log 2) = {1 / (2 * LN2):.6f})")

    cd = connes_dixmier_bounds(f, psi)
    dv = dixmier_verdict(f, psi)
    print(f"\nM(a) on blocks 200..2000: [{cd.bounds[0]:.6f}, {cd.bounds[1]:.6f}]"
          f" -> {cd.kind}, 1/log 2 = {1 / LN2:.6f}")
    print(f"a on the same blocks:     [{dv.bounds[0]:.6f}, {dv.bounds[1]:.6f}] -> {dv.kind}")

    rep = uniform_cesaro_diagnostic(f, psi, 1 / LN2)
    print("\nshifted Cesaro means against A = 1/log 2, worst shift per u:")
    for u, d in zip(rep.u_grid, rep.sup_dev):
        print(f"  u={u:>6.0f}  sup deviation {d:.3f}")
    print(f"verdict on the tested grid: {rep.verdict} (witness shift {rep.witness:.0f})")


if __name__ == "__main__":
    main()
