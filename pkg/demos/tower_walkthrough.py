"""Walk through the tower example under psi(t) = log(1 + t).

The a-profile spikes to 2/log 2 at every block edge t = 2**(2**n), while
its logarithmic Cesaro mean only reaches 4/(e log 2).  So the largest
Dixmier trace and the largest Connes-Dixmier trace of the same operator
differ.

Run with ``python demos/tower_walkthrough.py``.
"""

import math

from dixmier.averaging import (a_curve, a_profile, block_windows, envelope,
                               residual_lemma12)
from dixmier.profile import CesaroProfile
from dixmier.psi import PsiLog
from dixmier.stepfn import format_stepfn, tower_example

LN2 = math.log(2.0)


def main():
    f = tower_example()
    psi = PsiLog()
    print("first pieces of the tower step function (u = log2 t, value):")
    print(format_stepfn(f, 5))

    print("\na(t) at block edges u = 2**n:")
    for n in (2, 5, 10, 20, 40):
        print(f"  n={n:>2}  a={a_profile(f, psi, 2.0 ** n):.9f}")
    print(f"  target 2/log 2 = {2 / LN2:.9f}")

    a_win, c_win, u_max = block_windows(f)
    a = a_curve(f, psi, u_max)
    lo, hi = envelope(a, a_win)
    m_lo, m_hi = envelope(CesaroProfile(a), c_win, tol=5e-3)
    print(f"\nblocks 20..40: a ranges over [{lo.estimate:.6f}, {hi.estimate:.6f}]")
    print(f"               M(a) ranges over [{m_lo.estimate:.6f}, {m_hi.estimate:.6f}]")
    print(f"               4/(e log 2) = {4 / (math.e * LN2):.6f}")
    print(f"gap of upper limits: {hi.estimate - m_hi.estimate:.6f}")

    print("\nthe t f*(t)/psi(t) part averages away:")
    for k in (10, 20, 30):
        print(f"  u=2**{k}: {residual_lemma12(f, psi, 2.0 ** k):.3e}")


if __name__ == "__main__":
    main()
