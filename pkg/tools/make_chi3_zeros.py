#!/usr/bin/env python3
"""Regenerate the bundled table of low critical-line zeros for the
non-principal character mod 3.

L(s, chi) = 3^(-s) (zeta(s, 1/3) - zeta(s, 2/3)); the completed function
Lambda(1/2 + it) is real (the root number is +1), so zeros are located by
sign changes and polished by bisection.  Output goes to
src/racelab/data/chi3_zeros.txt in the zero-list format.

Usage: python tools/make_chi3_zeros.py [T_max]
"""

import sys
from pathlib import Path

import mpmath as mp

mp.mp.dps = 25


def completed(t: float) -> mp.mpf:
    s = mp.mpf("0.5") + 1j * mp.mpf(t)
    l_val = 3 ** (-s) * (mp.zeta(s, mp.mpf(1) / 3) - mp.zeta(s, mp.mpf(2) / 3))
    return ((mp.pi / 3) ** (-(s + 1) / 2) * mp.gamma((s + 1) / 2) * l_val).real


def find_zeros(t_max: float, step: float = 0.05) -> list:
    zeros = []
    t_prev = 0.5
    f_prev = completed(t_prev)
    t = t_prev + step
    while t <= t_max:
        f = completed(t)
        if mp.sign(f) != mp.sign(f_prev):
            lo, hi, flo = t_prev, t, f_prev
            for _ in range(80):
                mid = (lo + hi) / 2
                fm = completed(mid)
                if mp.sign(fm) == mp.sign(flo):
                    lo, flo = mid, fm
                else:
                    hi = mid
            zeros.append(float((lo + hi) / 2))
        t_prev, f_prev = t, f
        t += step
    return zeros


def main() -> None:
    t_max = float(sys.argv[1]) if len(sys.argv) > 1 else 100.0
    zeros = find_zeros(t_max)
    out = Path(__file__).resolve().parent.parent / "src/racelab/data/chi3_zeros.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# critical-line zeros of the L-function of the non-principal",
             f"# character mod 3, heights up to {t_max:g}",
             "# regenerate with tools/make_chi3_zeros.py"]
    for g in zeros:
        lines.append(f"q=3 chi=1 gamma={g:.9f}")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(zeros)} zeros to {out}")


if __name__ == "__main__":
    main()
