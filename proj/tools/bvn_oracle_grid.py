"""Write reference values of the bivariate normal CDF on the acceptance grid.

Uses Phi2(a, b; rho) = Phi(a) Phi(b) + int_0^rho phi2(a, b; r) dr evaluated with
mpmath at 40 digits. Output: one "a b rho value" line per grid point.
"""
import sys

import mpmath as mp

mp.mp.dps = 40


def phi2(a, b, r):
    s = 1 - r * r
    return mp.exp(-(a * a - 2 * r * a * b + b * b) / (2 * s)) / (2 * mp.pi * mp.sqrt(s))


def bvn(a, b, rho):
    a, b, rho = mp.mpf(a), mp.mpf(b), mp.mpf(rho)
    base = mp.ncdf(a) * mp.ncdf(b)
    return base + mp.quad(lambda r: phi2(a, b, r), [0, rho / 2, rho])


def main(path):
    axis = [repr(float(v)) for v in mp.linspace(-4, 4, 20)]
    rhos = [repr(float(v)) for v in mp.linspace(mp.mpf("-0.95"), mp.mpf("0.95"), 9)]
    with open(path, "w") as out:
        for a in axis:
            for b in axis:
                for r in rhos:
                    out.write(f"{a} {b} {r} {mp.nstr(bvn(a, b, r), 20, min_fixed=-1, max_fixed=-1)}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "bvn_oracle_grid.txt")
