"""Regenerates crates/core/data/txcost_grid.json.

Equal-probability quantile midpoints z_k = Φ⁻¹((k + 1/2)/n) of the standard
normal, with exp(z_k), printed to 30 significant digits. Truncation at M is
applied by the library, which refuses any M below the largest grid point.
"""

import json
import sys

import mpmath

mpmath.mp.dps = 60
DIGITS = 30


def fmt(x):
    return mpmath.nstr(x, DIGITS, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)


def grid(n):
    zs = [mpmath.sqrt(2) * mpmath.erfinv(2 * (mpmath.mpf(k) + mpmath.mpf(1) / 2) / n - 1) for k in range(n)]
    return {"z": [fmt(z) for z in zs], "exp_z": [fmt(mpmath.exp(z)) for z in zs]}


def main():
    out = {"digits": DIGITS, "grids": {str(n): grid(n) for n in (4, 8, 16)}}
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
