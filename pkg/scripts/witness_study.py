"""Residual-exponent fits for several step sets and orders N.

Prints one row per (step set, N): leading exponent, residual exponent, verdict.
"""
import argparse
import time

import mpmath as mp

from slitplane.asymptotics_fit import verify_witness
from slitplane.errors import UsageError
from slitplane.lattice_enum import StepSet

SETS = {
    "H={-1,1} V={-2,1,2}": ([-1, 1], [-2, 1, 2]),
    "H={-1,1} V={-1,2}": ([-1, 1], [-1, 2]),
    "H={-1,1} V={-2,-1,1,2}": ([-1, 1], [-2, -1, 1, 2]),
    "H={-1,1} V={-1,1}": ([-1, 1], [-1, 1]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--orders", type=int, nargs="+", default=[100, 150, 200, 300])
    ap.add_argument("--i", type=int, default=0)
    args = ap.parse_args()
    print(f"{'step set':28} {'N':>4} {'exponent':>12} {'residual':>12} {'+/-':>9}  verdict")
    for name, (H, V) in SETS.items():
        for N in args.orders:
            t0 = time.perf_counter()
            try:
                rep = verify_witness(StepSet.from_parts(H, V), args.i, N)
            except UsageError as exc:
                # periodic sets leave too few admissible n for the window
                print(f"{name:28} {N:4d}  skipped: {exc}")
                continue
            res = "-" if rep.residual_exponent is None else mp.nstr(rep.residual_exponent, 7)
            unc = "-" if rep.residual_unc is None else mp.nstr(rep.residual_unc, 2)
            print(f"{name:28} {N:4d} {mp.nstr(rep.exponent, 7):>12} {res:>12} {unc:>9}  "
                  f"{rep.verdict} ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
