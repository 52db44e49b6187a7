"""Scan 0/1 vertical step sets beyond the default catalog range.

Lists every set whose chain or sign verdict is not "pass"/"vacuous", with margins.
"""
import argparse
import itertools
from functools import reduce
from math import gcd

from slitplane.conjecture_lab import evaluate_entry


def unit_sets(max_m: int, max_M: int):
    for m in range(1, max_m + 1):
        for M in range(1, max_M + 1):
            mids = [e for e in range(-m + 1, M) if e != 0]
            for k in range(len(mids) + 1):
                for sub in itertools.combinations(mids, k):
                    V = sorted([-m, M, *sub])
                    if reduce(gcd, V) == 1:
                        yield V


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-m", type=int, default=4)
    ap.add_argument("--max-M", type=int, default=5)
    ap.add_argument("--tol", default="1e-9")
    args = ap.parse_args()
    total = flagged = 0
    for V in unit_sets(args.max_m, args.max_M):
        total += 1
        out = evaluate_entry(V, tol=args.tol)
        if out["status"] == "error":
            flagged += 1
            print(V, "error:", out["error"])
            continue
        odd = {k: (v, out["margins"][k]) for k, v in out["verdicts"].items() if v not in ("pass", "vacuous")}
        if odd:
            flagged += 1
            print(V, odd)
    print(f"{flagged} of {total} step sets flagged")


if __name__ == "__main__":
    main()
