"""Regenerate src/slitplane/data/default_catalog.json.

Every reduced 0/1 vertical step set with min exponent -m (m = 1..3) and max
exponent M (M = 1..4), plus a fixed list of weighted sets.
"""
import itertools
import json
from functools import reduce
from math import gcd
from pathlib import Path

WEIGHTED = [
    [[-2, "1/2"], [1, "1"], [2, "3"]],
    [[-2, "3"], [1, "1"], [2, "1/2"]],
    [[-1, "2"], [2, "1/3"]],
    [[-2, "1"], [-1, "2"], [1, "1/2"], [2, "1"]],
    [[-3, "1"], [-1, "2"], [1, "1/2"], [4, "1"]],
    [[-3, "2"], [1, "1"], [2, "5/2"], [3, "1/4"]],
    [[-2, "3"], [-1, "1"], [1, "2"], [3, "1/2"]],
    [[-3, "1/3"], [-2, "1"], [2, "1"], [4, "2"]],
    [[-1, "5"], [1, "1"], [3, "2"]],
    [[-2, "7/3"], [3, "1"], [4, "1/5"]],
]


def unit_sets():
    for m in (1, 2, 3):
        for M in (1, 2, 3, 4):
            mids = [e for e in range(-m + 1, M) if e != 0]
            for k in range(len(mids) + 1):
                for sub in itertools.combinations(mids, k):
                    V = sorted([-m, M, *sub])
                    if reduce(gcd, V) == 1:
                        yield [[v, "1"] for v in V]


def main():
    entries = [{"V": V} for V in unit_sets()] + [{"V": V, "weighted": True} for V in WEIGHTED]
    out = Path(__file__).resolve().parents[1] / "src" / "slitplane" / "data" / "default_catalog.json"
    out.write_text(json.dumps(entries, indent=1) + "\n")
    print(f"{len(entries)} entries -> {out}")


if __name__ == "__main__":
    main()
