"""Brute-force counting oracles for bridges, bilateral walks and slit-plane walks.

Everything here is plain dynamic programming over lattice positions with
exact rational weights. These counts are the ground truth the generating
function pipeline in :mod:`slitplane.slit_gf` is checked against.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .errors import UsageError
from .series_core import LaurentPoly, as_fraction

STRICT = "strict"
ENDPOINT_EXEMPT = "endpoint-exempt"
LOOP_CONVENTIONS = (STRICT, ENDPOINT_EXEMPT)

Steps = tuple[tuple[int, Fraction], ...]


def _listify(raw):
    if isinstance(raw, (list, tuple, str, bytes, dict)):
        return raw
    try:
        return list(raw)
    except TypeError:
        return raw


def _parse_part(raw, name: str) -> Steps:
    if not isinstance(raw, (list, tuple)):
        raise UsageError(f"{name} must be a list of [offset, weight] pairs")
    out = []
    for item in raw:
        if isinstance(item, int) and not isinstance(item, bool):
            out.append((item, Fraction(1)))
            continue
        if not isinstance(item, (list, tuple)) or not 1 <= len(item) <= 2:
            raise UsageError(f"bad {name} entry {item!r}")
        off = item[0]
        if not isinstance(off, int) or isinstance(off, bool):
            raise UsageError(f"bad {name} offset {off!r}")
        w = as_fraction(item[1]) if len(item) == 2 else Fraction(1)
        out.append((off, w))
    return tuple(out)


@dataclass(frozen=True)
class StepSet:
    """Weighted Cartesian-product step set S = H x V.

    ``H`` and ``V`` are tuples of ``(offset, weight)``. The weight of a step
    (dx, dy) is the product of the two part weights.
    """

    H: Steps
    V: Steps

    @classmethod
    def from_parts(cls, H: Iterable, V: Iterable) -> "StepSet":
        return cls(_parse_part(_listify(H), "H"), _parse_part(_listify(V), "V"))

    @classmethod
    def from_dict(cls, data: dict) -> "StepSet":
        if not isinstance(data, dict) or "H" not in data or "V" not in data:
            raise UsageError('step set JSON needs keys "H" and "V"')
        return cls.from_parts(data["H"], data["V"])

    @classmethod
    def from_json(cls, text: str) -> "StepSet":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "H": [[dx, str(w)] for dx, w in self.H],
            "V": [[dy, str(w)] for dy, w in self.V],
        }

    def canonical_json(self) -> str:
        return json.dumps(
            {"H": sorted(self.to_dict()["H"]), "V": sorted(self.to_dict()["V"])},
            sort_keys=True,
            separators=(",", ":"),
        )

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    @property
    def hpoly(self) -> LaurentPoly:
        return LaurentPoly(self.H)

    @property
    def vpoly(self) -> LaurentPoly:
        return LaurentPoly(self.V)

    def steps(self) -> list[tuple[int, int, Fraction]]:
        return [(dx, dy, wx * wy) for dx, wx in self.H for dy, wy in self.V]


def vertical_poly(V) -> LaurentPoly:
    """Accept a LaurentPoly, a StepSet, or a list of offsets / (offset, weight) pairs."""
    if isinstance(V, LaurentPoly):
        return V
    if isinstance(V, StepSet):
        return V.vpoly
    return LaurentPoly(_parse_part(_listify(V), "V"))


@dataclass(frozen=True)
class ValidationReport:
    checks: dict[str, bool]
    applicability: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @property
    def in_proven_range(self) -> bool:
        return self.ok and all(self.applicability.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "in_proven_range": self.in_proven_range,
            "checks": dict(self.checks),
            "applicability": dict(self.applicability),
        }


def _gcd_all(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = gcd(g, v)
    return g


def validate_stepset(S: StepSet) -> ValidationReport:
    if not S.H or not S.V:
        raise UsageError("step set needs nonempty H and V")
    hs = [dx for dx, _ in S.H]
    vs = [dy for dy, _ in S.V]
    checks = {
        "H_offsets_distinct": len(set(hs)) == len(hs),
        "V_offsets_distinct": len(set(vs)) == len(vs),
        "weights_positive": all(w > 0 for _, w in S.H + S.V),
        "H_gcd_one": _gcd_all(hs) == 1,
        "V_gcd_one": _gcd_all(vs) == 1,
        "H_has_both_signs": min(hs) < 0 < max(hs),
        "V_has_both_signs": min(vs) < 0 < max(vs),
    }
    applicability = {
        "V_min_at_least_minus_2": min(vs) >= -2,
        "V_has_height_at_least_2": any(abs(v) >= 2 for v in vs),
    }
    return ValidationReport(checks, applicability)


def count_bridges_dp(V, N: int) -> list[Fraction]:
    """Weighted number of length-n walks on Z from 0 to 0, n = 0..N."""
    if N < 0:
        raise UsageError("N must be >= 0")
    vp = vertical_poly(V)
    up, down = max(vp.max_exp, 0), max(-vp.min_exp, 0)
    steps = list(vp.items())
    layer = {0: Fraction(1)}
    out = [Fraction(1)]
    for n in range(1, N + 1):
        remaining = N - n
        nxt: dict[int, Fraction] = {}
        for h, c in layer.items():
            for dy, w in steps:
                y = h + dy
                # prune heights that cannot get back to 0 in the steps left
                if y > remaining * down or -y > remaining * up:
                    continue
                nxt[y] = nxt.get(y, 0) + c * w
        layer = nxt
        out.append(layer.get(0, Fraction(0)))
    return out


@dataclass(frozen=True)
class CountTable:
    """Weighted walk counts by length and endpoint."""

    by_length: tuple[dict[tuple[int, int], Fraction], ...]
    convention: str = ENDPOINT_EXEMPT

    @property
    def max_length(self) -> int:
        return len(self.by_length) - 1

    def at(self, n: int, x: int, y: int) -> Fraction:
        return self.by_length[n].get((x, y), Fraction(0))

    def column(self, x: int, y: int) -> list[Fraction]:
        return [layer.get((x, y), Fraction(0)) for layer in self.by_length]

    def totals(self) -> list[Fraction]:
        return [sum(layer.values(), Fraction(0)) for layer in self.by_length]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "x", "y", "count"])
        for n, layer in enumerate(self.by_length):
            for (x, y), c in sorted(layer.items()):
                writer.writerow([n, x, y, str(c)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, convention: str = ENDPOINT_EXEMPT) -> "CountTable":
        layers: list[dict] = []
        for row in csv.DictReader(io.StringIO(text)):
            n = int(row["n"])
            while len(layers) <= n:
                layers.append({})
            layers[n][(int(row["x"]), int(row["y"]))] = Fraction(row["count"])
        return cls(tuple(layers), convention)


def _on_slit(x: int, y: int) -> bool:
    return y == 0 and x <= 0


def count_slit_walks_dp(S: StepSet, N: int, convention: str = ENDPOINT_EXEMPT) -> CountTable:
    """Count walks from the origin avoiding the half-line {(x, 0): x <= 0} after step 0.

    With ``convention="endpoint-exempt"`` a walk may *end* at the origin (so
    loops are counted); it still may not pass through it. ``"strict"`` forbids
    the origin as an endpoint too.
    """
    if N < 0:
        raise UsageError("N must be >= 0")
    if convention not in LOOP_CONVENTIONS:
        raise UsageError(f"unknown loop convention {convention!r}")
    steps = S.steps()
    layer: dict[tuple[int, int], Fraction] = {(0, 0): Fraction(1)}
    layers = [dict(layer)]
    for n in range(1, N + 1):
        nxt: dict[tuple[int, int], Fraction] = {}
        for (x, y), c in layer.items():
            if n > 1 and (x, y) == (0, 0):
                continue  # a loop that closed here cannot continue
            for dx, dy, w in steps:
                px, py = x + dx, y + dy
                if _on_slit(px, py) and not (
                    convention == ENDPOINT_EXEMPT and px == 0 and py == 0
                ):
                    continue
                nxt[(px, py)] = nxt.get((px, py), 0) + c * w
        layer = nxt
        layers.append(dict(layer))
    return CountTable(tuple(layers), convention)


def count_bilateral_dp(S: StepSet, N: int, i: int) -> list[Fraction]:
    """[t^n x^i] B(x;t): unconstrained walks ending at (i, 0), n = 0..N."""
    if N < 0:
        raise UsageError("N must be >= 0")
    steps = S.steps()
    layer: dict[tuple[int, int], Fraction] = {(0, 0): Fraction(1)}
    out = [Fraction(1) if i == 0 else Fraction(0)]
    for _ in range(N):
        nxt: dict[tuple[int, int], Fraction] = {}
        for (x, y), c in layer.items():
            for dx, dy, w in steps:
                key = (x + dx, y + dy)
                nxt[key] = nxt.get(key, 0) + c * w
        layer = nxt
        out.append(layer.get((i, 0), Fraction(0)))
    return out


def count_unconstrained(S: StepSet, N: int) -> CountTable:
    """All walks, no slit. Used for pointwise domination checks."""
    steps = S.steps()
    layer: dict[tuple[int, int], Fraction] = {(0, 0): Fraction(1)}
    layers = [dict(layer)]
    for _ in range(N):
        nxt: dict[tuple[int, int], Fraction] = {}
        for (x, y), c in layer.items():
            for dx, dy, w in steps:
                key = (x + dx, y + dy)
                nxt[key] = nxt.get(key, 0) + c * w
        layer = nxt
        layers.append(dict(layer))
    return CountTable(tuple(layers), "unconstrained")


def negate(V: Sequence[tuple[int, Fraction]]) -> Steps:
    return tuple((-v, w) for v, w in V)
