"""Generating functions for slit-plane walks with product step sets.

The pipeline is

    B̄(t) (bridges)  ->  B(x;t) = B̄(H(x) t)  ->  log B(x;t)  ->  S_{i,0}(t)

where the last arrow inverts the cycle-lemma identity

    sum_k (-1)^(k-1)/k  sum_{i_1+..+i_k=i}  S_{i_1,0} ... S_{i_k,0}  =  [x^i] log B(x;t).

Every stage is computed along two routes that must agree exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import ComputationError, UsageError
from .lattice_enum import (
    ENDPOINT_EXEMPT,
    LOOP_CONVENTIONS,
    StepSet,
    count_slit_walks_dp,
    vertical_poly,
)
from .series_core import (
    LaurentPoly,
    TruncatedSeries,
    positive_x_part,
    series_compose_scaled,
    series_exp,
    series_log,
    series_mul,
)


def bridges_series(V, N: int) -> TruncatedSeries:
    """B̄(t) to order N as the constant terms [y^0] V(y)^n."""
    vp = vertical_poly(V)
    lo, hi = vp.min_exp, vp.max_exp
    coeffs = [Fraction(1)]
    power = LaurentPoly({0: 1})
    for n in range(1, N + 1):
        remaining = N - n
        # drop heights that cannot return to 0 within the remaining steps
        power = (power * vp).restrict(
            lambda e, r=remaining: -r * hi <= e <= -r * lo
        )
        coeffs.append(power.coefficient(0))
    return TruncatedSeries(coeffs)


def horizontal_powers(H: LaurentPoly, N: int) -> list[LaurentPoly]:
    out = [LaurentPoly({0: 1})]
    for _ in range(N):
        out.append(out[-1] * H)
    return out


def log_bilateral(S: StepSet, N: int, i_range: Iterable[int] | None = None) -> dict[int, list[Fraction]]:
    """[t^n x^i] log B(x;t) for n = 0..N and i in ``i_range`` (default: all i).

    Route 1 takes the logarithm in the Laurent-coefficient ring. Route 2 uses
    the factorisation ([x^i] H(x)^n) * [t^n] log B̄(t). They must agree.
    """
    H = S.hpoly
    bbar = bridges_series(S.V, N)
    route1 = series_log(series_compose_scaled(bbar, H))
    ell = series_log(bbar)
    powers = horizontal_powers(H, N)

    if i_range is None:
        span = N * max(abs(H.min_exp), abs(H.max_exp))
        i_range = range(-span, span + 1)
    out: dict[int, list[Fraction]] = {}
    for i in i_range:
        r1 = [route1[n].coefficient(i) for n in range(N + 1)]
        r2 = [powers[n].coefficient(i) * ell[n] for n in range(N + 1)]
        if r1 != r2:
            bad = next(n for n in range(N + 1) if r1[n] != r2[n])
            raise ComputationError(
                f"log B(x;t) routes disagree at t^{bad} x^{i}: {r1[bad]} vs {r2[bad]}"
            )
        out[i] = r1
    return out


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Compositions of ``total`` into ``parts`` positive integers."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _endpoint_gfs_by_induction(log_coeffs: dict[int, list[Fraction]], i_max: int, N: int) -> dict[int, TruncatedSeries]:
    # S_i = [x^i]log B - sum_{k>=2} (-1)^(k-1)/k sum_{compositions} prod S_{i_j}
    gfs: dict[int, TruncatedSeries] = {}
    for i in range(1, i_max + 1):
        acc = TruncatedSeries(log_coeffs.get(i, [0] * (N + 1)))
        for k in range(2, i + 1):
            sign = Fraction((-1) ** (k - 1), k)
            block = TruncatedSeries([0], order=N)
            for comp in _compositions(i, k):
                prod = gfs[comp[0]]
                for part in comp[1:]:
                    prod = series_mul(prod, gfs[part])
                block = block + prod
            acc = acc - block * sign
        gfs[i] = acc
    return gfs


def _endpoint_gfs_by_exp(log_b: TruncatedSeries, i_max: int) -> dict[int, TruncatedSeries]:
    # 1 + S_+(x;t) = exp(Pos_x log B(x;t))
    pos = positive_x_part(log_b)
    # x-exponents above i_max never feed back into lower ones: all exponents are >= 1
    pos = pos.map(lambda c: c.restrict(lambda e: e <= i_max))
    e = series_exp(pos)
    out = {}
    for i in range(1, i_max + 1):
        out[i] = e.x_coefficient(i)
    return out


def slit_endpoint_gfs(S: StepSet, N: int, i_max: int) -> dict[int, TruncatedSeries]:
    """S_{i,0}(t) for i = 1..i_max, checked across both inversion routes."""
    if i_max < 1:
        raise UsageError("i_max must be >= 1")
    log_b = series_log(series_compose_scaled(bridges_series(S.V, N), S.hpoly))
    log_coeffs = {i: [log_b[n].coefficient(i) for n in range(N + 1)] for i in range(1, i_max + 1)}
    by_exp = _endpoint_gfs_by_exp(log_b, i_max)
    by_induction = _endpoint_gfs_by_induction(log_coeffs, i_max, N)
    for i in range(1, i_max + 1):
        if by_exp[i] != by_induction[i]:
            raise ComputationError(f"S_{{{i},0}} routes disagree: {by_exp[i]} vs {by_induction[i]}")
    return by_exp


def slit_endpoint_gf(S: StepSet, i: int, N: int) -> TruncatedSeries:
    """S_{i,0}(t) truncated at order N (i >= 1)."""
    if i < 1:
        raise UsageError("slit_endpoint_gf needs i >= 1")
    return slit_endpoint_gfs(S, N, i)[i]


def slit_aggregate_gfs(S: StepSet, N: int, convention: str = ENDPOINT_EXEMPT):
    """Return (L(t), S_0(1;t), S(1,1;t)) as truncated series.

    L counts walks ending at the origin, S_0(1;t) walks ending on the x-axis,
    S(1,1;t) all walks. Under the strict convention L(t) = 1.
    """
    table = count_slit_walks_dp(S, N, convention)
    loops, axis, total = [], [], []
    for n, layer in enumerate(table.by_length):
        origin = layer.get((0, 0), Fraction(0))
        loops.append(origin)
        on_axis = sum((c for (x, y), c in layer.items() if y == 0 and x >= 1), Fraction(0))
        if convention == ENDPOINT_EXEMPT or n == 0:
            on_axis += origin
        axis.append(on_axis)
        total.append(sum(layer.values(), Fraction(0)))
    return TruncatedSeries(loops), TruncatedSeries(axis), TruncatedSeries(total)


@dataclass(frozen=True)
class SlitGFBundle:
    bridges: TruncatedSeries
    log_bridges: TruncatedSeries
    log_bilateral: TruncatedSeries
    endpoint_gfs: dict[int, TruncatedSeries]
    step_set: StepSet
    order: int
    convention: str = ENDPOINT_EXEMPT

    def to_dict(self) -> dict:
        return {
            "manifest": {
                "step_set_hash": self.step_set.digest(),
                "N": self.order,
                "flags": {"loop_convention": self.convention},
            },
            "bridges": [str(c) for c in self.bridges],
            "log_bridges": [str(c) for c in self.log_bridges],
            "endpoint_gfs": [
                {"i": i, "coefficients": [str(c) for c in s]}
                for i, s in sorted(self.endpoint_gfs.items())
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def build_bundle(S: StepSet, N: int, i_max: int, convention: str = ENDPOINT_EXEMPT) -> SlitGFBundle:
    if convention not in LOOP_CONVENTIONS:
        raise UsageError(f"unknown loop convention {convention!r}")
    bbar = bridges_series(S.V, N)
    log_b = series_log(series_compose_scaled(bbar, S.hpoly))
    return SlitGFBundle(
        bridges=bbar,
        log_bridges=series_log(bbar),
        log_bilateral=log_b,
        endpoint_gfs=slit_endpoint_gfs(S, N, i_max),
        step_set=S,
        order=N,
        convention=convention,
    )
