"""Coefficient asymptotics: transfer predictions, exponent fits, witness detection.

Exact rational coefficients are converted to mpmath floats only at the last
moment. Extrapolation is a generalised Richardson scheme: the sequence is
modelled as L + sum_k c_k n^(-k*step) and L is solved for from depth+1 points
spread over the fitting window.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath as mp

from .errors import UsageError
from .kernel_analysis import (
    DEFAULT_PREC_BITS,
    horizontal_large_powers,
    kernel_roots_at_rho,
    singular_expansion,
)
from .lattice_enum import StepSet
from .series_core import TruncatedSeries, series_log
from .slit_gf import bridges_series, horizontal_powers

FIT_PREC_BITS = 256
DEFAULT_DEPTH = 4
DEFAULT_WINDOW = 40
HALF = mp.mpf(1) / 2


def to_mpf(x) -> mp.mpf:
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


def transfer_prediction(a_minus1, a0, rho, p: int, n: int):
    """Two-term singularity-analysis estimate of [t^n] log B̄(t)."""
    n = mp.mpf(n)
    rho = mp.mpf(rho)
    lead = 1 / (2 * n)
    corr = (mp.mpf(a0) / a_minus1) * mp.sqrt(rho) / (2 * mp.sqrt(mp.pi)) * n ** (-mp.mpf(3) / 2)
    return p * rho ** (-n) * (lead - corr)


def richardson(ns: Sequence, xs: Sequence, exponents: Sequence):
    """Limit L of x_n = L + sum_k c_k n^(-exponents[k]), from len(exponents)+1 points."""
    k = len(exponents)
    if len(ns) != k + 1 or len(xs) != k + 1:
        raise UsageError(f"richardson needs {k + 1} points, got {len(ns)}")
    A = mp.matrix(k + 1, k + 1)
    b = mp.matrix(k + 1, 1)
    for row, (n, x) in enumerate(zip(ns, xs)):
        n = mp.mpf(n)
        A[row, 0] = 1
        for col, e in enumerate(exponents):
            A[row, col + 1] = n ** (-e)
        b[row] = x
    return mp.lu_solve(A, b)[0]


@dataclass(frozen=True)
class Extrapolation:
    value: mp.mpf
    uncertainty: mp.mpf
    depth: int
    window: tuple


def extrapolate(ns: Sequence[int], xs: Sequence, depth: int = DEFAULT_DEPTH, step=HALF) -> Extrapolation:
    """Richardson limit over the whole (ns, xs) window, with a spread-based error bar.

    The error bar is the largest deviation among: the same depth on the window
    with its last point dropped, on the trailing half window, and depth - 1.
    """
    if len(ns) < depth + 3:
        raise UsageError(f"window of {len(ns)} points too short for depth {depth}")
    exps = [step * (k + 1) for k in range(depth)]

    def at(lo: int, hi: int, d: int):
        pos = [lo + round(j * (hi - lo) / d) for j in range(d + 1)]
        return richardson([ns[i] for i in pos], [xs[i] for i in pos], exps[:d])

    last = len(ns) - 1
    best = at(0, last, depth)
    others = [at(0, last - 1, depth), at(last // 2, last, depth), at(0, last, depth - 1)]
    unc = max(abs(best - o) for o in others)
    return Extrapolation(best, unc, depth, (ns[0], ns[-1]))


def _as_items(sequence) -> list[tuple[int, mp.mpf]]:
    if isinstance(sequence, Mapping):
        items = sorted(sequence.items())
    else:
        items = list(enumerate(sequence))
    return [(int(n), v) for n, v in items]


@dataclass(frozen=True)
class ExponentFit:
    s: mp.mpf
    uncertainty: mp.mpf
    window: tuple
    stride: int


def fit_exponent(sequence, rho, window: int = DEFAULT_WINDOW, depth: int = DEFAULT_DEPTH, step=HALF) -> ExponentFit:
    """Estimate s in u_n ~ C rho^(-n) n^s.

    ``sequence`` is a list (indexed from 0) or a mapping n -> u_n. The last
    ``window`` entries must be nonzero and equally spaced: pre-filter to the
    admissible residue class when the sequence is periodic.
    """
    with mp.workprec(FIT_PREC_BITS):
        items = _as_items(sequence)[-(window + 1):]
        if len(items) < window + 1:
            raise UsageError(f"need {window + 1} terms, got {len(items)}")
        ns = [n for n, _ in items]
        stride = ns[1] - ns[0]
        if stride <= 0 or any(b - a != stride for a, b in zip(ns, ns[1:])):
            raise UsageError("window indices must be equally spaced")
        if any(v == 0 for _, v in items):
            raise UsageError("zero in fitting window: pre-filter the admissible residue class")
        rho = to_mpf(rho) if not isinstance(rho, mp.mpf) else rho
        v = [to_mpf(u) * rho ** n for n, u in items]
        # s_n = (n/d)(v_{n+d}/v_n - 1) -> s
        sn = [mp.mpf(ns[j]) / stride * (v[j + 1] / v[j] - 1) for j in range(len(v) - 1)]
        ext = extrapolate(ns[:-1], sn, depth, step)
        return ExponentFit(ext.value, ext.uncertainty, (ns[0], ns[-1]), stride)


def _half_binomial(n: int):
    """[t^n] (1 - t)^(1/2)."""
    return mp.binomial(HALF, n) * (-1) ** n


@dataclass(frozen=True)
class PuiseuxFit:
    a_minus1: mp.mpf
    a_minus1_unc: mp.mpf
    a0: mp.mpf
    a0_unc: mp.mpf
    N: int


def fit_puiseux_from_bridges(bridges: Sequence, rho, p: int = 1, window: int = 60, depth: int = 6) -> PuiseuxFit:
    """Fit a_{-1} and a0 of B̄ = a_{-1}/sqrt(rho-t) + a0 + ... from exact b_n.

    a_{-1} comes from b_n directly; a0 from the sqrt(rho - t) term of log B̄,
    whose coefficient is a0/a_{-1}. Both ratios have corrections in integer
    powers of 1/n, so the extrapolation uses step 1. Only n = 0 mod p is used.
    """
    N = len(bridges) - 1
    ell = series_log(TruncatedSeries(list(bridges)))
    with mp.workprec(FIT_PREC_BITS):
        rho = mp.mpf(rho)
        ns = [n for n in range(1, N + 1) if n % p == 0][-window:]
        r1, r2 = [], []
        for n in ns:
            scale = rho ** n
            # [t^n](rho - t)^(-1/2) = rho^(-1/2) rho^(-n) C(2n, n)/4^n
            inv_sqrt = mp.binomial(2 * n, n) / mp.mpf(4) ** n / mp.sqrt(rho)
            r1.append(to_mpf(bridges[n]) * scale / (p * inv_sqrt))
            sqrt_coef = mp.sqrt(rho) * _half_binomial(n)
            r2.append((to_mpf(ell[n]) * scale / p - 1 / (2 * mp.mpf(n))) / sqrt_coef)
        e1 = extrapolate(ns, r1, depth, step=1)
        e2 = extrapolate(ns, r2, depth, step=1)
        a0 = e2.value * e1.value
        a0_unc = abs(e2.uncertainty * e1.value) + abs(e2.value * e1.uncertainty)
        return PuiseuxFit(e1.value, e1.uncertainty, a0, a0_unc, N)


def _num(x, digits: int = 17) -> str:
    return mp.nstr(x, digits, min_fixed=-mp.inf, max_fixed=mp.inf) if isinstance(x, (mp.mpf, mp.mpc)) else str(x)


@dataclass
class FitReport:
    sequence_id: str
    growth: mp.mpf
    exponent: mp.mpf
    exponent_unc: mp.mpf
    leading_constant: mp.mpf
    residual_exponent: mp.mpf | None
    residual_unc: mp.mpf | None
    a0: mp.mpf
    verdict: str
    table: list = field(default_factory=list)  # (n, exact Fraction, predicted mpf, ratio mpf)
    settings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "sequence_id": self.sequence_id,
            "growth": _num(self.growth),
            "exponent": _num(self.exponent),
            "exponent_uncertainty": _num(self.exponent_unc),
            "leading_constant": _num(self.leading_constant),
            "residual_exponent": None if self.residual_exponent is None else _num(self.residual_exponent),
            "residual_uncertainty": None if self.residual_unc is None else _num(self.residual_unc),
            "a0": _num(self.a0),
            "verdict": self.verdict,
            "settings": self.settings,
            "table": [
                {"n": n, "exact": str(e), "predicted": _num(p), "ratio": _num(r)}
                for n, e, p, r in self.table
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "exact", "predicted", "ratio"])
        for n, e, p, r in self.table:
            w.writerow([n, str(e), _num(p), _num(r)])
        return buf.getvalue()


WITNESS_TOL = mp.mpf("0.1")


def verify_witness(
    S: StepSet,
    i: int,
    N: int,
    window: int = DEFAULT_WINDOW,
    depth: int = DEFAULT_DEPTH,
    prec_bits: int = DEFAULT_PREC_BITS,
    table_every: int | None = None,
    bridges: TruncatedSeries | None = None,
) -> FitReport:
    """Look for the n^-2 term in [t^n x^i] log B(x;t) = ([x^i] H^n) [t^n] log B̄.

    Fits the leading exponent (expected -3/2), subtracts the fitted leading
    term C n^s, and fits the exponent of what remains. The witness is present
    when the residual exponent is -2 within ``WITNESS_TOL``.
    """
    H, V = S.hpoly, S.vpoly
    lp = horizontal_large_powers(H, i, prec_bits)
    kd = kernel_roots_at_rho(V, prec_bits)
    se = singular_expansion(V, prec_bits)
    p_v = kd.period
    bbar = bridges if bridges is not None else bridges_series(V, N)
    if bbar.order != N:
        raise UsageError(f"bridge series has order {bbar.order}, expected {N}")
    ell = series_log(bbar)
    powers = horizontal_powers(H, N)
    seq = {}
    for n in range(1, N + 1):
        if not lp.admissible(n) or n % p_v:
            continue
        u = powers[n].coefficient(i) * ell[n]
        if u != 0:
            seq[n] = u
    with mp.workprec(FIT_PREC_BITS):
        rho_eff = kd.rho / lp.growth
        fit = fit_exponent(seq, rho_eff, window, depth)
        s_lead = mp.mpf(round(2 * fit.s)) / 2
        items = sorted(seq.items())[-(window + 1):]
        ns = [n for n, _ in items]
        v = [to_mpf(u) * rho_eff ** n for n, u in items]
        lead = extrapolate(ns, [x * mp.mpf(n) ** (-s_lead) for n, x in zip(ns, v)], depth)
        residual = {n: x - lead.value * mp.mpf(n) ** s_lead for n, x in zip(ns, v)}
        try:
            res_fit = fit_exponent(residual, 1, window - 1 - depth, depth)
            res_s, res_unc = res_fit.s, res_fit.uncertainty
        except UsageError:
            res_s = res_unc = None
        present = res_s is not None and abs(res_s + 2) <= WITNESS_TOL
        table = []
        step = table_every or max(1, (N // 20))
        for n, u in sorted(seq.items()):
            if n % step and n != max(seq):
                continue
            pred = lp.predict(n) * transfer_prediction(se.a_minus1, se.a0, kd.rho, p_v, n)
            table.append((n, u, pred, to_mpf(u) / pred))
        return FitReport(
            sequence_id=f"[t^n x^{i}] log B(x;t)",
            growth=1 / rho_eff,
            exponent=fit.s,
            exponent_unc=fit.uncertainty,
            leading_constant=lead.value,
            residual_exponent=res_s,
            residual_unc=res_unc,
            a0=se.a0,
            verdict="witness present" if present else "witness absent",
            table=table,
            settings={"N": N, "i": i, "window": window, "depth": depth, "witness_tol": str(WITNESS_TOL)},
        )
