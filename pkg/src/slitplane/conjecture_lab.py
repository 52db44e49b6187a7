"""Numerical checks of the partial-fraction conjecture for 1/(y (V(y) - V(tau))).

Decomposition:

    1/(y (V(y) - V(tau))) = (alpha + beta y)/(y - tau)^2 + p_<(y)/f_<(y) + p_>(y)/f_>(y)

with f_< (f_>) the monic polynomial whose roots are the solutions of
V(y) = V(tau) inside (outside) the circle |y| = tau. Polynomials are stored
as coefficient lists in ascending degree.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import mpmath as mp

from .errors import PrecisionError, UsageError
from .kernel_analysis import (
    DEFAULT_PREC_BITS,
    KernelData,
    alpha_beta,
    constant_term,
    derivs,
    kernel_roots_at_rho,
    residue_at_tau,
)
from .lattice_enum import vertical_poly
from .series_core import LaurentPoly

DEFAULT_TOL = mp.mpf("1e-9")
RECOMBINATION_POINTS = 32

PASS, FAIL, INCONCLUSIVE, VACUOUS, DEGENERATE, ERROR = (
    "pass", "fail", "inconclusive", "vacuous", "degenerate", "error",
)


def _poly_from_roots(roots) -> list:
    out = [mp.mpc(1)]
    for r in roots:
        nxt = [mp.mpc(0)] * (len(out) + 1)
        for k, c in enumerate(out):
            nxt[k + 1] += c
            nxt[k] -= r * c
        out = nxt
    return out


def _peval(coeffs, y):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * y + c
    return acc


def _realify(coeffs, tol, what: str) -> list:
    scale = max([abs(c) for c in coeffs] + [mp.mpf(1)])
    for c in coeffs:
        if abs(mp.im(c)) > tol * scale:
            raise PrecisionError(f"{what} has a non-real coefficient {c}")
    return [mp.re(c) for c in coeffs]


def build_f_polys(V, prec_bits: int = DEFAULT_PREC_BITS, kernel: KernelData | None = None):
    """Monic f_< and f_> (ascending real coefficients) from the classified kernel roots."""
    kd = kernel or kernel_roots_at_rho(V, prec_bits)
    with mp.workprec(kd.precision):
        tol = mp.mpf(2) ** (-kd.precision // 2)
        f_less = _realify(_poly_from_roots(kd.small_roots), tol, "f_<")
        f_greater = _realify(_poly_from_roots(kd.large_roots), tol, "f_>")
        return f_less, f_greater


@dataclass(frozen=True)
class Decomposition:
    V: LaurentPoly
    tau: mp.mpf
    rho: mp.mpf
    alpha: mp.mpf
    beta: mp.mpf
    f_less: list
    f_greater: list
    p_less: list
    p_greater: list
    residual_norm: mp.mpf
    small_roots: tuple = ()
    large_roots: tuple = ()

    def evaluate(self, y):
        out = (self.alpha + self.beta * y) / (y - self.tau) ** 2
        if self.p_less:
            out += _peval(self.p_less, y) / _peval(self.f_less, y)
        if self.p_greater:
            out += _peval(self.p_greater, y) / _peval(self.f_greater, y)
        return out

    def target(self, y):
        return 1 / (y * (_eval_laurent(self.V, y) - 1 / self.rho))

    @property
    def lead_p_less(self):
        m = -self.V.min_exp
        return self.p_less[m - 2] if m >= 2 else mp.mpf(0)

    @property
    def lead_p_greater(self):
        M = self.V.max_exp
        return self.p_greater[M - 2] if M >= 2 else mp.mpf(0)


def _eval_laurent(p: LaurentPoly, y):
    return mp.fsum(mp.mpf(c.numerator) / c.denominator * y ** e for e, c in p.items())


def _numerator_from_residues(roots, residues) -> list:
    """p with p/prod(y - r) = sum res_k/(y - r_k); deg p <= len(roots) - 1."""
    n = len(roots)
    out = [mp.mpc(0)] * max(n, 1)
    for k, (r, res) in enumerate(zip(roots, residues)):
        others = _poly_from_roots([roots[j] for j in range(n) if j != k])
        for d, c in enumerate(others):
            out[d] += res * c
    return out


def _sample_points(tau, small, large, count: int, seed: int):
    rng = random.Random(seed)
    poles = [tau, *small, *large]
    pts = []
    while len(pts) < count:
        radius = tau * mp.mpf(rng.uniform(0.2, 3.0))
        y = radius * mp.expj(mp.mpf(rng.uniform(0, 2 * 3.141592653589793)))
        if min(abs(y - q) for q in poles) > tau / 20:
            pts.append(y)
    return pts


def partial_fractions(V, prec_bits: int = DEFAULT_PREC_BITS, seed: int = 0) -> Decomposition:
    """Decompose by residue extraction at each pole plus the order-2 model at tau."""
    vp = vertical_poly(V)
    kd = kernel_roots_at_rho(vp, prec_bits)
    f_less, f_greater = build_f_polys(vp, kernel=kd)
    with mp.workprec(kd.precision):
        tau, rho = kd.tau, kd.rho
        dV = vp.derivative(1)
        # 1/(y(V - V(tau))) = -rho / (y (1 - rho V))
        beta = -rho * residue_at_tau(vp, tau, rho)
        _, _, d2, _, _ = derivs(vp, tau)
        # (alpha + beta tau) = lim (y - tau)^2 / (y (V - V(tau))) = 2/(tau V''(tau))
        alpha = 2 / (tau * d2) - beta * tau
        tol = mp.mpf(2) ** (-kd.precision // 2)

        def block(roots):
            if not roots:
                return []
            residues = [1 / (r * _eval_laurent(dV, r)) for r in roots]
            return _realify(_numerator_from_residues(list(roots), residues), tol, "p")

        p_less = block(kd.small_roots) if kd.min_v >= 2 else []
        p_greater = block(kd.large_roots) if kd.max_v >= 2 else []
        dec = Decomposition(vp, tau, rho, alpha, beta, f_less, f_greater, p_less, p_greater,
                            mp.mpf(0), kd.small_roots, kd.large_roots)
        worst = mp.mpf(0)
        for y in _sample_points(tau, kd.small_roots, kd.large_roots, RECOMBINATION_POINTS, seed):
            want = dec.target(y)
            worst = max(worst, abs(dec.evaluate(y) - want) / max(abs(want), mp.mpf(1)))
        return Decomposition(vp, tau, rho, alpha, beta, f_less, f_greater, p_less, p_greater,
                             worst, kd.small_roots, kd.large_roots)


def _chain_verdict(values, margin) -> tuple[str, mp.mpf]:
    """Strictly increasing positive chain 0 < v_0 < v_1 < ...; returns (verdict, min gap)."""
    gaps = [values[0]] + [b - a for a, b in zip(values, values[1:])]
    low = min(gaps)
    if low > margin:
        return PASS, low
    if low < -margin:
        return FAIL, low
    return INCONCLUSIVE, low


def _degenerate(roots, tau, tol) -> bool:
    # two roots sharing a modulus, unless they form a complex-conjugate pair
    eps = tol * tau
    for a in range(len(roots)):
        for b in range(a + 1, len(roots)):
            r1, r2 = roots[a], roots[b]
            if abs(abs(r1) - abs(r2)) > eps:
                continue
            if abs(mp.im(r1)) > eps and abs(r1 - mp.conj(r2)) <= eps:
                continue
            return True
    return False


@dataclass
class ConjectureReport:
    V: LaurentPoly
    tau: mp.mpf
    rho: mp.mpf
    verdicts: dict
    margins: dict

    @property
    def failed(self) -> bool:
        return FAIL in self.verdicts.values()


def check_conjecture(V, tol=DEFAULT_TOL, prec_bits: int = DEFAULT_PREC_BITS, dec: Decomposition | None = None) -> ConjectureReport:
    """Verdicts for the coefficient chains of f_<, f_> and the leading-term signs of p_<, p_>."""
    dec = dec or partial_fractions(V, prec_bits)
    tol = mp.mpf(tol)
    m, M = -dec.V.min_exp, dec.V.max_exp
    verdicts, margins = {}, {}

    def scale(cs):
        return max([abs(c) for c in cs] + [mp.mpf(1)])

    if m <= 1:
        verdicts["f_less_chain"], margins["f_less_chain"] = VACUOUS, None
    elif _degenerate(dec.small_roots, dec.tau, tol):
        verdicts["f_less_chain"], margins["f_less_chain"] = DEGENERATE, None
    else:
        verdicts["f_less_chain"], margins["f_less_chain"] = _chain_verdict(dec.f_less, tol * scale(dec.f_less))
    if M <= 1:
        verdicts["f_greater_chain"], margins["f_greater_chain"] = VACUOUS, None
    elif _degenerate(dec.large_roots, dec.tau, tol):
        verdicts["f_greater_chain"], margins["f_greater_chain"] = DEGENERATE, None
    else:
        # 0 < b_{M-1} < ... < b_0: reverse to an increasing chain
        verdicts["f_greater_chain"], margins["f_greater_chain"] = _chain_verdict(
            dec.f_greater[::-1], tol * scale(dec.f_greater)
        )
    if m <= 1:
        verdicts["p_less_lead_negative"], margins["p_less_lead_negative"] = VACUOUS, None
    else:
        lead = dec.lead_p_less
        margin = tol * scale(dec.p_less)
        v = PASS if lead < -margin else FAIL if lead > margin else INCONCLUSIVE
        verdicts["p_less_lead_negative"], margins["p_less_lead_negative"] = v, -lead
    if M <= 1:
        verdicts["p_greater_lead_positive"], margins["p_greater_lead_positive"] = VACUOUS, None
    else:
        lead = dec.lead_p_greater
        margin = tol * scale(dec.p_greater)
        v = PASS if lead > margin else FAIL if lead < -margin else INCONCLUSIVE
        verdicts["p_greater_lead_positive"], margins["p_greater_lead_positive"] = v, lead
    return ConjectureReport(dec.V, dec.tau, dec.rho, verdicts, margins)


def cross_identities(V, tol=DEFAULT_TOL, prec_bits: int = DEFAULT_PREC_BITS, dec: Decomposition | None = None) -> dict:
    """Numerically evaluate the identities linking the decomposition to the singular expansion.

    Returns name -> {"holds": bool | None, "lhs", "rhs", "margin"}. ``holds`` is
    None when the identity's hypotheses do not apply.
    """
    vp = vertical_poly(V)
    dec = dec or partial_fractions(vp, prec_bits)
    tol = mp.mpf(tol)
    out: dict = {}
    with mp.workprec(prec_bits):
        se = alpha_beta(vp, prec_bits)
        half_res = residue_at_tau(vp, dec.tau, dec.rho) / 2
        out["principal_constant_is_half_residue"] = _identity(se.principal_constant, half_res, mp.mpf(10) ** -10)
        a0 = constant_term(vp, prec_bits)
        rhs = -(dec.beta / 2 + dec.lead_p_less) / dec.rho
        out["constant_term_from_decomposition"] = _identity(a0, rhs, tol)
        flipped = partial_fractions(vp.reflect(), prec_bits)
        out["beta_flips_under_reflection"] = _identity(flipped.beta, -dec.beta, tol)
        out["puiseux_beta_flips_under_reflection"] = _identity(
            alpha_beta(vp.reflect(), prec_bits).beta, -se.beta, tol
        )
        m = -vp.min_exp
        unit = all(c == 1 for _, c in vp.items())
        if m == 2 and unit:
            out["tau_above_half"] = {"holds": bool(dec.tau > mp.mpf(1) / 2), "lhs": dec.tau, "rhs": mp.mpf(1) / 2, "margin": dec.tau - mp.mpf(1) / 2}
            out["beta_negative_unit_weights"] = {"holds": bool(dec.beta < 0), "lhs": dec.beta, "rhs": mp.mpf(0), "margin": -dec.beta}
        else:
            out["tau_above_half"] = {"holds": None, "lhs": None, "rhs": None, "margin": None}
            out["beta_negative_unit_weights"] = {"holds": None, "lhs": None, "rhs": None, "margin": None}
        # f_< f_> has positive coefficients, constant terms positive
        prod = [mp.mpf(0)] * (len(dec.f_less) + len(dec.f_greater) - 1)
        for a, x in enumerate(dec.f_less):
            for b, y in enumerate(dec.f_greater):
                prod[a + b] += x * y
        low = min(prod)
        out["f_product_positive"] = {
            "holds": bool(low > 0 and dec.f_less[0] > 0 and dec.f_greater[0] > 0),
            "lhs": low, "rhs": mp.mpf(0), "margin": min(low, dec.f_less[0], dec.f_greater[0]),
        }
    return out


def _identity(lhs, rhs, tol) -> dict:
    diff = abs(lhs - rhs)
    return {"holds": bool(diff <= tol), "lhs": lhs, "rhs": rhs, "margin": diff}


def _num(x):
    if x is None:
        return None
    if isinstance(x, (mp.mpf, mp.mpc)):
        return mp.nstr(mp.re(x), 17)
    return x


def parse_catalog(data) -> list:
    """Catalog JSON: a list of entries, each a list of offsets / [offset, "p/q"] pairs or {"V": [...]}."""
    if isinstance(data, dict) and "entries" in data:
        data = data["entries"]
    if not isinstance(data, list):
        raise UsageError("catalog must be a JSON list")
    return data


def _entry_poly(entry) -> LaurentPoly:
    raw = entry["V"] if isinstance(entry, dict) else entry
    return vertical_poly(raw)


def _entry_label(entry) -> object:
    raw = entry["V"] if isinstance(entry, dict) else entry
    return raw


def evaluate_entry(entry, tol=DEFAULT_TOL, prec_bits: int = DEFAULT_PREC_BITS, seed: int = 0) -> dict:
    try:
        vp = _entry_poly(entry)
        if vp.min_exp >= 0 or vp.max_exp <= 0 or any(c <= 0 for _, c in vp.items()):
            raise UsageError("V needs positive weights and both signs of exponent")
        dec = partial_fractions(vp, prec_bits, seed)
        report = check_conjecture(vp, tol, prec_bits, dec)
        idents = cross_identities(vp, tol, prec_bits, dec)
    except Exception as exc:  # per-entry failures are findings, not fatal
        return {"V": _entry_label(entry), "status": ERROR, "error": f"{type(exc).__name__}: {exc}"}
    return {
        "V": [[e, str(c)] for e, c in vp.items()],
        "status": FAIL if report.failed else "ok",
        "tau": _num(dec.tau),
        "rho": _num(dec.rho),
        "residual_norm": _num(dec.residual_norm),
        "verdicts": report.verdicts,
        "margins": {k: _num(v) for k, v in report.margins.items()},
        "identities": {
            k: {"holds": v["holds"], "margin": _num(v["margin"])} for k, v in idents.items()
        },
    }


def run_catalog(entries, tol=DEFAULT_TOL, prec_bits: int = DEFAULT_PREC_BITS, seed: int = 0) -> dict:
    results = [evaluate_entry(e, tol, prec_bits, seed) for e in entries]
    summary: dict[str, int] = {}
    for r in results:
        if r["status"] == ERROR:
            summary[ERROR] = summary.get(ERROR, 0) + 1
            continue
        for v in r["verdicts"].values():
            summary[v] = summary.get(v, 0) + 1
    return {"entries": results, "summary": dict(sorted(summary.items())), "failures": summary.get(FAIL, 0)}


def default_catalog_path() -> Path:
    return Path(__file__).with_name("data") / "default_catalog.json"


def load_default_catalog() -> list:
    return parse_catalog(json.loads(default_catalog_path().read_text()))
