"""Singular analysis of the bridge generating function and of powers of H(x).

All numerics run in mpmath at a configurable binary precision. The kernel
polynomial is

    K(y) = y^m (1 - rho V(y)),    m = -min exponent of V,

whose roots split into the double root tau, the ``small`` roots (|y| < tau)
and the ``large`` roots (|y| > tau).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import mpmath as mp

from .errors import PrecisionError, UsageError
from .lattice_enum import vertical_poly
from .series_core import LaurentPoly

DEFAULT_PREC_BITS = 128
MAX_PREC_BITS = 1024
CLASSIFY_MARGIN = mp.mpf("1e-8")


def _mpf(c) -> mp.mpf:
    return mp.mpf(c.numerator) / c.denominator


def _eval(p: LaurentPoly, y):
    return mp.fsum(_mpf(c) * y ** e for e, c in p.items())


def derivs(V: LaurentPoly, y, k_max: int = 4) -> list:
    """[V(y), V'(y), ..., V^(k_max)(y)] from term-wise differentiation."""
    return [_eval(V.derivative(k), y) for k in range(k_max + 1)]


def period(V) -> int:
    """gcd of the exponents of y^m V(y)."""
    vp = vertical_poly(V)
    m = -vp.min_exp
    g = 0
    for e in vp.exponents():
        g = gcd(g, e + m)
    return g


def _check_valid(vp: LaurentPoly) -> None:
    if vp.min_exp >= 0 or vp.max_exp <= 0:
        raise UsageError("V needs both positive and negative exponents")
    if any(c <= 0 for _, c in vp.items()):
        raise UsageError("V needs positive weights")


def find_tau_rho(V, prec_bits: int = DEFAULT_PREC_BITS):
    """tau > 0 with V'(tau) = 0, and rho = 1/V(tau).

    V is strictly convex on (0, inf) so the critical point is unique; it is
    bracketed, bisected down to double precision, then Newton-polished.
    """
    vp = vertical_poly(V)
    _check_valid(vp)
    d1, d2 = vp.derivative(1), vp.derivative(2)
    with mp.workprec(prec_bits + 20):
        lo, hi = mp.mpf(1), mp.mpf(1)
        for _ in range(200):
            if _eval(d1, lo) < 0:
                break
            lo /= 2
        else:
            raise PrecisionError("could not bracket tau from below")
        for _ in range(200):
            if _eval(d1, hi) > 0:
                break
            hi *= 2
        else:
            raise PrecisionError("could not bracket tau from above")
        for _ in range(60):
            mid = (lo + hi) / 2
            if _eval(d1, mid) < 0:
                lo = mid
            else:
                hi = mid
        tau = (lo + hi) / 2
        tol = mp.mpf(2) ** (-prec_bits - 10)
        for _ in range(200):
            step = _eval(d1, tau) / _eval(d2, tau)
            tau -= step
            if abs(step) <= tol * tau:
                break
        rho = 1 / _eval(vp, tau)
    with mp.workprec(prec_bits):
        return +tau, +rho


def kernel_coefficients(vp: LaurentPoly, t) -> list:
    """Coefficients (highest degree first) of y^m (1 - t V(y))."""
    m = -vp.min_exp
    deg = m + vp.max_exp
    coeffs = [mp.mpf(0)] * (deg + 1)  # ascending
    coeffs[m] += 1
    for e, c in vp.items():
        coeffs[e + m] -= t * _mpf(c)
    return coeffs[::-1]


def _horner(coeffs, y):
    acc = 0
    for c in coeffs:
        acc = acc * y + c
    return acc


def _deflate(coeffs, r):
    """Synthetic division by (y - r); returns quotient and remainder."""
    out = [coeffs[0]]
    for c in coeffs[1:]:
        out.append(c + out[-1] * r)
    return out[:-1], out[-1]


def _polish(coeffs, root, iters: int = 40):
    dcoeffs = [c * (len(coeffs) - 1 - k) for k, c in enumerate(coeffs[:-1])]
    for _ in range(iters):
        f = _horner(coeffs, root)
        df = _horner(dcoeffs, root)
        if df == 0:
            break
        step = f / df
        root -= step
        if abs(step) <= mp.eps * max(1, abs(root)):
            break
    return root


@dataclass(frozen=True)
class KernelData:
    V: LaurentPoly
    min_v: int
    max_v: int
    period: int
    tau: mp.mpf
    rho: mp.mpf
    small_roots: tuple
    large_roots: tuple
    precision: int
    residuals: tuple = ()

    def roots_table(self) -> list[dict]:
        rows = [{"re": self.tau, "im": mp.mpf(0), "class": "double"}]
        rows += [{"re": mp.re(r), "im": mp.im(r), "class": "small"} for r in self.small_roots]
        rows += [{"re": mp.re(r), "im": mp.im(r), "class": "large"} for r in self.large_roots]
        return rows


def _roots_at(vp: LaurentPoly, tau, rho, prec_bits: int):
    coeffs = kernel_coefficients(vp, rho)
    q, rem1 = _deflate(coeffs, tau)
    q, rem2 = _deflate(q, tau)
    scale = max(abs(c) for c in coeffs)
    if abs(rem1) > mp.mpf(2) ** (-prec_bits // 2) * scale or abs(rem2) > mp.mpf(2) ** (-prec_bits // 3) * scale:
        raise PrecisionError("tau is not a double root of the kernel at working precision")
    if len(q) <= 1:
        return [], coeffs
    roots = mp.polyroots(q, maxsteps=400, extraprec=prec_bits)
    roots = [_polish(coeffs, mp.mpc(r)) for r in roots]
    return roots, coeffs


def kernel_roots_at_rho(V, prec_bits: int = DEFAULT_PREC_BITS) -> KernelData:
    """Classify the roots of y^m (1 - rho V(y)) around the double root tau.

    On ambiguity (a root within the margin of the circle |y| = tau) the
    precision is doubled up to ``MAX_PREC_BITS``.
    """
    vp = vertical_poly(V)
    _check_valid(vp)
    m, M = -vp.min_exp, vp.max_exp
    bits = prec_bits
    while True:
        with mp.workprec(bits):
            tau, rho = find_tau_rho(vp, bits)
            roots, coeffs = _roots_at(vp, tau, rho, bits)
            margin = CLASSIFY_MARGIN * tau
            small = [r for r in roots if abs(r) < tau - margin]
            large = [r for r in roots if abs(r) > tau + margin]
            ambiguous = len(small) + len(large) != len(roots)
            counts_ok = len(small) == m - 1 and len(large) == M - 1
            if not ambiguous and counts_ok:
                scale = max(abs(c) for c in coeffs)
                residuals = tuple(abs(_horner(coeffs, r)) / scale for r in roots)
                limit = mp.mpf(10) ** -10
                if any(res > limit for res in residuals):
                    raise PrecisionError(f"root residual {max(residuals)} above {limit}")
                small.sort(key=lambda r: (abs(r), mp.im(r)))
                large.sort(key=lambda r: (abs(r), mp.im(r)))
                return KernelData(
                    V=vp,
                    min_v=m,
                    max_v=M,
                    period=period(vp),
                    tau=tau,
                    rho=rho,
                    small_roots=tuple(small),
                    large_roots=tuple(large),
                    precision=bits,
                    residuals=residuals,
                )
        if bits >= MAX_PREC_BITS:
            raise PrecisionError(
                f"root classification failed at {bits} bits: "
                f"{len(small)} small / {len(large)} large, expected {m - 1} / {M - 1}"
            )
        bits *= 2


@dataclass(frozen=True)
class SingularExpansion:
    """Local data of B̄ at t = rho, in the variable s = sqrt(rho - t).

    ``alpha`` and ``beta`` are the first two coefficients of
    log y_1(t) - log tau = alpha s + beta s^2 + ...; ``alpha`` is negative
    because the principal small branch approaches tau from below.
    ``principal_constant`` is the s^0 coefficient of t d/dt log y_1(t).
    """

    Gt: mp.mpf
    Gzz: mp.mpf
    Gzzz: mp.mpf
    alpha: mp.mpf
    beta: mp.mpf
    a_minus1: mp.mpf
    principal_constant: mp.mpf
    a0: mp.mpf | None = None

    @property
    def alpha_abs(self):
        return abs(self.alpha)


def alpha_beta(V, prec_bits: int = DEFAULT_PREC_BITS) -> SingularExpansion:
    """Puiseux coefficients of log y_1 and the polar coefficient of B̄ at rho."""
    vp = vertical_poly(V)
    with mp.workprec(prec_bits):
        tau, rho = find_tau_rho(vp, prec_bits)
        _, d1, d2, d3, _ = derivs(vp, tau)
        if d2 <= 0:
            raise UsageError("V''(tau) <= 0: step polynomial is not convex on (0, inf)")
        Gt = -1 / rho
        Gzz = -rho * tau ** 2 * d2
        Gzzz = -rho * (tau ** 3 * d3 + 3 * tau ** 2 * d2)
        alpha = -mp.sqrt(2 * Gt / Gzz)
        beta = -(tau * d3 + 3 * d2) / (3 * (rho * tau * d2) ** 2)
        # same quantity from the Taylor coefficients of G; guards the closed form
        beta_from_g = -alpha ** 2 * Gzzz / (6 * Gzz)
        if abs(beta - beta_from_g) > mp.mpf(10) ** -20 * (1 + abs(beta)):
            raise PrecisionError("closed-form beta disagrees with the G-expansion value")
        a_minus1 = -rho * alpha / 2
        principal_constant = -rho * beta
        return SingularExpansion(Gt, Gzz, Gzzz, alpha, beta, a_minus1, principal_constant)


def residue_at_tau(vp: LaurentPoly, tau, rho):
    """Res_{y=tau} 1/(y (1 - rho V(y))) from a local Taylor model of degree 4."""
    _, _, d2, d3, d4 = derivs(vp, tau)
    # 1 - rho V(tau + e) = e^2 * (-rho) (d2/2 + d3 e/6 + d4 e^2/24)
    # 1/(y(1-rho V)) = 1/(e^2 q(e)),  q(e) = (tau + e)(-rho)(d2/2 + d3 e/6 + d4 e^2/24)
    q0 = tau * (-rho) * (d2 / 2)
    q1 = (-rho) * (d2 / 2 + tau * d3 / 6)
    return -q1 / q0 ** 2


def simple_residue(vp: LaurentPoly, root, rho):
    """Res_{y=root} 1/(y (1 - rho V(y))) at a simple root."""
    return 1 / (-rho * root * _eval(vp.derivative(1), root))


def constant_term(V, prec_bits: int = DEFAULT_PREC_BITS, kernel: KernelData | None = None):
    """The s^0 coefficient a0 of B̄ at rho: half the double-pole residue plus the small-root residues."""
    kd = kernel or kernel_roots_at_rho(V, prec_bits)
    with mp.workprec(kd.precision):
        total = residue_at_tau(kd.V, kd.tau, kd.rho) / 2
        for r in kd.small_roots:
            total += simple_residue(kd.V, r, kd.rho)
        tol = mp.mpf(10) ** -10 * (1 + abs(total))
        if abs(mp.im(total)) > tol:
            raise PrecisionError(f"constant term has imaginary part {mp.im(total)}")
        return mp.re(total)


def singular_expansion(V, prec_bits: int = DEFAULT_PREC_BITS) -> SingularExpansion:
    part = alpha_beta(V, prec_bits)
    a0 = constant_term(V, prec_bits)
    return SingularExpansion(
        part.Gt, part.Gzz, part.Gzzz, part.alpha, part.beta,
        part.a_minus1, part.principal_constant, a0,
    )


def _small_branches(vp: LaurentPoly, t):
    coeffs = kernel_coefficients(vp, t)
    roots = mp.polyroots(coeffs, maxsteps=400, extraprec=mp.mp.prec)
    roots = sorted(roots, key=abs)
    m = -vp.min_exp
    if m < len(roots) and abs(abs(roots[m - 1]) - abs(roots[m])) < mp.mpf(10) ** -12:
        raise PrecisionError("small and large branches collide at this t")
    return roots[:m]


def branch_sum(V, t, prec_bits: int = DEFAULT_PREC_BITS):
    """t * sum_j y_j'(t)/y_j(t) over the small branches, derivatives by central differences."""
    vp = vertical_poly(V)
    with mp.workprec(prec_bits):
        t = mp.mpf(t) if not isinstance(t, mp.mpc) else t
        h = mp.mpf(2) ** (-prec_bits // 3)
        base = _small_branches(vp, t)
        plus = _small_branches(vp, t + h)
        minus = _small_branches(vp, t - h)
        total = 0
        for y in base:
            yp = min(plus, key=lambda r: abs(r - y))
            ym = min(minus, key=lambda r: abs(r - y))
            total += (mp.log(yp) - mp.log(ym)) / (2 * h)
        return t * total


def branch_residue_sum(V, t, prec_bits: int = DEFAULT_PREC_BITS):
    """B̄(t) as the sum of residues of 1/(y(1 - tV(y))) at the small branches."""
    vp = vertical_poly(V)
    with mp.workprec(prec_bits):
        return mp.fsum(simple_residue(vp, y, t) for y in _small_branches(vp, t))


@dataclass(frozen=True)
class BranchCheck:
    t: mp.mpf
    branch_value: mp.mpf
    series_value: mp.mpf

    @property
    def abs_diff(self):
        return abs(self.branch_value - self.series_value)


def bridges_from_branches(V, t_sample, order: int = 120, prec_bits: int = DEFAULT_PREC_BITS) -> BranchCheck:
    """Compare t * d/dt log(y_1 ... y_m) with the truncated bridge series at t_sample."""
    from .slit_gf import bridges_series

    vp = vertical_poly(V)
    with mp.workprec(prec_bits):
        _, rho = find_tau_rho(vp, prec_bits)
        t = mp.mpf(t_sample)
        if not 0 < t < rho:
            raise UsageError(f"t_sample must lie in (0, rho={mp.nstr(rho, 8)})")
        value = branch_sum(vp, t, prec_bits)
        series = bridges_series(vp, order)
        series_value = mp.fsum(_mpf(c) * t ** n for n, c in enumerate(series))
        return BranchCheck(t, mp.re(value), series_value)


def scan_circle(V, samples: int = 64, prec_bits: int = DEFAULT_PREC_BITS) -> dict:
    """min |B̄(t)| over |t| = rho, sampled off the real axis. Report only."""
    kd = kernel_roots_at_rho(V, prec_bits)
    with mp.workprec(prec_bits):
        values = []
        for k in range(samples):
            theta = 2 * mp.pi * (k + mp.mpf(1) / 2) / samples
            t = kd.rho * mp.expj(theta)
            values.append((abs(branch_residue_sum(kd.V, t, prec_bits)), theta))
        low, arg = min(values)
        return {"min_abs": low, "argmin_theta": arg, "samples": samples}


@dataclass(frozen=True)
class LargePowers:
    """Saddle-point data for [x^i] H(x)^n."""

    H: LaurentPoly
    i: int
    p: int
    shift: int
    lam: mp.mpf
    zeta: mp.mpf
    R: mp.mpf
    g_coeffs: dict

    def _g(self, u, k: int = 0):
        total = 0
        for e, c in self.g_coeffs.items():
            if e < k:
                continue
            total += _mpf(c) * mp.ff(e, k) * u ** (e - k)
        return total

    def admissible(self, n: int) -> bool:
        return (self.i + n * self.shift) % self.p == 0

    @property
    def growth(self):
        """g(zeta) / zeta^lambda: exponential growth of [x^i] H^n per step."""
        return self._g(self.zeta) / self.zeta ** self.lam

    def predict(self, n: int):
        """a(zeta) g(zeta)^n / (zeta^(N+1) sqrt(2 pi n R)), or None on a structural zero."""
        if n < 1 or not self.admissible(n):
            return None
        N = mp.mpf(n * self.shift) / self.p
        a = self.zeta ** (-mp.mpf(self.i) / self.p)
        return a * self._g(self.zeta) ** n / (self.zeta ** (N + 1) * mp.sqrt(2 * mp.pi * n * self.R))


def horizontal_large_powers(H, i: int, prec_bits: int = DEFAULT_PREC_BITS) -> LargePowers:
    """Solve zeta g'(zeta)/g(zeta) = lambda for g(x) = H(x^(1/p)) x^(min/p)."""
    hp = vertical_poly(H)
    if hp.min_exp >= 0 or hp.max_exp <= 0:
        raise UsageError("H needs both positive and negative offsets")
    shift = -hp.min_exp
    p = 0
    for e in hp.exponents():
        p = gcd(p, e + shift)
    g_coeffs = {(e + shift) // p: c for e, c in hp.items()}
    with mp.workprec(prec_bits):
        lam = mp.mpf(shift) / p

        def g(u, k=0):
            return mp.fsum(_mpf(c) * mp.ff(e, k) * u ** (e - k) for e, c in g_coeffs.items() if e >= k)

        def phi(u):
            return u * g(u, 1) / g(u) - lam

        # u g'/g increases from 0 to deg g on (0, inf)
        lo, hi = mp.mpf(1), mp.mpf(1)
        while phi(lo) > 0:
            lo /= 2
        while phi(hi) < 0:
            hi *= 2
        for _ in range(60):
            mid = (lo + hi) / 2
            if phi(mid) < 0:
                lo = mid
            else:
                hi = mid
        zeta = (lo + hi) / 2
        for _ in range(100):
            # d/du (u g'/g) = g'/g + u g''/g - u (g'/g)^2
            r1 = g(zeta, 1) / g(zeta)
            dphi = r1 + zeta * g(zeta, 2) / g(zeta) - zeta * r1 ** 2
            step = phi(zeta) / dphi
            zeta -= step
            if abs(step) <= mp.eps * zeta:
                break
        r1 = g(zeta, 1) / g(zeta)
        R = g(zeta, 2) / g(zeta) - r1 ** 2 + lam / zeta ** 2
        return LargePowers(hp, i, p, shift, lam, zeta, R, g_coeffs)
