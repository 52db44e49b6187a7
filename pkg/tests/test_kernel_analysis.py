import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slitplane.errors import UsageError
from slitplane.kernel_analysis import (
    alpha_beta,
    branch_residue_sum,
    bridges_from_branches,
    constant_term,
    derivs,
    find_tau_rho,
    horizontal_large_powers,
    kernel_coefficients,
    kernel_roots_at_rho,
    period,
    residue_at_tau,
    singular_expansion,
)
from slitplane.lattice_enum import vertical_poly
from slitplane.series_core import LaurentPoly


@pytest.fixture(autouse=True)
def _high_precision():
    # library values carry 128 bits; compare them at that precision
    with mp.workprec(128):
        yield


@pytest.mark.parametrize("V,p", [([-1, 1], 2), ([-2, 1, 2], 1), ([-1, 2], 3), ([-2, -1, 1, 2], 1), ([-2, 2, 4], 2)])
def test_period(V, p):
    assert period(V) == p


def test_simple_walk_anchors():
    tau, rho = find_tau_rho([-1, 1])
    assert abs(tau - 1) < 1e-30 and abs(rho - mp.mpf(1) / 2) < 1e-30
    se = singular_expansion([-1, 1])
    # 1/sqrt(1 - 4t) = (1/2) (1/4 - t)^(-1/2)
    assert abs(se.a_minus1 - mp.mpf(1) / 2) < 1e-30
    assert abs(se.beta) < 1e-30
    assert abs(se.a0) < 1e-20


def test_tau_against_numpy_roots():
    # V = y^-2 + y + y^2: V'(y) y^3 = 2y^4 + y^3 - 2
    roots = np.roots([2, 1, 0, 0, -2])
    tau_np = max(r.real for r in roots if abs(r.imag) < 1e-12 and r.real > 0)
    tau, rho = find_tau_rho([-2, 1, 2])
    assert abs(float(tau) - tau_np) < 1e-12
    assert abs(float(rho) - 1 / (tau_np ** -2 + tau_np + tau_np ** 2)) < 1e-12


def test_one_two_closed_form():
    # V = 1/y + y^2: tau^3 = 1/2, rho = 2^(2/3)/3
    tau, rho = find_tau_rho([-1, 2])
    assert abs(tau - mp.cbrt(mp.mpf(1) / 2)) < 1e-30
    assert abs(rho - mp.cbrt(4) / 3) < 1e-30
    # b_{3k} = C(3k, k) ~ a_{-1} * 3 * rho^(-3k) / sqrt(pi * 3k): check the prefactor
    se = alpha_beta([-1, 2])
    k = 4000
    with mp.workprec(200):
        exact = mp.binomial(3 * k, k)
        # [t^n](rho - t)^(-1/2) ~ rho^(-n - 1/2) / sqrt(pi n), times period 3
        approx = 3 * se.a_minus1 * rho ** (-3 * k) / mp.sqrt(rho * mp.pi * 3 * k)
        assert abs(exact / approx - 1) < 1e-4


def test_derivs_against_finite_differences():
    vp = vertical_poly([[-2, "1/3"], [1, 2], [3, 1]])
    y = mp.mpf("0.7")
    d = derivs(vp, y)
    f = lambda u: vp(u)
    for k in range(1, 5):
        assert abs(mp.diff(f, y, k) - d[k]) < 1e-15 * (1 + abs(d[k]))


def test_kernel_root_certificate():
    kd = kernel_roots_at_rho([-2, 1, 2])
    assert kd.min_v == 2 and kd.max_v == 2 and kd.period == 1
    assert len(kd.small_roots) == 1 and len(kd.large_roots) == 1
    coeffs = kernel_coefficients(kd.V, kd.rho)
    for r in list(kd.small_roots) + list(kd.large_roots):
        assert abs(mp.polyval(coeffs, r)) < 1e-25
    assert abs(kd.small_roots[0]) < kd.tau < abs(kd.large_roots[0])
    # Vieta: product of all roots = (-1)^deg c_0 / c_deg, tau counted twice
    prod = kd.tau ** 2 * kd.small_roots[0] * kd.large_roots[0]
    assert abs(prod - coeffs[-1] / coeffs[0]) < 1e-25


def test_a_minus1_formula():
    for V in ([-2, 1, 2], [-1, 2], [-3, 1, 4], [[-1, "1/2"], [2, 3]]):
        vp = vertical_poly(V)
        se = alpha_beta(vp)
        tau, rho = find_tau_rho(vp)
        d2 = derivs(vp, tau)[2]
        assert abs(se.a_minus1 - 1 / (tau * mp.sqrt(2 * d2))) < 1e-25
        assert se.alpha < 0


@settings(max_examples=12, deadline=None)
@given(
    st.lists(st.integers(-3, -1), min_size=1, max_size=2, unique=True),
    st.lists(st.integers(1, 3), min_size=1, max_size=2, unique=True),
)
def test_reflection_invariants(neg, pos):
    # bridges of V and V(1/y) coincide, so rho, a_{-1} and a0 must too
    vp = vertical_poly(neg + pos)
    if period(vp) != 1:
        return
    a, b = singular_expansion(vp), singular_expansion(vp.reflect())
    ta, ra = find_tau_rho(vp)
    tb, rb = find_tau_rho(vp.reflect())
    assert abs(ta * tb - 1) < 1e-25 and abs(ra - rb) < 1e-25
    assert abs(a.a_minus1 - b.a_minus1) < 1e-20
    assert abs(a.a0 - b.a0) < 1e-15
    assert abs(a.beta + b.beta) < 1e-15


def test_residue_at_tau_against_contour():
    vp = vertical_poly([-2, 1, 2])
    tau, rho = find_tau_rho(vp)
    r = mp.mpf("1e-3")
    with mp.workprec(128):
        f = lambda th: (lambda y: 1 / (y * (1 - rho * vp(y))) * 1j * (y - tau))(tau + r * mp.expj(th))
        contour = mp.quad(f, [0, mp.pi, 2 * mp.pi]) / (2j * mp.pi)
    assert abs(contour - residue_at_tau(vp, tau, rho)) < 1e-12


def test_constant_term_values():
    assert abs(constant_term([-1, 2]) - mp.mpf(1) / 6) < 1e-20
    assert abs(constant_term([-2, 1]) - mp.mpf(1) / 6) < 1e-20
    assert abs(constant_term([-2, 1, 2])) > 1e-3


def test_branches_reproduce_bridge_series():
    check = bridges_from_branches([-2, 1, 2], "0.2", order=150)
    assert check.abs_diff < 1e-20
    # the residue form gives B̄ itself
    vp = vertical_poly([-2, 1, 2])
    from slitplane.slit_gf import bridges_series

    t = mp.mpf("0.15")
    series = sum(mp.mpf(int(c)) * t ** n for n, c in enumerate(bridges_series(vp, 120)))
    assert abs(branch_residue_sum(vp, t) - series) < 1e-20


def test_bridges_from_branches_range():
    with pytest.raises(UsageError):
        bridges_from_branches([-1, 1], "0.6")


class TestLargePowers:
    def test_central_binomial(self):
        lp = horizontal_large_powers([-1, 1], 0)
        assert lp.predict(51) is None
        ratios = [mp.binomial(n, n // 2) / lp.predict(n) for n in (50, 100, 200)]
        errs = [abs(r - 1) for r in ratios]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 0.01

    @pytest.mark.parametrize("H,i", [([-1, 2], 0), ([-1, 2], 1), ([-2, 1, 3], 2), ([[-1, 3], [1, "1/2"]], -1)])
    def test_general(self, H, i):
        hp = vertical_poly(H)
        lp = horizontal_large_powers(hp, i)
        power = LaurentPoly({0: 1})
        errs = {}
        for n in range(1, 401):
            power = power * hp
            pred = lp.predict(n)
            exact = power.coefficient(i)
            if pred is None:
                assert exact == 0
                continue
            errs[n] = abs(mp.mpf(exact.numerator) / exact.denominator / pred - 1)
        early = errs[min(n for n in errs if n >= 100)]
        late = errs[max(errs)]
        assert late < early and late < 0.01

    def test_bad_h(self):
        with pytest.raises(UsageError):
            horizontal_large_powers([1, 2], 0)
