import json

import mpmath as mp
import numpy as np
import pytest

from slitplane.conjecture_lab import (
    _chain_verdict,
    _degenerate,
    build_f_polys,
    check_conjecture,
    cross_identities,
    evaluate_entry,
    load_default_catalog,
    parse_catalog,
    partial_fractions,
    run_catalog,
)
from slitplane.errors import UsageError
from slitplane.kernel_analysis import find_tau_rho
from slitplane.lattice_enum import vertical_poly


@pytest.fixture(autouse=True)
def _precision():
    with mp.workprec(128):
        yield


def numpy_f_polys(V):
    """Independent f_< / f_> from numpy.roots on y^m (V(y) - V(tau))."""
    vp = vertical_poly(V)
    tau, rho = find_tau_rho(vp)
    tau, vt = float(tau), float(1 / rho)
    m, M = -vp.min_exp, vp.max_exp
    coeffs = np.zeros(m + M + 1)
    for e, c in vp.items():
        coeffs[M - e] += float(c)  # descending powers of y^(e+m)
    coeffs[M] -= vt
    roots = np.roots(coeffs)
    others = sorted((r for r in roots if abs(r - tau) > 1e-5), key=abs)
    small = [r for r in others if abs(r) < tau]
    large = [r for r in others if abs(r) > tau]
    return np.atleast_1d(np.poly(small))[::-1].real, np.atleast_1d(np.poly(large))[::-1].real


@pytest.mark.parametrize("V", [[-2, 1, 2], [-3, 1, 4], [-1, 3, 4], [-3, -1, 2, 3]])
def test_f_polys_against_numpy(V):
    f_less, f_greater = build_f_polys(V)
    ref_less, ref_greater = numpy_f_polys(V)
    assert np.allclose([float(c) for c in f_less], ref_less, atol=1e-7)
    assert np.allclose([float(c) for c in f_greater], ref_greater, atol=1e-7)


@pytest.mark.parametrize("V", [[-1, 1], [-2, 1, 2], [-3, -1, 2, 4], [[-2, "1/3"], [1, 2], [3, "5/2"]]])
def test_decomposition_recombines(V):
    dec = partial_fractions(V)
    assert dec.residual_norm < 1e-25
    assert len(dec.f_less) == -vertical_poly(V).min_exp
    # a fresh point, not among the sampled ones
    y = mp.mpc("0.31", "-1.7")
    assert abs(dec.evaluate(y) - dec.target(y)) < 1e-25


def test_simple_walk_decomposition():
    # 1/(y(1/y + y - 2)) = 1/(y - 1)^2
    dec = partial_fractions([-1, 1])
    assert abs(dec.alpha - 1) < 1e-25 and abs(dec.beta) < 1e-25
    assert dec.p_less == [] and dec.p_greater == []


def test_chain_verdict():
    assert _chain_verdict([mp.mpf(1), mp.mpf(2), mp.mpf(3)], mp.mpf("1e-9"))[0] == "pass"
    v, low = _chain_verdict([mp.mpf(1), mp.mpf("0.5")], mp.mpf("1e-9"))
    assert v == "fail" and low == mp.mpf("-0.5")
    assert _chain_verdict([mp.mpf(1), mp.mpf(1)], mp.mpf("1e-9"))[0] == "inconclusive"


def test_degenerate_ignores_conjugates():
    pair = (mp.mpc(1, 1), mp.mpc(1, -1))
    assert not _degenerate(pair, mp.mpf(1), mp.mpf("1e-9"))
    assert _degenerate((mp.mpc(1, 0), mp.mpc(-1, 0)), mp.mpf(1), mp.mpf("1e-9"))


def test_flagship_report():
    rep = check_conjecture([-2, 1, 2])
    assert rep.verdicts == {
        "f_less_chain": "pass",
        "f_greater_chain": "pass",
        "p_less_lead_negative": "pass",
        "p_greater_lead_positive": "pass",
    }
    assert not rep.failed


def test_known_chain_failure():
    # f_> for V = 1/y + y^3 + y^4 has ascending coefficients ~ [2.366, 2.568, 2.300, 1]
    rep = check_conjecture([-1, 3, 4])
    assert rep.verdicts["f_greater_chain"] == "fail"
    assert rep.margins["f_greater_chain"] < -0.1
    ref = numpy_f_polys([-1, 3, 4])[1]
    assert ref[1] > ref[0]


@pytest.mark.parametrize("V", [[-2, 1, 2], [-1, 2], [-3, -1, 1, 3, 4], [[-2, "1/2"], [1, 3]]])
def test_cross_identities_hold(V):
    ids = cross_identities(V)
    for name in ("principal_constant_is_half_residue", "constant_term_from_decomposition",
                 "beta_flips_under_reflection", "puiseux_beta_flips_under_reflection", "f_product_positive"):
        assert ids[name]["holds"], name


def test_unit_weight_beta_sign_claim_is_false_for_flagship():
    ids = cross_identities([-2, 1, 2])
    assert ids["tau_above_half"]["holds"] is True
    assert ids["beta_negative_unit_weights"]["holds"] is False


def test_evaluate_entry_errors_are_recorded():
    out = evaluate_entry([1, 2])
    assert out["status"] == "error"
    out = evaluate_entry({"V": [-1, [2, "1/2"]]})
    assert out["status"] == "ok"


def test_run_catalog_summary_and_json():
    res = run_catalog([[-1, 1], [-2, 1, 2], [-1, 3, 4]])
    assert res["failures"] == 1
    json.dumps(res)


def test_parse_catalog():
    assert parse_catalog({"entries": [[-1, 1]]}) == [[-1, 1]]
    with pytest.raises(UsageError):
        parse_catalog({"V": 1})


def test_default_catalog_coverage():
    entries = load_default_catalog()
    polys = [vertical_poly(e["V"] if isinstance(e, dict) else e) for e in entries]
    ranges = {(-p.min_exp, p.max_exp) for p in polys}
    assert {(m, M) for m in (1, 2, 3) for M in (1, 2, 3, 4)} <= ranges


def test_weighted_chain_is_not_scale_invariant():
    # V = 1/(2y) + 3y^2: the single large root has modulus below 1, so b_1 = 1 > b_0
    rep = check_conjecture([[-1, "1/2"], [2, 3]])
    assert rep.verdicts["f_greater_chain"] == "fail"
    _, ref = numpy_f_polys([[-1, "1/2"], [2, 3]])
    assert 0 < ref[0] < 1
