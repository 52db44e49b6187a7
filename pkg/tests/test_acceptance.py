"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line."""
import time
from math import comb
from pathlib import Path

import mpmath as mp
import pytest

from slitplane.asymptotics_fit import fit_puiseux_from_bridges, verify_witness
from slitplane.cli import main
from slitplane.conjecture_lab import load_default_catalog, partial_fractions, run_catalog
from slitplane.kernel_analysis import (
    alpha_beta,
    constant_term,
    find_tau_rho,
    horizontal_large_powers,
    period,
    residue_at_tau,
    singular_expansion,
)
from slitplane.lattice_enum import STRICT, StepSet, count_slit_walks_dp, vertical_poly
from slitplane.slit_gf import bridges_series, slit_endpoint_gfs

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(autouse=True)
def _precision():
    with mp.workprec(128):
        yield


def test_criterion_1_endpoint_gfs_equal_lattice_counts(report):
    start = time.perf_counter()
    bad = []
    for V in ([-1, 1], [-2, 1, 2], [-2, -1, 1, 2], [-1, 2]):
        S = StepSet.from_parts([-1, 1], V)
        gfs = slit_endpoint_gfs(S, 14, 6)
        table = count_slit_walks_dp(S, 14, STRICT)
        bad += [(V, i) for i in range(1, 7) if list(gfs[i]) != table.column(i, 0)]
    elapsed = time.perf_counter() - start
    report(1, not bad and elapsed < 60, f"4 step sets, i <= 6, n <= 14, mismatches={bad}, {elapsed:.1f}s")


def test_criterion_2_closed_form_bridges(report):
    b11 = bridges_series([-1, 1], 30)
    b12 = bridges_series([-1, 2], 30)
    ok11 = all(b11[2 * k] == comb(2 * k, k) for k in range(16))
    ok12 = all(b12[3 * k] == comb(3 * k, k) for k in range(11))
    report(2, ok11 and ok12, f"C(2k,k) k<=15: {ok11}; C(3k,k) k<=10: {ok12}")


def test_criterion_3_simple_walk_anchors(report):
    tau, rho = find_tau_rho([-1, 1])
    se = singular_expansion([-1, 1])
    errs = [abs(tau - 1), abs(rho - mp.mpf(1) / 2)]
    ok = max(errs) < 1e-12 and abs(se.beta) < 1e-10 and abs(se.a0) < 1e-10
    report(3, ok, f"|tau-1|={mp.nstr(errs[0], 3)} |rho-1/2|={mp.nstr(errs[1], 3)} "
                  f"beta={mp.nstr(se.beta, 3)} a0={mp.nstr(se.a0, 3)}")


def test_criterion_4_puiseux_cross_validation(report):
    V = [-2, 1, 2]
    _, rho = find_tau_rho(V)
    se = singular_expansion(V)
    fit = fit_puiseux_from_bridges(list(bridges_series(V, 300)), rho)
    rel1 = abs(fit.a_minus1 / se.a_minus1 - 1)
    rel0 = abs(fit.a0 / se.a0 - 1)
    ok = rel1 < 1e-4 and rel0 < 1e-4 and abs(se.a0) > 1e-6
    report(4, ok, f"a_-1={mp.nstr(se.a_minus1, 12)} (rel {mp.nstr(rel1, 3)}), "
                  f"a0={mp.nstr(se.a0, 12)} (rel {mp.nstr(rel0, 3)})")


def test_criterion_5_half_residue_and_constant_term(report):
    worst_half = worst_const = mp.mpf(0)
    count = 0
    for entry in load_default_catalog():
        vp = vertical_poly(entry["V"] if isinstance(entry, dict) else entry)
        if period(vp) != 1:
            continue
        count += 1
        se = alpha_beta(vp)
        tau, rho = find_tau_rho(vp)
        worst_half = max(worst_half, abs(se.principal_constant - residue_at_tau(vp, tau, rho) / 2))
        dec = partial_fractions(vp)
        a0 = constant_term(vp)
        worst_const = max(worst_const, abs(a0 + (dec.beta / 2 + dec.lead_p_less) / dec.rho))
    ok = worst_half < 1e-10 and worst_const < 1e-9
    report(5, ok, f"{count} aperiodic entries, max half-residue gap {mp.nstr(worst_half, 3)}, "
                  f"max constant-term gap {mp.nstr(worst_const, 3)}")


def test_criterion_6_large_powers(report):
    lp = horizontal_large_powers([-1, 1], 0)
    errs = [abs(mp.binomial(n, n // 2) / lp.predict(n) - 1) for n in (50, 100, 200)]
    ok = errs[2] < 0.01 and errs[0] > errs[1] > errs[2]
    report(6, ok, "ratio errors at n=50,100,200: " + ", ".join(mp.nstr(e, 3) for e in errs))


def test_criterion_7_witness_dichotomy(report):
    start = time.perf_counter()
    flag = verify_witness(StepSet.from_parts([-1, 1], [-2, 1, 2]), 0, 200)
    simple = verify_witness(StepSet.from_parts([-1, 1], [-1, 1]), 0, 200)
    elapsed = time.perf_counter() - start
    ok = (
        abs(flag.exponent + mp.mpf(3) / 2) <= 0.05
        and flag.verdict == "witness present"
        and simple.verdict == "witness absent"
        and elapsed < 120
    )
    report(7, ok, f"flagship exponent {mp.nstr(flag.exponent, 6)}, residual {mp.nstr(flag.residual_exponent, 6)} "
                  f"({flag.verdict}); simple residual {mp.nstr(simple.residual_exponent, 6)} "
                  f"({simple.verdict}); {elapsed:.1f}s")


def test_criterion_8_conjecture_scan(report):
    result = run_catalog(load_default_catalog())
    failing = [
        (e["V"], {k: e["margins"][k] for k, v in e["verdicts"].items() if v == "fail"})
        for e in result["entries"] if e["status"] != "ok"
    ]
    report(8, result["failures"] == 0,
           f"{len(result['entries'])} entries, summary {result['summary']}, failing {failing}")


def test_criterion_9_deterministic_verify(report, tmp_path, monkeypatch):
    monkeypatch.setenv("SLITPLANE_CACHE", str(tmp_path / "cache"))
    outs = [tmp_path / "run1", tmp_path / "run2"]
    codes = [main(["verify", "--steps", str(ROOT / "data" / "flagship.json"), "--out", str(o)]) for o in outs]
    names = sorted(p.name for p in outs[0].iterdir())
    same = all((outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in names)
    report(9, codes == [0, 0] and same, f"exit codes {codes}, files {names}, identical={same}")
