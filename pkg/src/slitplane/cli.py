"""Command-line entry point: ``slitplane analyze | verify | catalog``.

Exit codes: 0 ok, 2 invalid input, 3 internal consistency failure,
4 numeric precision failure. Reports are JSON with sorted keys; floats carry
17 significant digits, so identical manifests give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath as mp

from . import __version__
from .asymptotics_fit import (
    DEFAULT_DEPTH,
    DEFAULT_WINDOW,
    WITNESS_TOL,
    transfer_prediction,
    verify_witness,
)
from .conjecture_lab import DEFAULT_TOL, load_default_catalog, parse_catalog, run_catalog
from .errors import ComputationError, PrecisionError, UsageError
from .kernel_analysis import (
    CLASSIFY_MARGIN,
    DEFAULT_PREC_BITS,
    kernel_roots_at_rho,
    singular_expansion,
)
from .lattice_enum import (
    ENDPOINT_EXEMPT,
    LOOP_CONVENTIONS,
    StepSet,
    count_bilateral_dp,
    count_slit_walks_dp,
    validate_stepset,
)
from .series_core import TruncatedSeries, series_compose_scaled, series_log
from .slit_gf import bridges_series, log_bilateral, slit_aggregate_gfs, slit_endpoint_gfs

EXIT_OK, EXIT_INPUT, EXIT_CONSISTENCY, EXIT_PRECISION = 0, 2, 3, 4


@dataclass(frozen=True)
class RunManifest:
    command: str
    input_hash: str
    order: int | None
    precision_bits: int
    tolerances: dict
    flags: dict
    tool_version: str = __version__
    timestamps: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _timestamps() -> dict:
    # wall-clock time would break byte-identical reruns; honour SOURCE_DATE_EPOCH only
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    return {"source_date_epoch": int(epoch) if epoch and epoch.isdigit() else None}


def fmt(x):
    """17 significant digits for floats, exact strings for rationals."""
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        x = mp.mpf(x)
    if isinstance(x, mp.mpf):
        # nstr rounds from the stored mantissa, independent of the ambient precision
        return mp.nstr(x, 17, min_fixed=-mp.inf, max_fixed=mp.inf) if x != 0 else "0.0"
    if isinstance(x, mp.mpc):
        return {"re": fmt(mp.re(x)), "im": fmt(mp.im(x))}
    return x


def write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


# --- coefficient cache ---------------------------------------------------------

def cache_dir() -> Path:
    return Path(os.environ.get("SLITPLANE_CACHE", "./.cache"))


def cached_bridges(S: StepSet, N: int) -> TruncatedSeries:
    """B̄(t) to order N, read from or written to the CSV cache."""
    V_key = hashlib.sha256(
        json.dumps(sorted(S.to_dict()["V"]), separators=(",", ":")).encode()
    ).hexdigest()[:32]
    path = cache_dir() / f"bridges_{V_key}_{N}.csv"
    if path.exists():
        rows = list(csv.DictReader(io.StringIO(path.read_text())))
        coeffs = [Fraction(r["coefficient"]) for r in rows]
        if len(coeffs) == N + 1:
            return TruncatedSeries(coeffs)
    series = bridges_series(S.V, N)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "coefficient"])
    for n, c in enumerate(series):
        w.writerow([n, str(c)])
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".csv")
    with os.fdopen(fd, "w") as fh:
        fh.write(buf.getvalue())
    os.replace(tmp, path)
    return series


# --- input -----------------------------------------------------------------------

def load_steps(path: str) -> StepSet:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    S = StepSet.from_json(text)
    report = validate_stepset(S)
    if not report.ok:
        raise UsageError("step set failed validation:\n" + json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return S


def _manifest(command: str, S: StepSet | None, args, order, extra_tol=None, input_text: str = "") -> dict:
    tolerances = {
        "classification_margin": fmt(CLASSIFY_MARGIN),
        "identity": "1e-10",
        "witness": fmt(WITNESS_TOL),
    }
    tolerances.update(extra_tol or {})
    digest = S.digest() if S is not None else hashlib.sha256(input_text.encode()).hexdigest()
    return RunManifest(
        command=command,
        input_hash=digest,
        order=order,
        precision_bits=args.precision_bits,
        tolerances=tolerances,
        flags={"loop_convention": args.loop_convention, "seed": args.seed},
        timestamps=_timestamps(),
    ).to_dict()


# --- commands --------------------------------------------------------------------

def cmd_analyze(args) -> int:
    S = load_steps(args.steps)
    out = Path(args.out)
    N = args.order
    bits = args.precision_bits
    report = validate_stepset(S)
    bbar = cached_bridges(S, N)
    kd = kernel_roots_at_rho(S.vpoly, bits)
    se = singular_expansion(S.vpoly, bits)
    with mp.workprec(bits):
        kernel = {
            "tau": fmt(kd.tau),
            "rho": fmt(kd.rho),
            "period": kd.period,
            "min_v": kd.min_v,
            "max_v": kd.max_v,
            "roots": [
                {"re": fmt(r["re"]), "im": fmt(r["im"]), "class": r["class"]}
                for r in kd.roots_table()
            ],
            "alpha_abs": fmt(se.alpha_abs),
            "beta": fmt(se.beta),
            "principal_constant": fmt(se.principal_constant),
            "a_minus1": fmt(se.a_minus1),
            "a0": fmt(se.a0),
            "tolerances": {"classification_margin": fmt(CLASSIFY_MARGIN), "identity": "1e-10"},
            "precision_bits": kd.precision,
        }
        ell = series_log(bbar)
        predictions = []
        for n in range(1, N + 1):
            if n % kd.period or ell[n] == 0:
                continue
            if n % max(1, N // 20) and n != N:
                continue
            pred = transfer_prediction(se.a_minus1, se.a0, kd.rho, kd.period, n)
            exact = mp.mpf(ell[n].numerator) / ell[n].denominator
            predictions.append({"n": n, "exact": str(ell[n]), "predicted": fmt(pred), "ratio": fmt(exact / pred)})
    notes = []
    if not report.applicability["V_has_height_at_least_2"]:
        notes.append("algebraic regime: every vertical step has height <= 1")
    if not report.applicability["V_min_at_least_minus_2"]:
        notes.append("min V < -2: outside the proven range")
    payload = {
        "manifest": _manifest("analyze", S, args, N),
        "validation": report.to_dict(),
        "kernel": kernel,
        "bridges": [str(c) for c in bbar],
        "log_bridges_predictions": predictions,
        "notes": notes,
    }
    write_json(out / "kernel.json", kernel)
    write_json(out / "analysis.json", payload)
    (out / "bridges.csv").write_text(
        "n,coefficient\n" + "".join(f"{n},{c}\n" for n, c in enumerate(bbar)), encoding="utf-8"
    )
    print(f"tau={fmt(kd.tau)} rho={fmt(kd.rho)} period={kd.period} a0={fmt(se.a0)}")
    for note in notes:
        print(note)
    return EXIT_OK


def cmd_verify(args) -> int:
    S = load_steps(args.steps)
    out = Path(args.out)
    K, N = args.max_len, args.order
    mismatches = []
    table = count_slit_walks_dp(S, K, args.loop_convention)
    i_max = K * max(dx for dx, _ in S.H)
    endpoint = {}
    if i_max >= 1 and K >= 1:
        gfs = slit_endpoint_gfs(S, K, i_max)
        for i, series in gfs.items():
            ok = list(series) == table.column(i, 0)
            if not ok:
                mismatches.append(f"S_{i},0")
            endpoint[str(i)] = {"match": ok, "coefficients": [str(c) for c in series]}
    bilateral = {}
    span = K * max(abs(dx) for dx, _ in S.H)
    if K >= 1:
        logs = log_bilateral(S, K, range(-span, span + 1))
        composed = series_compose_scaled(bridges_series(S.V, K), S.hpoly)
        for i in range(-span, span + 1):
            nonneg = all(c >= 0 for c in logs[i])
            oracle = count_bilateral_dp(S, K, i)
            factor_ok = [composed[n].coefficient(i) for n in range(K + 1)] == oracle
            bilateral[str(i)] = {"factorization_match": factor_ok, "log_nonnegative": nonneg}
            if not factor_ok:
                mismatches.append(f"B(x;t) at x^{i}")
            if not nonneg:
                mismatches.append(f"log B negative at x^{i}")
    L, S0, S11 = slit_aggregate_gfs(S, K, args.loop_convention)
    if endpoint:
        axis = [sum((Fraction(endpoint[str(i)]["coefficients"][n]) for i in range(1, i_max + 1)), Fraction(0))
                for n in range(K + 1)]
        axis[0] += 1
        if args.loop_convention == ENDPOINT_EXEMPT:
            axis = [a + (L[n] if n else 0) for n, a in enumerate(axis)]
        if list(S0) != axis:
            mismatches.append("S_0(1;t)")
    witness = None
    try:
        bbar = cached_bridges(S, N)
        i_w = args.witness_i
        fit = verify_witness(S, i_w, N, args.window, args.depth, args.precision_bits, bridges=bbar)
        witness = fit.to_dict()
        (out / "witness.csv").parent.mkdir(parents=True, exist_ok=True)
        (out / "witness.csv").write_text(fit.to_csv(), encoding="utf-8")
    except UsageError as exc:
        witness = {"verdict": "not evaluated", "reason": str(exc)}
    payload = {
        "manifest": _manifest("verify", S, args, N, {"witness_window": args.window, "witness_depth": args.depth}),
        "max_len": K,
        "endpoint_gfs": endpoint,
        "bilateral": bilateral,
        "aggregates": {
            "L": [str(c) for c in L],
            "S0": [str(c) for c in S0],
            "S11": [str(c) for c in S11],
        },
        "mismatches": mismatches,
        "witness": witness,
    }
    write_json(out / "verify.json", payload)
    (out / "slit_counts.csv").write_text(table.to_csv(), encoding="utf-8")
    print(f"comparisons: {'all match' if not mismatches else 'MISMATCH ' + ', '.join(mismatches)}")
    print(f"witness: {witness.get('verdict')}")
    return EXIT_CONSISTENCY if mismatches else EXIT_OK


def cmd_catalog(args) -> int:
    if args.file in (None, "default"):
        entries = load_default_catalog()
        text = json.dumps(entries, sort_keys=True)
    else:
        try:
            text = Path(args.file).read_text(encoding="utf-8")
            entries = parse_catalog(json.loads(text))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot load catalog {args.file}: {exc}") from exc
    result = run_catalog(entries, mp.mpf(args.tol), args.precision_bits, args.seed)
    payload = {
        "manifest": _manifest("catalog", None, args, None, {"conjecture": args.tol}, input_text=text),
        **result,
    }
    write_json(Path(args.out) / "catalog.json", payload)
    print(json.dumps(result["summary"], sort_keys=True))
    return EXIT_OK if result["failures"] == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=int, default=DEFAULT_PREC_BITS)
    common.add_argument("--loop-convention", choices=LOOP_CONVENTIONS, default=ENDPOINT_EXEMPT)
    common.add_argument("--seed", type=int, default=0, help="sample points for recombination checks")

    parser = argparse.ArgumentParser(prog="slitplane", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="kernel and singular-expansion report")
    p.add_argument("--steps", required=True)
    p.add_argument("--order", type=int, default=200)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", parents=[common], help="oracle equivalence and witness fit")
    p.add_argument("--steps", required=True)
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--order", type=int, default=200)
    p.add_argument("--out", required=True)
    p.add_argument("--witness-i", type=int, default=0)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("catalog", parents=[common], help="partial-fraction conjecture scan")
    p.add_argument("--file", default="default")
    p.add_argument("--tol", default=str(DEFAULT_TOL))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ComputationError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except PrecisionError as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return EXIT_PRECISION


if __name__ == "__main__":
    sys.exit(main())
