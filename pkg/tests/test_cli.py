import json
import subprocess
import sys
from pathlib import Path

import pytest

from slitplane.cli import main

ROOT = Path(__file__).resolve().parents[1]
FLAGSHIP = ROOT / "data" / "flagship.json"
SIMPLE = ROOT / "data" / "simple.json"


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("SLITPLANE_CACHE", str(tmp_path / "cache"))
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")


def run_verify(out, steps=FLAGSHIP, *extra):
    return main(["verify", "--steps", str(steps), "--max-len", "6", "--order", "120",
                 "--window", "30", "--out", str(out), *extra])


def test_analyze_outputs(tmp_path):
    assert main(["analyze", "--steps", str(FLAGSHIP), "--order", "60", "--out", str(tmp_path)]) == 0
    kernel = json.loads((tmp_path / "kernel.json").read_text())
    assert kernel["tau"].startswith("0.8949754886347")
    assert kernel["period"] == 1
    assert [r["class"] for r in kernel["roots"]] == ["double", "small", "large"]
    rows = (tmp_path / "bridges.csv").read_text().splitlines()
    assert rows[:4] == ["n,coefficient", "0,1", "1,0", "2,2"]
    analysis = json.loads((tmp_path / "analysis.json").read_text())
    assert analysis["manifest"]["command"] == "analyze"


def test_analyze_simple_notes(tmp_path, capsys):
    assert main(["analyze", "--steps", str(SIMPLE), "--order", "40", "--out", str(tmp_path)]) == 0
    assert "algebraic regime" in capsys.readouterr().out


def test_verify_flagship_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_verify(a) == 0
    assert run_verify(b) == 0
    for name in ("verify.json", "slit_counts.csv", "witness.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    report = json.loads((a / "verify.json").read_text())
    assert report["mismatches"] == []
    assert report["witness"]["verdict"] == "witness present"


def test_verify_simple_reports_absent(tmp_path):
    assert run_verify(tmp_path, SIMPLE) == 0
    assert json.loads((tmp_path / "verify.json").read_text())["witness"]["verdict"] == "witness absent"


def test_strict_convention(tmp_path):
    assert run_verify(tmp_path, FLAGSHIP, "--loop-convention", "strict") == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["aggregates"]["L"] == ["1"] + ["0"] * 6
    assert report["manifest"]["flags"]["loop_convention"] == "strict"


def test_cache_is_written_and_reused(tmp_path):
    assert main(["analyze", "--steps", str(FLAGSHIP), "--order", "30", "--out", str(tmp_path / "o")]) == 0
    files = list((tmp_path / "cache").glob("bridges_*_30.csv"))
    assert len(files) == 1
    before = files[0].read_bytes()
    assert main(["analyze", "--steps", str(FLAGSHIP), "--order", "30", "--out", str(tmp_path / "p")]) == 0
    assert files[0].read_bytes() == before
    assert not list((tmp_path / "cache").glob(".tmp-*"))


@pytest.mark.parametrize(
    "payload",
    ['{"H": [], "V": [-1, 1]}', '{"H": [2, 4], "V": [-1, 1]}', "not json", '{"H": [-1, 1]}',
     '{"H": [-1, 1], "V": [[-1, "-1"], 1]}'],
)
def test_bad_steps_exit_2(tmp_path, payload, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(payload)
    assert main(["analyze", "--steps", str(bad), "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path):
    assert main(["verify", "--steps", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2


def test_catalog_exit_codes(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps([[-1, 1], [-2, 1, 2], {"V": [-1, [2, "1/2"]]}]))
    assert main(["catalog", "--file", str(good), "--out", str(tmp_path / "g")]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([[-1, 3, 4]]))
    assert main(["catalog", "--file", str(bad), "--out", str(tmp_path / "b")]) == 1
    report = json.loads((tmp_path / "b" / "catalog.json").read_text())
    assert report["failures"] == 1
    assert report["entries"][0]["margins"]["f_greater_chain"].startswith("-0.2013")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "slitplane", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
