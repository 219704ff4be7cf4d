import json
import subprocess
import sys
from fractions import Fraction

import pytest

from capelli import cli


def test_duality_worked_example(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = cli.main(["--suite", "duality", "--M", "2", "--N", "2", "--m", "1,1", "--n", "1,1",
                     "--z", "0,1", "--lambda", "0,5", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == "capelli-report/1" and doc["passed"] is True
    ids = [r["check_id"] for r in doc["reports"]]
    assert "theorem_dual" in ids and "commutativity_mutant_detected" in ids


def test_guard_exit_code():
    assert cli.main(["--suite", "spectra", "--max-dim", "2", "--m", "1,1,1"]) == 3


@pytest.mark.parametrize("args", [
    ["--M", "2"],
    ["--M", "2", "--N", "2", "--z", "1,2,3"],
    ["--M", "2", "--N", "2", "--m", "1,1", "--n", "3,0"],
    ["--max-dim", "0"],
])
def test_config_errors(args):
    assert cli.main(args) == 2


@pytest.mark.parametrize("args", [["--z", "1/0"], ["--suite", "nope"], ["--h", "x"]])
def test_unparseable_arguments(args):
    with pytest.raises(SystemExit) as exc:
        cli.main(args)
    assert exc.value.code == 2


def test_repeated_parameters_are_config_errors():
    code = cli.main(["--suite", "duality", "--M", "2", "--N", "2", "--m", "1,1", "--n", "1,1",
                     "--z", "1,1", "--lambda", "0,5"])
    assert code == 2


def test_failed_check_exit_code(monkeypatch):
    from capelli import idsuite
    original = idsuite.check_theorem_main

    def broken(d):
        rep = original(d)
        rep.passed = False
        return rep

    monkeypatch.setattr(idsuite, "check_theorem_main", broken)
    assert cli.main(["--suite", "identities", "--M", "1", "--N", "1"]) == 1


def test_deterministic_reports(tmp_path):
    args = ["--suite", "identities", "--M", "2", "--N", "1", "--seed", "5"]
    docs = []
    for _ in range(2):
        path = tmp_path / "same.json"
        assert cli.main(args + ["--out", str(path)]) == 0
        text = path.read_text()
        docs.append("\n".join(l for l in text.splitlines() if "wall_time_ms" not in l))
    assert docs[0] == docs[1]


def test_parallel_matches_serial():
    cfg = cli.RunConfig(suite="identities", M=2, N=2)
    cli.validate(cfg)
    serial = [r.to_dict() for r in cli.execute(cfg)]
    cfg.jobs = 2
    parallel = [r.to_dict() for r in cli.execute(cfg)]
    assert strip_times(serial) == strip_times(parallel)


def strip_times(obj):
    if isinstance(obj, dict):
        return {k: strip_times(v) for k, v in obj.items() if k != "wall_time_ms"}
    if isinstance(obj, list):
        return [strip_times(v) for v in obj]
    return obj


def test_helpers():
    assert cli.parse_rationals("1/2, -3,0") == (Fraction(1, 2), Fraction(-3), Fraction(0))
    assert cli.balanced(5, 3) == (2, 2, 1)
    assert cli.auto_small(2, 3) == ((2, 1), (1, 1, 1))
    assert cli.auto_small(3, 3, m=(1, 1, 1)) == ((1, 1, 1), (1, 1, 1))
    m, n = cli.auto_small(3, 3, max_dim=2)
    from capelli.gaudinrep import enumerate_basis
    assert enumerate_basis(m, n).dim <= 2
    cfg = cli.RunConfig(full_h=True)
    assert len(cli.h_values(cfg, 2, 3)) == 6


def test_tsv_dump(tmp_path):
    tsv = tmp_path / "spectra.tsv"
    code = cli.main(["--suite", "spectra", "--M", "2", "--N", "2", "--m", "1,1", "--n", "1,1",
                     "--tsv", str(tsv)])
    assert code == 0
    lines = tsv.read_text().splitlines()
    assert lines[0].startswith("M\tN") and len(lines) > 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "capelli", "--suite", "spectra", "--max-dim", "2",
                           "--m", "1,1,1"], capture_output=True, text=True)
    assert proc.returncode == 3
