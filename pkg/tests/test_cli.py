import argparse
import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from c0dyn import cli
from c0dyn.cli import ExperimentConfig, main, resolve_config
from c0dyn.literals import parse_rectangle
from c0dyn.rigor import parse_rational


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_mixing_scan_independence(capsys):
    code, out, _ = run(capsys, "mixing-scan", "cyl 0:1", "cyl 0:1", "--d-max", "3")
    table = rows(out)
    assert code == 0 and len(table) == 7
    values = {int(r["d"]): r["nu_intersection"] for r in table}
    assert values[0] == "1/2"
    assert all(values[d] == "1/4" for d in (-3, -2, -1, 1, 2, 3))
    assert table[0]["threshold"] == "1"


def test_mixing_scan_majority_matches_dp(capsys):
    from c0dyn import majority

    _, out, _ = run(capsys, "mixing-scan", "maj 1", "maj 1", "--d-max", "4")
    for r in rows(out):
        assert parse_rational(r["nu_intersection"]) == majority.overlap(1, int(r["d"]))


def test_mixing_scan_empty_set(capsys):
    _, out, _ = run(capsys, "mixing-scan", "cyl", "cyl 0:1", "--d-max", "2")
    assert all(r["nu_intersection"] == "0/1" for r in rows(out))


def test_ai_table(capsys):
    _, out, _ = run(capsys, "ai-table", "2", "1")
    assert out.splitlines() == ["n,d,overlap,symdiff", "1,0,1/2,0/1", "1,1,3/8,1/4",
                                "2,0,1/2,0/1", "2,1,13/32,3/16"]


def test_json_format(capsys):
    _, out, _ = run(capsys, "ai-table", "1", "1", "--format", "json")
    assert [json.loads(line) for line in out.splitlines()][1] == \
        {"n": 1, "d": 1, "overlap": "3/8", "symdiff": "1/4"}


def test_c0_scan(capsys, tmp_path):
    X = "rect head=[] tail=half(cyl 0:1)"
    code, out, err = run(capsys, "c0-scan", X, X, "--g-max", "3", "--depth", "4",
                         "--epsilon", "1/16", "--out", str(tmp_path))
    table = rows(out)
    assert code == 0 and "threshold radius 1" in err
    zero = next(r for r in table if r["g"] == "0")
    assert zero["truncated"] == "1/1" and zero["lo"] == zero["hi"] == "1/1"
    assert all(r["truncated"] == "1/16" and r["hi"] == "0/1" for r in table if r["g"] != "0")
    assert {r["g"]: r["window_max"] for r in table}["1"] == "1/16"
    assert (tmp_path / "c0_scan.csv").read_text() == out


def test_c0_scan_json_records(capsys):
    X = "rect head=[cyl 0:1|1:1] tail=half(cyl 0:1)"
    _, out, _ = run(capsys, "c0-scan", X, X, "--g-max", "1", "--depth", "2", "--format", "json")
    records = [json.loads(line) for line in out.splitlines()]
    assert set(records[0]) == {"g", "truncated", "infinite"}
    assert records[1]["infinite"] == {"exact": "3/2"}


def test_mu(capsys):
    _, out, _ = run(capsys, "mu", "rect head=[cyl 1:1] tail=half(cyl 0:1)",
                    "or", "rect head=[cyl 2:1] tail=half(cyl 0:1)")
    assert rows(out)[-1]["measure"] == "3/2"
    code, _, err = run(capsys, "mu", "rect head=[] tail=half(cyl 0:1)", "xor",
                       "rect head=[] tail=half(cyl 0:1)")
    assert code == 2 and "unknown operator" in err


def test_non_sigma_finite(capsys):
    _, out, _ = run(capsys, "non-sigma-finite", "3")
    table = rows(out)
    assert len(table) == 8 and all(r["measure"] == "1/1" for r in table)
    for r in table:
        parse_rectangle(r["rectangle"])
    _, out, _ = run(capsys, "non-sigma-finite", "3", "--certificates")
    assert len(rows(out)) == 28


def test_witness_build_and_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "witness", "build", "--kmax", "3", "--mmax", "2")
    assert code == 0
    path = tmp_path / "schedule.jsonl"
    path.write_text(out)
    assert json.loads(out.splitlines()[0])["n"] == 1
    code, out, _ = run(capsys, "witness", "verify", str(path))
    assert code == 0 and json.loads(out) == {"cells": 6, "failures": []}
    lines = path.read_text().splitlines()
    record = json.loads(lines[0])
    record["n"] = 5
    lines[0] = json.dumps(record)
    path.write_text("\n".join(lines) + "\n")
    code, _, _ = run(capsys, "witness", "verify", str(path))
    assert code == 1


def test_witness_coeff(capsys):
    code, out, _ = run(capsys, "witness", "coeff", "--m", "2", "--g", "1", "--depth", "3", "--kmax", "4")
    value = json.loads(out)["value"]
    assert code == 0 and parse_rational(value["lo"]) <= parse_rational(value["hi"]) < 1
    code, _, err = run(capsys, "witness", "coeff", "--m", "1", "--g", "2", "--kmax", "2")
    assert code == 2 and "window" in err


def test_witness_fc_check(capsys):
    _, out, _ = run(capsys, "witness", "fc-check", "rect head=[] tail=half(cyl 0:1)", "--radius", "1")
    result = json.loads(out)
    assert result["valid"] is False and result["refutation_index"] == 1
    _, out, _ = run(capsys, "witness", "fc-check", "rect head=[] tail=schedule(1)",
                    "--radius", "1", "--kmax", "3", "--mmax", "1")
    assert json.loads(out)["valid"] is True


def test_witness_rotation(capsys):
    _, out, _ = run(capsys, "witness", "rotation", "--theta", "1/3", "--depth", "3")
    rep = json.loads(out)
    assert rep["overlap"] == "1/6" and rep["truncated"] == "1/27"
    assert rep["infinite"] == {"exact": "0/1"} and rep["at_identity"] == {"exact": "1/1"}


def test_witness_cover(capsys):
    _, out, _ = run(capsys, "witness", "cover", "--radius", "1", "--mmax", "2", "--kmax", "2")
    table = rows(out)
    assert len(table) == 6 and {r["measure"] for r in table} == {"1/1"}


def test_parse_error_is_positional(capsys):
    code, _, err = run(capsys, "mixing-scan", "cyl 0:1 1:7", "cyl 0:1")
    assert code == 2 and "column 9" in err


def test_circle_has_no_mixing_threshold(capsys):
    code, _, err = run(capsys, "mixing-scan", "arc 0/1 1/2", "arc 0/1 1/2")
    assert code == 2 and "not mixing" in err


def _ns(**kw):
    base = {f: None for f in ("config", "model", "depth", "format", "out")}
    base.update(kw)
    return argparse.Namespace(**base)


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\ndepth = 7\nout = from-file\nformat = json\nslack = 1/3\n")
    assert resolve_config(_ns(config=str(cfg)), env={}) == \
        ExperimentConfig(depth=7, out="from-file", format="json", slack=Fraction(1, 3))
    with_env = resolve_config(_ns(config=str(cfg)), env={cli.OUT_ENV: "from-env"})
    assert with_env.out == "from-env"
    flags = resolve_config(_ns(config=str(cfg), out="from-flag", depth=3), env={cli.OUT_ENV: "from-env"})
    assert (flags.out, flags.depth, flags.format) == ("from-flag", 3, "json")


def test_config_validation(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(ValueError):
        resolve_config(_ns(config=str(cfg)), env={})
    with pytest.raises(ValueError):
        ExperimentConfig(depth=0)
    with pytest.raises(ValueError):
        ExperimentConfig(format="xml")


def test_report_layout_and_success(capsys, tmp_path):
    code, out, _ = run(capsys, "report", "--out", str(tmp_path))
    assert code == 0 and "FAIL" not in out
    names = sorted(p.name for p in tmp_path.iterdir())
    for expected in ("ai_table.csv", "schedule.jsonl", "coefficients_m1.csv", "coefficients_m3.csv",
                     "non_sigma_finite.csv", "rotation.json", "summary.csv", "summary.json",
                     "mixing_cylinder.csv", "c0_scan.csv", "cover.csv"):
        assert expected in names
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["passed"] and summary["failures"] == []


def test_report_forced_failure(capsys, tmp_path):
    code, out, _ = run(capsys, "report", "--out", str(tmp_path), "--slack", "1/1000000000000")
    assert code == 1 and "FAIL schedule_build" in out
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["failures"] == ["schedule_build"]


def test_report_loose_slack_fails_certificates(capsys, tmp_path):
    code, _, _ = run(capsys, "report", "--out", str(tmp_path), "--slack", "1/2", "--kmax", "2", "--mmax", "1")
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert code == 1 and "schedule_certificates" in summary["failures"]


def test_report_env_override(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env-dir"))
    code, _, _ = run(capsys, "report", "--kmax", "2", "--mmax", "1")
    assert code == 0 and (tmp_path / "env-dir" / "summary.csv").exists()


def test_module_entry_point():
    result = subprocess.run([sys.executable, "-m", "c0dyn", "ai-table", "1", "0"],
                            capture_output=True, text=True, check=True)
    assert result.stdout == "n,d,overlap,symdiff\n1,0,1/2,0/1\n"
