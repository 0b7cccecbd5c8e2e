import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from ternstab import ControlFunction, ExperimentSpec, FunctionHandle, Linear, SampleGrid, run_theorem_2_5
from ternstab.algebra import AlgebraInstance
from ternstab.cli import main
from ternstab.errors import OutputError
from ternstab.reporting import canonical_csv, canonical_json, emit_report, format_float, load_report
from ternstab.stability import StabilityReport

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
C = AlgebraInstance.parse("complex")


def small_report(seed=0):
    spec = ExperimentSpec(
        C, 1, FunctionHandle(C, (Linear(2 + 1j),)), ControlFunction.power(0.1, 2), grid=SampleGrid(seed=seed, count=6)
    )
    return run_theorem_2_5(spec)


# --- emission ----------------------------------------------------------------------

def test_float_formatting():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(math.inf) == '"+inf"'
    assert float(format_float(1 / 3)) == 1 / 3


def test_json_is_sorted_and_stable():
    text = canonical_json({"b": 1.5, "a": [1, None, True], "c": {"z": math.inf, "y": 2j}})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert '"+inf"' in text
    assert json.loads(text)["c"]["y"] == [0.0, 2.0]
    assert text == canonical_json({"c": {"y": 2j, "z": math.inf}, "a": [1, None, True], "b": 1.5})


def test_same_report_twice_is_byte_identical(tmp_path):
    for fmt in ("json", "csv"):
        a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
        emit_report(small_report(), fmt, a)
        emit_report(small_report(), fmt, b)
        assert a.read_bytes() == b.read_bytes()


def test_empty_bound_checks_give_header_only(tmp_path):
    path = tmp_path / "r.csv"
    emit_report(StabilityReport("theorem25", "complex", 1, "INADMISSIBLE"), "csv", path)
    assert path.read_text() == "label,index,norm,lhs,rhs,pass\n"


def test_csv_cells():
    assert canonical_csv(["a", "b", "c"], [[True, None, 0.5]]) == "a,b,c\ntrue,,0.5\n"


def test_verdict_round_trips(tmp_path):
    rep = small_report()
    path = tmp_path / "r.json"
    emit_report(rep, "json", path)
    back = load_report(path)
    assert back["verdict"] == rep.verdict
    assert back == json.loads(canonical_json(rep.to_dict()))
    assert back["bound_checks"][0]["lhs"] == rep.bound_checks[0].lhs


def test_load_report_restores_infinity(tmp_path):
    path = tmp_path / "r.json"
    path.write_text(canonical_json({"d": math.inf}))
    assert load_report(path)["d"] == math.inf


def test_unwritable_path(tmp_path):
    with pytest.raises(OutputError):
        emit_report(small_report(), "json", tmp_path / "missing" / "r.json")


# --- command line --------------------------------------------------------------------

def write_config(tmp_path, command, spec, **extra):
    doc = {"schema_version": 1, "command": command, "spec": spec, **extra}
    path = tmp_path / "run.json"
    path.write_text(json.dumps(doc))
    return str(path)


SMALL25 = {
    "algebra": "complex",
    "j": 1,
    "base": {"terms": [{"term": "linear", "c": [2, 1]}]},
    "perturbation": {"s": 0.1, "r": 2},
    "grid": {"seed": 1, "count": 8},
}


def test_theorem25_exit_zero(tmp_path):
    out = tmp_path / "out"
    assert main(["--config", write_config(tmp_path, "theorem25", SMALL25), "--out", str(out), "--format", "json,csv"]) == 0
    assert json.loads((out / "report.json").read_text())["verdict"] == "PASS"
    assert (out / "report.csv").read_text().startswith("label,index,norm,lhs,rhs,pass\n")


def test_residual_failure_exit_one(tmp_path):
    spec = {"algebra": "complex", "j": 1, "handle": {"terms": [{"term": "linear", "c": 1}]}, "grid": {"count": 4}}
    assert main(["--config", write_config(tmp_path, "residual", spec), "--out", str(tmp_path)]) == 1


def test_corollary_r1_exit_two(tmp_path, capsys):
    assert main(["--config", str(CONFIGS / "corollary_r1.json"), "--out", str(tmp_path)]) == 2
    assert "r = 1" in capsys.readouterr().err
    assert json.loads((tmp_path / "report.json").read_text())["verdict"] == "INADMISSIBLE"


def test_inadmissible_perturbation_exit_two(tmp_path):
    spec = dict(SMALL25, perturbation={"s": 0.1, "r": 0.5})
    assert main(["--config", write_config(tmp_path, "theorem25", spec), "--out", str(tmp_path)]) == 2


def test_missing_config_exit_three(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "nope.json")]) == 3
    assert "error[E_CONFIG_UNREADABLE]" in capsys.readouterr().err


def test_garbled_config_exit_three(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("command = = 1")
    assert main(["--config", str(bad)]) == 3


@pytest.mark.parametrize(
    "doc",
    [
        {"schema_version": 2, "command": "corollary", "spec": {"s": 1, "r": 2, "j": 1}},
        {"schema_version": 1, "command": "plot", "spec": {}},
        {"schema_version": 1, "command": "corollary", "spec": {"s": 1, "r": 2, "j": 3}},
        {"schema_version": 1, "command": "theorem25", "spec": dict(SMALL25, algebra="quaternion")},
        {"schema_version": 1, "command": "corollary", "spec": {"s": 1, "r": 2}},
    ],
)
def test_schema_violation_exit_four(tmp_path, capsys, doc):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(doc))
    assert main(["--config", str(path), "--out", str(tmp_path)]) == 4
    assert "error[E_SCHEMA]" in capsys.readouterr().err


def test_bad_format_flag_exit_four(tmp_path):
    cfg = write_config(tmp_path, "corollary", {"s": 1, "r": 2, "j": 1})
    assert main(["--config", cfg, "--format", "xml"]) == 4


def test_unwritable_output_exit_five(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = write_config(tmp_path, "corollary", {"s": 1, "r": 2, "j": 1})
    assert main(["--config", cfg, "--out", str(blocker / "sub")]) == 5
    assert "error[E_OUTPUT]" in capsys.readouterr().err


def test_precondition_exit_six(tmp_path):
    spec = dict(SMALL25, base={"terms": [{"term": "quadratic", "c": 1}]})
    assert main(["--config", write_config(tmp_path, "theorem25", spec), "--out", str(tmp_path)]) == 6


def test_seed_flag_overrides(tmp_path):
    cfg = write_config(tmp_path, "theorem25", SMALL25)
    main(["--config", cfg, "--out", str(tmp_path / "a"), "--seed", "5"])
    main(["--config", cfg, "--out", str(tmp_path / "b"), "--seed", "6"])
    a = json.loads((tmp_path / "a" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "report.json").read_text())
    assert a["settings"]["seed"] == 5 and a["settings"]["grid"]["seed"] == 5
    assert a["bound_checks"] != b["bound_checks"]


def test_corollary_j2_report(tmp_path):
    assert main(["--config", str(CONFIGS / "corollary_j2.json"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert "2^(2-r)" in rep["case_note"]


@pytest.mark.parametrize("name", ["residual_identity.json", "extract_cubic.json", "axioms_pointwise4.json"])
def test_shipped_configs_pass(tmp_path, name):
    assert main(["--config", str(CONFIGS / name), "--out", str(tmp_path)]) == 0


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path, "corollary", {"s": 0.1, "r": 2, "j": 1})
    proc = subprocess.run(
        [sys.executable, "-m", "ternstab", "--config", cfg, "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        env={**os.environ},
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads((tmp_path / "report.json").read_text())["constant"] == 0.1
