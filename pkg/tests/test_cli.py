import json
import subprocess
import sys

import pytest

from lgtrunc.cli import EXIT_FAIL, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, compare_tables, main
from lgtrunc.experiments import Table

EXPLICIT = {
    "explicit": {
        "model": {"model": "u1_plaquette"},
        "truncation": {"g": 0.5, "lam": 3, "T": 1.0},
        "observables": {"E2": {"tag": "E2_link"}},
        "protocol": {"dt": 0.1},
        "lam_ref": 6,
    }
}


def _write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_presets_listing(capsys):
    assert main(["presets"]) == EXIT_OK
    listing = json.loads(capsys.readouterr().out)
    assert {"fig1", "fig2", "fig3", "fig8", "table1", "table2"} <= set(listing)
    assert listing["fig3"]["params"]["lam_ref"] == 20


def test_unknown_top_level_key_is_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, "c.json", {"preset": "fig3", "colour": "red"})
    assert main(["run", "--config", cfg, "--output-dir", str(tmp_path)]) == EXIT_VALIDATION
    err = _error(capsys)
    assert err["error"] == "validation" and "colour" in err["message"]


def test_unknown_param_and_bad_type_are_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, "c.json", {"preset": "fig3", "params": {"gg": 1.0}})
    assert main(["run", "--config", cfg]) == EXIT_VALIDATION
    cfg = _write(tmp_path, "d.json", {"preset": "fig3", "params": {"lam_ref": "twenty"}})
    assert main(["run", "--config", cfg]) == EXIT_VALIDATION
    assert main(["run", "fig3", "--set", "nope=1"]) == EXIT_VALIDATION
    assert main(["run", "fig1", "--chi", "10"]) == EXIT_VALIDATION
    capsys.readouterr()


def test_explicit_unknown_nested_key(tmp_path):
    bad = json.loads(json.dumps(EXPLICIT))
    bad["explicit"]["truncation"]["lamda"] = 2
    assert main(["run", "--config", _write(tmp_path, "c.json", bad)]) == EXIT_VALIDATION


def test_explicit_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", _write(tmp_path, "c.json", EXPLICIT), "--output-dir", str(out)]) == EXIT_OK
    status = json.loads(capsys.readouterr().out)
    assert status["status"] == "ok"
    table = Table.from_csv(out / "summary.csv")
    assert table.rows[0]["observable"] == "E2" and table.rows[0]["max_error"] > 0
    meta = json.loads((out / "summary.json").read_text())
    assert meta["config"]["explicit"]["lam_ref"] == 6 and "code_version" in meta


def test_preset_run_is_byte_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["run", "fig3", "--T", "1.5", "--set", "lams=[1,2,3]", "--output-dir", str(tmp_path / d)]) == 0
    for name in ("fig3.csv", "fig3_bound.csv", "fig3_projectors.csv", "fig3.svg"):
        assert (tmp_path / "a" / "fig3" / name).read_bytes() == (tmp_path / "b" / "fig3" / name).read_bytes()
    side = json.loads((tmp_path / "a" / "fig3" / "fig3.json").read_text())
    assert side["config"]["params"]["T"] == 1.5


def test_output_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LGTRUNC_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["run", "fig3", "--T", "0.5", "--set", "lams=[1]"]) == EXIT_OK
    assert (tmp_path / "env" / "fig3" / "fig3.csv").exists()
    capsys.readouterr()


def _table(path, rows, value="log10_value"):
    t = Table("t", ["t", value])
    for r in rows:
        t.add(t=r[0], **{value: r[1]})
    t.to_csv(path)
    return str(path)


def test_compare_identical_files_pass_with_zero_slack(tmp_path, capsys):
    a = _table(tmp_path / "a.csv", [(1.0, -3.0), (2.0, -2.5)])
    out = tmp_path / "v.csv"
    assert main(["compare", a, a, "--output", str(out)]) == EXIT_OK
    v = Table.from_csv(out)
    assert [r["log10_slack"] for r in v.rows] == [0.0, 0.0]
    assert all(r["verdict"] == "PASS" for r in v.rows)
    assert "2 PASS, 0 FAIL" in capsys.readouterr().out


def test_compare_reports_failure(tmp_path, capsys):
    b = _table(tmp_path / "b.csv", [(1.0, -3.0), (2.0, -2.0)])
    m = _table(tmp_path / "m.csv", [(1.0, -4.0), (2.0, -1.5)])
    assert main(["compare", b, m]) == EXIT_FAIL
    text = capsys.readouterr().out
    assert "1 PASS, 1 FAIL" in text


def test_compare_value_columns_and_zero_bound():
    b = Table("b", ["k", "value"], [{"k": 1, "value": 1e-3}, {"k": 2, "value": 0.0}])
    m = Table("m", ["k", "value"], [{"k": 1, "value": 1e-5}, {"k": 2, "value": 0.0}])
    v = compare_tables(b, m)
    assert v.rows[0]["log10_slack"] == pytest.approx(2.0)
    assert v.rows[1]["verdict"] == "PASS" and v.rows[1]["log10_slack"] == 0.0


def test_compare_mismatched_keys(tmp_path, capsys):
    a = _table(tmp_path / "a.csv", [(1.0, -3.0)])
    c = _table(tmp_path / "c.csv", [(5.0, -3.0)])
    assert main(["compare", a, c]) == EXIT_VALIDATION
    assert main(["compare", a, str(tmp_path / "missing.csv")]) == EXIT_VALIDATION
    capsys.readouterr()


def test_sweep_grid(tmp_path, capsys):
    cfg = {"preset": "fig3", "params": {"T": 0.5, "lams": [1, 2]}, "sweep": {"g": [1.0, 2.0], "lam_ref": [6, 8]}}
    out = tmp_path / "sw"
    assert main(["sweep", _write(tmp_path, "s.json", cfg), "--output-dir", str(out)]) == EXIT_OK
    table = Table.from_csv(out / "sweep.csv")
    assert len(table.rows) == 4
    assert {(r["g"], r["lam_ref"]) for r in table.rows} == {(1.0, 6), (1.0, 8), (2.0, 6), (2.0, 8)}
    assert all(r["status"] == "ok" for r in table.rows)
    assert "fig3_all_pass" in table.columns
    capsys.readouterr()


def test_sweep_single_point_and_empty(tmp_path, capsys):
    one = {"preset": "fig3", "params": {"T": 0.5, "lams": [1]}, "sweep": {"g": [1.5]}}
    assert main(["sweep", _write(tmp_path, "a.json", one), "--output-dir", str(tmp_path / "a")]) == EXIT_OK
    assert len(Table.from_csv(tmp_path / "a" / "sweep.csv").rows) == 1
    empty = {"preset": "fig3", "sweep": {"g": []}}
    assert main(["sweep", _write(tmp_path, "b.json", empty), "--output-dir", str(tmp_path / "b")]) == EXIT_VALIDATION
    capsys.readouterr()


def test_sweep_isolates_failing_point(tmp_path, capsys):
    # field value 7 lies outside the lam = 3 basis, so only the second point fails
    cfg = {"explicit": EXPLICIT["explicit"], "sweep": {"state": ["vacuum", "7"]}}
    out = tmp_path / "sw"
    code = main(["sweep", _write(tmp_path, "s.json", cfg), "--output-dir", str(out)])
    rows = Table.from_csv(out / "sweep.csv").rows
    assert code == EXIT_NUMERICAL
    assert rows[0]["status"] == "ok" and rows[1]["status"] != "ok" and rows[1]["message"]
    capsys.readouterr()


def test_entry_point_module():
    proc = subprocess.run([sys.executable, "-m", "lgtrunc.cli", "run", "nonsense"], capture_output=True, text=True)
    assert proc.returncode == EXIT_VALIDATION
    assert json.loads(proc.stderr.strip().splitlines()[-1])["exit_code"] == EXIT_VALIDATION
