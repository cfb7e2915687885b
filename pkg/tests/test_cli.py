import csv
import json
import subprocess
import sys

import pytest

from kinavg.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main
from kinavg.config import DEFAULTS, KINDS, config_hash, set_key, validate_config
from kinavg.errors import ConfigurationError
from kinavg.experiments import emit_plot_data, run, sha256_file

SMALL_GRID = {"n_x": 1, "n_v": 1, "N_x": 16, "N_v": 32, "L_v": 8.0}
LIGHT = {
    "solve": {"grid": SMALL_GRID, "T": 0.2, "n_save": 3},
    "commutator": {"grids": [{"n_x": 1, "n_v": 1, "N_x": 16, "N_v": 16}], "n_fields": 3},
    "theorem1": {"grid": {"n_x": 1, "n_v": 1, "N_x": 16, "N_v": 128, "L_v": 8.0}, "eps": [1.0, 0.5], "n_save": 21},
    "bands": {"N": [32], "v_mult": 4, "n_save": 51},
    "exponents": {},
    "compare": {"n": 1, "alpha": 0, "p": 3},
    "flux": {"names": ["identity", "constant"], "n_samples": 20000},
    "appendix": {"m": [1, 2, 3], "n_intervals": 500},
    "burgers": {"N": [256], "n_save": 11, "n_v": 64},
}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def _manifest(out):
    return json.loads((out / "manifest.json").read_text())


@pytest.mark.parametrize("kind", sorted(LIGHT))
def test_each_kind_runs(kind, tmp_path, capsys):
    out = tmp_path / "out"
    cfg = _write(tmp_path, {"kind": kind, "params": LIGHT[kind]})
    assert main([kind, "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "FAIL" not in text
    man = _manifest(out)
    assert man["passed"] and man["runs"] == 1 and man["config"]["kind"] == kind
    for entry in man["files"]:
        assert sha256_file(out / entry["path"]) == entry["sha256"]
    assert man["config_hash"] == config_hash(man["config"])


def test_run_subcommand_reads_kind(tmp_path, capsys):
    cfg = _write(tmp_path, {"kind": "exponents"})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["passed"] and summary["runs"] == 1


def test_manufactured_convergence_run(tmp_path):
    params = {"grid": {"n_x": 1, "n_v": 1, "N_x": 32, "N_v": 64, "L_v": 12.0}, "initial": "manufactured",
              "T": 0.2, "dt": 4e-4, "dt_levels": 3, "n_save": 3}
    man = run({"kind": "solve", "params": params}, tmp_path)
    assert man.passed, man.assertions
    assert man.summary["observed_order"] >= 1.9
    rows = list(csv.DictReader((tmp_path / "convergence.csv").open()))
    assert len(rows) == 3


def test_failed_assertion_exits_one(tmp_path, capsys):
    cfg = _write(tmp_path, {"kind": "theorem1", "params": LIGHT["theorem1"], "tolerance_scale": 1e-6})
    assert main(["theorem1", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_FAILED
    assert "FAIL" in capsys.readouterr().out


def test_unknown_keys_are_listed(tmp_path, capsys):
    cfg = _write(tmp_path, {"kind": "solve", "colour": 1, "params": {"grid": {"N_x": 16, "width": 2}, "speed": 3}})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    for key in ("colour", "width", "speed"):
        assert key in err


@pytest.mark.parametrize("cfg", [
    {"kind": "solve", "params": {"eps": -1}},
    {"kind": "burgers", "params": {"initial": "sawtooth"}},
    {"kind": "compare", "params": {"p": "x"}},
    {"kind": "sweep"},
    {"kind": "sweep", "base": {"kind": "solve"}, "params": {}},
    {"kind": "sweep", "base": {"kind": "sweep"}},
    {"kind": "solve", "axes": []},
    {"version": "0.1", "kind": "solve"},
    {"kind": "warp"},
])
def test_schema_errors(cfg, tmp_path):
    assert main(["run", "--config", str(_write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_config_file_errors(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["solve", "--config", str(_write(tmp_path, {"kind": "flux"}))]) == EXIT_CONFIG
    assert main(["run", "--config", str(_write(tmp_path, {}))]) == EXIT_CONFIG


def test_defaults_are_filled():
    cfg = validate_config({"kind": "theorem1"})
    assert cfg["params"] == DEFAULTS["theorem1"] and cfg["seed"] == 0 and cfg["tolerance_scale"] == 1.0
    assert set(DEFAULTS) | {"sweep"} == set(KINDS)


def test_empty_sweep(tmp_path):
    man = run({"kind": "sweep", "base": {"kind": "exponents"}, "axes": []}, tmp_path)
    assert man.runs == 0 and man.passed
    assert (tmp_path / "sweep.csv").read_text().strip() == "passed"


def test_conflicting_axes(tmp_path):
    axes = [{"key": "params.grid", "values": [SMALL_GRID]}, {"key": "params.grid.N_x", "values": [16]}]
    with pytest.raises(ConfigurationError):
        run({"kind": "sweep", "base": {"kind": "solve"}, "axes": axes}, tmp_path)
    dup = [{"key": "params.eps", "values": [0.5]}, {"key": "params.eps", "values": [0.25]}]
    cfg = _write(tmp_path, {"kind": "sweep", "base": {"kind": "solve"}, "axes": dup})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_single_point_sweep_equals_run(tmp_path):
    base = {"kind": "burgers", "params": LIGHT["burgers"]}
    single = run(base, tmp_path / "single")
    sw = run({"kind": "sweep", "base": base, "axes": [{"key": "params.T", "values": [0.5]}]}, tmp_path / "sweep")
    assert sw.runs == 1 and sw.passed
    a = {e["path"]: e["sha256"] for e in single.files if e["path"] != "config.json"}
    b = {e["path"].removeprefix("run_000/"): e["sha256"] for e in sw.files if e["path"].startswith("run_000/")}
    assert a == b


def test_sweep_grid_and_threads(tmp_path):
    axes = [{"key": "params.m", "values": [1, 2, 3]}, {"key": "params.n_intervals", "values": [0, 50]}]
    cfg = {"kind": "sweep", "base": {"kind": "appendix"}, "axes": axes}
    one = run(cfg, tmp_path / "one", threads=1)
    four = run(cfg, tmp_path / "four", threads=4)
    assert one.runs == four.runs == 6
    assert [e["sha256"] for e in one.files if e["path"] != "config.json"] == \
        [e["sha256"] for e in four.files if e["path"] != "config.json"]
    rows = list(csv.reader((tmp_path / "one" / "sweep.csv").open()))
    assert rows[0][:2] == ["params.m", "params.n_intervals"] and len(rows) == 7


def test_rerun_is_bit_identical(tmp_path):
    cfg = {"kind": "theorem1", "params": LIGHT["theorem1"], "seed": 3}
    a = run(cfg, tmp_path / "a")
    b = run(cfg, tmp_path / "b")
    assert a.config_hash == b.config_hash
    assert a.files == b.files


def test_seed_override_changes_hash(tmp_path):
    cfg = _write(tmp_path, {"kind": "commutator", "params": LIGHT["commutator"]})
    main(["commutator", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["commutator", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "9"])
    ma, mb = _manifest(tmp_path / "a"), _manifest(tmp_path / "b")
    assert ma["config_hash"] != mb["config_hash"] and mb["config"]["seed"] == 9


def test_plot_data(tmp_path, capsys):
    run({"kind": "theorem1", "params": LIGHT["theorem1"]}, tmp_path / "t")
    out = tmp_path / "eps.csv"
    assert main(["plot-data", str(tmp_path / "t" / "theorem1.json"), "--kind", "eps_sweep", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["eps", "lhs", "rhs", "ratio"] and len(rows) == 3
    run({"kind": "bands", "params": LIGHT["bands"]}, tmp_path / "b")
    p = emit_plot_data(tmp_path / "b" / "bands_N32.json", "bands", tmp_path / "bands.csv")
    assert p.read_text().splitlines()[0] == "k,E_k,weighted_E_k"
    run({"kind": "compare", "params": LIGHT["compare"]}, tmp_path / "c")
    rows = list(csv.reader((tmp_path / "c" / "compare_tidy.csv").open()))
    assert rows[0] == ["theorem", "s", "p"]
    with pytest.raises(ConfigurationError):
        emit_plot_data(tmp_path / "nope.json", "bands", out)
    with pytest.raises(ConfigurationError):
        emit_plot_data(tmp_path / "t" / "theorem1.json", "bands", out)
    assert main(["plot-data", str(tmp_path / "nope.json"), "--kind", "bands", "--out", str(out)]) == EXIT_CONFIG


def test_set_key():
    cfg = set_key({"params": {"grid": {"N_x": 8}}}, "params.grid.N_x", 16)
    assert cfg["params"]["grid"]["N_x"] == 16
    with pytest.raises(ConfigurationError):
        set_key({"params": 3}, "params.eps", 1)


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "kinavg.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for kind in KINDS:
        assert kind in res.stdout
