import json
import math
from pathlib import Path

import numpy as np
import pytest
import yaml
from click.testing import CliRunner

from symvort.cli import config, io
from symvort.cli.main import cli

EXAMPLES = Path(__file__).resolve().parents[1] / "src" / "symvort" / "cli" / "examples"


@pytest.fixture
def runner(tmp_path, monkeypatch):
    monkeypatch.setenv("SYMVORT_OUTPUT_ROOT", str(tmp_path / "out"))
    monkeypatch.chdir(tmp_path)
    return CliRunner()


def write_cfg(path, cfg):
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def run(runner, *args):
    return runner.invoke(cli, list(args), catch_exceptions=False)


def test_preset_catalog(runner):
    res = run(runner, "preset", "--list")
    assert res.exit_code == 0
    for name in ("kirchhoff-pair", "conjecture-m2-n3", "taylor-green"):
        assert name in res.output


def test_preset_contents():
    pair = config.preset("kirchhoff-pair")
    assert pair["system"]["m"] == 1 and pair["system"]["strengths"] == [1.0, 1.0]
    p = np.array(pair["system"]["positions"])
    assert np.linalg.norm(p[0] - p[1]) == 1.0
    conj = config.preset("conjecture-m2-n3")
    assert conj["kind"] == "lyapunov" and conj["system"]["random"]["m"] == 2 and conj["system"]["random"]["N"] == 3
    assert config.preset("taylor-green")["field"]["preset"] == "taylor-green"


def test_unknown_preset_lists_catalog(runner):
    res = runner.invoke(cli, ["preset", "no-such"])
    assert res.exit_code == 2
    assert "kirchhoff-pair" in res.output


def test_emit_config_round_trip(runner, tmp_path):
    res = run(runner, "preset", "kirchhoff-pair", "--emit-config")
    assert res.exit_code == 0
    assert config.resolve(yaml.safe_load(res.output)) == config.preset("kirchhoff-pair")


@pytest.mark.parametrize("path", sorted(EXAMPLES.glob("*.yaml")), ids=lambda p: p.stem)
def test_examples_validate(runner, path):
    res = run(runner, "validate", str(path))
    assert res.exit_code == 0, res.output
    assert yaml.safe_load(res.output)["kind"] == path.stem


def test_every_kind_has_an_example():
    assert {p.stem for p in EXAMPLES.glob("*.yaml")} == set(config.KINDS)


@pytest.mark.parametrize(
    "raw, fragment",
    [
        ({"kind": "simulate"}, "system"),
        ({"kind": "nope"}, "kind"),
        ({"kind": "simulate", "system": {"m": 1, "strengths": [1.0], "positions": [[0.0]]},
          "integrator": {"dt": 1e-3}, "horizon": 1.0}, "system/positions/0"),
        ({"kind": "simulate", "system": {"m": 1, "strengths": [1.0], "positions": [[0.0, 0.0]]},
          "integrator": {"dt": -1.0}, "horizon": 1.0}, "integrator/dt"),
        ({"kind": "field", "field": {"n": 32}}, "field"),
    ],
)
def test_schema_errors(runner, tmp_path, raw, fragment):
    res = runner.invoke(cli, ["run", write_cfg(tmp_path / "bad.yaml", raw)])
    assert res.exit_code == 2
    assert fragment in res.output


def test_missing_and_malformed_files(runner, tmp_path):
    assert runner.invoke(cli, ["run", str(tmp_path / "missing.yaml")]).exit_code == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("kind: [unclosed\n")
    assert runner.invoke(cli, ["validate", str(bad)]).exit_code == 2


def test_simulate_pair(runner, tmp_path):
    cfg = config.preset("kirchhoff-pair")
    res = run(runner, "run", write_cfg(tmp_path / "pair.yaml", cfg))
    assert res.exit_code == 0, res.output
    out = tmp_path / "out" / "runs" / "kirchhoff-pair"
    cols, data = io.read_trajectory_csv(out / "trajectory.csv")
    assert cols[:5] == ["t", "x_1_1", "y_1_1", "x_2_1", "y_2_1"]
    sep0 = math.dist(data[0, 1:3], data[0, 3:5])
    sep1 = math.dist(data[-1, 1:3], data[-1, 3:5])
    assert abs(sep1 - sep0) < 1e-8
    assert data[-1, 0] == pytest.approx(10.0)
    manifest = io.read_manifest(out / "manifest.json")
    assert manifest["status"] == "ok" and not manifest["partial"]
    assert manifest["config"] == cfg
    assert manifest["backend"] in ("numba", "numpy")
    assert "trajectory.csv" in " ".join(manifest["files"])
    assert (out / "summary.txt").read_text().startswith("symvort")


def test_empty_horizon_single_row(runner, tmp_path):
    cfg = config.preset("kirchhoff-pair")
    cfg["horizon"] = 0.0
    assert run(runner, "run", write_cfg(tmp_path / "c.yaml", cfg)).exit_code == 0
    _, data = io.read_trajectory_csv(tmp_path / "out" / "runs" / "kirchhoff-pair" / "trajectory.csv")
    assert data.shape[0] == 1


def test_invariants_report(runner, tmp_path):
    cfg = config.preset("invariants-m2-n3")
    assert run(runner, "run", write_cfg(tmp_path / "c.yaml", cfg)).exit_code == 0
    recs = io.read_records(tmp_path / "out" / "runs" / "invariants-m2-n3" / "brackets.jsonl")
    tables = [r for r in recs if r["kind"] == "bracket_table"]
    assert len(tables) == 5
    for t in tables:
        names = t["names"]
        table = np.array(t["table"])
        assert names[-1] == "H"
        assert np.max(np.abs(table[-1])) < 1e-10


def test_determinism(runner, tmp_path):
    cfg = config.preset("conjecture-m2-n3")
    cfg["horizon"] = 20.0
    cfg["ensemble"] = {"size": 3, "workers": 3}
    hashes = []
    for i in range(2):
        cfg["output"]["dir"] = f"runs/det{i}"
        assert run(runner, "run", write_cfg(tmp_path / f"c{i}.yaml", cfg)).exit_code == 0
        hashes.append((tmp_path / "out" / "runs" / f"det{i}" / "lyapunov.jsonl").read_bytes())
    assert hashes[0] == hashes[1]


def test_runtime_failure_is_flagged(runner, tmp_path):
    # one fixed-point iteration cannot solve a step this large
    cfg = {
        "kind": "simulate",
        "system": {"m": 1, "strengths": [1.0, 1.0], "positions": [[0.0, 0.0], [0.05, 0.0]]},
        "integrator": {"scheme": "implicit_midpoint", "dt": 5.0, "implicit_max_iter": 1},
        "horizon": 50.0,
        "output": {"dir": "runs/crash"},
    }
    res = runner.invoke(cli, ["run", write_cfg(tmp_path / "c.yaml", cfg)])
    assert res.exit_code == 3
    manifest = io.read_manifest(tmp_path / "out" / "runs" / "crash" / "manifest.json")
    assert manifest["status"] == "failed" and manifest["partial"]
    assert manifest["failure"]


def test_initial_collision_is_runtime_error(runner, tmp_path):
    cfg = config.preset("kirchhoff-pair")
    cfg["system"]["positions"] = [[0.0, 0.0], [0.0, 0.0]]
    assert runner.invoke(cli, ["run", write_cfg(tmp_path / "c.yaml", cfg)]).exit_code == 3


def test_field_run_with_grid_file(runner, tmp_path):
    x = 2 * np.pi * np.arange(16) / 16
    io.write_grid_csv(tmp_path / "start.csv", np.cos(x)[:, None] * np.cos(x)[None, :])
    cfg = {"kind": "field", "field": {"grid_file": "start.csv", "dt": 0.01, "steps": 10, "snapshot_every": 5,
                                       "snapshot_format": "binary"}}
    sub = tmp_path / "cfgs"
    sub.mkdir()
    (sub / "start.csv").write_bytes((tmp_path / "start.csv").read_bytes())
    assert run(runner, "run", write_cfg(sub / "f.yaml", cfg)).exit_code == 0
    out = tmp_path / "out" / "runs" / "field"
    stats = io.read_records(out / "field.jsonl")
    assert stats[0]["steady_residual"] < 1e-10
    snaps = sorted((out / "snapshots").iterdir())
    assert len(snaps) == 3
    values, t = io.read_grid(snaps[-1])
    assert values.shape == (16, 16) and t == pytest.approx(0.1)


def test_output_root_override(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("SYMVORT_OUTPUT_ROOT", raising=False)
    cfg = config.preset("kirchhoff-pair")
    cfg["horizon"] = 0.0
    res = CliRunner().invoke(cli, ["run", write_cfg(tmp_path / "c.yaml", cfg)])
    assert res.exit_code == 0
    assert (tmp_path / "runs" / "kirchhoff-pair" / "trajectory.csv").exists()


def test_io_round_trips(tmp_path):
    rng = np.random.default_rng(0)
    v = rng.standard_normal((6, 8))
    io.write_grid_csv(tmp_path / "g.csv", v, time=1.25)
    io.write_grid_binary(tmp_path / "g.bin", v, time=1.25)
    for name in ("g.csv", "g.bin"):
        got, t = io.read_grid(tmp_path / name)
        assert np.array_equal(got, v) and t == 1.25
    io.write_records(tmp_path / "r.jsonl", [{"kind": "a", "x": np.float64(0.1), "y": np.arange(3)}])
    assert io.read_records(tmp_path / "r.jsonl") == [{"kind": "a", "x": 0.1, "y": [0, 1, 2]}]
    with pytest.raises(ValueError):
        io.write_records(tmp_path / "r.jsonl", [{"x": 1}])
    (tmp_path / "short.csv").write_text("# nx=2 ny=2 time=0.0\n1,2\n")
    with pytest.raises(ValueError):
        io.read_grid_csv(tmp_path / "short.csv")


def test_console_script_entry_point(tmp_path):
    import shutil
    import subprocess

    exe = shutil.which("symvort")
    if exe is None:
        pytest.skip("console script not installed")
    out = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "symvort" in out.stdout
