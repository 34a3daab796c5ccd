import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from couette_spectrum.cli import main
from couette_spectrum.presets import PRESET_BUILDERS, RunConfig, preset

TINY = """
scenario: custom
flow: {eta: 0.5, mu: 0.0, reynolds: 88.1}
grid: {n_points: 24, k_max: 4.0, dk: 1.0}
evolution: {dt: 0.01, t_max: 1.0, equil_tol: 1.0e-8, snapshot_every: 20}
initial:
  seeds: [[3.0, 0.125]]
  background: 0.0
output_dir: OUTDIR
"""


def _write_cfg(tmp_path, text=TINY, out="out"):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(text.replace("OUTDIR", str(tmp_path / out)))
    return cfg


@pytest.fixture(autouse=True)
def temp_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("COUETTE_SPECTRUM_CACHE", str(tmp_path / "cache"))


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in ("fig1", "fig2", "fig4", "fig7", "table1"):
        assert name in out


def test_presets_write_examples(tmp_path):
    assert main(["presets", "--write-examples", str(tmp_path / "ex")]) == 0
    files = list((tmp_path / "ex").glob("*.yaml"))
    assert len(files) == len(PRESET_BUILDERS)
    # examples parse back into valid configs
    for f in files:
        RunConfig.from_yaml(f.read_text())


def test_run_custom_config(tmp_path):
    cfg = _write_cfg(tmp_path)
    assert main(["run", "--config", str(cfg)]) == 0
    outdir = tmp_path / "out"
    manifest = json.loads((outdir / "run_manifest.json").read_text())
    assert manifest["result"]["k_f"] == 3.0
    assert "tables_hash" in manifest
    traj = (outdir / "trajectory.csv").read_text().splitlines()
    assert traj[0].startswith("# config_hash=")
    assert traj[1] == "t,k,re_a,im_a,abar"
    eq = json.loads((outdir / "equilibrium.json").read_text())
    assert eq["k_f"] == 3.0
    assert (outdir / "snapshot_final.npz").exists()


def test_run_determinism(tmp_path):
    cfg = _write_cfg(tmp_path)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    ta = (tmp_path / "a" / "trajectory.csv").read_bytes()
    tb = (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert ta == tb


def test_resume_matches_uninterrupted(tmp_path):
    short = TINY.replace("t_max: 1.0", "t_max: 0.5")
    cfg_short = tmp_path / "short.yaml"
    cfg_short.write_text(short.replace("OUTDIR", str(tmp_path / "short")))
    cfg_long = _write_cfg(tmp_path, out="long")
    assert main(["run", "--config", str(cfg_short)]) == 0
    assert main(["run", "--config", str(cfg_long)]) == 0
    snap = tmp_path / "short" / "snapshot_final.npz"
    assert main(["run", "--config", str(cfg_long), "--out", str(tmp_path / "resumed"),
                 "--resume", str(snap)]) == 0
    a = np.load(tmp_path / "long" / "snapshot_final.npz")
    b = np.load(tmp_path / "resumed" / "snapshot_final.npz")
    assert np.abs(a["amplitudes"] - b["amplitudes"]).max() < 1e-12


def test_resume_hash_mismatch(tmp_path):
    cfg = _write_cfg(tmp_path)
    assert main(["run", "--config", str(cfg)]) == 0
    snap = tmp_path / "out" / "snapshot_final.npz"
    other = TINY.replace("reynolds: 88.1", "reynolds: 90.0")
    cfg2 = tmp_path / "other.yaml"
    cfg2.write_text(other.replace("OUTDIR", str(tmp_path / "other")))
    rc = main(["run", "--config", str(cfg2), "--resume", str(snap)])
    assert rc == 4
    assert not (tmp_path / "other" / "equilibrium.json").exists()


def test_resume_of_converged_run(tmp_path):
    cfg = _write_cfg(tmp_path, TINY.replace("t_max: 1.0", "t_max: 30.0"))
    assert main(["run", "--config", str(cfg)]) == 0
    eq1 = json.loads((tmp_path / "out" / "equilibrium.json").read_text())
    assert eq1["reason"] == "converged"
    snap = tmp_path / "out" / "snapshot_final.npz"
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "res"),
                 "--resume", str(snap)]) == 0
    eq2 = json.loads((tmp_path / "res" / "equilibrium.json").read_text())
    assert eq2["reason"] == "converged"
    assert eq2["k_f"] == eq1["k_f"]


def test_bad_config_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("initial: {seeds: [[2.3, 0.1]]}\ngrid: {dk: 1.0, k_max: 4.0}\n")
    assert main(["run", "--config", str(bad)]) == 2


def test_unknown_preset_exit_code():
    assert main(["run", "--preset", "nonsense"]) == 2


def test_build_cache_subcommand(tmp_path, capsys):
    cfg = _write_cfg(tmp_path)
    assert main(["build-cache", "--config", str(cfg)]) == 0
    assert "built" in capsys.readouterr().out
    assert main(["build-cache", "--config", str(cfg)]) == 0
    assert "cache hit" in capsys.readouterr().out


def test_config_yaml_round_trip():
    for name in PRESET_BUILDERS:
        cfg = preset(name)
        again = RunConfig.from_yaml(cfg.to_yaml())
        assert again == cfg


@settings(max_examples=30, deadline=None)
@given(dens=st.floats(1e-8, 10.0, allow_nan=False),
       dt=st.floats(1e-5, 0.1, allow_nan=False),
       k=st.sampled_from([0.25, 1.0, 3.0, 11.75]))
def test_config_round_trip_preserves_floats(dens, dt, k):
    cfg = RunConfig.from_dict({
        "scenario": "custom",
        "grid": {"n_points": 24, "k_max": 12.0, "dk": 0.25},
        "evolution": {"dt": dt},
        "initial": {"seeds": [[k, dens]]},
    })
    again = RunConfig.from_yaml(cfg.to_yaml())
    assert again == cfg
    assert math.isclose(again.evolution.dt, dt, rel_tol=0, abs_tol=0)
