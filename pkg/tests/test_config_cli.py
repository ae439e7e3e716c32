import csv
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from torusflow import bfld
from torusflow.cli import main
from torusflow.config import PRESETS, ConfigError, RunConfig, load_config, parse_config, preset
from torusflow.fourier_core import PeriodicGrid, PhysicalField, l2_norm, random_field, sobolev_norm
from torusflow.simulation import SCHEMA, simulate, trajectory_csv, trajectory_jsonl

TINY = """
[grid]
n = 16
[solver]
nu = 0.1
dt = 0.01
t_end = 0.05
[initial]
kind = random-div-free
rms = 0.3
[observers]
cadence = 0.01
[run]
name = tiny
seed = 3
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def tiny(tmp_path):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY)
    return path


# -- config ----------------------------------------------------------------


def test_parse_config_values():
    cfg = parse_config(TINY)
    assert (cfg.n, cfg.nu, cfg.dt, cfg.t_end, cfg.seed, cfg.name) == (16, 0.1, 0.01, 0.05, 3, "tiny")
    assert cfg.initial == "random-div-free" and cfg.initial_params == {"rms": "0.3"}


def test_config_round_trip():
    for cfg in PRESETS.values():
        assert parse_config(cfg.to_ini()).to_ini() == cfg.to_ini()


def test_config_preset_base():
    cfg = parse_config("[run]\npreset = stokes-mode\n[solver]\nt_end = 0.1\n")
    assert cfg.n == 32 and cfg.initial == "shear" and cfg.t_end == 0.1


def test_config_norm_triples():
    cfg = parse_config("[norms]\nbesov = 1 2 2; 0.5 1 inf\nsobolev = 0, 1.5\n")
    assert cfg.besov == ((1.0, 2.0, 2.0), (0.5, 1.0, math.inf))
    assert cfg.sobolev_orders == (0.0, 1.5)
    assert [p.label for p in cfg.besov_params()] == ["besov_1_2_2", "besov_0.5_1_inf"]


@pytest.mark.parametrize(
    "text",
    [
        "[weather]\nrain = 1\n",
        "[grid]\nn = 12\n",
        "[grid]\nn = many\n",
        "[solver]\ndt = -1\n",
        "[solver]\nscheme = euler\n",
        "[observers]\nnames = energy, vorticity\n",
        "[observers]\ncadence = 0\n",
        "[partition]\nmode = fuzzy\n",
        "[norms]\nbesov = 1 2\n",
        "[norms]\nbesov = 1 0.5 2\n",
        "[run]\npreset = nope\n",
        "not an ini file",
    ],
)
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.ini")


def test_with_seed():
    cfg = RunConfig()
    assert cfg.with_seed(None) is cfg and cfg.with_seed(9).seed == 9
    with pytest.raises(ConfigError):
        preset("laminar")


# -- serialisation ---------------------------------------------------------


def test_trajectory_outputs_are_consistent():
    res = simulate(parse_config(TINY))
    rows = list(csv.reader(trajectory_csv(res).splitlines()))
    records = [json.loads(line) for line in trajectory_jsonl(res).splitlines()]
    assert len(rows) - 1 == len(records) == 6
    assert rows[0][:3] == ["time", "energy", "dissipation"]
    assert "shell_energies_-1" in rows[0] and "shell_dissipation_0" in rows[0]
    assert all(r["schema"] == SCHEMA for r in records)
    header = rows[0]
    for row, rec in zip(rows[1:], records):
        assert {k: float(v) for k, v in zip(header, row)} == {k: v for k, v in rec.items() if k != "schema"}


def test_bounds_json():
    doc = json.loads(simulate(parse_config(TINY)).bounds_json())
    assert doc["schema"] == SCHEMA and doc["preset"] == "tiny"
    assert set(doc["bounds"]) == {"l2_energy", "exp_integral", "besov_apriori_besov_1_2_2"}
    assert doc["energy_identity_residual"] < 1e-2


def test_observer_subset():
    cfg = replace(parse_config(TINY), observers=("sobolev",))
    series = simulate(cfg).trajectory.series
    assert "sobolev_1" in series and "shell_energies" not in series and "l2_norm" in series


# -- CLI ---------------------------------------------------------------------


def test_cli_simulate_preset_files(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--preset", "stokes-mode", "--out", str(out)]) == 0
    rows = read_csv(out / "trajectory.csv")
    assert rows[0][0] == "time" and len(rows) == 1 + 501
    assert json.loads((out / "bounds.json").read_text())["bounds"]["l2_energy"]["satisfied"]
    assert parse_config((out / "config.ini").read_text()).to_ini() == PRESETS["stokes-mode"].to_ini()
    u1 = bfld.read(out / "final_u1.bfld")
    assert u1.grid == PeriodicGrid(2, 32)
    assert "stokes-mode" in capsys.readouterr().out


def test_cli_simulate_is_byte_identical(tmp_path, tiny):
    for name in ("a", "b"):
        assert main(["--config", str(tiny), "--out", str(tmp_path / name), "simulate"]) == 0
    for fname in ("trajectory.csv", "bounds.json", "config.ini", "final_u1.bfld", "final_u2.bfld"):
        assert (tmp_path / "a" / fname).read_bytes() == (tmp_path / "b" / fname).read_bytes()


def test_cli_seed_changes_output(tmp_path, tiny):
    main(["simulate", "--config", str(tiny), "--out", str(tmp_path / "a")])
    main(["simulate", "--config", str(tiny), "--seed", "4", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() != (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert "seed = 4" in (tmp_path / "b" / "config.ini").read_text()


def test_cli_simulate_jsonl(tmp_path, tiny):
    assert main(["simulate", "--config", str(tiny), "--format", "jsonl", "--out", str(tmp_path)]) == 0
    records = [json.loads(line) for line in (tmp_path / "trajectory.jsonl").read_text().splitlines()]
    assert len(records) == 6 and all(r["schema"] == SCHEMA for r in records)


def test_cli_simulate_from_files(tmp_path):
    grid = PeriodicGrid(2, 16)
    x, y = grid.coordinates()
    bfld.write(tmp_path / "u1.bfld", PhysicalField(grid, np.sin(y)))
    bfld.write(tmp_path / "u2.bfld", PhysicalField.zeros(grid))
    cfg = tmp_path / "files.ini"
    cfg.write_text(
        f"[grid]\nn = 16\n[solver]\ndt = 0.01\nt_end = 0.1\n"
        f"[initial]\nkind = files\nu1 = {tmp_path / 'u1.bfld'}\nu2 = {tmp_path / 'u2.bfld'}\n"
    )
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    final = bfld.read(tmp_path / "o" / "final_u1.bfld")
    np.testing.assert_allclose(final.samples, np.sin(y) * math.exp(-0.1 * 0.1), atol=1e-12)


def test_cli_validation_errors(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[grid]\nn = 12\n")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 1
    assert main(["simulate", "--preset", "zero", "--config", str(bad)]) == 1
    assert main(["norms", str(tmp_path / "missing.bfld")]) == 1
    (tmp_path / "junk.bfld").write_bytes(b"BFLD1\n2 8 oops\n")
    assert main(["decompose", str(tmp_path / "junk.bfld"), "--out", str(tmp_path)]) == 1
    assert "byte offset" in capsys.readouterr().err


def test_cli_numerical_failure(tmp_path, capsys):
    cfg = tmp_path / "fast.ini"
    cfg.write_text("[grid]\nn = 32\n[solver]\ndt = 0.5\nt_end = 1.0\n[initial]\nkind = shear\namplitude = 5\n[observers]\ncadence = 0.5\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "CFL" in capsys.readouterr().err


def test_cli_generate_and_decompose(tmp_path, capsys):
    assert main(["generate", "random", "--n", "32", "--out", str(tmp_path), "--seed", "5"]) == 0
    field = tmp_path / "field.bfld"
    assert main(["decompose", str(field), "--check-reconstruction", "--out", str(tmp_path / "d")]) == 0
    out = capsys.readouterr().out
    residual = float(out.split("reconstruction_residual")[1])
    assert residual <= 1e-10
    rows = read_csv(tmp_path / "d" / "shells.csv")
    assert rows[0] == ["shell", "l2_norm"] and [r[0] for r in rows[1:]] == ["-1", "0", "1", "2", "3", "4"]
    blocks = [bfld.read(tmp_path / "d" / f"shell_{j}.bfld").samples for j in ("low", 0, 1, 2, 3, 4)]
    np.testing.assert_allclose(sum(blocks), bfld.read(field).samples, atol=1e-12)


def test_cli_decompose_energy_mode_cannot_reconstruct(tmp_path):
    main(["generate", "zero", "--out", str(tmp_path)])
    assert main(["decompose", str(tmp_path / "field.bfld"), "--mode", "energy", "--check-reconstruction", "--out", str(tmp_path)]) == 1


def test_cli_norms(tmp_path, capsys):
    grid = PeriodicGrid(2, 32)
    f = random_field(grid, np.random.default_rng(8))
    bfld.write(tmp_path / "f.bfld", f)
    assert main(["norms", str(tmp_path / "f.bfld"), "--triple", "0 2 2", "--triple", "1 2 2", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "norms.csv")
    assert rows[0] == ["s", "p", "q", "sobolev", "besov"]
    s0 = [float(v) for v in rows[1]]
    assert s0[3] == pytest.approx(l2_norm(f), rel=1e-12) and s0[4] == pytest.approx(l2_norm(f), rel=1e-10)
    s1 = [float(v) for v in rows[2]]
    assert s1[3] == pytest.approx(sobolev_norm(f, 1.0), rel=1e-12)
    assert "sobolev" in capsys.readouterr().out


def test_cli_norms_zero_field(tmp_path):
    main(["generate", "zero", "--out", str(tmp_path)])
    assert main(["norms", str(tmp_path / "field.bfld"), "--out", str(tmp_path), "--format", "jsonl"]) == 0
    rec = json.loads((tmp_path / "norms.jsonl").read_text())
    assert rec["sobolev"] == 0.0 and rec["besov"] == 0.0 and rec["schema"] == SCHEMA


def test_cli_bifurcate(tmp_path, capsys):
    args = ["bifurcate", "--family", "leftmult-shift", "--samples", "21", "--out", str(tmp_path)]
    assert main(args) == 0
    doc = json.loads((tmp_path / "crossings.json").read_text())
    assert len(doc["crossings"]) == 1 and abs(doc["crossings"][0]["mu_star"]) <= 1e-8
    assert len(read_csv(tmp_path / "scan.csv")) == 22
    capsys.readouterr()
    assert main(["bifurcate", "--family", "leftmult-constant", "--mu-lo", "1", "--mu-hi", "2", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "crossings.json").read_text())["crossings"] == []
    assert main(["bifurcate", "--family", "leftmult-shift", "--mu-lo", "1", "--mu-hi", "1", "--out", str(tmp_path)]) == 1


def test_cli_verify_quick(capsys):
    assert main(["verify", "--level", "quick"]) == 0
    assert "11/11 suites passed" in capsys.readouterr().out


def test_cli_verify_catches_injected_fault(capsys):
    assert main(["verify", "--level", "quick", "--inject-fault", "partition"]) == 3
    out = capsys.readouterr().out
    assert "partition_of_unity" in out and "shell_energy_sum" in out
