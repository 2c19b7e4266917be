import csv
import json
import math

import numpy as np
import pytest

from tla_rcac.cli import (MISSILE_HEADER, emit_trajectory, main, plan_runs, read_trajectory,
                          run_scenario)
from tla_rcac.config import (DEFAULT_ALPHA_X, ConfigError, ScenarioConfig, dump_config,
                             load_config, parse_config)
from tla_rcac.engagement import run_engagement
from tla_rcac.rcac import RcacConfig
from tla_rcac.simcore import ControllerStack, LoopConfig, Plant, Trajectory, run_closed_loop


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


# ---------------------------------------------------------------- config

def test_empty_file_lists_required(tmp_path):
    with pytest.raises(ConfigError, match="scenario"):
        load_config(write(tmp_path, ""))


def test_minimal_file_echoes_tables(tmp_path):
    cfg = load_config(write(tmp_path, {"scenario": "step"}))
    m = cfg.missile.build()
    assert (m.m, m.a_N, m.d_M, m.I_y) == (204.0227, -19.373, -11.803, 247.4336)
    assert (cfg.initial.mach, cfg.initial.gamma_deg, cfg.initial.h_m) == (2.5, 45.0, 3500.0)
    assert cfg.thrust_breakpoints() == ((0.0, 3800.0),)


def test_alpha_x_defaults():
    cfg = parse_config('{"scenario": "sweep", "sweep": {"target": "alpha_x"}}')
    assert tuple(cfg.sweep.alpha_x_factors) == DEFAULT_ALPHA_X == (0.2, 0.65, 1.1, 1.55, 2.0)


@pytest.mark.parametrize("data,word", [
    ({"scenario": "step", "colour": 1}, "colour"),
    ({"scenario": "step", "missile": {"mass": 1}}, "mass"),
    ({"scenario": "orbit"}, "scenario"),
    ({"scenario": "step", "loop": {"sample_time_s": -1}}, "sample_time_s"),
    ({"scenario": "step", "sweep": {"alpha_x_kinds": ["thrust"]}}, "alpha_x_kinds"),
])
def test_validation_names_the_problem(data, word):
    with pytest.raises(ConfigError, match=word):
        parse_config(json.dumps(data))


def test_parse_error_position():
    with pytest.raises(ConfigError, match=r"line 3, column \d+"):
        parse_config('{\n "scenario": "step",\n oops\n}')


def test_dump_round_trip():
    cfg = ScenarioConfig(scenario="intercept", alpha_tla=0.2, seed=7)
    assert parse_config(dump_config(cfg)) == cfg


def test_overrides():
    cfg = ScenarioConfig(scenario="step").with_overrides(loop__sample_time_s=0.01, seed=3)
    assert (cfg.loop.sample_time_s, cfg.seed) == (0.01, 3)
    with pytest.raises(ConfigError):
        cfg.with_overrides(loop__sample_time_s=0.0)


# ---------------------------------------------------------------- trajectory files

def n_cols(path):
    with open(path, newline="") as fh:
        return [len(r) for r in csv.reader(fh)]


def test_empty_trajectory_is_header_only(tmp_path):
    p = emit_trajectory(Trajectory(9), tmp_path / "e.csv")
    assert n_cols(p) == [16 + 9]
    p = emit_trajectory(Trajectory(9, engaging=True), tmp_path / "f.csv")
    assert n_cols(p) == [16 + 9 + 4]
    with open(p) as fh:
        head = fh.readline().strip().split(",")
    assert tuple(head[:16]) == MISSILE_HEADER
    assert head[16] == "theta_k_1" and head[-4:] == ["R_m", "beta_rad", "evader_d_m",
                                                     "evader_h_m"]


def test_round_trip_is_exact(tmp_path):
    tr = run_closed_loop(Plant(), ControllerStack(rcac=RcacConfig()), lambda t, y: 98.0,
                         LoopConfig(t_final=0.05))
    p = emit_trajectory(tr, tmp_path / "r.csv")
    back = read_trajectory(p)
    assert np.array_equal(back["a_z"], tr["a_z"])
    assert np.array_equal(back["theta_rad"], tr["theta"])
    assert np.array_equal(np.column_stack([back[f"theta_k_{i}"] for i in range(1, 10)]),
                          tr["theta_k"])


def test_one_record(tmp_path):
    tr = run_closed_loop(Plant(), ControllerStack(), lambda t, y: 0.0,
                         LoopConfig(t_s=0.01, t_final=0.01))
    tr2 = Trajectory(tr.n_theta)
    tr2.append(tr["theta_k"][0], **{c: tr[c][0] for c in tr.columns()})
    assert n_cols(emit_trajectory(tr2, tmp_path / "one.csv")) == [25, 25]


def test_write_error_names_path(tmp_path):
    with pytest.raises(OSError, match="nowhere"):
        emit_trajectory(Trajectory(9), tmp_path / "nowhere" / "x.csv")


# ---------------------------------------------------------------- orchestration

def short_cfg(**kw):
    base = dict(scenario="step", loop={"t_final_s": 0.1})
    base.update(kw)
    return ScenarioConfig.from_dict(base)


def test_plan_runs_counts():
    assert len(plan_runs(short_cfg())) == 2
    assert len(plan_runs(short_cfg(adaptive="on"))) == 1
    assert len(plan_runs(short_cfg(scenario="intercept"))) == 3
    assert len(plan_runs(short_cfg(scenario="sweep"))) == 2 * 5 * 2
    sw = short_cfg(scenario="sweep", sweep={"target": "alpha_tla",
                                            "alpha_tla_values": [0.2, 1.0]})
    assert [r["alpha_tla"] for r in plan_runs(sw)] == [0.2, 0.2, 1.0, 1.0]


def test_step_summary(tmp_path):
    status, summary = run_scenario(short_cfg(), tmp_path)
    assert status == 0
    rows = summary["runs"]
    assert [r["variant"] for r in rows] == ["F-TLA", "A-TLA"]
    for r in rows:
        assert (tmp_path / r["trajectory"]).exists()
        assert r["mean_abs_z"] > 0 and r["max_abs_qdot"] >= 0
        assert len(r["final_theta_k"]) == 9
    assert json.loads((tmp_path / "summary.json").read_text())["runs"] == rows


def test_intercept_summary_matches_library(tmp_path):
    cfg = short_cfg(scenario="intercept", adaptive="off", engagement={"include_ideal": True})
    status, summary = run_scenario(cfg, tmp_path)
    assert status == 0
    ideal = next(r for r in summary["runs"] if r["variant"] == "ideal")
    assert ideal["miss_distance_m"] == run_engagement().miss_distance
    assert ideal["intercepted"] is True
    assert n_cols(tmp_path / ideal["trajectory"])[0] == 6 + 4


def test_failed_run_gives_nonzero_status(tmp_path):
    cfg = short_cfg(initial={"h_m": 10990.0, "gamma_deg": 80.0, "theta_deg": 80.0},
                    loop={"t_final_s": 3.0}, adaptive="off")
    status, summary = run_scenario(cfg, tmp_path)
    assert status == 1
    assert summary["runs"][0]["status"] == "error"
    assert (tmp_path / summary["runs"][0]["trajectory"]).exists()


def test_tune_is_deterministic(tmp_path):
    cfg = short_cfg(scenario="tune", pso={"swarm_size": 2, "iterations": 2,
                                          "training_duration_s": 0.1})
    s1 = run_scenario(cfg, tmp_path / "a")[1]["runs"][0]
    s2 = run_scenario(cfg, tmp_path / "b")[1]["runs"][0]
    assert s1["best_cost_history"] == s2["best_cost_history"]
    assert 0 <= s1["best_R_u"] <= 20 and 0 <= s1["best_log10_R_theta"] <= 15
    assert s1["replayed_cost"] == pytest.approx(s1["best_cost"])


@pytest.mark.slow
def test_parallel_matches_serial(tmp_path):
    kw = dict(scenario="sweep", adaptive="off",
              sweep={"alpha_x_kinds": ["fin_deflection"], "alpha_x_factors": [0.65, 1.55]})
    one = run_scenario(short_cfg(**kw), tmp_path / "s")[1]["runs"]
    two = run_scenario(short_cfg(workers=2, **kw), tmp_path / "p")[1]["runs"]
    assert [r["miss_distance_m"] for r in one] == [r["miss_distance_m"] for r in two]


# ---------------------------------------------------------------- entry point

def test_print_config_round_trip(capsys):
    assert main(["print-config", "--scenario", "intercept", "--alpha-tla", "0.2",
                 "--ts", "0.01", "--seed", "9", "--adaptive", "on"]) == 0
    cfg = parse_config(capsys.readouterr().out)
    assert (cfg.scenario, cfg.alpha_tla, cfg.loop.sample_time_s, cfg.seed, cfg.adaptive) == \
        ("intercept", 0.2, 0.01, 9, "on")


def test_config_file_and_flag(tmp_path, capsys):
    p = write(tmp_path, {"scenario": "step", "alpha_tla": 0.5})
    assert main(["print-config", "--config", str(p)]) == 0
    assert parse_config(capsys.readouterr().out).alpha_tla == 0.5


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["step", "--config", str(write(tmp_path, "")), "--out", str(tmp_path)]) == 2
    assert "required" in capsys.readouterr().err


def test_bad_flag_value():
    with pytest.raises(SystemExit):
        main(["step", "--adaptive", "maybe"])


def test_step_command(tmp_path, capsys):
    p = write(tmp_path, {"scenario": "step", "loop": {"t_final_s": 0.05}})
    assert main(["step", "--config", str(p), "--adaptive", "off",
                 "--out", str(tmp_path / "o")]) == 0
    assert "step_F-TLA  ok" in capsys.readouterr().out
    rows = json.loads((tmp_path / "o" / "summary.json").read_text())["runs"]
    assert len(rows) == 1 and math.isfinite(rows[0]["mean_abs_z"])
