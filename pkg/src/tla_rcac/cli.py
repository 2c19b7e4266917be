"""Command-line front end: scenario orchestration, CSV trajectories and summary.json."""
import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from .airframe import MissileState
from .autopilot import scale_gains
from .config import ConfigError, ScenarioConfig, dump_config, load_config
from .engagement import EngagementScenario, run_engagement
from .environment import G0
from .guidance import EvaderProfile, ThrustProfile
from .integrate import IntegratorConfig
from .pso import PsoConfig, hyper_to_rcac, optimize, pso_cost, training_command, \
    tuning_objective
from .simcore import ControllerStack, LoopConfig, Plant, SimulationError, run_closed_loop

log = logging.getLogger("tla_rcac")

MISSILE_HEADER = ("t", "mach", "V", "gamma_rad", "theta_rad", "q_rad_s", "alpha_rad",
                  "h_m", "X_m", "delta_rad", "u", "u_tla", "u_a", "a_z_ref", "a_z", "z")
MISSILE_SOURCE = ("t", "mach", "V", "gamma", "theta", "q", "alpha", "h", "X", "delta", "u",
                  "u_tla", "u_a", "a_z_ref", "a_z", "z")
ENGAGEMENT_HEADER = ("R_m", "beta_rad", "evader_d_m", "evader_h_m")
ENGAGEMENT_SOURCE = ("R", "beta", "evader_d", "evader_h")
IDEAL_HEADER = ("t", "V", "gamma_rad", "d_m", "h_m", "n_z")
IDEAL_SOURCE = ("t", "V", "gamma", "d", "h", "n_z")


def _fmt(x):
    return format(float(x), ".17g")


def emit_trajectory(traj, path):
    """Write a trajectory CSV; floats carry 17 significant digits."""
    ideal = "mach" not in traj.columns()
    if ideal:
        header, source = list(IDEAL_HEADER), list(IDEAL_SOURCE)
        n_theta = 0
    else:
        header, source = list(MISSILE_HEADER), list(MISSILE_SOURCE)
        n_theta = traj.n_theta
        header += [f"theta_k_{i + 1}" for i in range(n_theta)]
    if traj.engaging:
        header += list(ENGAGEMENT_HEADER)
    cols = [traj[name] for name in source]
    tail = [traj[name] for name in ENGAGEMENT_SOURCE] if traj.engaging else []
    theta = traj["theta_k"] if n_theta else None
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for i in range(len(traj)):
                row = [_fmt(c[i]) for c in cols]
                if n_theta:
                    row += [_fmt(v) for v in theta[i]]
                row += [_fmt(c[i]) for c in tail]
                w.writerow(row)
    except OSError as exc:
        raise OSError(f"cannot write trajectory to {path}: {exc}") from exc
    return path


def read_trajectory(path):
    """Read an emitted CSV back into ``{column: np.ndarray}``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body]).reshape(len(body), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


# ----------------------------------------------------------------------------------
# building simulation objects from a config


def _integrator(cfg):
    s = cfg.integrator
    return IntegratorConfig(rel_tol=s.rel_tol, abs_tol=s.abs_tol, min_step=s.min_step_s,
                            max_step=s.max_step_s)


def _thrust(cfg):
    return ThrustProfile(tuple(tuple(float(v) for v in b)
                               for b in cfg.thrust_breakpoints()))


def _controller(cfg, adaptive, alpha_tla):
    r = cfg.rcac
    gains = scale_gains(cfg.gains.build(), alpha_tla, tuple(cfg.gain_mask))
    return ControllerStack(gains=gains, rcac=r.build() if adaptive else None, z_tap=r.z_tap,
                           min_nmp_zero=r.min_nmp_zero_rad_s,
                           include_complex_zeros=r.include_complex_zeros,
                           u_clamp=r.u_clamp_rad)


def _plant(cfg, params=None):
    i = cfg.initial
    init = MissileState(mach=i.mach, gamma=math.radians(i.gamma_deg),
                        theta=math.radians(i.theta_deg), q=math.radians(i.q_deg_s),
                        h=i.h_m, X=i.X_m)
    return Plant(params=params or cfg.missile.build(), initial=init, thrust=_thrust(cfg))


def _engagement(cfg):
    e = cfg.engagement
    return EngagementScenario(
        pursuer_mach=e.pursuer_mach, pursuer_gamma=math.radians(e.pursuer_gamma_deg),
        pursuer_h=e.pursuer_h_m, pursuer_d=e.pursuer_d_m, evader_mach=e.evader_mach,
        evader_gamma=math.radians(e.evader_gamma_deg), evader_h=e.evader_h_m,
        evader_d=e.evader_d_m,
        evader_profile=EvaderProfile(e.evader_profile, e.weave_amplitude_m_s2,
                                     e.weave_omega_rad_s, e.evader_constant_speed),
        thrust=_thrust(cfg), lambda_pn=e.lambda_pn, ideal_drag=e.ideal_drag_N,
        t_final=e.t_final_s)


def command_for(cfg, kind):
    c = cfg.command
    if kind == "step":
        a = c.step_g * G0
        return lambda t, y: a
    if kind == "harmonic":
        a, w = c.harmonic_amplitude_g * G0, c.harmonic_omega_rad_s
        return lambda t, y: a * math.sin(w * t)
    raise ValueError(f"no open-loop command for scenario {kind!r}")


def _variants(cfg, with_ideal):
    out = []
    if with_ideal and cfg.engagement.include_ideal:
        out.append("ideal")
    if cfg.adaptive in ("off", "both"):
        out.append("F-TLA")
    if cfg.adaptive in ("on", "both"):
        out.append("A-TLA")
    return out


def plan_runs(cfg):
    """Ordered list of run jobs (plain dicts) for one invocation."""
    runs = []
    if cfg.scenario in ("step", "harmonic", "intercept"):
        for v in _variants(cfg, cfg.scenario == "intercept"):
            runs.append(dict(name=f"{cfg.scenario}_{v}", kind=cfg.scenario, variant=v,
                             alpha_tla=cfg.alpha_tla))
    elif cfg.scenario == "sweep" and cfg.sweep.target == "alpha_tla":
        base = cfg.sweep.base_scenario
        for a in cfg.sweep.alpha_tla_values:
            for v in _variants(cfg, False):
                runs.append(dict(name=f"sweep_alpha_tla_{a:g}_{base}_{v}", kind=base,
                                 variant=v, alpha_tla=float(a)))
    elif cfg.scenario == "sweep":
        for kind in cfg.sweep.alpha_x_kinds:
            for f in cfg.sweep.alpha_x_factors:
                for v in _variants(cfg, False):
                    runs.append(dict(name=f"sweep_{kind}_{f:g}_{v}", kind="intercept",
                                     variant=v, alpha_tla=cfg.alpha_tla, alpha_x_kind=kind,
                                     alpha_x_factor=float(f)))
    return runs


def _loop_summary(traj):
    if len(traj) == 0:
        return {}
    out = {"mean_abs_z": float(np.mean(np.abs(traj["z"]))),
           "max_abs_qdot": float(np.max(np.abs(traj["qdot"])))}
    theta = traj["theta_k"]
    if len(theta):
        out["final_theta_k"] = [float(v) for v in theta[-1]]
    return out


def execute_run(cfg_dict, job, out_dir):
    """Run one job, write its CSV, return its summary row (never raises module errors)."""
    cfg = ScenarioConfig.from_dict(cfg_dict)
    row = {k: v for k, v in job.items() if k != "name"}
    row["name"] = job["name"]
    path = os.path.join(out_dir, job["name"] + ".csv")
    params = cfg.missile.build()
    if "alpha_x_kind" in job:
        params = params.scaled(job["alpha_x_kind"], job["alpha_x_factor"])
    loop = LoopConfig(cfg.loop.sample_time_s, cfg.loop.t_final_s)
    traj = None
    try:
        if job["kind"] == "intercept":
            ctl = None
            if job["variant"] != "ideal":
                ctl = _controller(cfg, job["variant"] == "A-TLA", job["alpha_tla"])
            res = run_engagement(_engagement(cfg), job["variant"], ctl, params, loop,
                                 _integrator(cfg))
            traj = res.trajectory
            row.update(miss_distance_m=res.miss_distance, flight_time_s=res.flight_time,
                       closed_out=res.closed_out,
                       intercepted=res.miss_distance < cfg.engagement.hit_threshold_m)
            if res.abort_cause:
                row.update(status="departed", error=res.abort_cause)
            else:
                row["status"] = "ok"
        else:
            ctl = _controller(cfg, job["variant"] == "A-TLA", job["alpha_tla"])
            traj = run_closed_loop(_plant(cfg, params), ctl, command_for(cfg, job["kind"]),
                                   loop, _integrator(cfg))
            row["status"] = "ok"
    except SimulationError as exc:
        traj = exc.trajectory
        row.update(status="error", error=str(exc))
    except (ValueError, ArithmeticError) as exc:
        row.update(status="error", error=f"{type(exc).__name__}: {exc}")
    if traj is not None:
        if "mach" in traj.columns():
            row.update(_loop_summary(traj))
        emit_trajectory(traj, path)
        row["trajectory"] = os.path.basename(path)
        row["t_end_s"] = float(traj["t"][-1]) if len(traj) else 0.0
    return row


def _run_tune(cfg, out_dir):
    p = cfg.pso
    pcfg = PsoConfig(swarm_size=p.swarm_size, iterations=p.iterations, w=p.w, c1=p.c1,
                     c2=p.c2, seed=cfg.seed)
    loop = LoopConfig(cfg.loop.sample_time_s, p.training_duration_s)
    ctl0 = _controller(cfg, True, cfg.alpha_tla)
    objective = tuning_objective(
        plant=_plant(cfg), gains=ctl0.gains, loop=loop, base=cfg.rcac.build(),
        z_tap=ctl0.z_tap, min_nmp_zero=ctl0.min_nmp_zero,
        include_complex_zeros=ctl0.include_complex_zeros, u_clamp=ctl0.u_clamp)
    best, cost, hist = optimize(objective, pcfg)
    row = {"name": "tune", "kind": "tune", "status": "ok" if math.isfinite(cost) else "error",
           "best_R_u": float(best[0]), "best_log10_R_theta": float(best[1]),
           "best_cost": cost, "best_cost_history": hist.best_cost,
           "best_position_history": [[float(v) for v in b] for b in hist.best_position]}
    if not math.isfinite(cost):
        row["error"] = "no candidate produced a finite cost"
        return [row]
    ctl = ControllerStack(gains=ctl0.gains, rcac=hyper_to_rcac(best, cfg.rcac.build()),
                          z_tap=ctl0.z_tap, min_nmp_zero=ctl0.min_nmp_zero,
                          include_complex_zeros=ctl0.include_complex_zeros,
                          u_clamp=ctl0.u_clamp)
    traj = run_closed_loop(_plant(cfg), ctl, lambda t, y: training_command(t), loop,
                           _integrator(cfg))
    row["replayed_cost"] = pso_cost(traj)
    row.update(_loop_summary(traj))
    path = os.path.join(out_dir, "tune_best_A-TLA.csv")
    emit_trajectory(traj, path)
    row["trajectory"] = os.path.basename(path)
    return [row]


def run_scenario(cfg, out_dir):
    """Execute every run of ``cfg``; returns (exit_status, summary dict)."""
    os.makedirs(out_dir, exist_ok=True)
    if cfg.scenario == "tune":
        rows = _run_tune(cfg, out_dir)
    else:
        jobs = plan_runs(cfg)
        cfg_dict = cfg.to_dict()
        if cfg.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                rows = list(pool.map(execute_run, [cfg_dict] * len(jobs), jobs,
                                     [out_dir] * len(jobs)))
        else:
            rows = [execute_run(cfg_dict, s, out_dir) for s in jobs]
    for r in rows:
        if r["status"] != "ok":
            log.error("run %s: %s (%s)", r["name"], r["status"], r.get("error"))
    summary = {"scenario": cfg.scenario, "config": cfg.to_dict(), "runs": rows}
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    status = 0 if all(r["status"] == "ok" for r in rows) else 1
    return status, summary


# ----------------------------------------------------------------------------------
# argument parsing

SUBCOMMANDS = ("step", "harmonic", "intercept", "sweep", "tune", "print-config")


def _on_off(text):
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text


def build_parser():
    ap = argparse.ArgumentParser(prog="tla-rcac",
                                 description="Missile three-loop autopilot with RCAC "
                                             "augmentation: simulations and sweeps.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON scenario file")
        sp.add_argument("--alpha-tla", type=float, dest="alpha_tla")
        sp.add_argument("--adaptive", type=_on_off,
                        help="on: A-TLA only, off: F-TLA only (default: both)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--ts", type=float, help="controller sample time in seconds")
        if name == "print-config":
            sp.add_argument("--scenario", choices=SUBCOMMANDS[:-1],
                            help="scenario for defaults when no --config is given")
        else:
            sp.add_argument("--out", default="out", help="output directory")
    return ap


def resolve_config(args):
    scenario = args.command if args.command != "print-config" else (args.scenario or None)
    if args.config:
        cfg = load_config(args.config)
        if scenario and cfg.scenario != scenario:
            cfg = cfg.with_overrides(scenario=scenario)
    else:
        cfg = ScenarioConfig(scenario=scenario or "step")
    changes = {}
    if args.alpha_tla is not None:
        changes["alpha_tla"] = args.alpha_tla
    if args.adaptive is not None:
        changes["adaptive"] = args.adaptive
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.ts is not None:
        changes["loop__sample_time_s"] = args.ts
    return cfg.with_overrides(**changes) if changes else cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.command == "print-config":
        print(dump_config(cfg))
        return 0
    status, summary = run_scenario(cfg, args.out)
    for r in summary["runs"]:
        bits = [r["name"], r["status"]]
        for key in ("miss_distance_m", "mean_abs_z", "best_cost"):
            if key in r:
                bits.append(f"{key}={r[key]:.6g}")
        print("  ".join(bits))
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
