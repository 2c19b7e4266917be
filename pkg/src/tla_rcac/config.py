"""Scenario configuration: strict JSON with unit-suffixed keys.

Every section is a frozen dataclass whose field names are the JSON keys, so
``ScenarioConfig.from_dict(cfg.to_dict()) == cfg`` holds exactly.
"""
from dataclasses import MISSING, asdict, dataclass, field, fields, replace
import json
import math

from .airframe import MissileParams
from .autopilot import GAIN_NAMES, TlaGains
from .guidance import EVADER_KINDS
from .rcac import RcacConfig

SCENARIOS = ("step", "harmonic", "intercept", "sweep", "tune")
ADAPTIVE_MODES = ("on", "off", "both")
SWEEP_TARGETS = ("alpha_x", "alpha_tla")
ALPHA_X_KINDS = ("fin_deflection", "angle_of_attack")
DEFAULT_ALPHA_X = (0.2, 0.65, 1.1, 1.55, 2.0)
DEFAULT_ALPHA_TLA = (0.2, 0.5, 1.0)
STEP_THRUST = ((0.0, 3800.0),)
INTERCEPT_THRUST = ((0.0, 15000.0), (10.0, 2000.0), (20.0, 0.0))


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key or invariant."""


_P = MissileParams()
_G = TlaGains()
_R = RcacConfig()


@dataclass(frozen=True)
class MissileSection:
    a_N: float = _P.a_N
    b_N: float = _P.b_N
    c_N: float = _P.c_N
    d_N: float = _P.d_N
    a_A: float = _P.a_A
    a_M: float = _P.a_M
    b_M: float = _P.b_M
    c_M: float = _P.c_M
    d_M: float = _P.d_M
    e_M: float = _P.e_M
    m_kg: float = _P.m
    S_m2: float = _P.S
    d_m: float = _P.d
    I_y_kg_m2: float = _P.I_y
    d_imu_m: float = _P.d_imu
    omega_a_rad_s: float = _P.omega_a
    zeta: float = _P.zeta

    def build(self):
        return MissileParams(
            a_N=self.a_N, b_N=self.b_N, c_N=self.c_N, d_N=self.d_N, a_A=self.a_A,
            a_M=self.a_M, b_M=self.b_M, c_M=self.c_M, d_M=self.d_M, e_M=self.e_M,
            m=self.m_kg, S=self.S_m2, d=self.d_m, I_y=self.I_y_kg_m2, d_imu=self.d_imu_m,
            omega_a=self.omega_a_rad_s, zeta=self.zeta)


@dataclass(frozen=True)
class InitialSection:
    mach: float = 2.5
    gamma_deg: float = 45.0
    theta_deg: float = 45.0
    q_deg_s: float = 0.0
    h_m: float = 3500.0
    X_m: float = 0.0


@dataclass(frozen=True)
class GainsSection:
    K_q_s: float = _G.K_q
    K_theta: float = _G.K_theta
    K_a: float = _G.K_a
    K_az: float = _G.K_az

    def build(self):
        return TlaGains(K_q=self.K_q_s, K_theta=self.K_theta, K_a=self.K_a, K_az=self.K_az)


@dataclass(frozen=True)
class RcacSection:
    n_c: int = _R.n_c
    R_z: float = _R.R_z
    R_u: float = _R.R_u
    R_theta: float = _R.R_theta
    lambda_forgetting: float = _R.lam
    z_tap: str = "error"
    min_nmp_zero_rad_s: float = 1.0
    include_complex_zeros: bool = False
    u_clamp_rad: float = 0.0

    def build(self):
        return RcacConfig(n_c=self.n_c, R_z=self.R_z, R_u=self.R_u, R_theta=self.R_theta,
                          lam=self.lambda_forgetting)


@dataclass(frozen=True)
class CommandSection:
    step_g: float = 10.0
    harmonic_amplitude_g: float = 10.0
    harmonic_omega_rad_s: float = 1.0


@dataclass(frozen=True)
class LoopSection:
    sample_time_s: float = 0.005
    t_final_s: float = 10.0


@dataclass(frozen=True)
class IntegratorSection:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-9
    min_step_s: float = 1e-12
    max_step_s: float = 0.05


@dataclass(frozen=True)
class EngagementSection:
    pursuer_mach: float = 0.5
    pursuer_gamma_deg: float = 0.0
    pursuer_h_m: float = 3000.0
    pursuer_d_m: float = 0.0
    evader_mach: float = 0.85
    evader_gamma_deg: float = 15.0
    evader_h_m: float = 4000.0
    evader_d_m: float = 1000.0
    evader_profile: str = "straight"
    weave_amplitude_m_s2: float = 0.0
    weave_omega_rad_s: float = 0.0
    evader_constant_speed: bool = False
    lambda_pn: float = 4.0
    ideal_drag_N: float = 0.0
    t_final_s: float = 30.0
    include_ideal: bool = True
    hit_threshold_m: float = 5.0


@dataclass(frozen=True)
class SweepSection:
    target: str = "alpha_x"
    base_scenario: str = "step"  # alpha_tla sweeps only
    alpha_x_kinds: tuple = ALPHA_X_KINDS
    alpha_x_factors: tuple = DEFAULT_ALPHA_X
    alpha_tla_values: tuple = DEFAULT_ALPHA_TLA


@dataclass(frozen=True)
class PsoSection:
    swarm_size: int = 20
    iterations: int = 50
    w: float = 0.729
    c1: float = 1.49445
    c2: float = 1.49445
    training_duration_s: float = 11.0


SECTIONS = {
    "missile": MissileSection, "initial": InitialSection, "gains": GainsSection,
    "rcac": RcacSection, "command": CommandSection, "loop": LoopSection,
    "integrator": IntegratorSection, "engagement": EngagementSection,
    "sweep": SweepSection, "pso": PsoSection,
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    alpha_tla: float = 1.0
    gain_mask: tuple = GAIN_NAMES
    adaptive: str = "both"
    seed: int = 0
    workers: int = 1
    thrust_breakpoints_s_N: tuple = None  # None -> scenario default
    missile: MissileSection = field(default_factory=MissileSection)
    initial: InitialSection = field(default_factory=InitialSection)
    gains: GainsSection = field(default_factory=GainsSection)
    rcac: RcacSection = field(default_factory=RcacSection)
    command: CommandSection = field(default_factory=CommandSection)
    loop: LoopSection = field(default_factory=LoopSection)
    integrator: IntegratorSection = field(default_factory=IntegratorSection)
    engagement: EngagementSection = field(default_factory=EngagementSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    pso: PsoSection = field(default_factory=PsoSection)

    def __post_init__(self):
        validate(self)

    def thrust_breakpoints(self):
        if self.thrust_breakpoints_s_N is not None:
            return self.thrust_breakpoints_s_N
        uses_profile = self.scenario == "intercept" or (
            self.scenario == "sweep" and (self.sweep.target == "alpha_x"
                                          or self.sweep.base_scenario == "intercept"))
        return INTERCEPT_THRUST if uses_profile else STEP_THRUST

    def to_dict(self):
        out = asdict(self)
        return _listify(out)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("top level of a config must be a JSON object")
        required = [f.name for f in fields(cls) if f.default is MISSING
                    and f.default_factory is MISSING]
        missing = [k for k in required if k not in data]
        if missing:
            raise ConfigError(f"missing required keys: {', '.join(missing)}")
        _reject_unknown(data, {f.name for f in fields(cls)}, "")
        kw = {}
        for f in fields(cls):
            if f.name not in data:
                continue
            value = data[f.name]
            if f.name in SECTIONS:
                kw[f.name] = _section(SECTIONS[f.name], value, f.name)
            else:
                kw[f.name] = _coerce(f, value, f.name)
        return cls(**kw)

    def with_overrides(self, **changes):
        """Copy with top-level or ``section__key`` overrides applied and revalidated."""
        top, nested = {}, {}
        for key, value in changes.items():
            if "__" in key:
                sec, name = key.split("__", 1)
                nested.setdefault(sec, {})[name] = value
            else:
                top[key] = value
        for sec, vals in nested.items():
            top[sec] = replace(getattr(self, sec), **vals)
        return replace(self, **top)


def _listify(obj):
    if isinstance(obj, dict):
        return {k: _listify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_listify(v) for v in obj]
    return obj


def _tuplify(obj):
    if isinstance(obj, list):
        return tuple(_tuplify(v) for v in obj)
    return obj


def _reject_unknown(data, known, where):
    unknown = sorted(set(data) - known)
    if unknown:
        loc = f" in '{where}'" if where else ""
        raise ConfigError(f"unknown keys{loc}: {', '.join(unknown)}")


def _coerce(f, value, path):
    default = f.default if f.default is not MISSING else None
    kind = f.type
    if kind in (float, "float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{path}' must be a number")
        return float(value)
    if kind in (int, "int"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{path}' must be an integer")
        return value
    if kind in (bool, "bool"):
        if not isinstance(value, bool):
            raise ConfigError(f"'{path}' must be true or false")
        return value
    if kind in (str, "str"):
        if not isinstance(value, str):
            raise ConfigError(f"'{path}' must be a string")
        return value
    if value is None and default is None:
        return None
    if not isinstance(value, list):
        raise ConfigError(f"'{path}' must be a list")
    return _tuplify(value)


def _section(cls, data, name):
    if not isinstance(data, dict):
        raise ConfigError(f"'{name}' must be an object")
    _reject_unknown(data, {f.name for f in fields(cls)}, name)
    kw = {f.name: _coerce(f, data[f.name], f"{name}.{f.name}")
          for f in fields(cls) if f.name in data}
    return cls(**kw)


def _positive(value, path):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ConfigError(f"'{path}' must be a positive finite number")


def validate(cfg):
    """Raise ConfigError naming the first violated invariant."""
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"'scenario' must be one of {SCENARIOS}")
    if cfg.adaptive not in ADAPTIVE_MODES:
        raise ConfigError(f"'adaptive' must be one of {ADAPTIVE_MODES}")
    if not (math.isfinite(cfg.alpha_tla) and cfg.alpha_tla >= 0):
        raise ConfigError("'alpha_tla' must be a finite number >= 0")
    bad = [g for g in cfg.gain_mask if g not in GAIN_NAMES]
    if bad:
        raise ConfigError(f"'gain_mask' entries must be among {GAIN_NAMES}; got {bad}")
    if cfg.workers < 1:
        raise ConfigError("'workers' must be >= 1")
    if cfg.thrust_breakpoints_s_N is not None:
        bps = cfg.thrust_breakpoints_s_N
        if not bps or any(len(b) != 2 for b in bps):
            raise ConfigError("'thrust_breakpoints_s_N' must be a non-empty list of "
                              "[t_start_s, thrust_N] pairs")
        times = [b[0] for b in bps]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ConfigError("'thrust_breakpoints_s_N' times must strictly increase")
        if any(b[1] < 0 for b in bps):
            raise ConfigError("'thrust_breakpoints_s_N' values must be >= 0")
    try:
        cfg.missile.build()
        cfg.gains.build()
        cfg.rcac.build()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.rcac.z_tap not in ("error", "fig6"):
        raise ConfigError("'rcac.z_tap' must be 'error' or 'fig6'")
    _positive(cfg.loop.sample_time_s, "loop.sample_time_s")
    _positive(cfg.loop.t_final_s, "loop.t_final_s")
    if cfg.loop.t_final_s < cfg.loop.sample_time_s:
        raise ConfigError("'loop.t_final_s' must be >= 'loop.sample_time_s'")
    _positive(cfg.initial.mach, "initial.mach")
    if not 0 <= cfg.initial.h_m <= 11000:
        raise ConfigError("'initial.h_m' must lie in [0, 11000]")
    eng = cfg.engagement
    if eng.evader_profile not in EVADER_KINDS:
        raise ConfigError(f"'engagement.evader_profile' must be one of {sorted(EVADER_KINDS)}")
    for key in ("pursuer_mach", "evader_mach", "lambda_pn", "t_final_s", "hit_threshold_m"):
        _positive(getattr(eng, key), f"engagement.{key}")
    for key in ("pursuer_h_m", "evader_h_m"):
        if not 0 <= getattr(eng, key) <= 11000:
            raise ConfigError(f"'engagement.{key}' must lie in [0, 11000]")
    sw = cfg.sweep
    if sw.target not in SWEEP_TARGETS:
        raise ConfigError(f"'sweep.target' must be one of {SWEEP_TARGETS}")
    if sw.base_scenario not in ("step", "harmonic", "intercept"):
        raise ConfigError("'sweep.base_scenario' must be step, harmonic or intercept")
    if any(k not in ALPHA_X_KINDS for k in sw.alpha_x_kinds):
        raise ConfigError(f"'sweep.alpha_x_kinds' entries must be among {ALPHA_X_KINDS}")
    if not sw.alpha_x_factors or any(not f > 0 for f in sw.alpha_x_factors):
        raise ConfigError("'sweep.alpha_x_factors' must be a non-empty list of positives")
    if not sw.alpha_tla_values or any(not a >= 0 for a in sw.alpha_tla_values):
        raise ConfigError("'sweep.alpha_tla_values' must be a non-empty list of values >= 0")
    ps = cfg.pso
    if ps.swarm_size < 1 or ps.iterations < 1:
        raise ConfigError("'pso.swarm_size' and 'pso.iterations' must be >= 1")
    _positive(ps.training_duration_s, "pso.training_duration_s")


def parse_config(text, source="<string>"):
    """Parse JSON text into a ScenarioConfig; empty input reports the required keys."""
    if not text.strip():
        data = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: parse error at line {exc.lineno}, "
                              f"column {exc.colno}: {exc.msg}") from exc
    return ScenarioConfig.from_dict(data)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, str(path))


def dump_config(cfg):
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=False)
