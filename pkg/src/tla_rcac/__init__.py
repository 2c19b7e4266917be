"""Planar missile simulation with a three-loop autopilot and RCAC augmentation."""
from .airframe import MissileParams, MissileState
from .autopilot import TlaGains, scale_gains
from .config import ScenarioConfig, load_config
from .engagement import EngagementScenario, run_engagement
from .guidance import EvaderProfile, ThrustProfile
from .rcac import RcacConfig
from .simcore import ClosedLoop, ControllerStack, LoopConfig, Plant, run_closed_loop

__version__ = "0.1.0"

__all__ = [
    "ClosedLoop", "ControllerStack", "EngagementScenario", "EvaderProfile", "LoopConfig",
    "MissileParams", "MissileState", "Plant", "RcacConfig", "ScenarioConfig",
    "ThrustProfile", "TlaGains", "load_config", "run_closed_loop", "run_engagement",
    "scale_gains",
]
