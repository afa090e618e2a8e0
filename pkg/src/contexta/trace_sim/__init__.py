"""Seeded synthetic trace generation, perturbation, and clocked replay."""

from .generator import generate, generate_events, plan_for
from .perturb import perturb
from .plans import HOME, RESTAURANT, TRAVEL_SPOT, WORK, Block, Plan, PlanLabel, build_plan
from .replay import AS_FAST_AS_POSSIBLE, ReplayControl, ReplayReport, SinkFailure, replay
from .script import (
    ChannelRates,
    InvalidScript,
    NoiseProfile,
    ScenarioScript,
    Segment,
    load_script,
    script_from_dict,
)

__all__ = [
    "AS_FAST_AS_POSSIBLE",
    "Block",
    "ChannelRates",
    "generate",
    "generate_events",
    "HOME",
    "InvalidScript",
    "NoiseProfile",
    "Plan",
    "plan_for",
    "PlanLabel",
    "perturb",
    "replay",
    "ReplayControl",
    "ReplayReport",
    "RESTAURANT",
    "ScenarioScript",
    "Segment",
    "script_from_dict",
    "load_script",
    "SinkFailure",
    "TRAVEL_SPOT",
    "WORK",
    "build_plan",
]
