"""Canned focal scripts: one per scenario, at placements whose trigger
outcomes are analytically known. The evaluation corpus is these 16 scripts
across seeds.

Motion-channel rates are decimated here (the detectors that matter per
scenario keep what they need; intense exercise re-rates its own block to
50 Hz) so a 160-trace corpus evaluates in seconds. Cadence-sensitive tests
use default :class:`ChannelRates` instead.
"""

from __future__ import annotations

from ..context_engine import ScenarioId
from .script import ChannelRates, ScenarioScript, Segment

__all__ = ["focal_script", "corpus_scripts", "DEFAULT_DAY"]

DEFAULT_DAY = "2023-11-14"


def _decimated_rates() -> ChannelRates:
    return ChannelRates(accel_hz=0.5, gyro_hz=0.25, light_hz=0.5)


# scenario -> (segment start minute, duration, params, span override)
_PLACEMENTS: dict[ScenarioId, tuple[float, float, dict, tuple[float, float] | None]] = {
    ScenarioId.WALKING: (600, 12, {}, (540, 700)),
    ScenarioId.RUNNING: (600, 7, {}, (540, 700)),
    ScenarioId.INTENSE_EXERCISE: (600, 25, {}, (540, 700)),
    ScenarioId.PROLONGED_SITTING: (570, 97, {}, (510, 690)),
    ScenarioId.NAP: (750, 40, {}, (700, 850)),
    ScenarioId.WAKE_UP: (450, 25, {}, (140, 540)),
    ScenarioId.INSOMNIA: (90, 105, {}, (30, 330)),
    ScenarioId.MEAL_PATTERN: (705, 40, {}, (660, 800)),
    ScenarioId.NIGHTTIME_SUMMARY: (1408, 4, {}, (1380, 1440)),
    ScenarioId.WORKPLACE_ARRIVAL: (540, 150, {}, (500, 700)),
    ScenarioId.OFF_WORK: (540, 520, {}, (500, 1140)),
    ScenarioId.TRAVEL_RECOMMENDATION: (870, 45, {}, (800, 990)),
    ScenarioId.EXCESSIVE_APP_USAGE: (30, 121, {"usageMinutes": 121}, (0, 300)),
    ScenarioId.MUSIC_PLAYBACK: (600, 15, {}, (540, 660)),
    ScenarioId.STORY_REMINDER: (1245, 25, {}, (1200, 1330)),
    ScenarioId.LATE_NIGHT_BINGE: (1390, 90, {}, (1330, 1530)),
}


def focal_script(
    scenario: ScenarioId,
    seed: int,
    day: str = DEFAULT_DAY,
    user_id: str | None = None,
    **param_overrides,
) -> ScenarioScript:
    start, duration, params, span = _PLACEMENTS[scenario]
    params = {**params, **param_overrides}
    if scenario is ScenarioId.EXCESSIVE_APP_USAGE and "usageMinutes" in param_overrides:
        duration = float(param_overrides["usageMinutes"])
    return ScenarioScript(
        day=day,
        seed=seed,
        user_id=user_id or f"sim-{scenario.value}",
        segments=[Segment(scenario.value, start, duration, params)],
        span_start_min=span[0] if span else None,
        span_end_min=span[1] if span else None,
        rates=_decimated_rates(),
    )


def corpus_scripts(seeds: range | list[int], day: str = DEFAULT_DAY) -> list[ScenarioScript]:
    return [
        focal_script(scenario, seed, day=day)
        for scenario in ScenarioId
        for seed in seeds
    ]
