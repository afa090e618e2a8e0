"""Scenario scripts: the declarative input to the trace generator.

A script names a local day, a seed, and an ordered list of segments, each
either a background filler or one focal scenario with per-scenario knobs.
Segment times are local minutes from the day anchor's midnight (values past
1440 run into the next day).
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .. import canonical
from ..context_engine import ScenarioId
from ..sensor_model import DEFAULT_TZ_OFFSET_MINUTES

__all__ = [
    "Segment",
    "ChannelRates",
    "ScenarioScript",
    "NoiseProfile",
    "InvalidScript",
    "load_script",
    "script_from_dict",
]

_SCENARIO_VALUES = {s.value for s in ScenarioId}


class InvalidScript(ValueError):
    pass


@dataclass(slots=True)
class Segment:
    scenario: str  # a ScenarioId value or "background"
    start_offset_min: float
    duration_min: float
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def end_min(self) -> float:
        return self.start_offset_min + self.duration_min


@dataclass(slots=True)
class ChannelRates:
    """Emission cadence per channel. Defaults follow the collection spec."""

    accel_hz: float = 50.0
    gyro_hz: float = 50.0
    light_hz: float = 5.0
    battery_interval_s: float = 5.0
    location_interval_s: float = 5.0
    audio_interval_s: float = 5.0
    app_interval_s: float = 30.0
    foreground_interval_s: float = 30.0
    bt_devices_interval_s: float = 60.0
    activity_heartbeat_s: float = 60.0


@dataclass
class ScenarioScript:
    day: str  # local date anchor, ISO "YYYY-MM-DD"
    seed: int
    user_id: str = "user-1"
    tz_offset_minutes: int = DEFAULT_TZ_OFFSET_MINUTES
    segments: list[Segment] = field(default_factory=list)
    span_start_min: float | None = None  # default: derived from segments
    span_end_min: float | None = None
    skeleton: str = "homebound"  # background behavior: "homebound" | "workday"
    rates: ChannelRates = field(default_factory=ChannelRates)

    def validate(self) -> None:
        try:
            _dt.date.fromisoformat(self.day)
        except ValueError as exc:
            raise InvalidScript(f"bad day anchor {self.day!r}: {exc}") from None
        if self.skeleton not in ("homebound", "workday"):
            raise InvalidScript(f"unknown skeleton {self.skeleton!r}")
        ordered = sorted(self.segments, key=lambda s: s.start_offset_min)
        for seg in ordered:
            if seg.scenario != "background" and seg.scenario not in _SCENARIO_VALUES:
                raise InvalidScript(f"unknown scenarioId {seg.scenario!r}")
            if seg.duration_min <= 0:
                raise InvalidScript(
                    f"segment {seg.scenario!r} at {seg.start_offset_min} has non-positive duration"
                )
        for a, b in zip(ordered, ordered[1:]):
            if a.end_min > b.start_offset_min:
                raise InvalidScript(
                    f"segments overlap: {a.scenario!r} [{a.start_offset_min},{a.end_min}) and "
                    f"{b.scenario!r} [{b.start_offset_min},{b.end_min})"
                )
        if (
            self.span_start_min is not None
            and self.span_end_min is not None
            and self.span_start_min >= self.span_end_min
        ):
            raise InvalidScript("span start must precede span end")

    def day_midnight_utc_ms(self) -> int:
        d = _dt.date.fromisoformat(self.day)
        epoch_days = d.toordinal() - _dt.date(1970, 1, 1).toordinal()
        return (epoch_days * 86_400 - self.tz_offset_minutes * 60) * 1000


@dataclass(slots=True)
class NoiseProfile:
    """Perturbation knobs for robustness runs."""

    dropout_rate: float = 0.0
    jitter_std_ms: float = 0.0
    sensor_bias: dict[str, float] = field(default_factory=dict)
    jitter_cap_ms: float = 2_000.0

    def validate(self) -> None:
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0,1)")
        if self.jitter_std_ms < 0:
            raise ValueError("jitter_std_ms must be >= 0")


def script_from_dict(obj: dict[str, Any]) -> ScenarioScript:
    try:
        segments = [
            Segment(
                scenario=s["scenario"],
                start_offset_min=float(s["startOffsetMin"]),
                duration_min=float(s["durationMin"]),
                params=dict(s.get("params", {})),
            )
            for s in obj.get("segments", [])
        ]
        rates_obj = obj.get("rates", {})
        rates = ChannelRates(**{k: float(v) for k, v in rates_obj.items()})
        script = ScenarioScript(
            day=obj["day"],
            seed=int(obj["seed"]),
            user_id=obj.get("userId", "user-1"),
            tz_offset_minutes=int(obj.get("tzOffsetMinutes", DEFAULT_TZ_OFFSET_MINUTES)),
            segments=segments,
            span_start_min=obj.get("spanStartMin"),
            span_end_min=obj.get("spanEndMin"),
            skeleton=obj.get("skeleton", "homebound"),
            rates=rates,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidScript(f"bad script: {exc}") from None
    script.validate()
    return script


def load_script(path: str | Path) -> ScenarioScript:
    with open(path, "r", encoding="utf-8") as fh:
        obj = canonical.loads(fh.read())
    if not isinstance(obj, dict):
        raise InvalidScript("script file must hold a JSON object")
    return script_from_dict(obj)
