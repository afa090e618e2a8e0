"""Shared fixtures and stream-building helpers for the test suite."""

from __future__ import annotations

import random

import pytest

from contexta.context_engine import ContextEngine, EngineConfig
from contexta.prompt_builder import TemplateSet
from contexta.sensor_model import (
    AccelerometerPayload,
    ActivityPayload,
    AppUsagePayload,
    AudioPayload,
    BatteryPayload,
    Channel,
    ForegroundAppPayload,
    LightPayload,
    LocationPayload,
    ScreenStatusPayload,
    SensorEvent,
)

TZ = 480
# local midnight for an arbitrary fixed day as UTC epoch ms
DAY0 = 19700 * 86_400_000 - TZ * 60_000


def lm(minute: float) -> int:
    """Local minute-of-day (fractional ok) -> UTC epoch ms on the fixed day."""
    return DAY0 + round(minute * 60_000)


def ev_screen(t: int, status: str) -> SensorEvent:
    return SensorEvent(t, Channel.SCREEN_STATUS, ScreenStatusPayload(status))


def ev_location(t: int, label: str | None = "home", lat: float = 39.08, long: float = 117.20) -> SensorEvent:
    return SensorEvent(t, Channel.LOCATION, LocationPayload(lat, long, label))


def ev_activity(t: int, kind: str) -> SensorEvent:
    return SensorEvent(t, Channel.ACTIVITY, ActivityPayload(kind))


def ev_light(t: int, lux: float) -> SensorEvent:
    return SensorEvent(t, Channel.LIGHT, LightPayload(lux))


def ev_app(t: int, pkg: str, dur: float, name: str = "App") -> SensorEvent:
    return SensorEvent(t, Channel.APP_USAGE, AppUsagePayload(name, pkg, dur))


def ev_foreground(t: int, pkg: str, name: str = "App") -> SensorEvent:
    return SensorEvent(t, Channel.FOREGROUND_APP, ForegroundAppPayload(pkg, name))


def ev_audio(t: int, active: bool) -> SensorEvent:
    return SensorEvent(t, Channel.AUDIO, AudioPayload("speaker", active))


def ev_accel(t: int, x: float, y: float = 0.0, z: float = 9.81) -> SensorEvent:
    return SensorEvent(t, Channel.ACCELEROMETER, AccelerometerPayload(x, y, z))


def ev_battery(t: int, level: float) -> SensorEvent:
    return SensorEvent(t, Channel.BATTERY, BatteryPayload(level))


def make_engine(**config_overrides) -> ContextEngine:
    cfg = EngineConfig(**config_overrides) if config_overrides else EngineConfig()
    return ContextEngine(tz_offset_minutes=TZ, config=cfg)


def random_stream(rng: random.Random, n_events: int, start_minute: float = 540.0):
    """An arbitrary (but timestamp-ordered) mixed-channel event soup."""
    events = []
    t = lm(start_minute)
    screen_on = False
    packages = ["com.sina.weibo", "com.google.android.gm", "com.google.android.youtube",
                "com.spotify.music", "org.example.misc"]
    labels = ["home", "work", "restaurant", "transit", "other", None]
    for _ in range(n_events):
        t += rng.randint(500, 45_000)
        roll = rng.random()
        if roll < 0.25:
            events.append(ev_app(t, rng.choice(packages), rng.uniform(0.0, 30.0)))
        elif roll < 0.40:
            screen_on = not screen_on
            events.append(ev_screen(t, "on" if screen_on else "off"))
        elif roll < 0.55:
            events.append(ev_location(t, rng.choice(labels),
                                      39.08 + rng.uniform(-0.05, 0.05),
                                      117.20 + rng.uniform(-0.05, 0.05)))
        elif roll < 0.70:
            events.append(ev_activity(t, rng.choice(["still", "walking", "running", "cycling"])))
        elif roll < 0.80:
            events.append(ev_light(t, rng.uniform(0.0, 800.0)))
        elif roll < 0.90:
            events.append(ev_audio(t, rng.random() < 0.5))
        else:
            events.append(ev_foreground(t, rng.choice(packages)))
    return events


@pytest.fixture(scope="session")
def templates() -> TemplateSet:
    return TemplateSet.load()
