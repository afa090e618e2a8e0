"""Turns a behavior plan into a merged, timestamp-ordered sensor event stream.

Every channel runs its own deterministic substream: sample grids are fixed
by block boundaries and channel cadence, and value noise comes from a
per-(seed, channel) RNG, so adding or re-rating one channel never shifts
another. High-rate channels draw their noise in numpy chunks.
"""

from __future__ import annotations

import heapq
import math
import random
from typing import Iterator

import numpy as np

from ..sensor_model import (
    AccelerometerPayload,
    ActivityPayload,
    AppUsagePayload,
    AudioPayload,
    BatteryPayload,
    BluetoothDevicesPayload,
    BluetoothStatusPayload,
    Channel,
    ForegroundAppPayload,
    GroundTruthLabel,
    GyroscopePayload,
    LightPayload,
    LocationPayload,
    ScreenStatusPayload,
    SensorEvent,
    Trace,
    TraceHeader,
    WifiStatusPayload,
    SCHEMA_VERSION,
)
from .plans import Block, Plan, build_plan
from .script import ChannelRates, ScenarioScript

__all__ = ["generate", "generate_events", "plan_for"]

_MIN = 60_000

# merge rank: state channels before derived/usage channels at equal timestamps
_RANK = {
    Channel.ACTIVITY: 0,
    Channel.SCREEN_STATUS: 1,
    Channel.LOCATION: 2,
    Channel.LIGHT: 3,
    Channel.BATTERY: 4,
    Channel.AUDIO: 5,
    Channel.WIFI_STATUS: 6,
    Channel.BLUETOOTH_STATUS: 7,
    Channel.BLUETOOTH_DEVICES: 8,
    Channel.GYROSCOPE: 9,
    Channel.ACCELEROMETER: 10,
    Channel.FOREGROUND_APP: 11,
    Channel.APP_USAGE: 12,
}

_GRAVITY = 9.81


def plan_for(script: ScenarioScript) -> Plan:
    return build_plan(script)


def _rng(script: ScenarioScript, name: str) -> random.Random:
    return random.Random(f"{script.seed}:{name}")


def _np_rng(script: ScenarioScript, name: str) -> np.random.Generator:
    digest = sum(ord(c) * (i + 1) for i, c in enumerate(name))
    return np.random.default_rng([script.seed & 0xFFFFFFFF, digest])


def _grid(block: Block, base: int, interval_ms: float, include_start: bool = True) -> Iterator[int]:
    start = base + round(block.start_min * _MIN)
    end = base + round(block.end_min * _MIN)
    k = 0 if include_start else 1
    while True:
        t = start + round(k * interval_ms)
        if t >= end:
            return
        yield t
        k += 1


def _coords_at(block: Block, t: int, base: int, rng: random.Random) -> tuple[float, float]:
    lat, long = block.coords
    if block.move_to is not None:
        start = base + round(block.start_min * _MIN)
        end = base + round(block.end_min * _MIN)
        frac = (t - start) / max(end - start, 1)
        lat += (block.move_to[0] - lat) * frac
        long += (block.move_to[1] - long) * frac
        noise = 0.00004
    else:
        noise = 0.00012
    return (
        round(lat + rng.gauss(0.0, noise), 6),
        round(long + rng.gauss(0.0, noise), 6),
    )


def _emit_activity(blocks, base, rates, script):
    prev = None
    for b in blocks:
        start = base + round(b.start_min * _MIN)
        if b.activity != prev:
            yield (start, 0, SensorEvent(start, Channel.ACTIVITY, ActivityPayload(b.activity)))
            prev = b.activity
        for t in _grid(b, base, rates.activity_heartbeat_s * 1000, include_start=False):
            yield (t, 0, SensorEvent(t, Channel.ACTIVITY, ActivityPayload(b.activity)))


def _emit_screen(blocks, base, script):
    prev = None
    for b in blocks:
        start = base + round(b.start_min * _MIN)
        if b.screen != prev:
            yield (start, 1, SensorEvent(start, Channel.SCREEN_STATUS, ScreenStatusPayload(b.screen)))
            prev = b.screen
        if b.screen == "on" and b.interactions_every_s:
            for t in _grid(b, base, b.interactions_every_s * 1000, include_start=False):
                yield (t, 1, SensorEvent(t, Channel.SCREEN_STATUS, ScreenStatusPayload("unlocked")))


def _emit_location(blocks, base, rates, script):
    rng = _rng(script, "location")
    interval = rates.location_interval_s * 1000
    for b in blocks:
        for t in _grid(b, base, interval):
            lat, long = _coords_at(b, t, base, rng)
            yield (t, 2, SensorEvent(t, Channel.LOCATION, LocationPayload(lat, long, b.label)))


def _emit_light(blocks, base, rates, script):
    rng = _np_rng(script, "light")
    interval = 1000.0 / rates.light_hz if rates.light_hz > 0 else None
    if interval is None:
        return
    for b in blocks:
        ts = list(_grid(b, base, interval))
        if not ts:
            continue
        vals = np.maximum(b.light * (1.0 + 0.04 * rng.standard_normal(len(ts))), 0.0)
        vals = np.round(vals, 2).tolist()
        for t, v in zip(ts, vals):
            yield (t, 3, SensorEvent(t, Channel.LIGHT, LightPayload(v)))


def _emit_accel(blocks, base, rates, script):
    rng = _np_rng(script, "accelerometer")
    for b in blocks:
        hz = b.accel_hz if b.accel_hz is not None else rates.accel_hz
        if hz <= 0:
            continue
        ts = list(_grid(b, base, 1000.0 / hz))
        if not ts:
            continue
        n = len(ts)
        # put the deviation on one horizontal axis: |a| - g == accel_dev exactly
        amp = math.sqrt((b.accel_dev + _GRAVITY) ** 2 - _GRAVITY**2)
        xs = np.round(amp * (1.0 + 0.02 * rng.standard_normal(n)), 4).tolist()
        ys = np.round(0.05 * rng.standard_normal(n), 4).tolist()
        for t, x, y in zip(ts, xs, ys):
            yield (t, 10, SensorEvent(t, Channel.ACCELEROMETER, AccelerometerPayload(x, y, _GRAVITY)))


def _emit_gyro(blocks, base, rates, script):
    rng = _np_rng(script, "gyroscope")
    scale = {"still": 0.05, "walking": 0.6, "running": 1.5, "cycling": 0.8}
    if rates.gyro_hz <= 0:
        return
    interval = 1000.0 / rates.gyro_hz
    for b in blocks:
        ts = list(_grid(b, base, interval))
        if not ts:
            continue
        n = len(ts)
        s = scale.get(b.activity, 0.1)
        vals = np.round(s * rng.standard_normal((n, 3)), 4).tolist()
        for t, (x, y, z) in zip(ts, vals):
            yield (t, 9, SensorEvent(t, Channel.GYROSCOPE, GyroscopePayload(x, y, z)))


def _emit_battery(blocks, base, rates, script):
    interval = rates.battery_interval_s * 1000
    tz_ms = script.tz_offset_minutes * _MIN
    for b in blocks:
        for t in _grid(b, base, interval):
            local_min = ((t + tz_ms) % 86_400_000) / _MIN
            level = round(max(20.0, 98.0 - 1.8 * (local_min / 60.0)), 1)
            yield (t, 4, SensorEvent(t, Channel.BATTERY, BatteryPayload(level)))


def _emit_audio(blocks, base, rates, script):
    interval = rates.audio_interval_s * 1000
    for b in blocks:
        device = "headphones" if b.audio_active else "speaker"
        for t in _grid(b, base, interval):
            yield (t, 5, SensorEvent(t, Channel.AUDIO, AudioPayload(device, b.audio_active)))


def _emit_wifi(blocks, base, script):
    prev = None
    for b in blocks:
        if b.wifi != prev:
            start = base + round(b.start_min * _MIN)
            yield (start, 6, SensorEvent(start, Channel.WIFI_STATUS, WifiStatusPayload(b.wifi)))
            prev = b.wifi


def _emit_bt_status(blocks, base, script):
    if not blocks:
        return
    start = base + round(blocks[0].start_min * _MIN)
    yield (start, 7, SensorEvent(start, Channel.BLUETOOTH_STATUS, BluetoothStatusPayload("connected")))


def _emit_bt_devices(blocks, base, rates, script):
    rng = _rng(script, "bluetooth_devices")
    interval = rates.bt_devices_interval_s * 1000
    for b in blocks:
        for t in _grid(b, base, interval):
            yield (
                t,
                8,
                SensorEvent(
                    t,
                    Channel.BLUETOOTH_DEVICES,
                    BluetoothDevicesPayload(rng.randint(0, 2), rng.randint(0, 3)),
                ),
            )


def _emit_foreground(blocks, base, rates, script):
    interval = rates.foreground_interval_s * 1000
    for b in blocks:
        if b.screen != "on" or b.foreground is None:
            continue
        name, pkg = b.foreground
        for t in _grid(b, base, interval):
            yield (t, 11, SensorEvent(t, Channel.FOREGROUND_APP, ForegroundAppPayload(pkg, name)))


def _emit_app_usage(blocks, base, rates, script):
    interval_ms = rates.app_interval_s * 1000
    for b in blocks:
        if b.screen != "on" or b.app is None:
            continue
        name, pkg = b.app
        start = base + round(b.start_min * _MIN)
        end = base + round(b.end_min * _MIN)
        k = 1
        while True:
            t = start + round(k * interval_ms)
            if t > end:
                break
            yield (t, 12, SensorEvent(t, Channel.APP_USAGE, AppUsagePayload(name, pkg, rates.app_interval_s)))
            k += 1
        remainder_ms = (end - start) - (k - 1) * interval_ms
        if remainder_ms > 500:
            dur = round(remainder_ms / 1000.0, 3)
            yield (end, 12, SensorEvent(end, Channel.APP_USAGE, AppUsagePayload(name, pkg, dur)))


def generate_events(script: ScenarioScript) -> tuple[TraceHeader, Iterator[SensorEvent], list[GroundTruthLabel]]:
    """Build the plan and return a lazy, merged event stream plus labels."""
    plan = build_plan(script)
    base = script.day_midnight_utc_ms()
    rates = script.rates
    blocks = plan.blocks
    header = TraceHeader(
        schema_version=SCHEMA_VERSION,
        user_id=script.user_id,
        start_time=base + round(plan.span_start_min * _MIN),
        end_time=base + round(plan.span_end_min * _MIN),
        tz_offset_minutes=script.tz_offset_minutes,
    )
    labels = [
        GroundTruthLabel(
            scenario_id=lab.scenario.value,
            window_start=base + round(lab.window_start_min * _MIN),
            window_end=base + round(lab.window_end_min * _MIN),
            expected_trigger_count=lab.count,
        )
        for lab in plan.labels
    ]
    streams = [
        _emit_activity(blocks, base, rates, script),
        _emit_screen(blocks, base, script),
        _emit_location(blocks, base, rates, script),
        _emit_light(blocks, base, rates, script),
        _emit_accel(blocks, base, rates, script),
        _emit_gyro(blocks, base, rates, script),
        _emit_battery(blocks, base, rates, script),
        _emit_audio(blocks, base, rates, script),
        _emit_wifi(blocks, base, script),
        _emit_bt_status(blocks, base, script),
        _emit_bt_devices(blocks, base, rates, script),
        _emit_foreground(blocks, base, rates, script),
        _emit_app_usage(blocks, base, rates, script),
    ]

    def merged() -> Iterator[SensorEvent]:
        for _, _, event in heapq.merge(*streams, key=lambda item: (item[0], item[1])):
            yield event

    return header, merged(), labels


def generate(script: ScenarioScript) -> Trace:
    """Materialize a full labeled trace (deterministic for a fixed seed)."""
    header, events, labels = generate_events(script)
    return Trace(header=header, events=list(events), labels=labels)
