"""Noise injection for robustness runs: dropout, timestamp jitter, bias."""

from __future__ import annotations

import random
from dataclasses import replace as _dc_replace

from ..sensor_model import Channel, SensorEvent, Trace
from .script import NoiseProfile

__all__ = ["perturb"]


def _biased(event: SensorEvent, bias: float) -> SensorEvent:
    p = event.payload
    ch = event.channel
    if ch is Channel.LIGHT:
        return SensorEvent(event.t, ch, _dc_replace(p, light_level=max(p.light_level + bias, 0.0)))
    if ch is Channel.BATTERY:
        return SensorEvent(event.t, ch, _dc_replace(p, level=min(max(p.level + bias, 0.0), 100.0)))
    if ch in (Channel.ACCELEROMETER, Channel.GYROSCOPE):
        return SensorEvent(event.t, ch, _dc_replace(p, x=p.x + bias, y=p.y + bias, z=p.z + bias))
    return event


def perturb(trace: Trace, noise: NoiseProfile, seed: int) -> Trace:
    """Drop and jitter events per the profile; ordering is restored afterwards.

    Labels and the header pass through unchanged; a null profile is the
    identity.
    """
    noise.validate()
    if noise.dropout_rate == 0.0 and noise.jitter_std_ms == 0.0 and not noise.sensor_bias:
        return Trace(header=trace.header, events=list(trace.events), labels=list(trace.labels))
    rng = random.Random(f"{seed}:perturb")
    out: list[SensorEvent] = []
    lo, hi = trace.header.start_time, trace.header.end_time
    for event in trace.events:
        if noise.dropout_rate > 0.0 and rng.random() < noise.dropout_rate:
            continue
        t = event.t
        if noise.jitter_std_ms > 0.0:
            delta = rng.gauss(0.0, noise.jitter_std_ms)
            delta = max(-noise.jitter_cap_ms, min(noise.jitter_cap_ms, delta))
            t = min(max(t + round(delta), lo), hi)
        bias = noise.sensor_bias.get(event.channel.value)
        if bias:
            event = _biased(event, bias)
        out.append(event if t == event.t else SensorEvent(t, event.channel, event.payload))
    out.sort(key=lambda e: e.t)
    return Trace(header=trace.header, events=out, labels=list(trace.labels))
