"""Typed event model for the 13 sensor channels, trace file I/O, and validation.

A trace file is line-delimited JSON: a header line, one event per line in
timestamp order, and optional trailing ground-truth label lines. The same
canonical encoding (see :mod:`contexta.canonical`) is used on the wire, so
files and sync payloads share one format.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from . import canonical

__all__ = [
    "Channel",
    "Taxonomy",
    "CHANNEL_TAXONOMY",
    "SensorEvent",
    "ActivityPayload",
    "AccelerometerPayload",
    "BatteryPayload",
    "BluetoothDevicesPayload",
    "BluetoothStatusPayload",
    "GyroscopePayload",
    "LightPayload",
    "LocationPayload",
    "ScreenStatusPayload",
    "WifiStatusPayload",
    "AudioPayload",
    "AppUsagePayload",
    "ForegroundAppPayload",
    "TraceHeader",
    "GroundTruthLabel",
    "Trace",
    "ValidationReport",
    "MalformedRecord",
    "SchemaViolation",
    "ParseStats",
    "parse_event",
    "serialize_event",
    "serialize_header",
    "serialize_label",
    "validate_trace",
    "read_trace",
    "write_trace",
    "iter_trace_lines",
    "ACTIVITY_VALUES",
    "SCREEN_VALUES",
    "LINK_VALUES",
    "LOCATION_TYPES",
    "APP_USAGE_INTERVAL_S",
    "DEFAULT_TZ_OFFSET_MINUTES",
]

# Activity adds "still" beyond the recognized motion types so stillness-based
# detectors have a positive signal.
ACTIVITY_VALUES = ("walking", "running", "cycling", "still")
SCREEN_VALUES = ("on", "off", "unlocked")
LINK_VALUES = ("connected", "disconnected")
LOCATION_TYPES = ("home", "work", "restaurant", "transit", "other")

# AppUsage.duration is seconds accumulated within one reporting interval.
APP_USAGE_INTERVAL_S = 30.0

# Local-time rules need a zone; traces default to UTC+8 unless the header
# says otherwise.
DEFAULT_TZ_OFFSET_MINUTES = 480

SCHEMA_VERSION = 1


class Channel(str, Enum):
    ACTIVITY = "activity"
    ACCELEROMETER = "accelerometer"
    BATTERY = "battery"
    BLUETOOTH_DEVICES = "bluetooth_devices"
    BLUETOOTH_STATUS = "bluetooth_status"
    GYROSCOPE = "gyroscope"
    LIGHT = "light"
    LOCATION = "location"
    SCREEN_STATUS = "screen_status"
    WIFI_STATUS = "wifi_status"
    AUDIO = "audio"
    APP_USAGE = "app_usage"
    FOREGROUND_APP = "foreground_app"


class Taxonomy(str, Enum):
    HARDWARE = "hardware"
    SOFTWARE = "software"
    CONTEXT = "context"


# Three-way sensor classification. Activity is derived from hardware motion
# sensors and is classed as hardware.
CHANNEL_TAXONOMY: dict[Channel, Taxonomy] = {
    Channel.ACTIVITY: Taxonomy.HARDWARE,
    Channel.ACCELEROMETER: Taxonomy.HARDWARE,
    Channel.GYROSCOPE: Taxonomy.HARDWARE,
    Channel.LIGHT: Taxonomy.HARDWARE,
    Channel.APP_USAGE: Taxonomy.SOFTWARE,
    Channel.BATTERY: Taxonomy.SOFTWARE,
    Channel.AUDIO: Taxonomy.SOFTWARE,
    Channel.WIFI_STATUS: Taxonomy.SOFTWARE,
    Channel.BLUETOOTH_STATUS: Taxonomy.SOFTWARE,
    Channel.BLUETOOTH_DEVICES: Taxonomy.SOFTWARE,
    Channel.FOREGROUND_APP: Taxonomy.SOFTWARE,
    Channel.LOCATION: Taxonomy.CONTEXT,
    Channel.SCREEN_STATUS: Taxonomy.CONTEXT,
}


class MalformedRecord(ValueError):
    """Line is not a syntactically valid trace record."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class SchemaViolation(ValueError):
    """Record parsed but a field is missing or out of range."""

    def __init__(self, line_no: int, field_name: str, message: str):
        super().__init__(f"line {line_no}: field {field_name!r}: {message}")
        self.line_no = line_no
        self.field_name = field_name


@dataclass(slots=True)
class ActivityPayload:
    activity: str


@dataclass(slots=True)
class AccelerometerPayload:
    x: float
    y: float
    z: float


@dataclass(slots=True)
class BatteryPayload:
    level: float


@dataclass(slots=True)
class BluetoothDevicesPayload:
    pc_count: int
    phone_count: int


@dataclass(slots=True)
class BluetoothStatusPayload:
    status: str


@dataclass(slots=True)
class GyroscopePayload:
    x: float
    y: float
    z: float


@dataclass(slots=True)
class LightPayload:
    light_level: float


@dataclass(slots=True)
class LocationPayload:
    lat: float
    long: float
    location_type: str | None = None


@dataclass(slots=True)
class ScreenStatusPayload:
    screen_status: str


@dataclass(slots=True)
class WifiStatusPayload:
    status: str


@dataclass(slots=True)
class AudioPayload:
    audio_device: str
    is_active: bool


@dataclass(slots=True)
class AppUsagePayload:
    app_name: str
    package_name: str
    duration: float


@dataclass(slots=True)
class ForegroundAppPayload:
    package_name: str
    app_name: str


@dataclass(slots=True)
class SensorEvent:
    """One timestamped reading from one channel.

    ``t`` is UTC epoch milliseconds; ``payload`` is the channel-specific
    record. Taxonomy is a pure function of the channel.
    """

    t: int
    channel: Channel
    payload: object

    @property
    def taxonomy(self) -> Taxonomy:
        return CHANNEL_TAXONOMY[self.channel]


@dataclass(slots=True)
class TraceHeader:
    schema_version: int
    user_id: str
    start_time: int
    end_time: int
    tz_offset_minutes: int = DEFAULT_TZ_OFFSET_MINUTES


@dataclass(slots=True)
class GroundTruthLabel:
    """Where and how often a scenario is expected to fire (evaluation oracle)."""

    scenario_id: str
    window_start: int
    window_end: int
    expected_trigger_count: int


@dataclass
class Trace:
    header: TraceHeader
    events: list[SensorEvent]
    labels: list[GroundTruthLabel] = field(default_factory=list)


@dataclass
class ParseStats:
    """Counters accumulated while parsing; unknown fields warn, not fail."""

    unknown_fields: int = 0


@dataclass
class ValidationReport:
    ordering_violations: list[str] = field(default_factory=list)
    range_violations: list[str] = field(default_factory=list)
    channel_counts: dict[str, int] = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return not self.ordering_violations and not self.range_violations


# Wire schema: per channel, (json key, attr name, converter). Key order here
# is the canonical serialization order.
def _num(v: object) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError("expected number")
    return float(v)


def _int(v: object) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError("expected integer")
    return v


def _str(v: object) -> str:
    if not isinstance(v, str):
        raise TypeError("expected string")
    return v


def _bool(v: object) -> bool:
    if not isinstance(v, bool):
        raise TypeError("expected boolean")
    return v


_CHANNEL_SCHEMA: dict[Channel, tuple[type, tuple[tuple[str, str, object], ...]]] = {
    Channel.ACTIVITY: (ActivityPayload, (("activity", "activity", _str),)),
    Channel.ACCELEROMETER: (
        AccelerometerPayload,
        (("x", "x", _num), ("y", "y", _num), ("z", "z", _num)),
    ),
    Channel.BATTERY: (BatteryPayload, (("level", "level", _num),)),
    Channel.BLUETOOTH_DEVICES: (
        BluetoothDevicesPayload,
        (("pcCount", "pc_count", _int), ("phoneCount", "phone_count", _int)),
    ),
    Channel.BLUETOOTH_STATUS: (BluetoothStatusPayload, (("status", "status", _str),)),
    Channel.GYROSCOPE: (
        GyroscopePayload,
        (("x", "x", _num), ("y", "y", _num), ("z", "z", _num)),
    ),
    Channel.LIGHT: (LightPayload, (("lightLevel", "light_level", _num),)),
    Channel.LOCATION: (
        LocationPayload,
        (("lat", "lat", _num), ("long", "long", _num), ("locationType", "location_type", _str)),
    ),
    Channel.SCREEN_STATUS: (ScreenStatusPayload, (("screenStatus", "screen_status", _str),)),
    Channel.WIFI_STATUS: (WifiStatusPayload, (("status", "status", _str),)),
    Channel.AUDIO: (
        AudioPayload,
        (("audioDevice", "audio_device", _str), ("isActive", "is_active", _bool)),
    ),
    Channel.APP_USAGE: (
        AppUsagePayload,
        (("appName", "app_name", _str), ("packageName", "package_name", _str), ("duration", "duration", _num)),
    ),
    Channel.FOREGROUND_APP: (
        ForegroundAppPayload,
        (("packageName", "package_name", _str), ("appName", "app_name", _str)),
    ),
}

_OPTIONAL_FIELDS = {(Channel.LOCATION, "locationType")}

_CHANNEL_BY_WIRE = {c.value: c for c in Channel}


def _check_range(channel: Channel, payload: object) -> str | None:
    """Return a violation description, or None when the payload is in range."""
    if channel is Channel.BATTERY:
        if not 0.0 <= payload.level <= 100.0:
            return f"level {payload.level} out of [0,100]"
    elif channel is Channel.LIGHT:
        if payload.light_level < 0.0:
            return f"lightLevel {payload.light_level} below 0"
    elif channel is Channel.LOCATION:
        if not -90.0 <= payload.lat <= 90.0:
            return f"lat {payload.lat} out of [-90,90]"
        if not -180.0 <= payload.long <= 180.0:
            return f"long {payload.long} out of [-180,180]"
        if payload.location_type is not None and payload.location_type not in LOCATION_TYPES:
            return f"locationType {payload.location_type!r} not one of {LOCATION_TYPES}"
    elif channel is Channel.APP_USAGE:
        if not 0.0 <= payload.duration <= APP_USAGE_INTERVAL_S:
            return f"duration {payload.duration} out of [0,{APP_USAGE_INTERVAL_S:g}]"
    elif channel is Channel.ACTIVITY:
        if payload.activity not in ACTIVITY_VALUES:
            return f"activity {payload.activity!r} not one of {ACTIVITY_VALUES}"
    elif channel is Channel.SCREEN_STATUS:
        if payload.screen_status not in SCREEN_VALUES:
            return f"screenStatus {payload.screen_status!r} not one of {SCREEN_VALUES}"
    elif channel in (Channel.WIFI_STATUS, Channel.BLUETOOTH_STATUS):
        if payload.status not in LINK_VALUES:
            return f"status {payload.status!r} not one of {LINK_VALUES}"
    elif channel is Channel.BLUETOOTH_DEVICES:
        if payload.pc_count < 0 or payload.phone_count < 0:
            return "device counts must be non-negative"
    return None


def parse_event(line: str, line_no: int = 0, stats: ParseStats | None = None) -> SensorEvent:
    """Parse one trace line into a validated :class:`SensorEvent`.

    Unknown fields are ignored (counted on *stats* when given). Raises
    :class:`MalformedRecord` for bad syntax and :class:`SchemaViolation`
    for missing or out-of-range fields.
    """
    try:
        obj = canonical.loads(line)
    except ValueError as exc:
        raise MalformedRecord(line_no, f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedRecord(line_no, "record is not a JSON object")

    t = obj.get("t")
    if t is None:
        raise SchemaViolation(line_no, "t", "missing")
    if isinstance(t, bool) or not isinstance(t, int):
        raise SchemaViolation(line_no, "t", "must be integer epoch milliseconds")
    if t <= 0:
        raise SchemaViolation(line_no, "t", "must be positive")

    ch_name = obj.get("ch")
    if ch_name is None:
        raise SchemaViolation(line_no, "ch", "missing")
    channel = _CHANNEL_BY_WIRE.get(ch_name)
    if channel is None:
        raise SchemaViolation(line_no, "ch", f"unknown channel {ch_name!r}")

    payload_cls, fields = _CHANNEL_SCHEMA[channel]
    kwargs = {}
    known = {"t", "ch"}
    for key, attr, conv in fields:
        known.add(key)
        if key not in obj:
            if (channel, key) in _OPTIONAL_FIELDS:
                continue
            raise SchemaViolation(line_no, key, "missing")
        try:
            kwargs[attr] = conv(obj[key])
        except TypeError as exc:
            raise SchemaViolation(line_no, key, str(exc)) from None
    if stats is not None:
        stats.unknown_fields += sum(1 for k in obj if k not in known)

    payload = payload_cls(**kwargs)
    problem = _check_range(channel, payload)
    if problem is not None:
        raise SchemaViolation(line_no, problem.split(" ", 1)[0], problem)
    return SensorEvent(t, channel, payload)


def serialize_event(event: SensorEvent) -> str:
    """Serialize an event to its canonical trace line."""
    obj: dict[str, object] = {"t": event.t, "ch": event.channel.value}
    for key, attr, _ in _CHANNEL_SCHEMA[event.channel][1]:
        value = getattr(event.payload, attr)
        if value is None and (event.channel, key) in _OPTIONAL_FIELDS:
            continue
        obj[key] = value
    return canonical.dumps(obj)


def serialize_header(header: TraceHeader) -> str:
    return canonical.dumps(
        {
            "schemaVersion": header.schema_version,
            "userId": header.user_id,
            "startTime": header.start_time,
            "endTime": header.end_time,
            "tzOffsetMinutes": header.tz_offset_minutes,
        }
    )


def serialize_label(label: GroundTruthLabel) -> str:
    return canonical.dumps(
        {
            "label": True,
            "scenarioId": label.scenario_id,
            "windowStart": label.window_start,
            "windowEnd": label.window_end,
            "expectedTriggerCount": label.expected_trigger_count,
        }
    )


def _parse_header(line: str, line_no: int) -> TraceHeader:
    try:
        obj = canonical.loads(line)
    except ValueError as exc:
        raise MalformedRecord(line_no, f"invalid JSON header: {exc}") from None
    if not isinstance(obj, dict) or "schemaVersion" not in obj:
        raise MalformedRecord(line_no, "first line must be the trace header")
    for key in ("userId", "startTime", "endTime"):
        if key not in obj:
            raise SchemaViolation(line_no, key, "missing")
    return TraceHeader(
        schema_version=obj["schemaVersion"],
        user_id=obj["userId"],
        start_time=obj["startTime"],
        end_time=obj["endTime"],
        tz_offset_minutes=obj.get("tzOffsetMinutes", DEFAULT_TZ_OFFSET_MINUTES),
    )


def _parse_label(obj: dict, line_no: int) -> GroundTruthLabel:
    for key in ("scenarioId", "windowStart", "windowEnd", "expectedTriggerCount"):
        if key not in obj:
            raise SchemaViolation(line_no, key, "missing")
    if obj["windowStart"] >= obj["windowEnd"]:
        raise SchemaViolation(line_no, "windowStart", "label window must be non-empty")
    if obj["expectedTriggerCount"] < 1:
        raise SchemaViolation(line_no, "expectedTriggerCount", "must be positive")
    return GroundTruthLabel(
        scenario_id=obj["scenarioId"],
        window_start=obj["windowStart"],
        window_end=obj["windowEnd"],
        expected_trigger_count=obj["expectedTriggerCount"],
    )


def read_trace(source: str | Path | TextIO, stats: ParseStats | None = None) -> Trace:
    """Read a whole trace file (header, events, trailing labels)."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return read_trace(fh, stats)
    header: TraceHeader | None = None
    events: list[SensorEvent] = []
    labels: list[GroundTruthLabel] = []
    for line_no, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        if header is None:
            header = _parse_header(line, line_no)
            continue
        if '"label"' in line[:10]:
            obj = canonical.loads(line)
            if isinstance(obj, dict) and obj.get("label") is True:
                labels.append(_parse_label(obj, line_no))
                continue
        events.append(parse_event(line, line_no, stats))
    if header is None:
        raise MalformedRecord(0, "empty trace file")
    return Trace(header=header, events=events, labels=labels)


def iter_trace_lines(trace: Trace) -> Iterator[str]:
    yield serialize_header(trace.header)
    for event in trace.events:
        yield serialize_event(event)
    for label in trace.labels:
        yield serialize_label(label)


def write_trace(trace: Trace, dest: str | Path | TextIO) -> None:
    """Write a trace in canonical line format (byte-stable for a fixed trace)."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            write_trace(trace, fh)
        return
    for line in iter_trace_lines(trace):
        dest.write(line)
        dest.write("\n")


def trace_to_text(trace: Trace) -> str:
    buf = io.StringIO()
    write_trace(trace, buf)
    return buf.getvalue()


def validate_trace(trace: Trace) -> ValidationReport:
    """Check ordering and ranges; collect per-channel counts.

    The report carries findings rather than raising: a trace is valid iff
    both violation lists are empty.
    """
    report = ValidationReport()
    counts: dict[str, int] = {}
    prev_t: int | None = None
    for idx, event in enumerate(trace.events):
        counts[event.channel.value] = counts.get(event.channel.value, 0) + 1
        if prev_t is not None and event.t < prev_t:
            report.ordering_violations.append(
                f"event {idx}: timestamp {event.t} precedes previous {prev_t}"
            )
        prev_t = event.t
        if event.t < trace.header.start_time or event.t > trace.header.end_time:
            report.range_violations.append(
                f"event {idx}: timestamp {event.t} outside trace span"
            )
        problem = _check_range(event.channel, event.payload)
        if problem is not None:
            report.range_violations.append(f"event {idx}: {problem}")
    report.channel_counts = counts
    return report
