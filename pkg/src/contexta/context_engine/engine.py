"""Streaming scenario detection over a timestamp-ordered sensor event feed.

One :class:`ContextEngine` instance owns one user's behavioral state. All
time comes from event timestamps (never the wall clock), so identical input
streams produce identical trigger sequences. Local-time rules use the
trace's UTC offset.

Time-of-day rules (story reminder, nighttime summary, day rollover) run off
checkpoints: before an event is processed, any checkpoint at or before its
timestamp is handled, so a trigger scheduled for 23:30 fires with
``firedAt`` exactly at 23:30 local even when the surrounding events are
seconds apart.
"""

from __future__ import annotations

import datetime as _dt
import math
import threading
from collections import deque
from dataclasses import dataclass, field

from ..sensor_model import Channel, SensorEvent, Trace
from .catalog import (
    RULE_BY_SCENARIO,
    AppCategory,
    AppCategoryMap,
    CooldownPolicy,
    RuleSpec,
    ScenarioId,
)

__all__ = [
    "EngineConfig",
    "ScenarioTrigger",
    "UserContextState",
    "ContextEngine",
    "Subscription",
    "DailySummary",
    "OutOfOrderEvent",
    "UnknownChannel",
    "evaluate_trace",
]

_DAY_MS = 86_400_000
_MIN_MS = 60_000
_EPOCH_ORDINAL = _dt.date(1970, 1, 1).toordinal()


class OutOfOrderEvent(ValueError):
    def __init__(self, event_t: int, last_t: int):
        super().__init__(f"event at {event_t} precedes last ingested {last_t}")
        self.event_t = event_t
        self.last_t = last_t


class UnknownChannel(ValueError):
    pass


@dataclass(slots=True)
class ScenarioTrigger:
    """A detected scenario with its evidence window and cooldown identity."""

    scenario_id: ScenarioId
    fired_at: int
    evidence_window: tuple[int, int]
    metrics: dict[str, float]
    cooldown_key: str

    def to_wire(self) -> dict:
        return {
            "scenarioId": self.scenario_id.value,
            "firedAt": self.fired_at,
            "evidenceWindow": [self.evidence_window[0], self.evidence_window[1]],
            "metrics": self.metrics,
            "cooldownKey": self.cooldown_key,
        }

    @classmethod
    def from_wire(cls, obj: dict) -> "ScenarioTrigger":
        return cls(
            scenario_id=ScenarioId(obj["scenarioId"]),
            fired_at=obj["firedAt"],
            evidence_window=(obj["evidenceWindow"][0], obj["evidenceWindow"][1]),
            metrics=dict(obj["metrics"]),
            cooldown_key=obj["cooldownKey"],
        )


@dataclass
class EngineConfig:
    """Rule thresholds. Defaults are the pinned catalog values."""

    walking_threshold_min: float = 10.0
    walking_window_min: float = 15.0
    running_threshold_min: float = 5.0
    running_window_min: float = 10.0
    intense_bout_min: float = 20.0
    intense_rms_threshold: float = 8.0
    intense_rms_sustain_min: float = 5.0
    sitting_threshold_min: float = 90.0
    sitting_interaction_gap_min: float = 30.0  # longer gaps break the sitting bout
    nap_window: tuple[int, int] = (720, 960)
    nap_screen_off_min: float = 30.0
    nap_light_lux: float = 50.0
    wake_window: tuple[int, int] = (300, 660)
    wake_sleep_hours: float = 5.0
    insomnia_window: tuple[int, int] = (60, 300)
    insomnia_episodes: int = 3
    insomnia_gap_min: float = 10.0
    meal_windows: tuple[tuple[int, int], ...] = ((390, 540), (660, 810), (1020, 1200))
    meal_dwell_min: float = 15.0
    workplace_dwell_min: float = 10.0
    workplace_window: tuple[int, int] = (360, 720)
    off_work_presence_hours: float = 4.0
    off_work_after_minute: int = 960
    travel_dwell_min: float = 30.0
    travel_distance_km: float = 5.0
    excessive_usage_min: float = 120.0  # strict: fires above this, not at it
    excessive_window: tuple[int, int] = (0, 360)
    music_continuous_min: float = 10.0
    story_minute: int = 1260
    story_recency_min: float = 10.0
    binge_continuity_min: float = 60.0
    binge_window: tuple[int, int] = (1380, 240)  # 23:00 .. next-day 04:00
    summary_minute: int = 1410
    dwell_gap_reset_ms: int = 45_000  # 3 sampling intervals at 15 s nominal
    coord_dwell_radius_m: float = 150.0
    foreground_gap_ms: int = 90_000
    gravity: float = 9.81
    app_event_horizon_ms: int = _DAY_MS
    subscriber_queue_len: int = 256


@dataclass
class DailySummary:
    local_date: str
    screen_on_minutes: float
    activity_minutes: float
    usage_minutes: dict[str, float]
    locations_visited: int
    location_timeline: list[tuple[str, int, int]]

    def to_metrics(self) -> dict[str, float]:
        m = {
            "screenOnMinutes": round(self.screen_on_minutes, 3),
            "activityMinutes": round(self.activity_minutes, 3),
        }
        for cat in AppCategory:
            m[f"usage{cat.value.capitalize()}Minutes"] = round(
                self.usage_minutes.get(cat.value, 0.0), 3
            )
        m["locationsVisited"] = float(self.locations_visited)
        return m


class UserContextState:
    """Mutable per-user fusion state: rolling windows, dwell, accumulators."""

    __slots__ = (
        "last_t", "activity", "activity_since", "activity_episodes",
        "rms_bucket", "rms_sum", "rms_count", "rms_above_since",
        "last_light",
        "screen_on", "screen_on_since", "screen_off_since", "last_on_end",
        "last_interaction_t", "sitting_clock_start",
        "insomnia_count", "insomnia_first_t",
        "last_loc_t", "dwell_label", "dwell_start",
        "coord_anchor", "coord_n", "coord_start",
        "home_sum", "home_n", "work_sum", "work_n",
        "night_grid", "night_best", "day_grid", "day_best",
        "work_presence_ms", "work_first_t", "at_work",
        "night_social_s", "night_first_social_t",
        "app_events", "day_usage_s",
        "audio_active_since", "last_audio_t",
        "video_since", "last_video_t",
        "day_screen_on_ms", "day_active_ms", "day_visits", "day_timeline",
        "battery_level",
    )

    def __init__(self) -> None:
        self.last_t: int = -1
        self.activity: str | None = None
        self.activity_since: int = 0
        self.activity_episodes: deque[tuple[int, int, str]] = deque()
        self.rms_bucket: int = -1
        self.rms_sum: float = 0.0
        self.rms_count: int = 0
        self.rms_above_since: int | None = None
        self.last_light: float | None = None
        self.screen_on: bool = False
        self.screen_on_since: int | None = None
        self.screen_off_since: int | None = None
        self.last_on_end: int | None = None
        self.last_interaction_t: int | None = None
        self.sitting_clock_start: int | None = None
        self.insomnia_count: int = 0
        self.insomnia_first_t: int | None = None
        self.last_loc_t: int | None = None
        self.dwell_label: str | None = None
        self.dwell_start: int | None = None
        self.coord_anchor: tuple[float, float] | None = None
        self.coord_n: int = 0
        self.coord_start: int | None = None
        self.home_sum: tuple[float, float] = (0.0, 0.0)
        self.home_n: int = 0
        self.work_sum: tuple[float, float] = (0.0, 0.0)
        self.work_n: int = 0
        self.night_grid: dict[tuple[int, int], int] = {}
        self.night_best: tuple[int, tuple[int, int]] | None = None
        self.day_grid: dict[tuple[int, int], int] = {}
        self.day_best: tuple[int, tuple[int, int]] | None = None
        self.work_presence_ms: float = 0.0
        self.work_first_t: int | None = None
        self.at_work: bool = False
        self.night_social_s: float = 0.0
        self.night_first_social_t: int | None = None
        self.app_events: deque[tuple[int, str, float]] = deque()
        self.day_usage_s: dict[str, float] = {}
        self.audio_active_since: int | None = None
        self.last_audio_t: int | None = None
        self.video_since: int | None = None
        self.last_video_t: int | None = None
        self.day_screen_on_ms: float = 0.0
        self.day_active_ms: float = 0.0
        self.day_visits: int = 0
        self.day_timeline: list[tuple[str, int, int]] = []
        self.battery_level: float | None = None


class Subscription:
    """Bounded trigger queue; overflow drops the oldest and counts it."""

    def __init__(self, scenarios: frozenset[ScenarioId] | None, maxlen: int):
        self.scenarios = scenarios
        self.maxlen = maxlen
        self.dropped = 0
        self._queue: deque[ScenarioTrigger] = deque()
        self._lock = threading.Lock()

    def _offer(self, trigger: ScenarioTrigger) -> None:
        if self.scenarios is not None and trigger.scenario_id not in self.scenarios:
            return
        with self._lock:
            if len(self._queue) >= self.maxlen:
                self._queue.popleft()
                self.dropped += 1
            self._queue.append(trigger)

    def pop(self) -> ScenarioTrigger | None:
        with self._lock:
            return self._queue.popleft() if self._queue else None

    def drain(self) -> list[ScenarioTrigger]:
        with self._lock:
            out = list(self._queue)
            self._queue.clear()
            return out

    def __len__(self) -> int:
        return len(self._queue)


def _day_iso(day: int) -> str:
    return _dt.date.fromordinal(day + _EPOCH_ORDINAL).isoformat()


def _dist_m(lat1: float, long1: float, lat2: float, long2: float) -> float:
    # Equirectangular approximation; fine at the city scale the rules need.
    kx = 111_320.0 * math.cos(math.radians((lat1 + lat2) * 0.5))
    dx = (long2 - long1) * kx
    dy = (lat2 - lat1) * 110_540.0
    return math.hypot(dx, dy)


class ContextEngine:
    """Per-user rule engine: ingest events, emit triggers, fan out to subscribers."""

    def __init__(
        self,
        tz_offset_minutes: int = 480,
        config: EngineConfig | None = None,
        categories: AppCategoryMap | None = None,
    ):
        self.cfg = config or EngineConfig()
        self.categories = categories or AppCategoryMap()
        self.tz_ms = tz_offset_minutes * _MIN_MS
        self._gravity = self.cfg.gravity
        self.st = UserContextState()
        self._last_fired: dict[ScenarioId, int] = {}
        self._fired_keys: set[str] = set()
        self._latch: dict[ScenarioId, bool] = {s: False for s in ScenarioId}
        self._pending: list[tuple[int, ScenarioTrigger]] = []
        self._subs: list[Subscription] = []
        self._sub_lock = threading.Lock()
        # checkpoint schedule within a local day, ascending
        cps = sorted([(0, "day"), (self.cfg.story_minute, "story"), (self.cfg.summary_minute, "summary")])
        self._cp_schedule = cps
        self._cp_day: int | None = None
        self._cp_idx = 0
        self._next_cp_lm: int = 1 << 62
        self._handlers = {
            Channel.ACTIVITY: self._on_activity,
            Channel.ACCELEROMETER: self._on_accel,
            Channel.GYROSCOPE: self._on_gyro,
            Channel.LIGHT: self._on_light,
            Channel.LOCATION: self._on_location,
            Channel.SCREEN_STATUS: self._on_screen,
            Channel.WIFI_STATUS: self._on_noop,
            Channel.BLUETOOTH_STATUS: self._on_noop,
            Channel.BLUETOOTH_DEVICES: self._on_noop,
            Channel.AUDIO: self._on_audio,
            Channel.APP_USAGE: self._on_app_usage,
            Channel.FOREGROUND_APP: self._on_foreground,
            Channel.BATTERY: self._on_battery,
        }

    # -- public API ------------------------------------------------------

    def ingest(self, event: SensorEvent) -> list[ScenarioTrigger]:
        """Advance state by one event; return triggers fired by it (catalog order)."""
        t = event.t
        st = self.st
        if t < st.last_t:
            raise OutOfOrderEvent(t, st.last_t)
        st.last_t = t
        lm = t + self.tz_ms
        if self._cp_day is None:
            self._init_checkpoints(lm)
        if lm >= self._next_cp_lm:
            self._run_checkpoints(lm)
        handler = self._handlers.get(event.channel)
        if handler is None:
            raise UnknownChannel(f"no handler for channel {event.channel!r}")
        handler(t, lm, event.payload)
        if not self._pending:
            return []
        return self._finalize()

    def subscribe(
        self,
        scenarios: set[ScenarioId] | frozenset[ScenarioId] | None = None,
        maxlen: int | None = None,
    ) -> Subscription:
        """Register a bounded trigger queue; None filter means all scenarios."""
        sub = Subscription(
            frozenset(scenarios) if scenarios is not None else None,
            maxlen or self.cfg.subscriber_queue_len,
        )
        with self._sub_lock:
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._sub_lock:
            if sub in self._subs:
                self._subs.remove(sub)

    def window_usage(self, category: AppCategory, window: tuple[int, int]) -> float:
        """Cumulative app-usage minutes for *category* within [start, end]."""
        start, end = window
        if start > end:
            raise ValueError("window start after end")
        cat = category.value
        total = 0.0
        for t, c, dur in self.st.app_events:
            if c == cat and start <= t <= end:
                total += dur
        return total / 60.0

    def dwell(self, label: str) -> float | None:
        """Continuous minutes at *label* up to the last location event, if current."""
        st = self.st
        if st.dwell_label != label or st.dwell_start is None or st.last_loc_t is None:
            return None
        return (st.last_loc_t - st.dwell_start) / _MIN_MS

    def daily_summary(self, local_date: str | None = None) -> DailySummary:
        """Aggregates for the current local day, up to the last ingested event."""
        st = self.st
        if st.last_t < 0:
            return DailySummary(local_date or "", 0.0, 0.0, {}, 0, [])
        lm = st.last_t + self.tz_ms
        day = lm // _DAY_MS
        iso = _day_iso(day)
        if local_date is not None and local_date != iso:
            raise ValueError(f"only the current local day ({iso}) is retained")
        screen_ms = st.day_screen_on_ms
        if st.screen_on and st.screen_on_since is not None:
            screen_ms += st.last_t - max(st.screen_on_since, (day * _DAY_MS) - self.tz_ms)
        active_ms = st.day_active_ms
        if st.activity is not None and st.activity != "still":
            active_ms += st.last_t - max(st.activity_since, (day * _DAY_MS) - self.tz_ms)
        usage = {cat.value: st.day_usage_s.get(cat.value, 0.0) / 60.0 for cat in AppCategory}
        timeline = list(st.day_timeline)
        if st.dwell_label is not None and st.dwell_start is not None:
            timeline.append((st.dwell_label, st.dwell_start, st.last_t))
        return DailySummary(
            local_date=iso,
            screen_on_minutes=screen_ms / _MIN_MS,
            activity_minutes=active_ms / _MIN_MS,
            usage_minutes=usage,
            locations_visited=len(timeline),
            location_timeline=timeline,
        )

    # -- trigger emission --------------------------------------------------

    def _edge(self, scenario: ScenarioId, value: bool) -> bool:
        was = self._latch[scenario]
        self._latch[scenario] = value
        return value and not was

    def _propose(
        self,
        spec: RuleSpec,
        fired_at: int,
        ev_start: int,
        ev_end: int,
        metrics: dict[str, float],
        cal_key: str | None = None,
    ) -> bool:
        if spec.cooldown is CooldownPolicy.INTERVAL:
            last = self._last_fired.get(spec.scenario)
            if last is not None and fired_at - last < spec.cooldown_hours * 3_600_000:
                return False
            key = spec.scenario.value
            self._last_fired[spec.scenario] = fired_at
        else:
            key = f"{spec.scenario.value}:{cal_key}"
            if key in self._fired_keys:
                return False
            self._fired_keys.add(key)
        trigger = ScenarioTrigger(
            scenario_id=spec.scenario,
            fired_at=fired_at,
            evidence_window=(min(ev_start, fired_at), min(ev_end, fired_at)),
            metrics={k: round(float(v), 3) for k, v in metrics.items()},
            cooldown_key=key,
        )
        self._pending.append((spec.index, trigger))
        return True

    def _finalize(self) -> list[ScenarioTrigger]:
        self._pending.sort(key=lambda p: (p[1].fired_at, p[0]))
        out = [trig for _, trig in self._pending]
        self._pending.clear()
        if self._subs:
            with self._sub_lock:
                for sub in self._subs:
                    for trig in out:
                        sub._offer(trig)
        return out

    # -- checkpoints -------------------------------------------------------

    def _init_checkpoints(self, lm: int) -> None:
        day = lm // _DAY_MS
        self._cp_day = day
        self._cp_idx = 0
        while self._cp_idx < len(self._cp_schedule) and self._cp_schedule[self._cp_idx][0] * _MIN_MS < lm - day * _DAY_MS:
            self._cp_idx += 1
        self._set_next_cp()

    def _set_next_cp(self) -> None:
        if self._cp_idx >= len(self._cp_schedule):
            self._cp_day += 1
            self._cp_idx = 0
        self._next_cp_lm = self._cp_day * _DAY_MS + self._cp_schedule[self._cp_idx][0] * _MIN_MS

    def _run_checkpoints(self, lm: int) -> None:
        while self._next_cp_lm <= lm:
            cp_lm = self._next_cp_lm
            kind = self._cp_schedule[self._cp_idx][1]
            cp_t = cp_lm - self.tz_ms
            if kind == "day":
                self._roll_day(cp_t, cp_lm)
            elif kind == "story":
                self._check_story(cp_t, cp_lm)
            elif kind == "summary":
                self._fire_summary(cp_t, cp_lm)
            self._cp_idx += 1
            self._set_next_cp()

    def _roll_day(self, cp_t: int, cp_lm: int) -> None:
        # Ongoing screen-on / activity periods are not touched here; daily
        # accounting clamps them to the day start instead, so rule state
        # (bout starts, off-gaps) survives midnight intact.
        st = self.st
        st.day_screen_on_ms = 0.0
        st.day_active_ms = 0.0
        st.day_usage_s = {}
        st.day_timeline = []
        st.day_visits = 1 if st.dwell_label is not None else 0
        st.work_presence_ms = 0.0
        st.work_first_t = None
        st.night_social_s = 0.0
        st.night_first_social_t = None
        st.insomnia_count = 0
        st.insomnia_first_t = None
        self._latch[ScenarioId.INSOMNIA] = False

    def _check_story(self, cp_t: int, cp_lm: int) -> None:
        st = self.st
        cfg = self.cfg
        recency: float | None = None
        if st.screen_on:
            recency = 0.0
        elif st.last_on_end is not None and cp_t - st.last_on_end <= cfg.story_recency_min * _MIN_MS:
            recency = (cp_t - st.last_on_end) / _MIN_MS
        if recency is None:
            return
        day_key = _day_iso(cp_lm // _DAY_MS)
        self._propose(
            RULE_BY_SCENARIO[ScenarioId.STORY_REMINDER],
            cp_t,
            cp_t - int(cfg.story_recency_min * _MIN_MS),
            cp_t,
            {"screenOnRecencyMinutes": recency},
            cal_key=day_key,
        )

    def _fire_summary(self, cp_t: int, cp_lm: int) -> None:
        day = cp_lm // _DAY_MS
        summary = self.daily_summary()
        day_start_t = day * _DAY_MS - self.tz_ms
        self._propose(
            RULE_BY_SCENARIO[ScenarioId.NIGHTTIME_SUMMARY],
            cp_t,
            day_start_t,
            cp_t,
            summary.to_metrics(),
            cal_key=_day_iso(day),
        )

    # -- channel handlers ----------------------------------------------------

    def _on_noop(self, t: int, lm: int, payload) -> None:
        pass

    def _on_battery(self, t: int, lm: int, payload) -> None:
        self.st.battery_level = payload.level

    def _on_gyro(self, t: int, lm: int, payload) -> None:
        pass

    def _on_accel(self, t: int, lm: int, payload) -> None:
        st = self.st
        bucket = t // 1000
        if bucket != st.rms_bucket:
            if st.rms_count:
                self._close_rms_bucket(t)
            st.rms_bucket = bucket
            st.rms_sum = 0.0
            st.rms_count = 0
        dev = math.sqrt(payload.x * payload.x + payload.y * payload.y + payload.z * payload.z) - self._gravity
        st.rms_sum += dev * dev
        st.rms_count += 1

    def _close_rms_bucket(self, now_t: int) -> None:
        st = self.st
        cfg = self.cfg
        rms = math.sqrt(st.rms_sum / st.rms_count)
        bucket_start = st.rms_bucket * 1000
        if rms > cfg.intense_rms_threshold:
            if st.rms_above_since is None:
                st.rms_above_since = bucket_start
            sustained = (bucket_start + 1000) - st.rms_above_since >= cfg.intense_rms_sustain_min * _MIN_MS
            if self._edge(ScenarioId.INTENSE_EXERCISE, sustained or self._bout_is_intense(now_t)):
                self._propose(
                    RULE_BY_SCENARIO[ScenarioId.INTENSE_EXERCISE],
                    now_t,
                    st.rms_above_since,
                    now_t,
                    {"intenseMinutes": (now_t - st.rms_above_since) / _MIN_MS},
                )
        else:
            st.rms_above_since = None
            if not self._bout_is_intense(now_t):
                self._latch[ScenarioId.INTENSE_EXERCISE] = False

    def _bout_is_intense(self, t: int) -> bool:
        st = self.st
        return (
            st.activity == "running"
            and t - st.activity_since >= self.cfg.intense_bout_min * _MIN_MS
        )

    def _on_activity(self, t: int, lm: int, payload) -> None:
        st = self.st
        cfg = self.cfg
        kind = payload.activity
        if kind != st.activity:
            if st.activity is not None:
                st.activity_episodes.append((st.activity_since, t, st.activity))
                if st.activity != "still":
                    day_start_t = (lm // _DAY_MS) * _DAY_MS - self.tz_ms
                    st.day_active_ms += t - max(st.activity_since, day_start_t)
            # any posture change resets the sitting clock
            st.sitting_clock_start = None
            st.activity = kind
            st.activity_since = t
        # evict old episodes
        horizon = t - int((cfg.walking_window_min + 5.0) * _MIN_MS)
        eps = st.activity_episodes
        while eps and eps[0][1] < horizon:
            eps.popleft()
        # walking / running accumulation inside their sliding windows
        walk_ms = self._activity_in_window(t, "walking", cfg.walking_window_min)
        if self._edge(ScenarioId.WALKING, walk_ms >= cfg.walking_threshold_min * _MIN_MS):
            self._propose(
                RULE_BY_SCENARIO[ScenarioId.WALKING],
                t,
                t - int(cfg.walking_window_min * _MIN_MS),
                t,
                {"walkingMinutes": walk_ms / _MIN_MS},
            )
        run_ms = self._activity_in_window(t, "running", cfg.running_window_min)
        if self._edge(ScenarioId.RUNNING, run_ms >= cfg.running_threshold_min * _MIN_MS):
            self._propose(
                RULE_BY_SCENARIO[ScenarioId.RUNNING],
                t,
                t - int(cfg.running_window_min * _MIN_MS),
                t,
                {"runningMinutes": run_ms / _MIN_MS},
            )
        if self._bout_is_intense(t):
            if self._edge(ScenarioId.INTENSE_EXERCISE, True):
                self._propose(
                    RULE_BY_SCENARIO[ScenarioId.INTENSE_EXERCISE],
                    t,
                    st.activity_since,
                    t,
                    {"intenseMinutes": (t - st.activity_since) / _MIN_MS},
                )
        elif st.rms_above_since is None:
            self._latch[ScenarioId.INTENSE_EXERCISE] = False
        self._eval_sitting(t, lm)
        self._eval_nap(t, lm)

    def _activity_in_window(self, t: int, kind: str, window_min: float) -> int:
        st = self.st
        start = t - int(window_min * _MIN_MS)
        total = 0
        for ep_start, ep_end, ep_kind in st.activity_episodes:
            if ep_kind == kind and ep_end > start:
                total += min(ep_end, t) - max(ep_start, start)
        if st.activity == kind:
            total += t - max(st.activity_since, start)
        return total

    def _on_light(self, t: int, lm: int, payload) -> None:
        self.st.last_light = payload.light_level
        self._eval_nap(t, lm)

    def _eval_nap(self, t: int, lm: int) -> None:
        st = self.st
        cfg = self.cfg
        minute = (lm % _DAY_MS) // _MIN_MS
        lo, hi = cfg.nap_window
        ok = (
            lo <= minute < hi
            and not st.screen_on
            and st.screen_off_since is not None
            and t - st.screen_off_since >= cfg.nap_screen_off_min * _MIN_MS
            and st.activity == "still"
            and st.last_light is not None
            and st.last_light < cfg.nap_light_lux
        )
        if self._edge(ScenarioId.NAP, ok):
            self._propose(
                RULE_BY_SCENARIO[ScenarioId.NAP],
                t,
                st.screen_off_since,
                t,
                {
                    "screenOffMinutes": (t - st.screen_off_since) / _MIN_MS,
                    "lightLux": st.last_light,
                },
                cal_key=_day_iso(lm // _DAY_MS),
            )

    def _on_screen(self, t: int, lm: int, payload) -> None:
        st = self.st
        cfg = self.cfg
        status = payload.screen_status
        turning_on = status in ("on", "unlocked")
        if turning_on:
            # a long lull between interactions ends the sitting bout
            stale = (
                st.last_interaction_t is None
                or t - st.last_interaction_t > cfg.sitting_interaction_gap_min * _MIN_MS
            )
            if st.activity == "still" and (st.sitting_clock_start is None or stale):
                st.sitting_clock_start = t
            st.last_interaction_t = t
        if turning_on and not st.screen_on:
            # on-transition: wake-up and insomnia look at the preceding off gap
            off_since = st.screen_off_since
            minute = (lm % _DAY_MS) // _MIN_MS
            if off_since is not None:
                off_ms = t - off_since
                wlo, whi = cfg.wake_window
                if wlo <= minute < whi and off_ms >= cfg.wake_sleep_hours * 3_600_000:
                    self._propose(
                        RULE_BY_SCENARIO[ScenarioId.WAKE_UP],
                        t,
                        off_since,
                        t,
                        {"sleepHours": off_ms / 3_600_000},
                        cal_key=_day_iso(lm // _DAY_MS),
                    )
                ilo, ihi = cfg.insomnia_window
                if ilo <= minute < ihi and off_ms >= cfg.insomnia_gap_min * _MIN_MS:
                    st.insomnia_count += 1
                    if st.insomnia_first_t is None:
                        st.insomnia_first_t = t
                    if st.insomnia_count >= cfg.insomnia_episodes and self._edge(ScenarioId.INSOMNIA, True):
                        self._propose(
                            RULE_BY_SCENARIO[ScenarioId.INSOMNIA],
                            t,
                            st.insomnia_first_t,
                            t,
                            {"screenOnEpisodes": float(st.insomnia_count)},
                            cal_key=_day_iso(lm // _DAY_MS),
                        )
            st.screen_on = True
            st.screen_on_since = t
            st.screen_off_since = None
        elif not turning_on and st.screen_on:
            st.screen_on = False
            st.screen_off_since = t
            st.last_on_end = t
            if st.screen_on_since is not None:
                day_start_t = (lm // _DAY_MS) * _DAY_MS - self.tz_ms
                st.day_screen_on_ms += t - max(st.screen_on_since, day_start_t)
            st.screen_on_since = None
        elif not turning_on and st.screen_off_since is None:
            st.screen_off_since = t
        self._eval_sitting(t, lm)
        self._eval_nap(t, lm)
        self._eval_excessive(t, lm)

    def _eval_sitting(self, t: int, lm: int) -> None:
        st = self.st
        cfg = self.cfg
        thr = cfg.sitting_threshold_min * _MIN_MS
        ok = (
            st.sitting_clock_start is not None
            and st.screen_on
            and st.activity == "still"
            and t - st.sitting_clock_start >= thr
            and st.last_interaction_t is not None
            and t - st.last_interaction_t <= cfg.sitting_interaction_gap_min * _MIN_MS
            and st.dwell_start is not None
            and t - st.dwell_start >= thr
        )
        if self._edge(ScenarioId.PROLONGED_SITTING, ok):
            self._propose(
                RULE_BY_SCENARIO[ScenarioId.PROLONGED_SITTING],
                t,
                st.sitting_clock_start,
                t,
                {"sittingMinutes": (t - st.sitting_clock_start) / _MIN_MS},
            )

    def _on_location(self, t: int, lm: int, payload) -> None:
        st = self.st
        cfg = self.cfg
        label = payload.location_type
        gap = st.last_loc_t is not None and t - st.last_loc_t > cfg.dwell_gap_reset_ms
        departure_from_work = st.at_work and label != "work"
        # label dwell
        if label != st.dwell_label or gap or st.dwell_start is None:
            if label is not None and (label != st.dwell_label or gap):
                if st.dwell_label is not None and st.dwell_start is not None and st.last_loc_t is not None:
                    st.day_timeline.append((st.dwell_label, st.dwell_start, st.last_loc_t))
                st.day_visits += 1
            st.dwell_label = label
            st.dwell_start = t
        # coordinate dwell around a drifting centroid: the anchor migrates to
        # the stay's true center, so sensor noise near the radius boundary
        # cannot break a genuine stay
        if (
            st.coord_anchor is None
            or gap
            or _dist_m(payload.lat, payload.long, st.coord_anchor[0], st.coord_anchor[1]) > cfg.coord_dwell_radius_m
        ):
            st.coord_anchor = (payload.lat, payload.long)
            st.coord_n = 1
            st.coord_start = t
        else:
            st.coord_n += 1
            c_lat, c_long = st.coord_anchor
            st.coord_anchor = (
                c_lat + (payload.lat - c_lat) / st.coord_n,
                c_long + (payload.long - c_long) / st.coord_n,
            )
        # anchors
        if label == "home":
            st.home_sum = (st.home_sum[0] + payload.lat, st.home_sum[1] + payload.long)
            st.home_n += 1
        elif label == "work":
            st.work_sum = (st.work_sum[0] + payload.lat, st.work_sum[1] + payload.long)
            st.work_n += 1
        elif label is None:
            self._update_grid(lm, payload.lat, payload.long)
        # work presence accumulation
        if label == "work":
            if st.at_work and st.last_loc_t is not None and not gap:
                st.work_presence_ms += t - st.last_loc_t
            if st.work_first_t is None:
                st.work_first_t = t
            st.at_work = True
        else:
            st.at_work = False
        st.last_loc_t = t
        minute = (lm % _DAY_MS) // _MIN_MS
        day_key = _day_iso(lm // _DAY_MS)
        # meal pattern
        meal_idx = None
        for idx, (wlo, whi) in enumerate(cfg.meal_windows):
            if wlo <= minute < whi:
                meal_idx = idx
                break
        dwell_min = (t - st.dwell_start) / _MIN_MS if st.dwell_start is not None else 0.0
        meal_ok = (
            meal_idx is not None
            and st.dwell_label == "restaurant"
            and dwell_min >= cfg.meal_dwell_min
        )
        if self._edge(ScenarioId.MEAL_PATTERN, meal_ok):
            self._propose(
                RULE_BY_SCENARIO[ScenarioId.MEAL_PATTERN],
                t,
                st.dwell_start,
                t,
                {"dwellMinutes": dwell_min, "mealWindow": float(meal_idx)},
                cal_key=f"{day_key}:w{meal_idx}",
            )
        # workplace arrival
        wlo, whi = cfg.workplace_window
        work_ok = (
            st.dwell_label == "work"
            and dwell_min >= cfg.workplace_dwell_min
            and wlo <= minute < whi
        )
        if self._edge(ScenarioId.WORKPLACE_ARRIVAL, work_ok):
            self._propose(
                RULE_BY_SCENARIO[ScenarioId.WORKPLACE_ARRIVAL],
                t,
                st.dwell_start,
                t,
                {"dwellMinutes": dwell_min},
                cal_key=day_key,
            )
        # off work: departure after enough cumulative presence
        if (
            departure_from_work
            and st.work_presence_ms >= cfg.off_work_presence_hours * 3_600_000
            and minute >= cfg.off_work_after_minute
        ):
            self._propose(
                RULE_BY_SCENARIO[ScenarioId.OFF_WORK],
                t,
                st.work_first_t if st.work_first_t is not None else t,
                t,
                {"presenceHours": st.work_presence_ms / 3_600_000},
                cal_key=day_key,
            )
        # travel recommendation
        travel_ok = False
        distance_km = 0.0
        if st.coord_start is not None and (t - st.coord_start) >= cfg.travel_dwell_min * _MIN_MS:
            anchor = st.coord_anchor
            home = self._anchor("home")
            work = self._anchor("work")
            if home is not None:
                d_home = _dist_m(anchor[0], anchor[1], home[0], home[1])
                d_work = (
                    _dist_m(anchor[0], anchor[1], work[0], work[1])
                    if work is not None
                    else float("inf")
                )
                threshold = cfg.travel_distance_km * 1000.0
                if d_home > threshold and d_work > threshold:
                    travel_ok = True
                    distance_km = min(d_home, d_work) / 1000.0
        if self._edge(ScenarioId.TRAVEL_RECOMMENDATION, travel_ok):
            self._propose(
                RULE_BY_SCENARIO[ScenarioId.TRAVEL_RECOMMENDATION],
                t,
                st.coord_start,
                t,
                {
                    "dwellMinutes": (t - st.coord_start) / _MIN_MS,
                    "distanceKm": distance_km,
                },
                cal_key=day_key,
            )
        self._eval_sitting(t, lm)
        self._eval_excessive(t, lm)

    def _update_grid(self, lm: int, lat: float, long: float) -> None:
        st = self.st
        minute = (lm % _DAY_MS) // _MIN_MS
        cell = (int(lat * 1000), int(long * 1000))
        if minute >= 1320 or minute < 360:
            n = st.night_grid.get(cell, 0) + 1
            st.night_grid[cell] = n
            if st.night_best is None or n > st.night_best[0]:
                st.night_best = (n, cell)
        elif 540 <= minute < 1020:
            n = st.day_grid.get(cell, 0) + 1
            st.day_grid[cell] = n
            if st.day_best is None or n > st.day_best[0]:
                st.day_best = (n, cell)

    def _anchor(self, which: str) -> tuple[float, float] | None:
        st = self.st
        if which == "home":
            if st.home_n:
                return (st.home_sum[0] / st.home_n, st.home_sum[1] / st.home_n)
            if st.night_best is not None:
                cell = st.night_best[1]
                return (cell[0] / 1000.0, cell[1] / 1000.0)
        else:
            if st.work_n:
                return (st.work_sum[0] / st.work_n, st.work_sum[1] / st.work_n)
            if st.day_best is not None:
                cell = st.day_best[1]
                return (cell[0] / 1000.0, cell[1] / 1000.0)
        return None

    def _on_audio(self, t: int, lm: int, payload) -> None:
        st = self.st
        cfg = self.cfg
        if payload.is_active:
            if (
                st.audio_active_since is None
                or (st.last_audio_t is not None and t - st.last_audio_t > cfg.dwell_gap_reset_ms)
            ):
                st.audio_active_since = t
        else:
            st.audio_active_since = None
        st.last_audio_t = t
        ok = (
            st.audio_active_since is not None
            and t - st.audio_active_since >= cfg.music_continuous_min * _MIN_MS
        )
        if self._edge(ScenarioId.MUSIC_PLAYBACK, ok):
            self._propose(
                RULE_BY_SCENARIO[ScenarioId.MUSIC_PLAYBACK],
                t,
                st.audio_active_since,
                t,
                {"playbackMinutes": (t - st.audio_active_since) / _MIN_MS},
            )

    def _on_app_usage(self, t: int, lm: int, payload) -> None:
        st = self.st
        cfg = self.cfg
        cat = self.categories.category(payload.package_name)
        dur = payload.duration
        st.day_usage_s[cat.value] = st.day_usage_s.get(cat.value, 0.0) + dur
        st.app_events.append((t, cat.value, dur))
        horizon = t - cfg.app_event_horizon_ms
        while st.app_events and st.app_events[0][0] < horizon:
            st.app_events.popleft()
        if cat is AppCategory.SOCIAL:
            minute = (lm % _DAY_MS) // _MIN_MS
            lo, hi = cfg.excessive_window
            if lo <= minute < hi:
                st.night_social_s += dur
                if st.night_first_social_t is None:
                    st.night_first_social_t = t
        self._eval_excessive(t, lm)

    def _eval_excessive(self, t: int, lm: int) -> None:
        st = self.st
        cfg = self.cfg
        usage_min = st.night_social_s / 60.0
        ok = (
            usage_min > cfg.excessive_usage_min
            and st.screen_on
            and st.dwell_label == "home"
        )
        if self._edge(ScenarioId.EXCESSIVE_APP_USAGE, ok):
            self._propose(
                RULE_BY_SCENARIO[ScenarioId.EXCESSIVE_APP_USAGE],
                t,
                st.night_first_social_t if st.night_first_social_t is not None else t,
                t,
                {"cumulativeUsageMinutes": usage_min},
                cal_key=_day_iso(lm // _DAY_MS),
            )

    def _on_foreground(self, t: int, lm: int, payload) -> None:
        st = self.st
        cfg = self.cfg
        cat = self.categories.category(payload.package_name)
        if cat is AppCategory.VIDEO:
            if st.video_since is None or (
                st.last_video_t is not None and t - st.last_video_t > cfg.foreground_gap_ms
            ):
                st.video_since = t
            st.last_video_t = t
        else:
            st.video_since = None
        minute = (lm % _DAY_MS) // _MIN_MS
        win_start_min, win_end_min = cfg.binge_window
        ok = False
        continuity = 0.0
        night_day = None
        if st.video_since is not None:
            day = lm // _DAY_MS
            if minute >= win_start_min:
                w_start = day * _DAY_MS + win_start_min * _MIN_MS - self.tz_ms
                night_day = day
            elif minute < win_end_min:
                w_start = (day - 1) * _DAY_MS + win_start_min * _MIN_MS - self.tz_ms
                night_day = day - 1
            else:
                w_start = None
            if w_start is not None:
                continuity = (t - max(st.video_since, w_start)) / _MIN_MS
                ok = continuity >= cfg.binge_continuity_min
        if self._edge(ScenarioId.LATE_NIGHT_BINGE, ok):
            self._propose(
                RULE_BY_SCENARIO[ScenarioId.LATE_NIGHT_BINGE],
                t,
                st.video_since,
                t,
                {"continuityMinutes": continuity},
                cal_key=_day_iso(night_day),
            )


def evaluate_trace(
    trace: Trace,
    config: EngineConfig | None = None,
    categories: AppCategoryMap | None = None,
) -> list[ScenarioTrigger]:
    """Batch evaluation: fold a whole trace through a fresh engine."""
    engine = ContextEngine(
        tz_offset_minutes=trace.header.tz_offset_minutes,
        config=config,
        categories=categories,
    )
    out: list[ScenarioTrigger] = []
    for event in trace.events:
        out.extend(engine.ingest(event))
    return out
