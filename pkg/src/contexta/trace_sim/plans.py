"""Behavior timelines: background day skeletons plus focal scenario overlays.

A plan is a list of non-overlapping :class:`Block` rows on a local-minute
axis. Focal builders carve their window (plus a deterministic "approach"
prefix that anchors the relevant rule clocks) out of the skeleton, so the
minute a detector fires is computable analytically from the segment alone.
Ground-truth labels come from those formulas, never from running the
engine, which keeps them an independent oracle.

Block boundaries carry no randomness; seeds only perturb sample values, so
expected trigger counts are identical across seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..context_engine import ScenarioId
from .script import InvalidScript, ScenarioScript, Segment

__all__ = [
    "Block",
    "PlanLabel",
    "Plan",
    "build_plan",
    "HOME",
    "WORK",
    "RESTAURANT",
    "TRAVEL_SPOT",
]

# Fixed geography (lat, long). The restaurant sits ~700 m from home; the
# travel spot is >5 km from both anchors.
HOME = (39.0800, 117.2000)
WORK = (39.1100, 117.2400)
RESTAURANT = (39.0840, 117.2060)
TRAVEL_SPOT = (39.2000, 117.3500)

_APP_PRODUCTIVITY = ("Mail", "com.google.android.gm")
_APP_READING = ("Kindle", "com.amazon.kindle")
_APP_SOCIAL = ("Weibo", "com.sina.weibo")
_APP_VIDEO = ("YouTube", "com.google.android.youtube")


@dataclass(slots=True)
class Block:
    """One stretch of constant behavior on the local-minute axis."""

    start_min: float
    end_min: float
    activity: str = "still"
    screen: str = "off"  # "on" | "off"
    light: float = 150.0
    label: str | None = "home"
    coords: tuple[float, float] = HOME
    move_to: tuple[float, float] | None = None  # transit: interpolate coords
    app: tuple[str, str] | None = None          # (appName, packageName) while on
    foreground: tuple[str, str] | None = None
    audio_active: bool = False
    accel_dev: float = 0.4  # target gravity-removed magnitude, m/s^2
    interactions_every_s: float = 600.0
    accel_hz: float | None = None  # per-block rate override
    wifi: str = "connected"


@dataclass(slots=True)
class PlanLabel:
    scenario: ScenarioId
    window_start_min: float
    window_end_min: float
    count: int = 1


@dataclass
class Plan:
    blocks: list[Block]
    labels: list[PlanLabel] = field(default_factory=list)
    span_start_min: float = 0.0
    span_end_min: float = 1440.0


def _sleep(a: float, b: float) -> Block:
    return Block(a, b, activity="still", screen="off", light=5.0)


def _walk(a: float, b: float, light: float = 150.0) -> Block:
    return Block(a, b, activity="walking", screen="off", light=light, accel_dev=2.0)


def _session(a: float, b: float, app=_APP_PRODUCTIVITY, light: float = 150.0, **kw) -> Block:
    return Block(a, b, activity="still", screen="on", light=light, app=app,
                 foreground=app, **kw)


def _rest(a: float, b: float, light: float = 120.0, **kw) -> Block:
    return Block(a, b, activity="still", screen="off", light=light, **kw)


def _cycle(start: float, end: float, light: float = 150.0, label: str | None = "home",
           coords=HOME, app=_APP_PRODUCTIVITY) -> list[Block]:
    """[50 min session, 2 min walk, 28 min rest] cycles; tail truncated.

    The walk straight after each session resets the posture clock, so the
    sitting detector never reaches its threshold inside background filler.
    """
    out: list[Block] = []
    t = start
    while t < end:
        s_end = min(t + 50, end)
        b = _session(t, s_end, app=app, light=light)
        b.label, b.coords = label, coords
        out.append(b)
        if s_end >= end:
            break
        w_end = min(s_end + 2, end)
        w = _walk(s_end, w_end, light=light)
        w.label, w.coords = label, coords
        out.append(w)
        if w_end >= end:
            break
        r_end = min(w_end + 28, end)
        r = _rest(w_end, r_end, light=max(light * 0.8, 60.0))
        r.label, r.coords = label, coords
        out.append(r)
        t = r_end
    return out


def _evening_tail() -> list[Block]:
    """Evening blocks with the screen dark across the 21:00 story slot."""
    return [
        _session(1222, 1247),
        _walk(1247, 1249),
        _rest(1249, 1292),            # screen off 20:49-21:32
        _session(1292, 1342, app=_APP_READING),
        _walk(1342, 1344),
        _rest(1344, 1372),
        _session(1372, 1395, app=_APP_READING, light=80.0),
        _sleep(1395, 1440),
    ]


def _homebound_skeleton() -> list[Block]:
    # The 04:30 phone check keeps the pre-dawn screen-off run under 5 h so
    # the background morning never looks like a wake-up event.
    return [
        _sleep(0, 270),
        Block(270, 273, screen="on", light=10.0, app=_APP_READING,
              foreground=_APP_READING),
        _sleep(273, 420),
        _walk(420, 422, light=80.0),
        *_cycle(422, 1222),
        *_evening_tail(),
    ]


def _commute(a: float, b: float, src, dst) -> list[Block]:
    """Short walk then a moving ride; too brief and mobile to read as travel."""
    walk_end = min(a + 2, b)
    out = [Block(a, walk_end, activity="walking", screen="off", light=2000.0,
                 label="transit", coords=src, accel_dev=2.0, wifi="disconnected")]
    if walk_end < b:
        out.append(Block(walk_end, b, activity="still", screen="off", light=1500.0,
                         label="transit", coords=src, move_to=dst, accel_dev=1.0,
                         wifi="disconnected"))
    return out


def _workday_skeleton() -> list[Block]:
    """Weekday with an afternoon-only office visit: arrives 13:00, leaves
    16:30, so workplace arrival (06:00-12:00 window) and off-work (>= 4 h
    presence) both see realistic negatives."""
    return [
        _sleep(0, 270),
        Block(270, 273, screen="on", light=10.0, app=_APP_READING,
              foreground=_APP_READING),
        _sleep(273, 420),
        _walk(420, 422, light=80.0),
        *_cycle(422, 760),
        *_commute(760, 780, HOME, WORK),
        *_cycle(780, 990, light=300.0, label="work", coords=WORK),
        *_commute(990, 1008, WORK, HOME),
        *_cycle(1008, 1222),
        *_evening_tail(),
    ]


def _carve(blocks: list[Block], start: float, end: float) -> list[Block]:
    """Remove [start,end) from the timeline, splitting boundary blocks."""
    out: list[Block] = []
    for b in blocks:
        if b.end_min <= start or b.start_min >= end:
            out.append(b)
            continue
        if b.start_min < start:
            head = replace(b)
            head.end_min = start
            head.move_to = None
            out.append(head)
        if b.end_min > end:
            tail = replace(b)
            tail.start_min = end
            tail.move_to = None
            out.append(tail)
    return out


def _overlay(blocks: list[Block], new_blocks: list[Block]) -> list[Block]:
    if not new_blocks:
        return blocks
    start = min(b.start_min for b in new_blocks)
    end = max(b.end_min for b in new_blocks)
    carved = _carve(blocks, start, end)
    return sorted(carved + new_blocks, key=lambda b: b.start_min)


# -- focal builders -----------------------------------------------------------
# Each returns (overlay blocks, labels). Label windows pad the analytic fire
# minute by two minutes on each side.

# extra minutes of trace needed before/after a segment for its approach and
# return blocks (used when the script does not pin the span explicitly)
_MARGINS = {
    ScenarioId.WALKING.value: (20, 10),
    ScenarioId.RUNNING.value: (20, 10),
    ScenarioId.INTENSE_EXERCISE.value: (20, 10),
    ScenarioId.PROLONGED_SITTING.value: (10, 10),
    ScenarioId.NAP.value: (40, 10),
    ScenarioId.WAKE_UP.value: (310, 10),
    ScenarioId.INSOMNIA.value: (20, 10),
    ScenarioId.MEAL_PATTERN.value: (10, 10),
    ScenarioId.NIGHTTIME_SUMMARY.value: (30, 10),
    ScenarioId.WORKPLACE_ARRIVAL.value: (25, 10),
    ScenarioId.OFF_WORK.value: (25, 25),
    ScenarioId.TRAVEL_RECOMMENDATION.value: (35, 35),
    ScenarioId.EXCESSIVE_APP_USAGE.value: (10, 10),
    ScenarioId.MUSIC_PLAYBACK.value: (10, 10),
    ScenarioId.STORY_REMINDER.value: (10, 10),
    ScenarioId.LATE_NIGHT_BINGE.value: (10, 10),
    "background": (0, 0),
}


def _pad(scenario: ScenarioId, fire_min: float, count: int = 1) -> PlanLabel:
    return PlanLabel(scenario, fire_min - 2.0, fire_min + 2.0, count)


def _exercise_overlay(seg: Segment, kind: str, dev: float, accel_hz: float | None):
    a, b = seg.start_offset_min, seg.end_min
    approach = _rest(a - 16, a, light=150.0)
    body = Block(a, b, activity=kind, screen="off", light=5000.0, label=None,
                 coords=HOME, move_to=(HOME[0] + 0.0030, HOME[1] + 0.0035),
                 accel_dev=dev, wifi="disconnected", accel_hz=accel_hz)
    return [approach, body]


def _build_walking(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    if seg.duration_min < 11:
        raise InvalidScript("walking segment must last at least 11 minutes")
    blocks = _exercise_overlay(seg, "walking", 2.0, None)
    return blocks, [_pad(ScenarioId.WALKING, seg.start_offset_min + 10.0)]


def _build_running(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    if not 6 <= seg.duration_min < 20:
        raise InvalidScript("running segment must last 6-19 minutes")
    blocks = _exercise_overlay(seg, "running", 5.0, None)
    return blocks, [_pad(ScenarioId.RUNNING, seg.start_offset_min + 5.0)]


def _build_intense(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    if seg.duration_min < 7:
        raise InvalidScript("intense_exercise segment must last at least 7 minutes")
    blocks = _exercise_overlay(seg, "running", 11.0, accel_hz=50.0)
    labels = [
        _pad(ScenarioId.RUNNING, seg.start_offset_min + 5.0),
        _pad(ScenarioId.INTENSE_EXERCISE, seg.start_offset_min + 5.0),
    ]
    return blocks, labels


def _build_sitting(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    if seg.duration_min < 93:
        raise InvalidScript("prolonged_sitting segment must last at least 93 minutes")
    a, b = seg.start_offset_min, seg.end_min
    approach = _walk(a - 2, a)
    body = _session(a, b)
    return [approach, body], [_pad(ScenarioId.PROLONGED_SITTING, a + 90.0)]


def _build_nap(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    a, b = seg.start_offset_min, seg.end_min
    fire = a + 28.0  # the screen goes dark when the pre-nap walk starts at a-2
    if not (720 <= (a - 2) % 1440 and fire % 1440 < 960 and seg.duration_min >= 35):
        raise InvalidScript("nap segment must sit inside 12:00-16:00 and last >= 35 min")
    lead = _session(a - 32, a - 2)
    approach = _walk(a - 2, a)
    body = Block(a, b, activity="still", screen="off", light=5.0)
    return [lead, approach, body], [_pad(ScenarioId.NAP, fire)]


def _build_wake_up(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    a = seg.start_offset_min
    if not 300 <= a % 1440 < 660:
        raise InvalidScript("wake_up segment must start between 05:00 and 11:00")
    if a - span[0] < 305:
        raise InvalidScript("wake_up needs >= 5h of trace before the segment")
    if seg.duration_min > 80:
        raise InvalidScript("wake_up segment must stay under 80 minutes")
    night = _sleep(span[0], a)
    body = _session(a, seg.end_min, light=120.0)
    after_walk = _walk(seg.end_min, seg.end_min + 2, light=120.0)
    return [night, body, after_walk], [_pad(ScenarioId.WAKE_UP, a)]


def _build_insomnia(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    a = seg.start_offset_min
    offsets = (0.0, 40.0, 95.0)  # episode starts; off gaps 32 and 49 min
    fire = a + offsets[2]
    if not (75 <= a % 1440 <= 190 and seg.duration_min >= 103):
        raise InvalidScript("insomnia episodes must all fall inside 01:00-05:00")
    blocks = [_sleep(a - 15, a)]
    for i, off in enumerate(offsets):
        ep_start = a + off
        ep_end = ep_start + (8.0, 6.0, 7.0)[i]
        blocks.append(Block(ep_start, ep_end, screen="on", light=10.0,
                            app=_APP_READING, foreground=_APP_READING))
        nxt = a + offsets[i + 1] if i + 1 < len(offsets) else seg.end_min
        blocks.append(_sleep(ep_end, nxt))
    return blocks, [_pad(ScenarioId.INSOMNIA, fire)]


def _build_meal(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    a, b = seg.start_offset_min, seg.end_min
    fire = a + 15.0
    minute = fire % 1440
    if not any(lo <= minute < hi for lo, hi in ((390, 540), (660, 810), (1020, 1200))):
        raise InvalidScript("meal segment +15 min must land inside a meal window")
    if not 18 <= seg.duration_min <= 85:
        raise InvalidScript("meal segment must last 18-85 minutes")
    approach = _commute(a - 5, a, HOME, RESTAURANT)
    body = Block(a, b, activity="still", screen="on", light=250.0,
                 label="restaurant", coords=RESTAURANT, app=_APP_PRODUCTIVITY,
                 foreground=_APP_PRODUCTIVITY)
    back = _commute(b, b + 5, RESTAURANT, HOME)
    return approach + [body] + back, [_pad(ScenarioId.MEAL_PATTERN, fire)]


def _build_summary_marker(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    # fires off the 23:30 checkpoint; the span-wide auto-label covers it
    return [], []


def _build_workplace(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    a, b = seg.start_offset_min, seg.end_min
    fire = a + 10.0
    if not 360 <= fire % 1440 < 720:
        raise InvalidScript("workplace segment +10 min must land inside 06:00-12:00")
    if not 13 <= seg.duration_min < 240:
        raise InvalidScript("workplace segment must last 13-239 minutes")
    approach = _commute(a - 18, a, HOME, WORK)
    body_blocks = _cycle(a, b, light=300.0, label="work", coords=WORK)
    return approach + body_blocks, [_pad(ScenarioId.WORKPLACE_ARRIVAL, fire)]


def _build_off_work(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    a, b = seg.start_offset_min, seg.end_min
    if seg.duration_min < 245:
        raise InvalidScript("off_work segment needs >= 245 minutes of presence")
    if b % 1440 < 960:
        raise InvalidScript("off_work departure must fall after 16:00")
    labels = [_pad(ScenarioId.OFF_WORK, b)]
    if 360 <= (a + 10.0) % 1440 < 720:
        labels.append(_pad(ScenarioId.WORKPLACE_ARRIVAL, a + 10.0))
    approach = _commute(a - 18, a, HOME, WORK)
    body_blocks = _cycle(a, b, light=300.0, label="work", coords=WORK)
    back = _commute(b, b + 18, WORK, HOME)
    return approach + body_blocks + back, labels


def _build_travel(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    a, b = seg.start_offset_min, seg.end_min
    fire = a + 30.0
    if not 35 <= seg.duration_min <= 85:
        raise InvalidScript("travel segment must last 35-85 minutes")
    approach = _commute(a - 30, a, HOME, TRAVEL_SPOT)
    body = Block(a, b, activity="still", screen="on", light=800.0, label="other",
                 coords=TRAVEL_SPOT, app=_APP_PRODUCTIVITY,
                 foreground=_APP_PRODUCTIVITY, wifi="disconnected")
    back = _commute(b, b + 30, TRAVEL_SPOT, HOME)
    return approach + [body] + back, [_pad(ScenarioId.TRAVEL_RECOMMENDATION, fire)]


def _build_excessive(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    a = seg.start_offset_min
    usage_min = float(seg.params.get("usageMinutes", seg.duration_min))
    end = a + usage_min
    fire = a + 120.5  # strict >120 crossing with 30 s usage reports
    if (a % 1440) + usage_min >= 358:
        raise InvalidScript("excessive usage must stay inside the 00:00-06:00 window")
    blocks = [_walk(a - 2, a, light=10.0)]
    cursor = a
    # brief pacing bouts keep the sitting detector's clock from maturing
    for stretch_at in (a + 75.0, a + 155.0):
        if stretch_at + 2 >= end:
            break
        blocks.append(Block(cursor, stretch_at, screen="on", light=15.0,
                            app=_APP_SOCIAL, foreground=_APP_SOCIAL))
        blocks.append(Block(stretch_at, stretch_at + 2, activity="walking",
                            screen="on", light=15.0, app=_APP_SOCIAL,
                            foreground=_APP_SOCIAL, accel_dev=2.0))
        cursor = stretch_at + 2
    if cursor < end:
        blocks.append(Block(cursor, end, screen="on", light=15.0,
                            app=_APP_SOCIAL, foreground=_APP_SOCIAL))
    labels = []
    if usage_min >= 120.5:
        labels.append(_pad(ScenarioId.EXCESSIVE_APP_USAGE, fire))
    return blocks, labels


def _build_music(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    a, b = seg.start_offset_min, seg.end_min
    if not 12 <= seg.duration_min <= 85:
        raise InvalidScript("music segment must last 12-85 minutes")
    body = Block(a, b, activity="still", screen="off", light=120.0,
                 audio_active=True)
    return [body], [_pad(ScenarioId.MUSIC_PLAYBACK, a + 10.0)]


def _build_story(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    a, b = seg.start_offset_min, seg.end_min
    story_minute = 1260.0 + (a // 1440) * 1440
    if not a + 1 <= story_minute <= b - 1:
        raise InvalidScript("story segment must bracket the 21:00 story time")
    if seg.duration_min > 85:
        raise InvalidScript("story segment must stay under 85 minutes")
    body = _session(a, b)
    after_walk = _walk(b, b + 2)
    return [body, after_walk], [_pad(ScenarioId.STORY_REMINDER, story_minute)]


def _build_binge(seg: Segment, script: ScenarioScript, span: tuple[float, float]):
    a, b = seg.start_offset_min, seg.end_min
    day_base = (a // 1440) * 1440
    window_start = day_base + 1380.0 if a % 1440 >= 240 else day_base - 60.0
    effective = max(a, window_start)
    fire = effective + 60.0
    if b - fire < 3:
        raise InvalidScript("binge segment too short to reach 60 min of continuity")
    blocks = []
    cursor = a
    for stretch_at in (a + 55.0, a + 115.0):  # pacing, same as excessive
        if stretch_at + 2 >= b:
            break
        blocks.append(Block(cursor, stretch_at, screen="on", light=80.0,
                            app=_APP_VIDEO, foreground=_APP_VIDEO))
        blocks.append(Block(stretch_at, stretch_at + 2, activity="walking",
                            screen="on", light=80.0, app=_APP_VIDEO,
                            foreground=_APP_VIDEO, accel_dev=2.0))
        cursor = stretch_at + 2
    if cursor < b:
        blocks.append(Block(cursor, b, screen="on", light=80.0,
                            app=_APP_VIDEO, foreground=_APP_VIDEO))
    return blocks, [_pad(ScenarioId.LATE_NIGHT_BINGE, fire)]


_BUILDERS = {
    ScenarioId.WALKING.value: _build_walking,
    ScenarioId.RUNNING.value: _build_running,
    ScenarioId.INTENSE_EXERCISE.value: _build_intense,
    ScenarioId.PROLONGED_SITTING.value: _build_sitting,
    ScenarioId.NAP.value: _build_nap,
    ScenarioId.WAKE_UP.value: _build_wake_up,
    ScenarioId.INSOMNIA.value: _build_insomnia,
    ScenarioId.MEAL_PATTERN.value: _build_meal,
    ScenarioId.NIGHTTIME_SUMMARY.value: _build_summary_marker,
    ScenarioId.WORKPLACE_ARRIVAL.value: _build_workplace,
    ScenarioId.OFF_WORK.value: _build_off_work,
    ScenarioId.TRAVEL_RECOMMENDATION.value: _build_travel,
    ScenarioId.EXCESSIVE_APP_USAGE.value: _build_excessive,
    ScenarioId.MUSIC_PLAYBACK.value: _build_music,
    ScenarioId.STORY_REMINDER.value: _build_story,
    ScenarioId.LATE_NIGHT_BINGE.value: _build_binge,
}


def build_plan(script: ScenarioScript) -> Plan:
    """Expand a script into blocks plus analytic ground-truth labels."""
    script.validate()

    # span first: builders need it (wake-up's night rest spans back to it)
    if script.span_start_min is not None:
        span_start = float(script.span_start_min)
    elif script.segments:
        span_start = max(
            0.0,
            min(s.start_offset_min - _MARGINS[s.scenario][0] for s in script.segments),
        )
    else:
        span_start = 0.0
    if script.span_end_min is not None:
        span_end = float(script.span_end_min)
    elif script.segments:
        span_end = max(s.end_min + _MARGINS[s.scenario][1] for s in script.segments)
    else:
        span_end = 1440.0
    if span_end <= span_start:
        raise InvalidScript("derived span is empty")
    span = (span_start, span_end)

    skeleton_fn = _homebound_skeleton if script.skeleton == "homebound" else _workday_skeleton
    blocks: list[Block] = []
    for d in range(int(span_start // 1440), int(span_end // 1440) + 1):
        for blk in skeleton_fn():
            shifted = replace(blk)
            shifted.start_min += d * 1440
            shifted.end_min += d * 1440
            blocks.append(shifted)

    labels: list[PlanLabel] = []
    for seg in script.segments:
        if seg.scenario == "background":
            continue
        overlay_blocks, seg_labels = _BUILDERS[seg.scenario](seg, script, span)
        blocks = _overlay(blocks, overlay_blocks)
        labels.extend(seg_labels)

    # a summary fires whenever the span crosses a 23:30; label it on focal
    # traces so the trigger multiset always matches the labels
    if any(s.scenario != "background" for s in script.segments):
        d = 0
        while d * 1440 + 1410 < span_end:
            cp = d * 1440 + 1410
            if span_start <= cp and not any(
                lab.scenario is ScenarioId.NIGHTTIME_SUMMARY
                and lab.window_start_min <= cp <= lab.window_end_min
                for lab in labels
            ):
                labels.append(PlanLabel(ScenarioId.NIGHTTIME_SUMMARY, cp - 2.0, cp + 2.0))
            d += 1

    clipped: list[Block] = []
    for b in sorted(blocks, key=lambda x: x.start_min):
        if b.end_min <= span_start or b.start_min >= span_end:
            continue
        nb = replace(b)
        nb.start_min = max(nb.start_min, span_start)
        nb.end_min = min(nb.end_min, span_end)
        clipped.append(nb)
    labels = [
        lab for lab in labels
        if span_start <= (lab.window_start_min + lab.window_end_min) / 2 <= span_end
    ]
    return Plan(blocks=clipped, labels=labels, span_start_min=span_start,
                span_end_min=span_end)
