"""Per-scenario rule semantics on hand-constructed event streams."""

from __future__ import annotations

import pytest

from contexta.context_engine import ScenarioId

from conftest import (
    ev_accel,
    ev_activity,
    ev_app,
    ev_audio,
    ev_foreground,
    ev_light,
    ev_location,
    ev_screen,
    lm,
    make_engine,
)

VIDEO = "com.google.android.youtube"
READER = "com.amazon.kindle"


def fires(engine, events, scenario):
    out = []
    for event in events:
        out.extend(engine.ingest(event))
    return [t for t in out if t.scenario_id is scenario]


def activity_run(start_min: float, minutes: float, kind: str, step_s: int = 60):
    events = []
    steps = int(minutes * 60 / step_s)
    for i in range(steps + 1):
        events.append(ev_activity(lm(start_min) + i * step_s * 1000, kind))
    return events


class TestWalkingRunning:
    def test_walking_fires_at_ten_cumulative_minutes(self):
        engine = make_engine()
        hits = fires(engine, activity_run(600, 12, "walking"), ScenarioId.WALKING)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(610)
        assert hits[0].metrics["walkingMinutes"] == pytest.approx(10.0)

    def test_interrupted_walking_still_accumulates_within_window(self):
        engine = make_engine()
        events = activity_run(600, 6, "walking")
        events += activity_run(606, 2, "still")
        events += activity_run(608, 6, "walking")
        hits = fires(engine, events, ScenarioId.WALKING)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(612)  # 6 + 2(gap) + 4 -> 10 walked minutes

    def test_short_bouts_never_reach_threshold(self):
        engine = make_engine()
        events = []
        for k in range(6):  # 2-minute bouts, 20 minutes apart
            events += activity_run(500 + k * 20, 2, "walking")
            events += activity_run(502 + k * 20, 18, "still")
        assert fires(engine, events, ScenarioId.WALKING) == []

    def test_running_cooldown_two_hours(self):
        engine = make_engine()
        first = fires(engine, activity_run(480, 7, "running"), ScenarioId.RUNNING)
        engine.ingest(ev_activity(lm(487.5), "still"))
        second = fires(engine, activity_run(540, 7, "running"), ScenarioId.RUNNING)  # 1 h later
        engine.ingest(ev_activity(lm(547.5), "still"))
        third = fires(engine, activity_run(620, 7, "running"), ScenarioId.RUNNING)  # >2 h after first
        assert len(first) == 1 and second == [] and len(third) == 1


class TestIntenseExercise:
    def test_rms_path_fires_after_five_sustained_minutes(self):
        engine = make_engine()
        events = []
        amp = 19.0  # |a| - g well above the 8 m/s^2 bar
        for i in range(0, 10 * 60 * 6 + 1):  # 6 min at 10 Hz
            events.append(ev_accel(lm(600) + i * 100, amp))
        hits = fires(engine, events, ScenarioId.INTENSE_EXERCISE)
        assert len(hits) == 1
        assert abs(hits[0].fired_at - lm(605)) <= 2_000

    def test_moderate_rms_stays_silent(self):
        engine = make_engine()
        events = [ev_accel(lm(600) + i * 100, 11.0) for i in range(10 * 60 * 6)]
        assert fires(engine, events, ScenarioId.INTENSE_EXERCISE) == []

    def test_long_running_bout_fires_without_accel(self):
        engine = make_engine()
        hits = fires(engine, activity_run(600, 22, "running"), ScenarioId.INTENSE_EXERCISE)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(620)


class TestProlongedSitting:
    def _sitting_stream(self, start: float, minutes: float):
        # location every 30 s: dwell tracking resets on gaps above 45 s
        events = [ev_activity(lm(start) - 120_000, "walking"),
                  ev_activity(lm(start), "still"),
                  ev_screen(lm(start), "on")]
        for j in range(int(minutes * 2) + 1):
            events.append(ev_location(lm(start) + j * 30_000, "home"))
        for i in range(1, int(minutes) + 1):
            t = lm(start) + i * 60_000
            events.append(ev_activity(t, "still"))
            if i % 10 == 0:
                events.append(ev_screen(t, "unlocked"))
        events.sort(key=lambda e: e.t)
        return events

    def test_fires_at_ninety_minutes(self):
        engine = make_engine()
        hits = fires(engine, self._sitting_stream(540, 95), ScenarioId.PROLONGED_SITTING)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(630)

    def test_posture_change_resets_clock(self):
        engine = make_engine()
        events = self._sitting_stream(540, 60) + self._sitting_stream(604, 60)
        assert fires(engine, events, ScenarioId.PROLONGED_SITTING) == []

    def test_interaction_lull_resets_clock(self):
        engine = make_engine()
        events = [ev_activity(lm(540), "still"), ev_screen(lm(540), "on")]
        # screen stays on but untouched for 95 minutes, then one touch
        for j in range(97 * 2 + 1):
            events.append(ev_location(lm(540) + j * 30_000, "home"))
        for i in range(1, 96):
            t = lm(540) + i * 60_000
            events.append(ev_activity(t, "still"))
        events.append(ev_screen(lm(636), "unlocked"))
        events.append(ev_activity(lm(637), "still"))
        events.sort(key=lambda e: e.t)
        assert fires(engine, events, ScenarioId.PROLONGED_SITTING) == []


class TestNap:
    def _quiet_afternoon(self, lux: float):
        events = [ev_screen(lm(750), "off"), ev_activity(lm(750), "still")]
        for i in range(1, 36):
            t = lm(750) + i * 60_000
            events.append(ev_light(t, lux))
            events.append(ev_activity(t, "still"))
        return events

    def test_dark_still_screen_off_fires_at_thirty_minutes(self):
        engine = make_engine()
        hits = fires(engine, self._quiet_afternoon(5.0), ScenarioId.NAP)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(780)
        assert hits[0].metrics["screenOffMinutes"] == pytest.approx(30.0)

    def test_lit_room_is_not_a_nap(self):
        engine = make_engine()
        assert fires(engine, self._quiet_afternoon(200.0), ScenarioId.NAP) == []

    def test_same_conditions_at_night_do_not_fire(self):
        engine = make_engine()
        events = [ev_screen(lm(120), "off"), ev_activity(lm(120), "still")]
        for i in range(1, 36):
            t = lm(120) + i * 60_000
            events.append(ev_light(t, 5.0))
        assert fires(engine, events, ScenarioId.NAP) == []


class TestWakeUp:
    def test_first_screen_on_after_five_hours_off(self):
        engine = make_engine()
        events = [ev_screen(lm(120), "off"), ev_screen(lm(450), "on")]
        hits = fires(engine, events, ScenarioId.WAKE_UP)
        assert len(hits) == 1
        assert hits[0].metrics["sleepHours"] == pytest.approx(5.5)

    def test_short_night_does_not_fire(self):
        engine = make_engine()
        events = [ev_screen(lm(230), "off"), ev_screen(lm(450), "on")]
        assert fires(engine, events, ScenarioId.WAKE_UP) == []

    def test_only_first_qualifying_wake_fires(self):
        engine = make_engine()
        events = [ev_screen(lm(60), "off"), ev_screen(lm(420), "on"),
                  ev_screen(lm(425), "off"), ev_screen(lm(600), "on")]
        hits = fires(engine, events, ScenarioId.WAKE_UP)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(420)


class TestInsomnia:
    def _episodes(self, starts, durations=None):
        durations = durations or [5] * len(starts)
        events = [ev_screen(lm(30), "off")]
        for start, dur in zip(starts, durations):
            events.append(ev_screen(lm(start), "on"))
            events.append(ev_screen(lm(start + dur), "off"))
        return events

    def test_three_separated_episodes_fire(self):
        engine = make_engine()
        hits = fires(engine, self._episodes([90, 130, 185]), ScenarioId.INSOMNIA)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(185)
        assert hits[0].metrics["screenOnEpisodes"] == 3.0

    def test_two_episodes_do_not_fire(self):
        engine = make_engine()
        assert fires(engine, self._episodes([90, 150]), ScenarioId.INSOMNIA) == []

    def test_rapid_checks_without_gaps_do_not_count(self):
        engine = make_engine()
        # gaps of 3-4 minutes never satisfy the ten-minute separation
        hits = fires(engine, self._episodes([90, 98, 106, 114, 122]), ScenarioId.INSOMNIA)
        assert hits == []


class TestMealPattern:
    def _restaurant(self, start: float, minutes: int):
        return [
            ev_location(lm(start) + i * 5_000, "restaurant", 39.084, 117.206)
            for i in range(minutes * 12 + 1)
        ]

    def test_lunch_window_dwell_fires(self):
        engine = make_engine()
        hits = fires(engine, self._restaurant(700, 20), ScenarioId.MEAL_PATTERN)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(715)
        assert hits[0].metrics["dwellMinutes"] == pytest.approx(15.0)

    def test_mid_afternoon_dwell_is_silent(self):
        engine = make_engine()
        assert fires(engine, self._restaurant(860, 40), ScenarioId.MEAL_PATTERN) == []

    def test_one_per_meal_window(self):
        engine = make_engine()
        events = self._restaurant(700, 20) + self._restaurant(730, 25)
        hits = fires(engine, events, ScenarioId.MEAL_PATTERN)
        assert len(hits) == 1


class TestNighttimeSummary:
    def test_fires_exactly_at_2330_with_metrics(self):
        engine = make_engine()
        events = [ev_screen(lm(1380), "on")]
        events += [ev_light(lm(1380) + i * 60_000, 80.0) for i in range(1, 45)]
        hits = fires(engine, events, ScenarioId.NIGHTTIME_SUMMARY)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(1410)
        assert hits[0].metrics["screenOnMinutes"] == pytest.approx(30.0, abs=0.2)
        assert "usageSocialMinutes" in hits[0].metrics

    def test_trace_ending_before_2330_never_fires(self):
        engine = make_engine()
        events = [ev_light(lm(1380) + i * 60_000, 80.0) for i in range(25)]
        assert fires(engine, events, ScenarioId.NIGHTTIME_SUMMARY) == []


class TestWorkplaceAndOffWork:
    def _at_work(self, start: float, minutes: int):
        return [
            ev_location(lm(start) + i * 5_000, "work", 39.11, 117.24)
            for i in range(minutes * 12 + 1)
        ]

    def test_arrival_fires_after_ten_minutes_in_window(self):
        engine = make_engine()
        hits = fires(engine, self._at_work(545, 15), ScenarioId.WORKPLACE_ARRIVAL)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(555)

    def test_afternoon_arrival_is_silent(self):
        engine = make_engine()
        assert fires(engine, self._at_work(780, 30), ScenarioId.WORKPLACE_ARRIVAL) == []

    def test_off_work_requires_four_hours_and_late_departure(self):
        engine = make_engine()
        events = self._at_work(540, 300)  # 09:00 - 14:00
        events.append(ev_location(lm(841), "transit", 39.10, 117.23))  # leave at 14:01
        assert fires(engine, events, ScenarioId.OFF_WORK) == []

        engine2 = make_engine()
        events2 = self._at_work(540, 450)  # 09:00 - 16:30
        events2.append(ev_location(lm(991), "transit", 39.10, 117.23))
        hits = fires(engine2, events2, ScenarioId.OFF_WORK)
        assert len(hits) == 1
        assert hits[0].metrics["presenceHours"] == pytest.approx(7.5, abs=0.1)


class TestTravel:
    def test_far_dwell_fires_after_thirty_minutes(self):
        engine = make_engine()
        events = [ev_location(lm(500) + i * 5_000, "home") for i in range(60)]
        events += [
            ev_location(lm(840) + i * 5_000, "other", 39.20, 117.35)
            for i in range(35 * 12 + 1)
        ]
        hits = fires(engine, events, ScenarioId.TRAVEL_RECOMMENDATION)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(870)
        assert hits[0].metrics["distanceKm"] > 5.0

    def test_near_home_dwell_is_silent(self):
        engine = make_engine()
        events = [ev_location(lm(500) + i * 5_000, "home") for i in range(60)]
        events += [
            ev_location(lm(840) + i * 5_000, "other", 39.084, 117.206)  # ~700 m away
            for i in range(40 * 12)
        ]
        assert fires(engine, events, ScenarioId.TRAVEL_RECOMMENDATION) == []


class TestMusic:
    def test_ten_continuous_minutes_fire(self):
        engine = make_engine()
        events = [ev_audio(lm(600) + i * 5_000, True) for i in range(15 * 12)]
        hits = fires(engine, events, ScenarioId.MUSIC_PLAYBACK)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(610)

    def test_inactive_break_resets_continuity(self):
        engine = make_engine()
        events = [ev_audio(lm(600) + i * 5_000, True) for i in range(8 * 12)]
        events.append(ev_audio(lm(608) + 5_000, False))
        events += [ev_audio(lm(609) + i * 5_000, True) for i in range(8 * 12)]
        assert fires(engine, events, ScenarioId.MUSIC_PLAYBACK) == []


class TestStoryReminder:
    def test_screen_on_at_story_time_fires(self):
        engine = make_engine()
        events = [ev_screen(lm(1250), "on"), ev_light(lm(1261), 100.0)]
        hits = fires(engine, events, ScenarioId.STORY_REMINDER)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(1260)

    def test_recently_off_screen_still_counts(self):
        engine = make_engine()
        events = [ev_screen(lm(1240), "on"), ev_screen(lm(1255), "off"),
                  ev_light(lm(1262), 100.0)]
        hits = fires(engine, events, ScenarioId.STORY_REMINDER)
        assert len(hits) == 1
        assert hits[0].metrics["screenOnRecencyMinutes"] == pytest.approx(5.0)

    def test_long_dark_screen_is_silent(self):
        engine = make_engine()
        events = [ev_screen(lm(1230), "on"), ev_screen(lm(1245), "off"),
                  ev_light(lm(1262), 100.0)]
        assert fires(engine, events, ScenarioId.STORY_REMINDER) == []


class TestLateNightBinge:
    def _video_run(self, start: float, minutes: int, pkg: str = VIDEO):
        return [
            ev_foreground(lm(start) + i * 30_000, pkg)
            for i in range(minutes * 2 + 1)
        ]

    def test_hour_of_video_in_window_fires(self):
        engine = make_engine()
        hits = fires(engine, self._video_run(1390, 70), ScenarioId.LATE_NIGHT_BINGE)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(1450)
        assert hits[0].metrics["continuityMinutes"] == pytest.approx(60.0)

    def test_reading_app_is_not_binging(self):
        engine = make_engine()
        assert fires(engine, self._video_run(1390, 80, READER), ScenarioId.LATE_NIGHT_BINGE) == []

    def test_evening_video_before_window_counts_only_overlap(self):
        engine = make_engine()
        # video from 22:10; the window opens at 23:00, so 60 in-window minutes
        # complete at 00:00
        hits = fires(engine, self._video_run(1330, 115), ScenarioId.LATE_NIGHT_BINGE)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(1440)

    def test_foreground_gap_breaks_continuity(self):
        engine = make_engine()
        events = self._video_run(1390, 40)
        events += self._video_run(1433, 70)  # 3-minute hole restarts the clock
        hits = fires(engine, events, ScenarioId.LATE_NIGHT_BINGE)
        assert len(hits) == 1
        assert hits[0].fired_at == lm(1433) + 60 * 60_000
