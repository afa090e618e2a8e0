"""The 16-scenario catalog: identities, categories, cooldown policy, metrics.

Only the excessive-app-usage thresholds come from published behavior
(late-night social usage exceeding two hours, screen on, stationary at
home); the remaining rule thresholds are project-defined and pinned here
so tests can assert them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

__all__ = [
    "ScenarioId",
    "ScenarioCategory",
    "CooldownPolicy",
    "RuleSpec",
    "RULE_CATALOG",
    "RULE_BY_SCENARIO",
    "AppCategory",
    "DEFAULT_APP_CATEGORIES",
    "AppCategoryMap",
]


class ScenarioCategory(str, Enum):
    EXERCISE_ACTIVITY = "exercise_activity"
    TIME_ROUTINE = "time_routine"
    LOCATION_ENVIRONMENT = "location_environment"
    USAGE_MEDIA = "usage_media"


class ScenarioId(str, Enum):
    WALKING = "walking"
    RUNNING = "running"
    INTENSE_EXERCISE = "intense_exercise"
    PROLONGED_SITTING = "prolonged_sitting"
    NAP = "nap"
    WAKE_UP = "wake_up"
    INSOMNIA = "insomnia"
    MEAL_PATTERN = "meal_pattern"
    NIGHTTIME_SUMMARY = "nighttime_summary"
    WORKPLACE_ARRIVAL = "workplace_arrival"
    OFF_WORK = "off_work"
    TRAVEL_RECOMMENDATION = "travel_recommendation"
    EXCESSIVE_APP_USAGE = "excessive_app_usage"
    MUSIC_PLAYBACK = "music_playback"
    STORY_REMINDER = "story_reminder"
    LATE_NIGHT_BINGE = "late_night_binge"


class CooldownPolicy(str, Enum):
    INTERVAL = "interval"      # minimum gap between fires
    PER_DAY = "per_day"        # at most once per local calendar date
    PER_NIGHT = "per_night"    # at most once per night (date keyed at window start)
    PER_MEAL_WINDOW = "per_meal_window"


@dataclass(frozen=True, slots=True)
class RuleSpec:
    scenario: ScenarioId
    category: ScenarioCategory
    index: int  # tie-break order when several rules fire on one event
    cooldown: CooldownPolicy
    cooldown_hours: float  # only meaningful for INTERVAL
    metric_keys: tuple[str, ...]


RULE_CATALOG: tuple[RuleSpec, ...] = (
    RuleSpec(ScenarioId.WALKING, ScenarioCategory.EXERCISE_ACTIVITY, 1,
             CooldownPolicy.INTERVAL, 2.0, ("walkingMinutes",)),
    RuleSpec(ScenarioId.RUNNING, ScenarioCategory.EXERCISE_ACTIVITY, 2,
             CooldownPolicy.INTERVAL, 2.0, ("runningMinutes",)),
    RuleSpec(ScenarioId.INTENSE_EXERCISE, ScenarioCategory.EXERCISE_ACTIVITY, 3,
             CooldownPolicy.INTERVAL, 6.0, ("intenseMinutes",)),
    RuleSpec(ScenarioId.PROLONGED_SITTING, ScenarioCategory.EXERCISE_ACTIVITY, 4,
             CooldownPolicy.INTERVAL, 1.5, ("sittingMinutes",)),
    RuleSpec(ScenarioId.NAP, ScenarioCategory.TIME_ROUTINE, 5,
             CooldownPolicy.PER_DAY, 0.0, ("screenOffMinutes", "lightLux")),
    RuleSpec(ScenarioId.WAKE_UP, ScenarioCategory.TIME_ROUTINE, 6,
             CooldownPolicy.PER_DAY, 0.0, ("sleepHours",)),
    RuleSpec(ScenarioId.INSOMNIA, ScenarioCategory.TIME_ROUTINE, 7,
             CooldownPolicy.PER_NIGHT, 0.0, ("screenOnEpisodes",)),
    RuleSpec(ScenarioId.MEAL_PATTERN, ScenarioCategory.TIME_ROUTINE, 8,
             CooldownPolicy.PER_MEAL_WINDOW, 0.0, ("dwellMinutes", "mealWindow")),
    RuleSpec(ScenarioId.NIGHTTIME_SUMMARY, ScenarioCategory.TIME_ROUTINE, 9,
             CooldownPolicy.PER_DAY, 0.0,
             ("screenOnMinutes", "activityMinutes", "usageSocialMinutes",
              "usageVideoMinutes", "usageMusicMinutes", "usageReadingMinutes",
              "usageProductivityMinutes", "usageOtherMinutes", "locationsVisited")),
    RuleSpec(ScenarioId.WORKPLACE_ARRIVAL, ScenarioCategory.LOCATION_ENVIRONMENT, 10,
             CooldownPolicy.PER_DAY, 0.0, ("dwellMinutes",)),
    RuleSpec(ScenarioId.OFF_WORK, ScenarioCategory.LOCATION_ENVIRONMENT, 11,
             CooldownPolicy.PER_DAY, 0.0, ("presenceHours",)),
    RuleSpec(ScenarioId.TRAVEL_RECOMMENDATION, ScenarioCategory.LOCATION_ENVIRONMENT, 12,
             CooldownPolicy.PER_DAY, 0.0, ("dwellMinutes", "distanceKm")),
    RuleSpec(ScenarioId.EXCESSIVE_APP_USAGE, ScenarioCategory.USAGE_MEDIA, 13,
             CooldownPolicy.PER_NIGHT, 0.0, ("cumulativeUsageMinutes",)),
    RuleSpec(ScenarioId.MUSIC_PLAYBACK, ScenarioCategory.USAGE_MEDIA, 14,
             CooldownPolicy.INTERVAL, 2.0, ("playbackMinutes",)),
    RuleSpec(ScenarioId.STORY_REMINDER, ScenarioCategory.USAGE_MEDIA, 15,
             CooldownPolicy.PER_DAY, 0.0, ("screenOnRecencyMinutes",)),
    RuleSpec(ScenarioId.LATE_NIGHT_BINGE, ScenarioCategory.USAGE_MEDIA, 16,
             CooldownPolicy.PER_NIGHT, 0.0, ("continuityMinutes",)),
)

RULE_BY_SCENARIO: dict[ScenarioId, RuleSpec] = {r.scenario: r for r in RULE_CATALOG}

SCENARIO_CATEGORY: dict[ScenarioId, ScenarioCategory] = {
    r.scenario: r.category for r in RULE_CATALOG
}


class AppCategory(str, Enum):
    SOCIAL = "social"
    VIDEO = "video"
    MUSIC = "music"
    READING = "reading"
    PRODUCTIVITY = "productivity"
    OTHER = "other"


# Package-name buckets; anything unlisted falls back to OTHER.
DEFAULT_APP_CATEGORIES: dict[str, AppCategory] = {
    "com.ss.android.ugc.aweme": AppCategory.SOCIAL,       # TikTok (Douyin)
    "com.zhiliaoapp.musically": AppCategory.SOCIAL,       # TikTok
    "com.sina.weibo": AppCategory.SOCIAL,                 # Weibo
    "com.instagram.android": AppCategory.SOCIAL,
    "com.tencent.mm": AppCategory.SOCIAL,                 # WeChat
    "com.google.android.youtube": AppCategory.VIDEO,
    "com.netflix.mediaclient": AppCategory.VIDEO,
    "tv.danmaku.bili": AppCategory.VIDEO,                 # bilibili
    "com.spotify.music": AppCategory.MUSIC,
    "com.netease.cloudmusic": AppCategory.MUSIC,
    "com.amazon.kindle": AppCategory.READING,
    "com.duokan.reader": AppCategory.READING,
    "com.microsoft.office.word": AppCategory.PRODUCTIVITY,
    "com.google.android.gm": AppCategory.PRODUCTIVITY,
    "com.tencent.wework": AppCategory.PRODUCTIVITY,
}


class AppCategoryMap:
    """Total package-name -> category mapping with an ``other`` default."""

    def __init__(self, overrides: dict[str, AppCategory] | None = None):
        self._map = dict(DEFAULT_APP_CATEGORIES)
        if overrides:
            self._map.update(overrides)

    def category(self, package_name: str) -> AppCategory:
        return self._map.get(package_name, AppCategory.OTHER)

    def packages_in(self, category: AppCategory) -> list[str]:
        return sorted(p for p, c in self._map.items() if c is category)
