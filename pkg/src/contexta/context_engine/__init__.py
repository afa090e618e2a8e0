"""Scenario detection: the 16-rule catalog and the streaming context engine."""

from .catalog import (
    DEFAULT_APP_CATEGORIES,
    RULE_BY_SCENARIO,
    RULE_CATALOG,
    SCENARIO_CATEGORY,
    AppCategory,
    AppCategoryMap,
    CooldownPolicy,
    RuleSpec,
    ScenarioCategory,
    ScenarioId,
)
from .engine import (
    ContextEngine,
    DailySummary,
    EngineConfig,
    OutOfOrderEvent,
    ScenarioTrigger,
    Subscription,
    UnknownChannel,
    UserContextState,
    evaluate_trace,
)

__all__ = [
    "AppCategory",
    "AppCategoryMap",
    "ContextEngine",
    "CooldownPolicy",
    "DailySummary",
    "DEFAULT_APP_CATEGORIES",
    "EngineConfig",
    "OutOfOrderEvent",
    "RuleSpec",
    "RULE_BY_SCENARIO",
    "RULE_CATALOG",
    "SCENARIO_CATEGORY",
    "ScenarioCategory",
    "ScenarioId",
    "ScenarioTrigger",
    "Subscription",
    "UnknownChannel",
    "UserContextState",
    "evaluate_trace",
]
