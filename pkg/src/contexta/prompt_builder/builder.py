"""Prompt compilation: template loading, metric interpolation, rendering."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .. import canonical
from ..context_engine import SCENARIO_CATEGORY, ScenarioCategory, ScenarioId, ScenarioTrigger

__all__ = [
    "InteractionEntry",
    "InteractionHistory",
    "MissingTemplate",
    "PromptBuildError",
    "PromptSpec",
    "TemplateSet",
    "build",
    "render",
]

_SECTION_ORDER = ("role", "task", "requirement", "style_reference")
_SECTION_TITLES = {
    "role": "Role",
    "task": "Task",
    "requirement": "Requirement",
    "style_reference": "Style Reference",
}
_CATEGORY_TITLES = {
    ScenarioCategory.EXERCISE_ACTIVITY: "Exercise and activity",
    ScenarioCategory.TIME_ROUTINE: "Time and routine",
    ScenarioCategory.LOCATION_ENVIRONMENT: "Location and environment",
    ScenarioCategory.USAGE_MEDIA: "Usage behavior and media",
}

_METRIC_RE = re.compile(r"\{metric:([A-Za-z0-9_]+)\}")
_LEFTOVER_RE = re.compile(r"\{(?:metric:[A-Za-z0-9_]+|history)\}")

HISTORY_LIMIT = 50
HISTORY_IN_PROMPT = 10


class MissingTemplate(KeyError):
    pass


class PromptBuildError(ValueError):
    pass


@dataclass(slots=True)
class InteractionEntry:
    message_id: str
    direction: str  # "user" | "assistant"
    text: str
    timestamp: int
    feedback_emoji: str | None = None


class InteractionHistory:
    """Bounded record of recent exchanges, oldest evicted first."""

    def __init__(self, limit: int = HISTORY_LIMIT):
        self._entries: deque[InteractionEntry] = deque(maxlen=limit)

    def add(self, entry: InteractionEntry) -> None:
        self._entries.append(entry)

    def recent(self, n: int) -> list[InteractionEntry]:
        if n <= 0:
            return []
        return list(self._entries)[-n:]

    def __len__(self) -> int:
        return len(self._entries)


@dataclass
class PromptSpec:
    scenario_id: ScenarioId
    sections: dict[str, str]
    context_block: str
    created_at: int


class TemplateSet:
    """The per-scenario template files plus their manifest."""

    def __init__(self, templates: dict[ScenarioId, dict[str, str]], version: int):
        self.version = version
        self._templates = templates
        missing = [s.value for s in ScenarioId if s not in templates]
        if missing:
            raise MissingTemplate(f"templates missing for: {', '.join(missing)}")

    def sections_for(self, scenario: ScenarioId) -> dict[str, str]:
        try:
            return self._templates[scenario]
        except KeyError:
            raise MissingTemplate(scenario.value) from None

    @classmethod
    def load(cls, directory: str | Path | None = None) -> "TemplateSet":
        if directory is None:
            root = resources.files("contexta.prompt_builder") / "templates"
        else:
            root = Path(directory)
        manifest = canonical.loads((root / "manifest.json").read_text(encoding="utf-8"))
        templates: dict[ScenarioId, dict[str, str]] = {}
        for scenario_name, filename in manifest["templates"].items():
            scenario = ScenarioId(scenario_name)
            templates[scenario] = _parse_template((root / filename).read_text(encoding="utf-8"), filename)
        return cls(templates, version=manifest.get("version", 1))


def _parse_template(text: str, source: str) -> dict[str, str]:
    sections: dict[str, str] = {}
    current: str | None = None
    buf: list[str] = []
    for line in text.splitlines():
        header = line.strip()
        if header.startswith("[") and header.endswith("]"):
            if current is not None:
                sections[current] = "\n".join(buf).strip()
            current = header[1:-1]
            buf = []
        else:
            buf.append(line)
    if current is not None:
        sections[current] = "\n".join(buf).strip()
    for name in _SECTION_ORDER:
        if not sections.get(name):
            raise PromptBuildError(f"template {source}: section [{name}] missing or empty")
    return {name: sections[name] for name in _SECTION_ORDER}


def _format_metric(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return f"{value:.3f}".rstrip("0").rstrip(".")


def _interpolate(text: str, metrics: dict[str, float], scenario: ScenarioId) -> str:
    def repl(match: re.Match) -> str:
        key = match.group(1)
        if key not in metrics:
            raise PromptBuildError(
                f"template for {scenario.value} references unknown metric {key!r}"
            )
        return _format_metric(metrics[key])

    return _METRIC_RE.sub(repl, text)


def _context_block(trigger: ScenarioTrigger, history: InteractionHistory | None) -> str:
    lines = [
        f"scenario: {trigger.scenario_id.value}",
        f"category: {SCENARIO_CATEGORY[trigger.scenario_id].value}",
        f"firedAt: {trigger.fired_at}",
        f"evidenceWindow: {trigger.evidence_window[0]}..{trigger.evidence_window[1]}",
        "metrics:",
    ]
    for key, value in trigger.metrics.items():
        lines.append(f"- {key}: {_format_metric(value)}")
    entries = history.recent(HISTORY_IN_PROMPT) if history is not None else []
    if entries:
        lines.append("history:")
        for e in entries:
            emoji = f" [{e.feedback_emoji}]" if e.feedback_emoji else ""
            lines.append(f"- {e.direction}: {e.text}{emoji}")
    return "\n".join(lines)


def build(
    trigger: ScenarioTrigger,
    history: InteractionHistory | None,
    templates: TemplateSet,
) -> PromptSpec:
    """Compile a trigger into a prompt spec; same inputs give identical output."""
    raw = templates.sections_for(trigger.scenario_id)
    sections = {
        name: _interpolate(text, trigger.metrics, trigger.scenario_id)
        for name, text in raw.items()
    }
    for name, text in sections.items():
        if not text:
            raise PromptBuildError(f"section {name} rendered empty")
    return PromptSpec(
        scenario_id=trigger.scenario_id,
        sections=sections,
        context_block=_context_block(trigger, history),
        created_at=trigger.fired_at,
    )


def render(spec: PromptSpec) -> str:
    """Emit the prompt text: category preamble, then Role, Task, Requirement,
    Style Reference, Context, in that order."""
    category = SCENARIO_CATEGORY[spec.scenario_id]
    parts = [f"# Scenario category: {_CATEGORY_TITLES[category]}"]
    for name in _SECTION_ORDER:
        parts.append(f"{_SECTION_TITLES[name]}: {spec.sections[name]}")
    parts.append(f"Context:\n{spec.context_block}")
    text = "\n\n".join(parts) + "\n"
    leftover = _LEFTOVER_RE.search(text)
    if leftover:
        raise PromptBuildError(f"unresolved placeholder {leftover.group(0)!r} in rendered prompt")
    return text
