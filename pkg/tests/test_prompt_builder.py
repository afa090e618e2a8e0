"""Prompt compilation: coverage, determinism, golden render, placeholders."""

from __future__ import annotations

import random
import re
from pathlib import Path

import pytest

from contexta.context_engine import RULE_BY_SCENARIO, ScenarioId, ScenarioTrigger
from contexta.prompt_builder import (
    InteractionEntry,
    InteractionHistory,
    MissingTemplate,
    PromptBuildError,
    TemplateSet,
    build,
    render,
)

GOLDEN = Path(__file__).parent / "golden" / "excessive_app_usage_prompt.txt"

# the published four-section texts for the late-night overuse scenario
ROLE_TEXT = (
    "You are a behavior-aware companion who understands user habits. You provide "
    "gentle emotional support and insight when users show signs of app overuse, "
    "without being intrusive."
)
TASK_TEXT = (
    "Reflect with the user on their recent phone usage. Suggest small, empathetic "
    "nudges such as breathing exercises, a break, or sleep preparation tips."
)
REQUIREMENT_TEXT = (
    "Be non-judgmental, supportive, and emotionally intelligent. Encourage "
    "reflection rather than enforcement."
)
STYLE_TEXT = "Friendly, calm, and conversational. Avoid alarmist tones."


def _trigger(scenario: ScenarioId = ScenarioId.EXCESSIVE_APP_USAGE,
             metrics: dict | None = None) -> ScenarioTrigger:
    if metrics is None:
        metrics = {k: 42.0 for k in RULE_BY_SCENARIO[scenario].metric_keys}
    return ScenarioTrigger(
        scenario_id=scenario,
        fired_at=1699900230000,
        evidence_window=(1699893030000, 1699900230000),
        metrics=metrics,
        cooldown_key=f"{scenario.value}:2023-11-14",
    )


def _fixed_history() -> InteractionHistory:
    history = InteractionHistory()
    history.add(InteractionEntry("msg-a1", "assistant", "Good evening! How was your day?", 1699880000000))
    history.add(InteractionEntry("msg-u1", "user", "Pretty tiring honestly.", 1699880100000))
    return history


def test_template_set_covers_all_sixteen(templates):
    for scenario in ScenarioId:
        sections = templates.sections_for(scenario)
        assert set(sections) == {"role", "task", "requirement", "style_reference"}
        assert all(sections.values())


def test_excessive_role_text_verbatim(templates):
    sections = templates.sections_for(ScenarioId.EXCESSIVE_APP_USAGE)
    assert sections["role"] == ROLE_TEXT
    assert sections["task"] == TASK_TEXT
    assert sections["requirement"] == REQUIREMENT_TEXT
    assert sections["style_reference"] == STYLE_TEXT


def test_role_begins_with_companion_anchor(templates):
    spec = build(_trigger(metrics={"cumulativeUsageMinutes": 121.0}), None, templates)
    assert spec.sections["role"].startswith(
        "You are a behavior-aware companion who understands user habits."
    )


def test_golden_render_matches(templates):
    spec = build(
        _trigger(metrics={"cumulativeUsageMinutes": 120.5}), _fixed_history(), templates
    )
    assert render(spec) == GOLDEN.read_text(encoding="utf-8")


def test_build_is_deterministic(templates):
    a = build(_trigger(), _fixed_history(), templates)
    b = build(_trigger(), _fixed_history(), templates)
    assert a == b
    assert render(a) == render(b)


def test_empty_history_renders_metrics_only(templates):
    spec = build(_trigger(), InteractionHistory(), templates)
    assert "history:" not in spec.context_block
    assert "cumulativeUsageMinutes" in spec.context_block


def test_history_truncated_to_ten_most_recent(templates):
    history = InteractionHistory()
    for i in range(25):
        history.add(InteractionEntry(f"m{i}", "user", f"note {i}", 1699880000000 + i))
    spec = build(_trigger(), history, templates)
    kept = re.findall(r"- user: note (\d+)", spec.context_block)
    assert kept == [str(i) for i in range(15, 25)]


def test_history_bounded_at_fifty():
    history = InteractionHistory()
    for i in range(80):
        history.add(InteractionEntry(f"m{i}", "user", f"note {i}", i))
    assert len(history) == 50
    assert history.recent(50)[0].text == "note 30"


def test_section_order_is_fixed_for_every_scenario(templates):
    for scenario in ScenarioId:
        text = render(build(_trigger(scenario), None, templates))
        positions = [
            text.index("\nRole: "),
            text.index("\nTask: "),
            text.index("\nRequirement: "),
            text.index("\nStyle Reference: "),
            text.index("\nContext:\n"),
        ]
        assert positions == sorted(positions)
        assert text.startswith("# Scenario category: ")


def test_render_contains_every_metric_key(templates):
    rng = random.Random(5)
    for scenario in ScenarioId:
        metrics = {k: round(rng.uniform(0, 500), 3) for k in RULE_BY_SCENARIO[scenario].metric_keys}
        text = render(build(_trigger(scenario, metrics), None, templates))
        for key in metrics:
            assert key in text


def test_no_unresolved_placeholders_survive(templates):
    for scenario in ScenarioId:
        text = render(build(_trigger(scenario), _fixed_history(), templates))
        assert "{metric:" not in text
        assert "{history}" not in text


def test_missing_template_raises(tmp_path):
    (tmp_path / "manifest.json").write_text('{"version":1,"templates":{}}', encoding="utf-8")
    with pytest.raises(MissingTemplate):
        TemplateSet.load(tmp_path)


def test_unknown_metric_reference_fails_loudly(tmp_path, templates):
    manifest = {"version": 1, "templates": {s.value: f"{s.value}.txt" for s in ScenarioId}}
    import json

    (tmp_path / "manifest.json").write_text(json.dumps(manifest), encoding="utf-8")
    body = "[role]\nr\n[task]\nuses {metric:doesNotExist}\n[requirement]\nq\n[style_reference]\ns\n"
    for scenario in ScenarioId:
        (tmp_path / f"{scenario.value}.txt").write_text(body, encoding="utf-8")
    broken = TemplateSet.load(tmp_path)
    with pytest.raises(PromptBuildError, match="doesNotExist"):
        build(_trigger(), None, broken)
