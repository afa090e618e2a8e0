"""Accuracy evaluation of engine triggers against ground-truth labels.

Triggers are matched to label windows per scenario: hits inside a window
count toward that window's expected count, surplus in-window firings and
any trigger outside every window of its scenario are false positives, and
unmet expectations are false negatives. Overall accuracy is detected-correct
over expected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import canonical
from .context_engine import EngineConfig, ScenarioId, ScenarioTrigger, evaluate_trace
from .sensor_model import Trace

__all__ = ["MissingLabels", "ScenarioScore", "EvalReport", "score_trace", "merge_reports", "evaluate_traces"]


class MissingLabels(ValueError):
    pass


@dataclass
class ScenarioScore:
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0

    @property
    def expected(self) -> int:
        return self.true_positives + self.false_negatives

    @property
    def precision(self) -> float:
        detected = self.true_positives + self.false_positives
        return self.true_positives / detected if detected else 1.0

    @property
    def recall(self) -> float:
        return self.true_positives / self.expected if self.expected else 1.0


@dataclass
class EvalReport:
    per_scenario: dict[str, ScenarioScore] = field(default_factory=dict)
    traces: int = 0
    runtime_seconds: float = 0.0

    def score(self, scenario: str) -> ScenarioScore:
        if scenario not in self.per_scenario:
            self.per_scenario[scenario] = ScenarioScore()
        return self.per_scenario[scenario]

    @property
    def overall_accuracy(self) -> float:
        expected = sum(s.expected for s in self.per_scenario.values())
        if expected == 0:
            return 1.0
        return sum(s.true_positives for s in self.per_scenario.values()) / expected

    def to_json(self) -> str:
        # wall timing stays out of the canonical report so identical runs
        # hash identically; the text table carries it instead
        obj = {
            "traces": self.traces,
            "overallAccuracy": round(self.overall_accuracy, 6),
            "scenarios": {
                name: {
                    "truePositives": s.true_positives,
                    "falsePositives": s.false_positives,
                    "falseNegatives": s.false_negatives,
                    "precision": round(s.precision, 6),
                    "recall": round(s.recall, 6),
                }
                for name, s in sorted(self.per_scenario.items())
            },
        }
        return canonical.dumps(obj)

    def to_table(self) -> str:
        rows = [f"{'scenario':26s} {'TP':>4s} {'FP':>4s} {'FN':>4s} {'prec':>7s} {'recall':>7s}"]
        for name, s in sorted(self.per_scenario.items()):
            rows.append(
                f"{name:26s} {s.true_positives:4d} {s.false_positives:4d} "
                f"{s.false_negatives:4d} {s.precision:7.3f} {s.recall:7.3f}"
            )
        rows.append(
            f"{'overall':26s} accuracy={self.overall_accuracy:.3f} traces={self.traces}"
            f" runtime={self.runtime_seconds:.2f}s"
        )
        return "\n".join(rows)


def score_trace(trace: Trace, triggers: list[ScenarioTrigger] | None = None,
                config: EngineConfig | None = None) -> EvalReport:
    """Score one labeled trace; runs the engine when triggers are not given."""
    if not trace.labels:
        raise MissingLabels("trace carries no ground-truth labels")
    if triggers is None:
        triggers = evaluate_trace(trace, config=config)
    report = EvalReport(traces=1)
    by_scenario: dict[str, list[int]] = {}
    for trig in triggers:
        by_scenario.setdefault(trig.scenario_id.value, []).append(trig.fired_at)
    labeled_scenarios = {lab.scenario_id for lab in trace.labels}
    for scenario in labeled_scenarios | set(by_scenario):
        score = report.score(scenario)
        fires = sorted(by_scenario.get(scenario, []))
        windows = [lab for lab in trace.labels if lab.scenario_id == scenario]
        assigned = [False] * len(fires)
        for lab in windows:
            in_window = [
                i for i, t in enumerate(fires)
                if not assigned[i] and lab.window_start <= t <= lab.window_end
            ]
            hits = min(len(in_window), lab.expected_trigger_count)
            score.true_positives += hits
            score.false_negatives += lab.expected_trigger_count - hits
            score.false_positives += max(0, len(in_window) - lab.expected_trigger_count)
            for i in in_window:
                assigned[i] = True
        score.false_positives += sum(1 for a in assigned if not a)
    return report


def merge_reports(reports: list[EvalReport]) -> EvalReport:
    merged = EvalReport()
    for rep in reports:
        merged.traces += rep.traces
        merged.runtime_seconds += rep.runtime_seconds
        for name, s in rep.per_scenario.items():
            target = merged.score(name)
            target.true_positives += s.true_positives
            target.false_positives += s.false_positives
            target.false_negatives += s.false_negatives
    return merged


def evaluate_traces(traces: list[Trace], config: EngineConfig | None = None) -> EvalReport:
    return merge_reports([score_trace(t, config=config) for t in traces])
