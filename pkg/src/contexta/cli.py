"""Operator command line: generate, replay, evaluate, serve.

Exit codes: 0 success, 1 runtime error, 2 usage or validation error.
Everything except ``serve`` is deterministic for fixed inputs and seed;
wall-clock timings go to stderr so stdout stays hashable.
"""

from __future__ import annotations

import hashlib
import sys
import time
from pathlib import Path

import click

from . import canonical
from .context_engine import ContextEngine
from .dialogue import DialoguePipeline, FeedbackStore, StubResponder
from .evaluation import EvalReport, MissingLabels, merge_reports, score_trace
from .prompt_builder import TemplateSet
from .sensor_model import Trace, read_trace, write_trace
from .sync.client import SyncClient, UploadBuffer
from .sync.storage import SyncRecord
from .trace_sim import (
    AS_FAST_AS_POSSIBLE,
    InvalidScript,
    NoiseProfile,
    ReplayControl,
    generate,
    load_script,
    perturb,
    replay,
)

EXIT_RUNTIME = 1
EXIT_USAGE = 2


@click.group()
def main() -> None:
    """Context-aware chatbot toolkit: simulate, detect, converse, sync."""


@main.command("generate")
@click.option("--script", "script_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the script's seed.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def cmd_generate(script_path: str, seed: int | None, out_path: str) -> None:
    """Generate a labeled synthetic trace from a scenario script."""
    try:
        script = load_script(script_path)
        if seed is not None:
            script.seed = seed
        trace = generate(script)
    except InvalidScript as exc:
        click.echo(f"invalid script: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    write_trace(trace, out_path)
    digest = hashlib.sha256(Path(out_path).read_bytes()).hexdigest()
    click.echo(f"wrote {out_path}: {len(trace.events)} events, {len(trace.labels)} labels")
    click.echo(f"sha256 {digest}")


class _ReplaySink:
    """Feeds replayed events through engine -> prompts -> dialogue."""

    def __init__(self, trace: Trace, templates: TemplateSet, uploader: UploadBuffer | None,
                 echo=click.echo):
        from importlib import resources

        from .dialogue import OfflineStickerClient

        self.engine = ContextEngine(tz_offset_minutes=trace.header.tz_offset_minutes)
        sticker_dir = resources.files("contexta.dialogue") / "data" / "stickers"
        self.pipeline = DialoguePipeline(
            templates=templates,
            responder=StubResponder(),
            sticker_client=OfflineStickerClient(str(sticker_dir)),
            synthesizer=None,
            feedback_store=FeedbackStore(),
        )
        self.user_id = trace.header.user_id
        self.uploader = uploader
        self.echo = echo
        self.trigger_counts: dict[str, int] = {}
        self.messages = 0

    def on_event(self, event) -> None:
        for trigger in self.engine.ingest(event):
            name = trigger.scenario_id.value
            self.trigger_counts[name] = self.trigger_counts.get(name, 0) + 1
            self.echo(canonical.dumps({"kind": "trigger", **trigger.to_wire()}))
            message = self.pipeline.handle_trigger(self.user_id, trigger)
            self.messages += 1
            self.echo(canonical.dumps({"kind": "message", **message.to_wire()}))
            if self.uploader is not None:
                self.uploader.add(SyncRecord("trigger", trigger.fired_at, trigger.to_wire()))
                self.uploader.add(SyncRecord("message", message.timestamp, message.to_wire()))

    def on_end(self, report) -> None:
        if self.uploader is not None:
            self.uploader.flush()


@main.command("replay")
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--speed", default="max", help="Positive multiplier or 'max'.")
@click.option("--sink", default="local", help="'local' or the sync service base URL.")
@click.option("--token", default=None, help="Bearer token when sink is a service URL.")
@click.option("--templates", "templates_dir", default=None, type=click.Path(file_okay=False))
def cmd_replay(trace_path: str, speed: str, sink: str, token: str | None,
               templates_dir: str | None) -> None:
    """Replay a trace through the detection and dialogue pipeline."""
    try:
        speed_value = AS_FAST_AS_POSSIBLE if speed == "max" else float(speed)
        if speed_value != AS_FAST_AS_POSSIBLE and speed_value <= 0:
            raise ValueError("speed must be positive")
    except ValueError as exc:
        click.echo(f"bad --speed: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    trace = read_trace(trace_path)
    templates = TemplateSet.load(templates_dir)

    client: SyncClient | None = None
    uploader: UploadBuffer | None = None
    control = ReplayControl()
    if sink != "local":
        if not token:
            click.echo("--token is required when sink is a service URL", err=True)
            sys.exit(EXIT_USAGE)
        client = SyncClient(sink, token=token)
        uploader = UploadBuffer(client, trace.header.user_id)

    sink_obj = _ReplaySink(trace, templates, uploader)
    poller = None
    stop_poll = None
    if client is not None:
        import threading

        client.replay_register()
        stop_poll = threading.Event()

        def poll_commands() -> None:
            while not stop_poll.wait(0.3):
                for cmd in client.poll_replay_commands():
                    try:
                        control.send(cmd.get("command", ""), cmd.get("value"))
                    except ValueError:
                        pass

        poller = threading.Thread(target=poll_commands, daemon=True)
        poller.start()

    t0 = time.perf_counter()
    try:
        report = replay(trace, speed_value, sink_obj, control=control)
    except Exception as exc:
        click.echo(f"replay failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    finally:
        if client is not None:
            stop_poll.set()
            poller.join(timeout=2)
            client.replay_unregister()
            client.close()

    click.echo("scenario trigger counts:")
    for name in sorted(sink_obj.trigger_counts):
        click.echo(f"  {name:26s} {sink_obj.trigger_counts[name]}")
    click.echo(f"delivered={report.delivered} messages={sink_obj.messages}")
    click.echo(f"wall={time.perf_counter() - t0:.2f}s", err=True)


@main.command("evaluate")
@click.option("--trace", "trace_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--dir", "trace_dir", default=None, type=click.Path(exists=True, file_okay=False))
@click.option("--noise-dropout", type=float, default=0.0)
@click.option("--noise-jitter", type=float, default=0.0, help="Jitter std dev in ms.")
@click.option("--noise-seed", type=int, default=0)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def cmd_evaluate(trace_path: str | None, trace_dir: str | None, noise_dropout: float,
                 noise_jitter: float, noise_seed: int, out_path: str | None) -> None:
    """Score labeled traces: trigger counts per label window vs expectation."""
    if (trace_path is None) == (trace_dir is None):
        click.echo("provide exactly one of --trace or --dir", err=True)
        sys.exit(EXIT_USAGE)
    paths = (
        [Path(trace_path)]
        if trace_path
        else sorted(Path(trace_dir).glob("*.jsonl"))
    )
    if not paths:
        click.echo("no trace files found", err=True)
        sys.exit(EXIT_USAGE)
    noise = NoiseProfile(dropout_rate=noise_dropout, jitter_std_ms=noise_jitter)
    reports: list[EvalReport] = []
    t0 = time.perf_counter()
    try:
        for path in paths:
            trace = read_trace(path)
            if noise_dropout > 0 or noise_jitter > 0:
                trace = perturb(trace, noise, seed=noise_seed)
            reports.append(score_trace(trace))
    except MissingLabels as exc:
        click.echo(f"missing labels: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    merged = merge_reports(reports)
    merged.runtime_seconds = time.perf_counter() - t0
    click.echo(merged.to_json())
    click.echo(merged.to_table(), err=True)
    if out_path:
        Path(out_path).write_text(merged.to_json() + "\n", encoding="utf-8")


@main.command("serve")
@click.option("--data-root", required=True, type=click.Path(file_okay=False))
@click.option("--key-file", default=None, type=click.Path(dir_okay=False))
@click.option("--bind", default="127.0.0.1:8787", help="host:port")
def cmd_serve(data_root: str, key_file: str | None, bind: str) -> None:
    """Run the sync service until interrupted."""
    import uvicorn

    from .sync import create_app

    try:
        host, _, port_str = bind.partition(":")
        port = int(port_str or "8787")
        if key_file is not None and not Path(key_file).parent.exists():
            raise ValueError(f"key file directory {Path(key_file).parent} does not exist")
        app = create_app(data_root, jwt_key_file=key_file)
    except (ValueError, OSError) as exc:
        click.echo(f"bad config: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=port, log_level="warning")
    except (OSError, SystemExit) as exc:
        click.echo(f"serve failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)


if __name__ == "__main__":
    main()
