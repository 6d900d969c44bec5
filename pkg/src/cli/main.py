"""
mpst command line

    mpst check FILE [--global G] [--session S] [--set SET] [--mode MODE] [--json]
    mpst analyze FILE [--global G] [--queue M] [--set SET] [--json]
    mpst simulate FILE [--session S] (--trace FILE | --random N [--seed K]) [--json]
    mpst verify FILE [--session S] [--set SET] [--property lock|deadlock|omf]
                [--depth D] [--queue-bound B] [--json]
    mpst schema NAME

SET is a set defined in FILE, an inline list (u1,u2), '-' for the empty set
or '*' for every participant the property talks about.

Exit codes: 0 accepted/Holds, 1 rejected/Violated, 2 usage or parse error,
3 HoldsWithinBounds.
"""

import json
from pathlib import Path
from typing import Optional

import click

from ..config.settings import Settings
from ..mpst.engine import SessionEngine
from ..mpst.errors import MpstError
from ..mpst.reports import SCHEMAS, ExitCode, RunReport, render_text, schema
from ..mpst.typechecker import CheckMode
from ..mpst.verifier import Bounds, Property

STATUS_COLORS = {
    ExitCode.OK: "green",
    ExitCode.REJECTED: "red",
    ExitCode.USAGE: "red",
    ExitCode.INCONCLUSIVE: "yellow",
}


def _load(ctx: click.Context, engine: SessionEngine, path: str):
    try:
        return engine.load(path=path)
    except (MpstError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(int(ExitCode.USAGE))


def _emit(ctx: click.Context, report: RunReport, as_json: bool) -> None:
    if as_json:
        click.echo(report.model_dump_json(indent=2))
    else:
        text = render_text(report)
        head, _, rest = text.partition("\n")
        if Settings.color_enabled():
            head = click.style(head, fg=STATUS_COLORS[report.exit_code], bold=True)
        click.echo(head + "\n" + rest, nl=False, err=report.exit_code == ExitCode.USAGE)
    ctx.exit(int(report.exit_code))


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Partial typing and property checking for asynchronous multiparty sessions."""


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("-g", "--global", "global_name", default=None, help="Global type (first defined when omitted)")
@click.option("-s", "--session", "session_name", default=None, help="Session (first defined when omitted)")
@click.option("--set", "participants", default="*", show_default=True, help="Participant set")
@click.option("--mode", type=click.Choice([mode.value for mode in CheckMode]), default=None,
              help="Rule premises (MPST_CHECK_MODE when omitted)")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report")
@click.pass_context
def check(ctx, file: str, global_name: Optional[str], session_name: Optional[str], participants: str,
          mode: Optional[str], as_json: bool):
    """Type check a session against a global type."""
    engine = SessionEngine(mode=CheckMode(mode) if mode else None)
    module = _load(ctx, engine, file)
    report = engine.check(module, global_name, session_name, participants)
    report.inputs["file"] = file
    _emit(ctx, report, as_json)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("-g", "--global", "global_name", default=None, help="Global type (first defined when omitted)")
@click.option("-q", "--queue", "queue_name", default=None, help="Queue for the weight and soundness tables")
@click.option("--set", "participants", default=None, help="Participant set for soundness (queue members)")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report")
@click.pass_context
def analyze(ctx, file: str, global_name: Optional[str], queue_name: Optional[str], participants: Optional[str],
            as_json: bool):
    """Depth table, boundedness, weights and soundness of a global type."""
    engine = SessionEngine()
    module = _load(ctx, engine, file)
    report = engine.analyze(module, global_name, queue_name, participants)
    report.inputs["file"] = file
    _emit(ctx, report, as_json)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("-s", "--session", "session_name", default=None, help="Session (first defined when omitted)")
@click.option("--trace", "trace_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Trace to replay (p>q!l / p<q?l tokens, or JSON)")
@click.option("--random", "steps", type=click.IntRange(min=0), default=0, help="Number of random steps")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for random steps")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report")
@click.pass_context
def simulate(ctx, file: str, session_name: Optional[str], trace_file: Optional[str], steps: int, seed: int,
             as_json: bool):
    """Replay a trace, or run random enabled steps."""
    engine = SessionEngine()
    module = _load(ctx, engine, file)
    trace = Path(trace_file).read_text(encoding="utf-8") if trace_file else None
    report = engine.simulate(module, session_name, trace=trace, steps=steps, seed=seed)
    report.inputs["file"] = file
    _emit(ctx, report, as_json)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("-s", "--session", "session_name", default=None, help="Session (first defined when omitted)")
@click.option("--set", "participants", default="*", show_default=True, help="Participant set")
@click.option("-p", "--property", "prop", type=click.Choice([p.value for p in Property]), default="lock",
              show_default=True)
@click.option("--depth", type=click.IntRange(min=1), default=None, help="Maximum trace length (MPST_DEPTH, 64)")
@click.option("--queue-bound", type=click.IntRange(min=1), default=None,
              help="Maximum messages per channel (MPST_QUEUE_BOUND, 4)")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report")
@click.pass_context
def verify(ctx, file: str, session_name: Optional[str], participants: str, prop: str, depth: Optional[int],
           queue_bound: Optional[int], as_json: bool):
    """Check a partial property by bounded exploration."""
    defaults = Settings.default_bounds()
    bounds = Bounds(depth or defaults.max_trace_len, queue_bound or defaults.max_queue_per_channel)
    engine = SessionEngine(bounds=bounds)
    module = _load(ctx, engine, file)
    report = engine.verify(module, session_name, participants, Property(prop), bounds)
    report.inputs["file"] = file
    _emit(ctx, report, as_json)


@cli.command(name="schema")
@click.argument("name", type=click.Choice(sorted(SCHEMAS)))
def schema_command(name: str):
    """Print the JSON schema of a report."""
    click.echo(json.dumps(schema(name), indent=2, sort_keys=True))


def main():
    cli(prog_name="mpst")


if __name__ == "__main__":
    main()
