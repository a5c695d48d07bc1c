"""Command-line surface.

Subcommands: ``check`` (run one synthesis mode against a trace),
``oracle`` (sequential reference verdict), ``plan`` (print the compiled
monitor plan), ``bench`` (JSON overhead report across modes), ``gen``
(emit a workload trace file), and ``serve`` (monitor newline-delimited
events streamed over TCP or stdin; connection close ends the trace).

Exit codes: 0 no violation, 1 violation, 2 usage or formula/trace error,
3 internal or protocol fault.
"""

from __future__ import annotations

import functools
import socket
import sys

import click

from .bench import BenchMismatch, bench_report_json, run_bench, workload_events
from .events import EvalTypeError
from .formula import WellFormednessError, check_wellformed
from .oracle import oracle_verdict
from .parser import ParseError, parse_event_line, parse_formula, parse_trace
from .runtime import MonitoringFault, ProtocolViolation, SchedulerConfig, deploy
from .synthesis import Mode, plan_stats_json, render_plan, synthesize
from .workload import WorkloadSpec, gen_workload, render_trace

_MODE_NAMES = [m.value for m in Mode]


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except (ParseError, WellFormednessError) as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(2)
        except (MonitoringFault, ProtocolViolation, EvalTypeError, BenchMismatch) as err:
            click.echo(f"fault: {err}", err=True)
            sys.exit(3)
        sys.exit(code or 0)

    return wrapper


def _load_formula(path: str):
    with open(path, encoding="utf-8") as fh:
        return check_wellformed(parse_formula(fh.read()))


def _load_trace(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh.read())


def _verdict_exit(verdict) -> int:
    click.echo(str(verdict))
    return 1 if verdict.is_violation else 0


@click.group()
def cli():
    """Runtime monitors for safety formulas over trace events."""


@cli.command()
@click.option("-f", "--formula", "formula_path", required=True, type=click.Path(exists=True))
@click.option("-t", "--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("-m", "--mode", type=click.Choice(_MODE_NAMES), default="reconf")
@click.option("--backend", type=click.Choice(["sim", "threads"]), default="sim")
@click.option("--seed", type=int, default=0)
@click.option("--timeout-ms", type=int, default=10_000)
@_guarded
def check(formula_path, trace_path, mode, backend, seed, timeout_ms):
    """Monitor a trace file under one synthesis mode."""
    wf = _load_formula(formula_path)
    events = _load_trace(trace_path)
    plan = synthesize(wf, Mode(mode))
    handle = deploy(plan, plan.mode, SchedulerConfig(backend=backend, seed=seed,
                                                     timeout_ms=timeout_ms))
    for event in events:
        handle.offer_event(event)
    return _verdict_exit(handle.finish().verdict)


@cli.command()
@click.option("-f", "--formula", "formula_path", required=True, type=click.Path(exists=True))
@click.option("-t", "--trace", "trace_path", required=True, type=click.Path(exists=True))
@_guarded
def oracle(formula_path, trace_path):
    """Sequential reference verdict for a trace file."""
    wf = _load_formula(formula_path)
    events = _load_trace(trace_path)
    return _verdict_exit(oracle_verdict(wf, events))


@cli.command()
@click.option("-f", "--formula", "formula_path", required=True, type=click.Path(exists=True))
@click.option("-m", "--mode", type=click.Choice(_MODE_NAMES), default="multi")
@_guarded
def plan(formula_path, mode):
    """Print the compiled monitor plan and its node statistics."""
    compiled = synthesize(_load_formula(formula_path), Mode(mode))
    click.echo(render_plan(compiled))
    click.echo(plan_stats_json(compiled))
    return 0


@cli.command()
@click.option("-f", "--formula", "formula_path", required=True, type=click.Path(exists=True))
@click.option("-t", "--trace", "trace_path", type=click.Path(exists=True))
@click.option("--clients", type=int, default=1)
@click.option("--requests", type=int, default=1)
@click.option("--error-rate", type=float, default=0.0)
@click.option("--end-event", is_flag=True)
@click.option("--modes", default="all", help="comma-separated modes, or 'all'")
@click.option("--backend", type=click.Choice(["sim", "threads"]), default="sim")
@click.option("--reps", type=int, default=1)
@click.option("--seed", type=int, default=0)
@click.option("--timeout-ms", type=int, default=10_000)
@_guarded
def bench(formula_path, trace_path, clients, requests, error_rate, end_event,
          modes, backend, reps, seed, timeout_ms):
    """Run the overhead comparison and print a JSON report."""
    wf = _load_formula(formula_path)
    if trace_path:
        events = _load_trace(trace_path)
        workload = {"trace_file": trace_path, "events": len(events)}
    else:
        spec = WorkloadSpec(clients=clients, requests_per_client=requests,
                            error_rate=error_rate, end_event=end_event, seed=seed)
        events, workload = workload_events(spec)
    if modes == "all":
        selected = list(Mode)
    else:
        try:
            selected = [Mode(name.strip()) for name in modes.split(",")]
        except ValueError as err:
            raise click.UsageError(str(err))
    report = run_bench(wf, events, selected, backend=backend, repetitions=reps,
                       seed=seed, timeout_ms=timeout_ms, workload=workload)
    click.echo(bench_report_json(report))
    verdicts = {entry["verdict"] for entry in report["modes"].values()}
    return 1 if "violation" in verdicts else 0


@cli.command()
@click.option("--clients", type=int, default=1)
@click.option("--requests", type=int, default=1)
@click.option("--error-rate", type=float, default=0.0)
@click.option("--end-event", is_flag=True)
@click.option("--seed", type=int, default=0)
@click.option("-o", "--output", type=click.Path(), default=None)
@_guarded
def gen(clients, requests, error_rate, end_event, seed, output):
    """Generate a predecessor-server workload trace."""
    spec = WorkloadSpec(clients=clients, requests_per_client=requests,
                        error_rate=error_rate, end_event=end_event, seed=seed)
    text = render_trace(gen_workload(spec))
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    return 0


@cli.command()
@click.option("-f", "--formula", "formula_path", required=True, type=click.Path(exists=True))
@click.option("-m", "--mode", type=click.Choice(_MODE_NAMES), default="reconf")
@click.option("--backend", type=click.Choice(["sim", "threads"]), default="sim")
@click.option("--port", type=int, default=None, help="listen on TCP instead of stdin")
@click.option("--host", default="127.0.0.1")
@_guarded
def serve(formula_path, mode, backend, port, host):
    """Monitor events streamed one per line; end of stream ends the trace."""
    wf = _load_formula(formula_path)
    plan = synthesize(wf, Mode(mode))
    handle = deploy(plan, plan.mode, SchedulerConfig(backend=backend))
    if port is None:
        lines = sys.stdin
        closer = None
    else:
        server = socket.create_server((host, port))
        click.echo(f"listening on {host}:{server.getsockname()[1]}", err=True)
        conn, _addr = server.accept()
        lines = conn.makefile("r", encoding="utf-8")
        closer = (conn, server)
    index = 0
    for line_no, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        index += 1
        handle.offer_event(parse_event_line(stripped, index, line_no))
    if closer:
        closer[0].close()
        closer[1].close()
    return _verdict_exit(handle.finish().verdict)


main = cli

if __name__ == "__main__":
    main()
