"""Command-line interface for jumping-polynomials."""

import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

import click

import jumping
from jumping.arithmetic import format_rational
from jumping.errors import DomainError, JumpingError
from jumping.poly import LaurentBiPoly, PowerSeries, poly_from_json, poly_to_json
from jumping.scenarios import (
    PROFILES,
    Bounds,
    Scenario,
    generate,
    load_scenario,
    run,
    verify_all,
)


def json_serializer(obj: Any) -> Any:
    """JSON serializer for objects not serializable by default.

    Rationals are written as "num/den" strings, never decimals.
    """
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, (LaurentBiPoly, PowerSeries)):
        return poly_to_json(obj)
    if hasattr(obj, "value"):  # Enum
        return obj.value
    raise TypeError(f"Object of type {type(obj)} is not JSON serializable")


def read_json(source: str) -> Any:
    """Decode a JSON argument given as a file path, '-' for stdin, or inline text.

    Raises:
        DomainError: If the text is not valid JSON or the file cannot be read
    """
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith(("{", "[")):
        text = source
    else:
        try:
            text = Path(source).read_text()
        except OSError as e:
            raise DomainError(f"cannot read {source}: {e.strerror}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DomainError(f"invalid JSON: {e}") from e


def _text_lines(report: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(report, dict):
        if set(report) == {"terms"}:
            return [f"{pad}{poly_from_json(report)}"]
        for key, val in report.items():
            if isinstance(val, (dict, list)) and val and not _is_flat(val):
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(val, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_inline(val)}")
    elif isinstance(report, list):
        for item in report:
            sub = _text_lines(item, indent + 1)
            lines.append(f"{pad}- {sub[0].strip()}")
            lines.extend(sub[1:])
    else:
        lines.append(f"{pad}{report}")
    return lines


def _is_flat(val: Any) -> bool:
    if isinstance(val, dict):
        return set(val) == {"terms"}
    return all(not isinstance(v, (dict, list)) for v in val)


def _inline(val: Any) -> str:
    if isinstance(val, dict) and set(val) == {"terms"}:
        return str(poly_from_json(val))
    if isinstance(val, list):
        return ", ".join("-" if v is None else str(v) for v in val) or "(none)"
    if val is None:
        return "-"
    return str(val)


def format_report(report: Any) -> str:
    """Format a report for plain text output, one field per line."""
    return "\n".join(_text_lines(report))


def emit(ctx: click.Context, report: Any) -> None:
    """Write a report to --out or stdout in the selected format."""
    if ctx.obj["format"] == "json":
        text = json.dumps(report, default=json_serializer, indent=2)
    else:
        text = format_report(report)
    out = ctx.obj["out"]
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def fail(exc: JumpingError) -> None:
    """Write a structured error to stderr and exit with its code."""
    click.echo(json.dumps(exc.to_dict()), err=True)
    sys.exit(exc.exit_code)


def _execute(ctx: click.Context, scenario: Scenario) -> None:
    try:
        report = run(scenario, ctx.obj["bounds"])
    except JumpingError as e:
        fail(e)
    emit(ctx, report)


def _payload_scenario(kind: str, payload: dict) -> Scenario:
    return load_scenario({"kind": kind, "payload": payload})


@click.group()
@click.version_option(version=jumping.__version__)
@click.option(
    "--max-level",
    type=click.IntRange(min=1),
    envvar="JUMPING_MAX_LEVEL",
    help="Highest level to build or search (default: 6)",
)
@click.option(
    "--precision",
    type=click.IntRange(min=1),
    envvar="JUMPING_PRECISION",
    help="Truncation order of power series (default: 12)",
)
@click.option(
    "--step-bound",
    type=click.IntRange(min=1),
    envvar="JUMPING_STEP_BOUND",
    help="Maximum descent iterations (default: 10)",
)
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["text", "json"]),
    default="text",
    help="Report format",
)
@click.option("--out", type=click.Path(dir_okay=False), help="Write the report to a file")
@click.option("--verbose", "-v", count=True, help="Log to stderr (-v info, -vv debug)")
@click.pass_context
def cli(
    ctx: click.Context,
    max_level: int | None,
    precision: int | None,
    step_bound: int | None,
    output_format: str,
    out: str | None,
    verbose: int,
) -> None:
    """Jumping polynomials, quadratic transforms and monomialization.

    SPEC, POLY and SCENARIO arguments are JSON file paths, '-' for stdin,
    or inline JSON.

    \b
    Examples:
      jumping genseq '{"pairs": [[5, 3], [1, 2]], "lambdas": ["1", "1"]}'
      jumping value spec.json --f '{"terms": [[0, 1, "1"]]}'
      jumping --precision 16 transform spec.json
      jumping --format json monomialize scenario.json
      jumping verify --generate descent --count 20 --jobs 4
    """
    ctx.ensure_object(dict)
    if verbose:
        logging.basicConfig(
            level=logging.DEBUG if verbose > 1 else logging.INFO,
            stream=sys.stderr,
            format="%(levelname)s %(name)s: %(message)s",
        )
    ctx.obj["bounds"] = Bounds(max_level=max_level, precision=precision, step_bound=step_bound)
    ctx.obj["format"] = output_format
    ctx.obj["out"] = out


@cli.command()
@click.argument("spec")
@click.option("--level", type=click.IntRange(min=1), help="Build T_0..T_{level+1} only")
@click.pass_context
def genseq(ctx: click.Context, spec: str, level: int | None) -> None:
    """Build the jumping polynomials of SPEC."""
    try:
        scenario = _payload_scenario("genseq", {"spec": read_json(spec), "level": level})
    except JumpingError as e:
        fail(e)
    _execute(ctx, scenario)


@cli.command()
@click.argument("spec")
@click.option("--f", "poly", required=True, help="Polynomial as JSON terms")
@click.pass_context
def value(ctx: click.Context, spec: str, poly: str) -> None:
    """Compute the value of a polynomial under SPEC."""
    try:
        scenario = _payload_scenario("value", {"spec": read_json(spec), "f": read_json(poly)})
    except JumpingError as e:
        fail(e)
    _execute(ctx, scenario)


@cli.command()
@click.argument("spec")
@click.option("--level", type=click.IntRange(min=0), help="Stop at checkpoint LEVEL")
@click.pass_context
def transform(ctx: click.Context, spec: str, level: int | None) -> None:
    """Trace the quadratic transforms along SPEC and verify each checkpoint."""
    try:
        scenario = _payload_scenario("transform", {"spec": read_json(spec), "level": level})
    except JumpingError as e:
        fail(e)
    _execute(ctx, scenario)


@cli.command()
@click.argument("scenario")
@click.pass_context
def monomialize(ctx: click.Context, scenario: str) -> None:
    """Run the descent on an extension u = x^t delta, v = y.

    SCENARIO is either a full scenario or just its payload:
    {"t", "delta", "spec", "level_bound", "step_bound", "precision"}.
    """
    try:
        data = read_json(scenario)
        if isinstance(data, dict) and "kind" not in data:
            data = {"kind": "monomialize", "payload": data}
        parsed = load_scenario(data)
    except JumpingError as e:
        fail(e)
    _execute(ctx, parsed)


@cli.command()
@click.argument("scenarios", nargs=-1)
@click.option("--generate", "profile", type=click.Choice(PROFILES), help="Add generated scenarios")
@click.option("--count", type=click.IntRange(min=0), default=10, help="Generated scenarios")
@click.option("--seed", type=int, default=0, help="First generator seed")
@click.option("--jobs", "-j", type=click.IntRange(min=1), default=1, help="Worker processes")
@click.pass_context
def verify(
    ctx: click.Context,
    scenarios: tuple[str, ...],
    profile: str | None,
    count: int,
    seed: int,
    jobs: int,
) -> None:
    """Verify scenario files and generated scenarios.

    Exits with 2 if any scenario fails.

    \b
    Examples:
      jumping verify a.json b.json
      jumping verify --generate arithmetic --count 200 --jobs 4
    """
    try:
        batch = [load_scenario(read_json(s)) for s in scenarios]
        if profile:
            batch.extend(generate(seed + n, profile) for n in range(count))
    except JumpingError as e:
        fail(e)
    if not batch:
        raise click.UsageError("give scenario files or --generate")
    results = verify_all(batch, jobs=jobs, overrides=ctx.obj["bounds"])
    failed = [r for r in results if not r["ok"]]
    emit(
        ctx,
        {"kind": "verify", "total": len(results), "failed": len(failed), "results": results},
    )
    if failed:
        sys.exit(2)


@cli.command(name="generate")
@click.argument("profile", type=click.Choice(PROFILES))
@click.option("--seed", type=int, default=0, help="Generator seed")
@click.pass_context
def generate_command(ctx: click.Context, profile: str, seed: int) -> None:
    """Print a reproducible random scenario for PROFILE."""
    try:
        scenario = generate(seed, profile)
    except JumpingError as e:
        fail(e)
    out = ctx.obj["out"]
    text = json.dumps(scenario.model_dump(mode="json"), indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)
