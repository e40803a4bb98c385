"""Command-line client for the evaluation service.

The CLI reads chart files as raw text and posts them to the service; by
default an in-process application instance handles the request, and
--server targets a remote instance with the same API. Parsing, scoring,
and report assembly always happen service-side, so both paths produce
byte-identical reports.

Exit codes: 0 success, 1 usage error, 2 ground-truth or input-data
failure, 3 internal or transport error.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click
import httpx

from .engine import ALL_METRICS, DEFAULT_GROUP_BY
from .reporting import write_csv_exports
from .tables import CorpusError, read_dir_texts
from .version import __version__

__all__ = ["cli", "main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

_ERROR_KIND_CODES = {"usage": EXIT_USAGE, "data": EXIT_DATA}


class _ExitWith(Exception):
    """Terminate the command with a specific exit code and message."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _post(path: str, payload: dict, server: str | None) -> httpx.Response:
    async def go() -> httpx.Response:
        if server:
            transport = None
            base_url = server
        else:
            from .service.app import create_app

            transport = httpx.ASGITransport(
                app=create_app(), raise_app_exceptions=False
            )
            base_url = "http://curvescore.local"
        async with httpx.AsyncClient(
            transport=transport, base_url=base_url, timeout=600.0
        ) as client:
            return await client.post(path, json=payload)

    try:
        return asyncio.run(go())
    except httpx.HTTPError as exc:
        raise _ExitWith(EXIT_INTERNAL, f"service request failed: {exc}") from exc


def _error_details(resp: httpx.Response) -> tuple[int, str]:
    try:
        body = resp.json()
    except ValueError:
        return EXIT_INTERNAL, f"HTTP {resp.status_code}: {resp.text[:200]}"
    if resp.status_code == 422:
        return EXIT_USAGE, f"invalid request: {json.dumps(body.get('detail'))[:500]}"
    error = body.get("error") if isinstance(body, dict) else None
    if isinstance(error, dict):
        kind = error.get("kind", "internal")
        message = error.get("message", "unknown error")
        return _ERROR_KIND_CODES.get(kind, EXIT_INTERNAL), message
    return EXIT_INTERNAL, f"HTTP {resp.status_code}: {resp.text[:200]}"


def _deliver(resp: httpx.Response, out: str, report_format: str) -> None:
    if resp.status_code != 200:
        code, message = _error_details(resp)
        raise _ExitWith(code, message)
    text = resp.text
    if report_format == "csv":
        if out == "-":
            raise _ExitWith(
                EXIT_USAGE,
                "--report-format csv writes one file per section; "
                "--out must name a directory, not -",
            )
        written = write_csv_exports(json.loads(text), out)
        click.echo(f"wrote {', '.join(p.name for p in written)} under {out}")
        return
    if out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _dir_name(directory: str) -> str:
    return Path(directory).name or Path(directory).resolve().name or "corpus"


def _parse_corpus_spec(spec: str) -> tuple[str, str]:
    """Split an optionally tagged ``name=dir`` corpus argument.

    A plain directory keeps its basename as the corpus name. The tag form
    wins only when the part before ``=`` looks like a name rather than a
    path fragment.
    """
    name, sep, rest = spec.partition("=")
    if sep and name and "/" not in name and "\\" not in name:
        return name, rest
    return _dir_name(spec), spec


def _corpus_payload(directory: str, fmt: str, name: str | None = None) -> dict:
    try:
        files = read_dir_texts(directory, fmt)
    except CorpusError as exc:
        raise _ExitWith(EXIT_DATA, str(exc)) from exc
    return {"name": name or _dir_name(directory), "files": files, "fmt": fmt}


def _metadata_payload(meta_path: str | None) -> dict | None:
    if meta_path is None:
        return None
    path = Path(meta_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _ExitWith(EXIT_DATA, f"cannot read metadata file: {exc}") from exc
    fmt = "json" if path.suffix.lower() == ".json" else "csv"
    return {"text": text, "fmt": fmt}


def _split_list(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _params(theta: float, lam: float, nls_threshold: float) -> dict:
    return {"theta": theta, "lambda": lam, "nls_threshold": nls_threshold}


def _common_options(fn):
    options = [
        click.option("--format", "fmt", type=click.Choice(["tsv", "csv"]),
                     default="tsv", show_default=True,
                     help="Chart table file format."),
        click.option("--meta", "meta_path", default=None,
                     help="Metadata sidecar file (.json or .csv) with chart tags."),
        click.option("--theta", type=float, default=0.01, show_default=True,
                     help="Relative tolerance for value agreement."),
        click.option("--lambda", "lam", type=float, default=1.0, show_default=True,
                     help="Gap penalty for inserted/deleted points."),
        click.option("--nls-threshold", type=float, default=0.5, show_default=True,
                     help="Series label similarity required for a match."),
        click.option("--group-by", default=",".join(DEFAULT_GROUP_BY),
                     show_default=True, help="Comma-separated strata tags."),
        click.option("--out", "-o", default="-", show_default=True,
                     help="Report path (JSON), or directory (CSV); - for stdout."),
        click.option("--report-format", type=click.Choice(["json", "csv"]),
                     default="json", show_default=True,
                     help="Single JSON report, or one CSV file per section."),
        click.option("--fixed-clock", is_flag=True,
                     help="Pin the report timestamp for reproducible output."),
        click.option("--server", default=None,
                     help="Remote service URL; default runs in-process."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _corpus_mode_options(fn):
    options = [
        click.option("--ground-truth", "-g", "ground_truth", required=True,
                     help="Directory of ground-truth chart tables."),
        click.option("--predictions", "-p", "predictions", multiple=True,
                     required=True,
                     help="Predicted chart tables: DIR or NAME=DIR (repeatable)."),
        click.option("--jobs", type=int, default=1, show_default=True,
                     help="Worker threads for chart scoring."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _corpus_request(ground_truth: str, predictions: tuple[str, ...], fmt: str,
                    meta_path: str | None, theta: float, lam: float,
                    nls_threshold: float, group_by: str, jobs: int,
                    fixed_clock: bool) -> dict:
    tagged = [_parse_corpus_spec(p) for p in predictions]
    return {
        "ground_truth": _corpus_payload(ground_truth, fmt),
        "predictions": [
            _corpus_payload(directory, fmt, name) for name, directory in tagged
        ],
        "params": _params(theta, lam, nls_threshold),
        "group_by": _split_list(group_by),
        "metadata": _metadata_payload(meta_path),
        "jobs": jobs,
        "fixed_clock": fixed_clock,
    }


@click.group()
@click.version_option(__version__, prog_name="curvescore")
def cli() -> None:
    """Corpus-scale scoring of time-series data extracted from charts."""


@cli.command()
@_corpus_mode_options
@click.option("--metrics", default=",".join(ALL_METRICS), show_default=True,
              help="Comma-separated metric selection.")
@_common_options
def evaluate(ground_truth, predictions, jobs, metrics, fmt, meta_path, theta,
             lam, nls_threshold, group_by, out, report_format, fixed_clock,
             server):
    """Score prediction corpora against ground truth."""
    payload = _corpus_request(ground_truth, predictions, fmt, meta_path, theta,
                              lam, nls_threshold, group_by, jobs, fixed_clock)
    payload["metrics"] = _split_list(metrics)
    _deliver(_post("/evaluate", payload, server), out, report_format)


@cli.command()
@_corpus_mode_options
@_common_options
def decompose(ground_truth, predictions, jobs, fmt, meta_path, theta, lam,
              nls_threshold, group_by, out, report_format, fixed_clock, server):
    """Break chart-level error into its seven components."""
    payload = _corpus_request(ground_truth, predictions, fmt, meta_path, theta,
                              lam, nls_threshold, group_by, jobs, fixed_clock)
    _deliver(_post("/decompose", payload, server), out, report_format)


@cli.command()
@_corpus_mode_options
@_common_options
def sweep(ground_truth, predictions, jobs, fmt, meta_path, theta, lam,
          nls_threshold, group_by, out, report_format, fixed_clock, server):
    """Score sensitivity across the hyperparameter grids."""
    payload = _corpus_request(ground_truth, predictions, fmt, meta_path, theta,
                              lam, nls_threshold, group_by, jobs, fixed_clock)
    _deliver(_post("/sweep", payload, server), out, report_format)


@cli.command()
@_corpus_mode_options
@_common_options
def downstream(ground_truth, predictions, jobs, fmt, meta_path, theta, lam,
               nls_threshold, group_by, out, report_format, fixed_clock,
               server):
    """Epidemiological statistics and metric correlations per series."""
    payload = _corpus_request(ground_truth, predictions, fmt, meta_path, theta,
                              lam, nls_threshold, group_by, jobs, fixed_clock)
    _deliver(_post("/downstream", payload, server), out, report_format)


@cli.command()
@click.option("--reference", "-a", required=True,
              help="Reference extraction outputs: DIR or NAME=DIR.")
@click.option("--candidate", "-b", required=True,
              help="Candidate extraction outputs: DIR or NAME=DIR.")
@_common_options
def agreement(reference, candidate, fmt, meta_path, theta, lam, nls_threshold,
              group_by, out, report_format, fixed_clock, server):
    """Inter-system agreement between two extraction outputs."""
    ref_name, ref_dir = _parse_corpus_spec(reference)
    cand_name, cand_dir = _parse_corpus_spec(candidate)
    payload = {
        "reference": _corpus_payload(ref_dir, fmt, ref_name),
        "candidate": _corpus_payload(cand_dir, fmt, cand_name),
        "params": _params(theta, lam, nls_threshold),
        "group_by": _split_list(group_by),
        "metadata": _metadata_payload(meta_path),
        "fixed_clock": fixed_clock,
    }
    _deliver(_post("/agreement", payload, server), out, report_format)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the evaluation service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


@cli.command()
@click.option("--out-dir", required=True, help="Directory to write the suite into.")
@click.option("--format", "fmt", type=click.Choice(["tsv", "csv"]),
              default="tsv", show_default=True)
def synth(out_dir: str, fmt: str) -> None:
    """Write the built-in synthetic validation suite to disk."""
    from .synthetic import validation_suite, write_corpus, write_metadata

    gt, preds = validation_suite()
    base = Path(out_dir)
    write_corpus(gt, base / "ground_truth", fmt)
    write_metadata(gt, base / "metadata.json")
    for name, corpus in preds.items():
        write_corpus(corpus, base / name, fmt)
    click.echo(f"wrote ground_truth, {', '.join(preds)}, metadata.json under {base}")


def main(argv: list[str] | None = None) -> int:
    """Entry point returning a process exit code."""
    try:
        cli.main(args=argv, prog_name="curvescore", standalone_mode=False)
    except _ExitWith as exc:
        click.echo(f"error: {exc.message}", err=True)
        return exc.code
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return EXIT_USAGE
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
