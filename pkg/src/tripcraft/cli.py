"""Command-line interface.

Verbs: synth (demo data), convert (raw document -> CSV), plan (run the
solver for one query), evaluate (one run), loop (automated iteration),
report (Table-style text or CSV), serve (HTTP API + dashboard).

Exit codes: 0 success, 2 validation error, 3 backend failure, 4 storage failure.
"""

from __future__ import annotations

import sys
from decimal import Decimal
from pathlib import Path

import click

from . import ingest, synth
from .backends import BackendConfig, BackendError, MOCK_FAULTS
from .ingest import IngestError
from .orchestrator import Orchestrator, ParseFailure, SplitNotAllowed, UnknownQuery
from .promptgen import DEFAULT_EPS, ExemplarInvariantViolation
from .solver import CapExceeded, Infeasible, SearchConfig, generate_plan
from .store import StorageError, UnknownRun

EXIT_VALIDATION = 2
EXIT_BACKEND = 3
EXIT_STORAGE = 4

_VALIDATION_ERRORS = (
    IngestError,
    ValueError,
    UnknownRun,
    UnknownQuery,
    ParseFailure,
    SplitNotAllowed,
    ExemplarInvariantViolation,
    CapExceeded,
    FileNotFoundError,
)


def _run(func):
    """Map domain errors onto the documented exit codes."""
    try:
        func()
    except BackendError as exc:
        click.echo(f"backend failure: {exc}", err=True)
        sys.exit(EXIT_BACKEND)
    except StorageError as exc:
        click.echo(f"storage failure: {exc}", err=True)
        sys.exit(EXIT_STORAGE)
    except _VALIDATION_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _parse_faults(pairs: tuple[str, ...]) -> dict[str, float]:
    profile: dict[str, float] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"--fault expects id=probability, got {pair!r}")
        cid, _, raw = pair.partition("=")
        profile[cid.strip()] = float(raw)
    return profile


def _backend_config(backend, seed, faults, prompt_sensitive, endpoint, model, credential_env):
    if backend == "mock":
        return BackendConfig(
            kind="scripted-mock",
            fault_profile=_parse_faults(faults),
            seed=seed,
            prompt_sensitive=prompt_sensitive,
        )
    return BackendConfig(
        kind="http-llm",
        endpoint=endpoint or "",
        model=model or "",
        credential_env=credential_env,
    )


_backend_options = [
    click.option("--backend", type=click.Choice(["mock", "http"]), default="mock", show_default=True),
    click.option("--seed", type=int, default=0, show_default=True, help="Mock fault seed."),
    click.option(
        "--fault",
        "faults",
        multiple=True,
        help=f"Mock fault as id=probability; ids: {', '.join(sorted(MOCK_FAULTS))}.",
    ),
    click.option("--prompt-sensitive", is_flag=True, help="Mock suppresses faults named in prompt exemplars."),
    click.option("--endpoint", default=None, help="http backend: chat-completions URL."),
    click.option("--model", default=None, help="http backend: model name."),
    click.option("--credential-env", default="TRIPCRAFT_API_KEY", show_default=True),
]


def _with_backend_options(cmd):
    for option in reversed(_backend_options):
        cmd = option(cmd)
    return cmd


@click.group()
def main() -> None:
    """Travel-plan evaluation, synthesis, and prompt-refinement tooling."""


@main.command("synth")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--train", "n_train", type=int, default=45, show_default=True)
@click.option("--validation", "n_validation", type=int, default=180, show_default=True)
def synth_cmd(out_dir: Path, seed: int, n_train: int, n_validation: int) -> None:
    """Generate a solvable demo dataset (queries + reference data)."""

    def go() -> None:
        queries_path, reference_dir = synth.write_demo_dataset(out_dir, seed, n_train, n_validation)
        click.echo(f"wrote {queries_path} and {reference_dir}/")

    _run(go)


@main.command("convert")
@click.option("--input", "raw_path", type=click.Path(path_type=Path, exists=True), required=True,
              help="Raw reference document (JSON mapping category -> CSV text).")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
def convert_cmd(raw_path: Path, out_dir: Path) -> None:
    """Convert a raw nested reference document into canonical CSV files."""

    def go() -> None:
        doc = ingest.load_raw_document(raw_path)
        paths = ingest.convert_reference_to_csv(doc, out_dir)
        for path in paths:
            click.echo(str(path))

    _run(go)


@main.command("plan")
@click.option("--data-dir", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--query-id", required=True)
@click.option("--strategy", type=click.Choice(["greedy", "beam", "exhaustive"]), default="beam",
              show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Write the plan text here instead of stdout.")
def plan_cmd(data_dir: Path, query_id: str, strategy: str, out_path: Path | None) -> None:
    """Solve one query and print the plan in the canonical grammar."""

    def go() -> None:
        bundle = ingest.parse_reference_csv(data_dir / "reference")
        queries = {q.id: q for q in ingest.load_queries(data_dir / "queries.jsonl")}
        if query_id not in queries:
            raise UnknownQuery(query_id)
        result = generate_plan(queries[query_id], bundle, SearchConfig(strategy=strategy))
        if isinstance(result, Infeasible):
            click.echo(f"infeasible ({result.constraint_id}): {result.explanation}", err=True)
            sys.exit(EXIT_VALIDATION)
        text = ingest.render_plan_text(result)
        if out_path is not None:
            out_path.write_text(text, encoding="utf-8")
            click.echo(str(out_path))
        else:
            click.echo(text, nl=False)

    _run(go)


@main.command("evaluate")
@click.option("--data-dir", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--split", type=click.Choice(["train", "validation"]), default="train", show_default=True)
@click.option("--revision", type=int, default=None, help="Prompt revision index (default: latest).")
@_with_backend_options
def evaluate_cmd(data_dir, out_dir, split, revision, backend, seed, faults, prompt_sensitive,
                 endpoint, model, credential_env) -> None:
    """Run one evaluation and print its report table."""

    def go() -> None:
        cfg = _backend_config(backend, seed, faults, prompt_sensitive, endpoint, model, credential_env)
        orch = Orchestrator(data_dir, out_dir)
        record = orch.run_evaluation(split, revision, cfg)
        click.echo(orch.render_run_table(record.run_id), nl=False)
        click.echo(f"run id: {record.run_id}")

    _run(go)


@main.command("loop")
@click.option("--data-dir", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--split", type=click.Choice(["train", "validation"]), default="train", show_default=True)
@click.option("--eps", type=str, default=str(DEFAULT_EPS), show_default=True,
              help="Convergence threshold in percentage points.")
@click.option("--max-iters", type=int, default=5, show_default=True)
@_with_backend_options
def loop_cmd(data_dir, out_dir, split, eps, max_iters, backend, seed, faults, prompt_sensitive,
             endpoint, model, credential_env) -> None:
    """Run the automated evaluate/correct/revise iteration until convergence."""

    def go() -> None:
        cfg = _backend_config(backend, seed, faults, prompt_sensitive, endpoint, model, credential_env)
        orch = Orchestrator(data_dir, out_dir)
        records = orch.run_loop(max_iters=max_iters, eps=Decimal(eps), split=split, backend_cfg=cfg)
        prev = None
        for record in records:
            click.echo(f"revision {record.revision_index} -> {record.run_id}")
            click.echo(orch.render_run_table(record.run_id, prev), nl=False)
            prev = record.run_id
        click.echo(f"{len(records)} iteration(s)")

    _run(go)


@main.command("report")
@click.option("--out", "out_dir", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--data-dir", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--run-id", default=None, help="Default: the most recent run.")
@click.option("--prev", "prev_run_id", default=None, help="Baseline run for delta columns.")
@click.option("--csv", "as_csv", is_flag=True, help="Emit a CSV row instead of the table.")
def report_cmd(out_dir, data_dir, run_id, prev_run_id, as_csv) -> None:
    """Render a stored run as a pass-rate table (or CSV row)."""

    def go() -> None:
        orch = Orchestrator(data_dir, out_dir)
        target = run_id
        if target is None:
            runs = orch.store.list_runs()
            if not runs:
                raise UnknownRun("(no runs recorded)")
            target = runs[-1].run_id
        if as_csv:
            click.echo(orch.render_run_csv(target), nl=False)
        else:
            click.echo(orch.render_run_table(target, prev_run_id), nl=False)

    _run(go)


@main.command("serve")
@click.option("--data-dir", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8300, show_default=True)
@click.option("--frontend-dist", type=click.Path(path_type=Path), default=None,
              help="Static dashboard directory (default: ./frontend/dist if present).")
def serve_cmd(data_dir, out_dir, host, port, frontend_dist) -> None:
    """Serve the triage HTTP API (and the dashboard, when built)."""

    def go() -> None:
        import uvicorn

        from .service import create_app

        orch = Orchestrator(data_dir, out_dir)
        app = create_app(orch, frontend_dist)
        uvicorn.run(app, host=host, port=port, log_level="info")

    _run(go)


if __name__ == "__main__":
    main()
