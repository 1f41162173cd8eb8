"""HTTP API for the triage workflow.

Thin JSON layer over the Orchestrator: browse runs and failures, submit
exemplars, cut revisions, and trigger evaluations. Evaluations run
asynchronously in a small worker pool; POST /runs returns a handle whose
status is pollable via GET /runs/{id}. The triage dashboard (when built) is
served statically from frontend/dist.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .backends import BackendConfig
from .orchestrator import Orchestrator, ParseFailure, SplitNotAllowed, UnknownQuery
from .promptgen import ExemplarInvariantViolation, UnknownExemplar
from .store import RunRecord, UnknownRun


class BackendRequest(BaseModel):
    kind: str = "scripted-mock"
    fault_profile: dict[str, float] = Field(default_factory=dict)
    seed: int = 0
    prompt_sensitive: bool = False
    endpoint: str = ""
    model: str = ""
    timeout_s: float = 60.0
    max_retries: int = 3
    credential_env: str = "TRIPCRAFT_API_KEY"

    def to_config(self) -> BackendConfig:
        return BackendConfig(
            kind=self.kind,
            fault_profile=dict(self.fault_profile),
            seed=self.seed,
            prompt_sensitive=self.prompt_sensitive,
            endpoint=self.endpoint,
            model=self.model,
            timeout_s=self.timeout_s,
            max_retries=self.max_retries,
            credential_env=self.credential_env,
        )


class RunRequest(BaseModel):
    split: str = "train"
    revision: Optional[int] = None
    backend: BackendRequest = Field(default_factory=BackendRequest)


class ExemplarRequest(BaseModel):
    run_id: str
    query_id: str
    corrected_plan_text: str
    note: str = ""
    idempotency_key: Optional[str] = None


class RevisionRequest(BaseModel):
    exemplar_ids: list[str]
    rule_blocks: Optional[list[str]] = None


def _run_summary(record: RunRecord) -> dict:
    return {
        "run_id": record.run_id,
        "timestamp": record.timestamp,
        "split": record.split,
        "revision_index": record.revision_index,
        "backend_fingerprint": record.backend_fingerprint,
        "n_plans": record.n_plans,
        "rates": record.rates,
        "status": record.status,
        "error": record.error,
    }


def create_app(orchestrator: Orchestrator, frontend_dist: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="tripcraft", version="0.1.0")
    jobs: dict[str, dict] = {}
    jobs_lock = threading.Lock()
    executor = ThreadPoolExecutor(max_workers=2)

    def job_state(run_id: str) -> Optional[dict]:
        with jobs_lock:
            state = jobs.get(run_id)
            return dict(state) if state else None

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/api/registry")
    def registry() -> dict:
        return {"constraints": orchestrator.registry.manifest()}

    @app.get("/api/runs")
    def list_runs() -> dict:
        done = [_run_summary(r) for r in orchestrator.store.list_runs()]
        with jobs_lock:
            pending = [
                {"run_id": rid, "status": state["status"], "error": state.get("error")}
                for rid, state in jobs.items()
                if state["status"] != "done"
            ]
        return {"runs": done + pending}

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str) -> dict:
        state = job_state(run_id)
        if state is not None and state["status"] != "done":
            return {"run_id": run_id, "status": state["status"], "error": state.get("error")}
        try:
            record = orchestrator.store.get_run(run_id)
        except UnknownRun:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")
        return _run_summary(record)

    @app.get("/api/runs/{run_id}/failures")
    def run_failures(run_id: str) -> dict:
        try:
            groups = orchestrator.list_failures(run_id)
        except UnknownRun:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")
        return {
            "run_id": run_id,
            "groups": [
                {
                    "constraint_id": g.constraint_id,
                    "category": g.category,
                    "count": g.count,
                    "items": [
                        {
                            "query_id": item.query_id,
                            "plan_text": item.plan_text,
                            "delivered": item.delivered,
                            "message": item.message,
                            "evidence": [list(e) for e in item.evidence],
                        }
                        for item in g.items
                    ],
                }
                for g in groups
            ],
        }

    @app.get("/api/queries/{query_id}")
    def get_query(query_id: str) -> dict:
        try:
            q = orchestrator.get_query(query_id)
        except UnknownQuery:
            raise HTTPException(status_code=404, detail=f"unknown query {query_id}")
        from .ingest import query_to_dict

        return query_to_dict(q)

    @app.post("/api/runs", status_code=202)
    def trigger_run(request: RunRequest) -> dict:
        try:
            cfg = request.backend.to_config()
            cfg.validate()
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        run_id = orchestrator.store.allocate_run_id()
        with jobs_lock:
            jobs[run_id] = {"status": "running"}

        def execute() -> None:
            try:
                orchestrator.run_evaluation(
                    request.split, request.revision, cfg, run_id=run_id
                )
                with jobs_lock:
                    jobs[run_id] = {"status": "done"}
            except Exception as exc:  # captured into the handle, not raised
                with jobs_lock:
                    jobs[run_id] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}

        executor.submit(execute)
        return {"run_id": run_id, "status": "running"}

    @app.post("/api/exemplars")
    def submit_exemplar(request: ExemplarRequest) -> dict:
        try:
            exemplar_id = orchestrator.submit_exemplar(
                request.run_id,
                request.query_id,
                request.corrected_plan_text,
                request.note,
                idempotency_key=request.idempotency_key,
            )
        except UnknownRun as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except UnknownQuery as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ParseFailure as exc:
            raise HTTPException(
                status_code=422,
                detail={"error": "parse-failure", "reason": exc.reason},
            )
        except ExemplarInvariantViolation as exc:
            raise HTTPException(
                status_code=422,
                detail={
                    "error": "exemplar-invariant-violation",
                    "still_failing": list(exc.still_failing),
                },
            )
        except SplitNotAllowed as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"exemplar_id": exemplar_id}

    @app.post("/api/revisions")
    def create_revision(request: RevisionRequest) -> dict:
        try:
            revision = orchestrator.create_revision(request.exemplar_ids, request.rule_blocks)
        except UnknownExemplar as exc:
            raise HTTPException(status_code=404, detail=f"unknown exemplar: {exc}")
        except ExemplarInvariantViolation as exc:
            raise HTTPException(
                status_code=422,
                detail={
                    "error": "exemplar-invariant-violation",
                    "still_failing": list(exc.still_failing),
                },
            )
        return {
            "revision_index": revision.index,
            "parent": revision.parent,
            "exemplar_ids": list(revision.exemplar_ids),
        }

    @app.get("/api/revisions")
    def list_revisions() -> dict:
        return {
            "revisions": [
                {
                    "index": r.index,
                    "parent": r.parent,
                    "exemplar_ids": list(r.exemplar_ids),
                    "metrics_snapshot": r.metrics_snapshot,
                }
                for r in orchestrator.ledger.revisions
            ]
        }

    @app.get("/api/revisions/{index}/prompt", response_class=PlainTextResponse)
    def revision_prompt(index: int, query_id: Optional[str] = None) -> str:
        try:
            orchestrator.ensure_r0()
            if query_id is None:
                queries = sorted(orchestrator.queries)
                if not queries:
                    raise HTTPException(status_code=404, detail="no queries loaded")
                query_id = queries[0]
            return orchestrator.render_prompt_for(index, orchestrator.get_query(query_id))
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown revision {index}")

    @app.get("/api/timeline")
    def timeline() -> dict:
        """Per-revision rates for train-split runs, in revision order."""
        records = [r for r in orchestrator.store.list_runs() if r.status == "done"]
        by_revision: dict[int, RunRecord] = {}
        for record in sorted(records, key=lambda r: r.run_id):
            if record.split == "train":
                by_revision[record.revision_index] = record
        points = []
        for index in sorted(by_revision):
            record = by_revision[index]
            points.append(
                {
                    "revision_index": index,
                    "run_id": record.run_id,
                    "rates": record.rates,
                }
            )
        converged = None
        for prev, cur in zip(points, points[1:]):
            try:
                a = orchestrator.load_report(prev["run_id"])
                b = orchestrator.load_report(cur["run_id"])
                from .promptgen import check_convergence

                if check_convergence(a, b):
                    converged = cur["revision_index"]
                    break
            except Exception:
                continue
        return {"points": points, "converged_at": converged}

    dist = frontend_dist if frontend_dist is not None else Path("frontend/dist")
    if dist.is_dir():
        app.mount("/", StaticFiles(directory=str(dist), html=True), name="ui")

    return app
