"""Record real service payloads as JSON fixtures for the dashboard's contract tests.

Runs the evaluation service against a deterministic synthetic dataset,
drives one faulted run and one corrected run, and captures every payload the
dashboard consumes, plus the authoritative delta values for the timeline.

Usage: python3 frontend/scripts/record_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from tripcraft import synth
from tripcraft.backends import BackendConfig
from tripcraft.ingest import render_plan_text
from tripcraft.metrics import RATE_FIELDS, diff_reports
from tripcraft.orchestrator import Orchestrator
from tripcraft.service import create_app
from tripcraft.solver import SearchConfig, generate_plan

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def dump(name: str, payload) -> None:
    path = FIXTURES / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    workdir = Path(tempfile.mkdtemp(prefix="fixture-recording-"))
    try:
        synth.write_demo_dataset(workdir / "data", seed=42, n_train=6, n_validation=2)
        orch = Orchestrator(workdir / "data", workdir / "out")

        fault_cfg = BackendConfig(
            fault_profile={"diverse-attractions": 1.0}, prompt_sensitive=True
        )
        records = orch.run_loop(max_iters=3, split="train", backend_cfg=fault_cfg)
        assert len(records) >= 2, "expected the loop to improve and stop"
        run0, run1 = records[0], records[1]

        app = create_app(orch, frontend_dist=workdir / "missing")
        client = TestClient(app)

        dump("registry.json", client.get("/api/registry").json())
        dump("runs.json", client.get("/api/runs").json())
        dump("run0_summary.json", client.get(f"/api/runs/{run0.run_id}").json())
        dump("run1_summary.json", client.get(f"/api/runs/{run1.run_id}").json())

        failures0 = client.get(f"/api/runs/{run0.run_id}/failures").json()
        dump("failures_run0.json", failures0)
        dump("failures_empty.json", client.get(f"/api/runs/{run1.run_id}/failures").json())
        dump("timeline.json", client.get("/api/timeline").json())

        delta = diff_reports(orch.load_report(run0.run_id), orch.load_report(run1.run_id))
        dump(
            "timeline_expected_deltas.json",
            {name: str(getattr(delta, name)) for name in RATE_FIELDS},
        )

        item = failures0["groups"][0]["items"][0]
        dump("query.json", client.get(f"/api/queries/{item['query_id']}").json())

        q = orch.get_query(item["query_id"])
        corrected = generate_plan(q, orch.bundle, SearchConfig(strategy="beam"))
        corrected_text = render_plan_text(corrected)

        violation = client.post(
            "/api/exemplars",
            json={
                "run_id": run0.run_id,
                "query_id": item["query_id"],
                "corrected_plan_text": item["plan_text"],
            },
        )
        assert violation.status_code == 422
        dump("exemplar_violation_422.json", violation.json())

        parse_failure = client.post(
            "/api/exemplars",
            json={
                "run_id": run0.run_id,
                "query_id": item["query_id"],
                "corrected_plan_text": "not a plan at all",
            },
        )
        assert parse_failure.status_code == 422
        dump("exemplar_parse_failure_422.json", parse_failure.json())

        success = client.post(
            "/api/exemplars",
            json={
                "run_id": run0.run_id,
                "query_id": item["query_id"],
                "corrected_plan_text": corrected_text,
                "note": "recorded fixture correction",
                "idempotency_key": "fixture-key-1",
            },
        )
        assert success.status_code == 200
        dump("exemplar_success.json", success.json())
        dump(
            "exemplar_submission.json",
            {
                "run_id": run0.run_id,
                "query_id": item["query_id"],
                "failed_plan_text": item["plan_text"],
                "corrected_plan_text": corrected_text,
            },
        )

        revision = client.post(
            "/api/revisions", json={"exemplar_ids": [success.json()["exemplar_id"]]}
        )
        assert revision.status_code == 200
        dump("revision_response.json", revision.json())
        dump("revisions.json", client.get("/api/revisions").json())

        prompt = client.get(
            "/api/revisions/1/prompt", params={"query_id": item["query_id"]}
        )
        assert prompt.status_code == 200
        (FIXTURES / "revision1_prompt.txt").write_text(prompt.text, encoding="utf-8")
        print(f"wrote {FIXTURES / 'revision1_prompt.txt'}")
    finally:
        shutil.rmtree(workdir, ignore_errors=True)


if __name__ == "__main__":
    main()
