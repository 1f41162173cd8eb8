"""On-disk persistence for evaluation runs.

Per-plan artifacts (prompts, raw agent text, parsed plans, outcome lists)
live in a content-addressed object directory; run records live in a single
JSON index. Objects are written before the index is updated and both writes
are atomic, so a run becomes visible only once its artifacts are durable.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .constraints import ConstraintOutcome, Evidence


class StorageError(Exception):
    pass


class UnknownRun(KeyError):
    def __init__(self, run_id: str):
        super().__init__(f"unknown run {run_id!r}")
        self.run_id = run_id


def outcomes_to_jsonable(outcomes) -> list[dict]:
    return [
        {
            "constraint_id": o.constraint_id,
            "category": o.category,
            "status": o.status,
            "message": o.message,
            "evidence": [[e.day, e.field, e.detail] for e in o.evidence],
        }
        for o in outcomes
    ]


def outcomes_from_jsonable(data) -> tuple[ConstraintOutcome, ...]:
    return tuple(
        ConstraintOutcome(
            constraint_id=d["constraint_id"],
            category=d["category"],
            status=d["status"],
            message=d["message"],
            evidence=tuple(Evidence(day=e[0], field=e[1], detail=e[2]) for e in d["evidence"]),
        )
        for d in data
    )


@dataclass(frozen=True)
class PlanArtifact:
    """Pointers into the object store for one query's evaluation."""

    query_id: str
    prompt_ref: str
    raw_ref: str
    outcomes_ref: str
    delivered: bool
    parsed_ref: Optional[str] = None  # canonical re-render of the parsed plan
    not_delivered_reason: Optional[str] = None
    backend_error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "prompt_ref": self.prompt_ref,
            "raw_ref": self.raw_ref,
            "outcomes_ref": self.outcomes_ref,
            "delivered": self.delivered,
            "parsed_ref": self.parsed_ref,
            "not_delivered_reason": self.not_delivered_reason,
            "backend_error": self.backend_error,
        }

    @staticmethod
    def from_dict(d: dict) -> "PlanArtifact":
        return PlanArtifact(**d)


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    timestamp: str
    split: str
    backend_fingerprint: str
    revision_index: int
    registry_ids: tuple[str, ...]
    rates: dict[str, str]
    n_plans: int
    plans: tuple[PlanArtifact, ...]
    status: str = "done"  # running | done | failed
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "timestamp": self.timestamp,
            "split": self.split,
            "backend_fingerprint": self.backend_fingerprint,
            "revision_index": self.revision_index,
            "registry_ids": list(self.registry_ids),
            "rates": dict(self.rates),
            "n_plans": self.n_plans,
            "plans": [p.to_dict() for p in self.plans],
            "status": self.status,
            "error": self.error,
        }

    @staticmethod
    def from_dict(d: dict) -> "RunRecord":
        return RunRecord(
            run_id=d["run_id"],
            timestamp=d["timestamp"],
            split=d["split"],
            backend_fingerprint=d["backend_fingerprint"],
            revision_index=d["revision_index"],
            registry_ids=tuple(d["registry_ids"]),
            rates=dict(d["rates"]),
            n_plans=d["n_plans"],
            plans=tuple(PlanArtifact.from_dict(p) for p in d["plans"]),
            status=d.get("status", "done"),
            error=d.get("error"),
        )


def fingerprint(data: dict) -> str:
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


class RunStore:
    """Content-addressed artifact objects plus a single run index file."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.objects_dir = self.root / "objects"
        self.index_path = self.root / "index.json"
        self._lock = threading.Lock()

    # -- objects ------------------------------------------------------------

    def put_text(self, text: str) -> str:
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        path = self.objects_dir / digest[:2] / f"{digest}.txt"
        if path.exists():
            return digest
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(text, encoding="utf-8")
            tmp.replace(path)
        except OSError as exc:
            raise StorageError(f"cannot write object {digest}: {exc}") from exc
        return digest

    def get_text(self, ref: str) -> str:
        path = self.objects_dir / ref[:2] / f"{ref}.txt"
        try:
            return path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageError(f"cannot read object {ref}: {exc}") from exc

    def put_json(self, data) -> str:
        return self.put_text(json.dumps(data, sort_keys=True, indent=1))

    def get_json(self, ref: str):
        return json.loads(self.get_text(ref))

    # -- run index ----------------------------------------------------------

    def _load_index(self) -> dict:
        if not self.index_path.exists():
            return {"next_seq": 1, "runs": []}
        try:
            return json.loads(self.index_path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise StorageError(f"cannot read run index: {exc}") from exc

    def _save_index(self, index: dict) -> None:
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            tmp = self.index_path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(index, indent=2, sort_keys=True), encoding="utf-8")
            tmp.replace(self.index_path)
        except OSError as exc:
            raise StorageError(f"cannot write run index: {exc}") from exc

    def allocate_run_id(self) -> str:
        with self._lock:
            index = self._load_index()
            run_id = f"run-{index['next_seq']:04d}"
            index["next_seq"] += 1
            self._save_index(index)
            return run_id

    def save_run(self, record: RunRecord) -> None:
        """Persist a completed record; artifacts must already be written."""
        with self._lock:
            index = self._load_index()
            index["runs"] = [r for r in index["runs"] if r["run_id"] != record.run_id]
            index["runs"].append(record.to_dict())
            index["runs"].sort(key=lambda r: r["run_id"])
            self._save_index(index)

    def list_runs(self) -> list[RunRecord]:
        index = self._load_index()
        return [RunRecord.from_dict(d) for d in index["runs"]]

    def get_run(self, run_id: str) -> RunRecord:
        for record in self.list_runs():
            if record.run_id == run_id:
                return record
        raise UnknownRun(run_id)
