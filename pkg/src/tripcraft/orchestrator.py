"""Evaluation runs, the refinement loop, and failure triage.

An Orchestrator owns one dataset (queries.jsonl plus reference CSVs) and one
output directory (run store plus prompt ledger). Runs render a prompt per
query, execute the backend batch, parse and check every plan, aggregate
metrics, and persist a complete RunRecord whose report can be recomputed
from its stored artifacts.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Optional, Sequence

from . import ingest, promptgen
from .backends import BackendConfig, run_batch
from .constraints import Registry, check_plan, default_registry
from .ingest import parse_plan, render_plan_text
from .metrics import (
    EvaluationReport,
    PlanEvaluation,
    compute_metrics,
    render_report_csv_row,
    render_report_table,
)
from .model import ReferenceBundle, TravelQuery
from .promptgen import DEFAULT_EPS, Exemplar, PromptLedger, check_convergence
from .solver import Infeasible, SearchConfig, generate_plan
from .store import (
    PlanArtifact,
    RunRecord,
    RunStore,
    fingerprint,
    outcomes_from_jsonable,
    outcomes_to_jsonable,
)


class UnknownQuery(KeyError):
    def __init__(self, query_id: str):
        super().__init__(f"unknown query {query_id!r}")
        self.query_id = query_id


class ParseFailure(ValueError):
    def __init__(self, reason: str):
        super().__init__(f"plan text does not parse: {reason}")
        self.reason = reason


class SplitNotAllowed(ValueError):
    pass


@dataclass(frozen=True)
class FailureItem:
    query_id: str
    plan_text: str
    delivered: bool
    message: str
    evidence: tuple[tuple[int, str, str], ...]


@dataclass(frozen=True)
class FailureGroup:
    constraint_id: str
    category: str
    count: int
    items: tuple[FailureItem, ...]


class Orchestrator:
    def __init__(
        self,
        data_dir: Path | str,
        out_dir: Path | str,
        registry: Optional[Registry] = None,
    ):
        self.data_dir = Path(data_dir)
        self.out_dir = Path(out_dir)
        self.registry = registry if registry is not None else default_registry()
        self.store = RunStore(self.out_dir / "store")
        self.ledger = PromptLedger(self.out_dir / "ledger")
        self._bundle: Optional[ReferenceBundle] = None
        self._queries: Optional[dict[str, TravelQuery]] = None
        self.ledger.load(self.queries)

    # -- dataset ------------------------------------------------------------

    @property
    def bundle(self) -> ReferenceBundle:
        if self._bundle is None:
            self._bundle = ingest.parse_reference_csv(self.data_dir / "reference")
        return self._bundle

    @property
    def queries(self) -> dict[str, TravelQuery]:
        if self._queries is None:
            loaded = ingest.load_queries(self.data_dir / "queries.jsonl")
            self._queries = {q.id: q for q in loaded}
        return self._queries

    def split_queries(self, split: str) -> list[TravelQuery]:
        return [q for q in self.queries.values() if q.split == split]

    def get_query(self, query_id: str) -> TravelQuery:
        if query_id not in self.queries:
            raise UnknownQuery(query_id)
        return self.queries[query_id]

    # -- revisions ----------------------------------------------------------

    def ensure_r0(self) -> promptgen.PromptRevision:
        r0 = self.ledger.init_r0(promptgen.default_rule_blocks(self.registry))
        self._write_prompt_file(r0.index)
        return r0

    def _write_prompt_file(self, index: int) -> None:
        """Persist the revision's rendered prompt (for a representative query)
        beside the ledger for human review."""
        if self.ledger.prompt_path(index).exists():
            return
        query_ids = sorted(self.queries)
        if not query_ids:
            return
        self.ledger.write_prompt_file(
            index, self.render_prompt_for(index, self.queries[query_ids[0]])
        )

    def render_prompt_for(self, revision_index: int, q: TravelQuery) -> str:
        revision = self.ledger.get(revision_index)
        return promptgen.render_prompt(
            revision, q, self.bundle, self.ledger.exemplars, self.registry
        )

    def create_revision(
        self,
        exemplar_ids: Sequence[str],
        rule_blocks_override: Optional[Sequence[str]] = None,
    ) -> promptgen.PromptRevision:
        self.ensure_r0()

        def validate(ex: Exemplar) -> None:
            promptgen.validate_exemplar(ex, self.get_query(ex.query_id), self.bundle, self.registry)

        revision = self.ledger.advance(exemplar_ids, rule_blocks_override, validate=validate)
        self._write_prompt_file(revision.index)
        return revision

    # -- evaluation ---------------------------------------------------------

    def run_evaluation(
        self,
        split: str,
        revision_index: Optional[int] = None,
        backend_cfg: Optional[BackendConfig] = None,
        run_id: Optional[str] = None,
    ) -> RunRecord:
        """Evaluate one split under one prompt revision and persist the run."""
        cfg = backend_cfg if backend_cfg is not None else BackendConfig()
        cfg.validate()
        if cfg.kind == "http-llm":
            # a missing credential dooms every item; fail fast instead of
            # recording a full run of empty outputs
            import os

            from .backends import CredentialMissing

            if not os.environ.get(cfg.credential_env):
                raise CredentialMissing(cfg.credential_env)
        self.ensure_r0()
        if revision_index is None:
            revision_index = self.ledger.latest.index
        revision = self.ledger.get(revision_index)
        queries = self.split_queries(split)

        prompts = {q.id: self.render_prompt_for(revision_index, q) for q in queries}
        items = run_batch(
            queries,
            self.bundle,
            revision,
            cfg,
            self.ledger.exemplars,
            self.registry,
            prompt_for=lambda q: prompts[q.id],
        )

        evaluations: list[PlanEvaluation] = []
        artifacts: list[PlanArtifact] = []
        for q, item in zip(queries, items):
            parsed = parse_plan(item.text, q)
            outcomes = tuple(check_plan(parsed, q, self.bundle, self.registry))
            evaluations.append(
                PlanEvaluation(
                    query_id=q.id,
                    delivered=parsed.delivered,
                    outcomes=outcomes,
                    reason=parsed.reason,
                )
            )
            artifacts.append(
                PlanArtifact(
                    query_id=q.id,
                    prompt_ref=self.store.put_text(prompts[q.id]),
                    raw_ref=self.store.put_text(item.text),
                    parsed_ref=(
                        self.store.put_text(render_plan_text(parsed.plan))
                        if parsed.delivered
                        else None
                    ),
                    outcomes_ref=self.store.put_json(outcomes_to_jsonable(outcomes)),
                    delivered=parsed.delivered,
                    not_delivered_reason=parsed.reason,
                    backend_error=item.error,
                )
            )

        rid = run_id or self.store.allocate_run_id()
        report = compute_metrics(evaluations, run_id=rid)
        record = RunRecord(
            run_id=rid,
            timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            split=split,
            backend_fingerprint=fingerprint(cfg.fingerprint_dict()),
            revision_index=revision_index,
            registry_ids=report.registry_ids,
            rates={name: str(value) for name, value in report.rates().items()},
            n_plans=report.n_plans,
            plans=tuple(artifacts),
            status="done",
        )
        self.store.save_run(record)
        return record

    def load_report(self, run_id: str) -> EvaluationReport:
        """Recompute the run's report from its stored per-plan outcomes."""
        record = self.store.get_run(run_id)
        evaluations = []
        for artifact in record.plans:
            outcomes = outcomes_from_jsonable(self.store.get_json(artifact.outcomes_ref))
            evaluations.append(
                PlanEvaluation(
                    query_id=artifact.query_id,
                    delivered=artifact.delivered,
                    outcomes=outcomes,
                    reason=artifact.not_delivered_reason,
                )
            )
        return compute_metrics(evaluations, run_id=run_id)

    # -- triage -------------------------------------------------------------

    def list_failures(self, run_id: str) -> list[FailureGroup]:
        """Failed outcomes grouped by constraint, heaviest groups first."""
        record = self.store.get_run(run_id)
        groups: dict[str, list[FailureItem]] = {}
        categories: dict[str, str] = {}
        for artifact in record.plans:
            outcomes = outcomes_from_jsonable(self.store.get_json(artifact.outcomes_ref))
            plan_text = (
                self.store.get_text(artifact.parsed_ref)
                if artifact.parsed_ref
                else self.store.get_text(artifact.raw_ref)
            )
            for o in outcomes:
                if o.status != "fail":
                    continue
                categories[o.constraint_id] = o.category
                groups.setdefault(o.constraint_id, []).append(
                    FailureItem(
                        query_id=artifact.query_id,
                        plan_text=plan_text,
                        delivered=artifact.delivered,
                        message=o.message,
                        evidence=tuple(e.as_tuple() for e in o.evidence),
                    )
                )
        ordered = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        return [
            FailureGroup(
                constraint_id=cid,
                category=categories[cid],
                count=len(items),
                items=tuple(items),
            )
            for cid, items in ordered
        ]

    # -- exemplars ----------------------------------------------------------

    def submit_exemplar(
        self,
        run_id: str,
        query_id: str,
        corrected_plan_text: str,
        note: str = "",
        idempotency_key: Optional[str] = None,
    ) -> str:
        """Validate and store a human-authored correction; returns the exemplar id.

        Exemplar mining is restricted to train-split runs, matching how the
        refinement loop uses training data.
        """
        record = self.store.get_run(run_id)
        if record.split != "train":
            raise SplitNotAllowed(
                f"run {run_id} is on the {record.split!r} split; exemplars come from train runs"
            )
        if idempotency_key and idempotency_key in self.ledger.idempotency:
            return self.ledger.idempotency[idempotency_key]
        q = self.get_query(query_id)
        artifact = next((p for p in record.plans if p.query_id == query_id), None)
        if artifact is None:
            raise UnknownQuery(query_id)

        corrected = parse_plan(corrected_plan_text, q)
        if not corrected.delivered:
            raise ParseFailure(corrected.reason or "unparseable")

        outcomes = outcomes_from_jsonable(self.store.get_json(artifact.outcomes_ref))
        failed_ids = tuple(o.constraint_id for o in outcomes if o.status == "fail")
        failed_text = (
            self.store.get_text(artifact.parsed_ref)
            if artifact.parsed_ref
            else self.store.get_text(artifact.raw_ref)
        )
        failed_parsed = parse_plan(failed_text, q)
        failed_plan = failed_parsed.plan if failed_parsed.delivered else corrected.plan

        ex = Exemplar(
            id=f"ex-{run_id}-{query_id}",
            query_id=query_id,
            failed_plan=failed_plan,
            failed_constraints=failed_ids,
            corrected_plan=corrected.plan,
            author_note=note,
        )
        promptgen.validate_exemplar(ex, q, self.bundle, self.registry)
        return self.ledger.add_exemplar(ex, idempotency_key)

    def _auto_exemplar(self, record: RunRecord) -> Optional[str]:
        """Loop automation: correct the worst failing delivered query with the solver."""
        fail_counts: dict[str, int] = {}
        by_query: dict[str, PlanArtifact] = {p.query_id: p for p in record.plans}
        for artifact in record.plans:
            outcomes = outcomes_from_jsonable(self.store.get_json(artifact.outcomes_ref))
            n_fails = sum(1 for o in outcomes if o.status == "fail")
            if n_fails and artifact.delivered:
                fail_counts[artifact.query_id] = n_fails
        for query_id in sorted(fail_counts, key=lambda qid: (-fail_counts[qid], qid)):
            q = self.get_query(query_id)
            solved = generate_plan(q, self.bundle, SearchConfig(strategy="beam"))
            if isinstance(solved, Infeasible):
                continue
            try:
                return self.submit_exemplar(
                    record.run_id,
                    query_id,
                    render_plan_text(solved),
                    note="auto-generated correction from the search baseline",
                )
            except (ParseFailure, promptgen.ExemplarInvariantViolation):
                continue
        return None

    # -- loop ---------------------------------------------------------------

    def run_loop(
        self,
        max_iters: int,
        eps: Decimal = DEFAULT_EPS,
        split: str = "train",
        backend_cfg: Optional[BackendConfig] = None,
    ) -> list[RunRecord]:
        """Evaluate, mint a corrective exemplar, revise, repeat until the
        rates settle (or nothing is left to fix, or max_iters)."""
        self.ensure_r0()
        records: list[RunRecord] = []
        previous_report: Optional[EvaluationReport] = None
        for _ in range(max_iters):
            revision_index = self.ledger.latest.index
            record = self.run_evaluation(split, revision_index, backend_cfg)
            records.append(record)
            report = self.load_report(record.run_id)
            self.ledger.record_metrics(revision_index, report)
            if previous_report is not None and check_convergence(previous_report, report, eps):
                break
            previous_report = report
            exemplar_id = self._auto_exemplar(record)
            if exemplar_id is None:
                break  # nothing left to fix; metrics are a fixed point
            self.create_revision([exemplar_id])
        return records

    # -- reporting ----------------------------------------------------------

    def render_run_table(self, run_id: str, prev_run_id: Optional[str] = None) -> str:
        report = self.load_report(run_id)
        previous = self.load_report(prev_run_id) if prev_run_id else None
        return render_report_table(report, previous)

    def render_run_csv(self, run_id: str, with_header: bool = True) -> str:
        return render_report_csv_row(self.load_report(run_id), with_header=with_header)
