"""Prompt construction and the revision ledger.

Rule sentences are instantiated deterministically from the checker
catalogue's templates (no model in the loop), curated exemplars are
appended verbatim, and the reference data rides along as CSV blocks.
Revisions form a linear chain R0, R1, ... persisted as plain-text prompt
files plus a single JSON ledger index.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from decimal import Decimal
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

from . import ingest
from .constraints import Registry, check_plan, default_registry
from .ingest import parse_plan, render_plan_text
from .metrics import RATE_FIELDS, EvaluationReport
from .model import Plan, ReferenceBundle, TravelQuery, fmt_money_compact

DEFAULT_EPS = Decimal("0.5")


class UnknownExemplar(KeyError):
    pass


class ExemplarInvariantViolation(ValueError):
    """A corrected plan still fails constraints its exemplar claims to fix."""

    def __init__(self, exemplar_id: str, still_failing: Sequence[str]):
        super().__init__(
            f"exemplar {exemplar_id}: corrected plan still fails {', '.join(still_failing)}"
        )
        self.exemplar_id = exemplar_id
        self.still_failing = tuple(still_failing)


@dataclass(frozen=True)
class Exemplar:
    """A curated failed plan / corrected plan pair targeting specific failures."""

    id: str
    query_id: str
    failed_plan: Plan
    failed_constraints: tuple[str, ...]
    corrected_plan: Plan
    author_note: str = ""


@dataclass(frozen=True)
class PromptRevision:
    """One iteration of the prompt: rule sentences plus accumulated exemplars."""

    index: int
    rule_blocks: tuple[str, ...]
    exemplar_ids: tuple[str, ...] = ()
    parent: Optional[int] = None
    metrics_snapshot: Optional[dict[str, str]] = None


def extract_rules(registry: Registry, q: TravelQuery) -> list[str]:
    """One instantiated rule sentence per checker applicable to the query,
    in catalogue order."""
    return [d.rule_sentence(q) for d in registry.applicable(q)]


def validate_exemplar(
    ex: Exemplar, q: TravelQuery, b: ReferenceBundle, registry: Optional[Registry] = None
) -> None:
    """Enforce the exemplar invariant: the corrected plan passes every
    constraint the failed plan was cited for."""
    outcomes = check_plan(ex.corrected_plan, q, b, registry)
    by_id = {o.constraint_id: o for o in outcomes}
    still_failing = [
        cid for cid in ex.failed_constraints if cid in by_id and by_id[cid].failed
    ]
    if still_failing:
        raise ExemplarInvariantViolation(ex.id, still_failing)


def revise_prompt(
    prev: PromptRevision,
    new_exemplars: Sequence[Exemplar],
    validate: Optional[Callable[[Exemplar], None]] = None,
) -> PromptRevision:
    """The next revision: same rules, exemplars appended (deduplicated,
    order preserved)."""
    if validate is not None:
        for ex in new_exemplars:
            validate(ex)
    merged = list(prev.exemplar_ids)
    for ex in new_exemplars:
        if ex.id not in merged:
            merged.append(ex.id)
    return PromptRevision(
        index=prev.index + 1,
        rule_blocks=prev.rule_blocks,
        exemplar_ids=tuple(merged),
        parent=prev.index,
        metrics_snapshot=None,
    )


def check_convergence(
    prev: EvaluationReport, cur: EvaluationReport, eps: Decimal = DEFAULT_EPS
) -> bool:
    """True when the final rate and all four micro/macro rates moved by at
    most eps percentage points between consecutive runs."""
    watched = (
        "final_pass_rate",
        "commonsense_micro",
        "commonsense_macro",
        "hard_micro",
        "hard_macro",
    )
    return all(abs(getattr(cur, f) - getattr(prev, f)) <= eps for f in watched)


# --------------------------------------------------------------------------
# Rendering

_TASK_TEMPLATE = """\
You are a travel planning assistant. Create a complete {n_days}-day travel plan
for the request below, using only the reference data provided.

Trip request:
- Origin: {origin}
- Destinations (in order): {destinations}
- Start date: {start_date} ({n_days} days)
- Party size: {n_people}
- Budget: ${budget}
- House rules needed: {house_rules}
- Room types requested: {room_types}
- Cuisines requested: {cuisines}
- Transportation limits: {transport_prefs}
"""

_FORMAT_INSTRUCTION = """\
Output format:
Respond with exactly {n_days} day blocks in this format and nothing else. Use
"-" for anything not applicable. Items are written as "Name, City". Flights
are written as "Flight Number: F0001, from A to B, Departure: 08:00,
Arrival: 10:00, Cost: $120.00"; ground legs as "Taxi, from A to B, Duration:
90 minutes, Cost: $45.00" (or "Self-driving, ..."). City-change days use
"Current City: from A to B".

Day 1:
Current City: from {origin} to {first_destination}
Transportation: <leg>
Breakfast: <Name, City>
Attraction: <Name, City>
Lunch: <Name, City>
Dinner: <Name, City>
Accommodation: <Name, City>
"""


def _fmt_set(values: Iterable[str]) -> str:
    items = sorted(values)
    return ", ".join(items) if items else "none"


def default_rule_blocks(registry: Optional[Registry] = None) -> tuple[str, ...]:
    """The catalogue's parameterized rule templates, in catalogue order.

    These are what R0 carries; render_prompt instantiates them against each
    query. Blocks edited by a human (or rewritten by an external model) no
    longer match a template and are rendered verbatim instead.
    """
    reg = registry if registry is not None else default_registry()
    return tuple(d.rule_template for d in reg.descriptors)


def _instantiate_rules(
    blocks: Sequence[str], q: TravelQuery, registry: Registry
) -> list[str]:
    by_template = {d.rule_template: d for d in registry.descriptors}
    rendered = []
    for block in blocks:
        d = by_template.get(block)
        if d is None:
            rendered.append(block)
        elif d.applicable(q):
            rendered.append(d.rule_sentence(q))
    return rendered


def render_prompt(
    r: PromptRevision,
    q: TravelQuery,
    b: ReferenceBundle,
    exemplars: Mapping[str, Exemplar],
    registry: Optional[Registry] = None,
) -> str:
    """Byte-deterministic prompt: task, rules, exemplars, reference CSV,
    output format."""
    reg = registry if registry is not None else default_registry()
    sections = []
    sections.append(
        _TASK_TEMPLATE.format(
            n_days=q.n_days,
            origin=q.origin,
            destinations=", ".join(q.destinations),
            start_date=q.start_date.isoformat(),
            n_people=q.n_people,
            budget=fmt_money_compact(q.budget),
            house_rules=_fmt_set(q.house_rules),
            room_types=_fmt_set(q.room_types),
            cuisines=_fmt_set(q.cuisines),
            transport_prefs=_fmt_set(q.transport_prefs),
        )
    )

    rules = "\n".join(
        f"{i}. {rule}" for i, rule in enumerate(_instantiate_rules(r.rule_blocks, q, reg), start=1)
    )
    sections.append(f"Rules:\n{rules}\n")

    exemplar_lines = ["Worked examples:"]
    for ex_id in r.exemplar_ids:
        if ex_id not in exemplars:
            raise UnknownExemplar(ex_id)
        ex = exemplars[ex_id]
        exemplar_lines.append("")
        exemplar_lines.append(f"Example {ex.id}:")
        exemplar_lines.append(f"Violated constraints: {', '.join(ex.failed_constraints)}")
        exemplar_lines.append("A plan that failed:")
        exemplar_lines.append(render_plan_text(ex.failed_plan).rstrip("\n"))
        exemplar_lines.append("The corrected plan:")
        exemplar_lines.append(render_plan_text(ex.corrected_plan).rstrip("\n"))
        if ex.author_note:
            exemplar_lines.append(f"Note: {ex.author_note}")
    sections.append("\n".join(exemplar_lines) + "\n")

    ref_lines = ["Reference data (CSV):"]
    for key in ingest.TABLE_ORDER:
        ref_lines.append("")
        ref_lines.append(f"{key}.csv:")
        ref_lines.append(ingest.render_table_csv(b, key).rstrip("\n"))
    sections.append("\n".join(ref_lines) + "\n")

    sections.append(
        _FORMAT_INSTRUCTION.format(
            n_days=q.n_days,
            origin=q.origin,
            first_destination=q.destinations[0] if q.destinations else q.origin,
        )
    )
    return "\n".join(sections)


# --------------------------------------------------------------------------
# Persistence

def _plan_to_text(plan: Plan) -> str:
    return render_plan_text(plan)


def _exemplar_to_dict(ex: Exemplar) -> dict:
    return {
        "id": ex.id,
        "query_id": ex.query_id,
        "failed_plan": render_plan_text(ex.failed_plan),
        "failed_constraints": list(ex.failed_constraints),
        "corrected_plan": render_plan_text(ex.corrected_plan),
        "author_note": ex.author_note,
    }


def _exemplar_from_dict(d: Mapping, query_lookup: Mapping[str, TravelQuery]) -> Exemplar:
    q = query_lookup[d["query_id"]]
    failed = parse_plan(d["failed_plan"], q)
    corrected = parse_plan(d["corrected_plan"], q)
    if not failed.delivered or not corrected.delivered:
        raise ValueError(f"exemplar {d['id']}: stored plan text does not parse")
    return Exemplar(
        id=d["id"],
        query_id=d["query_id"],
        failed_plan=failed.plan,
        failed_constraints=tuple(d["failed_constraints"]),
        corrected_plan=corrected.plan,
        author_note=d.get("author_note", ""),
    )


class PromptLedger:
    """On-disk linear chain of prompt revisions plus the exemplar store.

    Layout under root: ledger.json (index) and R<i>.prompt.txt (one rendered
    prompt per revision, for human review). Mutations are serialized with an
    in-process lock; writes are atomic (tmp + rename).
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self._lock = threading.Lock()
        self.revisions: list[PromptRevision] = []
        self.exemplars: dict[str, Exemplar] = {}
        self.idempotency: dict[str, str] = {}
        self._loaded_with: Optional[Mapping[str, TravelQuery]] = None

    @property
    def index_path(self) -> Path:
        return self.root / "ledger.json"

    def prompt_path(self, index: int) -> Path:
        return self.root / f"R{index}.prompt.txt"

    def load(self, query_lookup: Mapping[str, TravelQuery]) -> None:
        self._loaded_with = query_lookup
        if not self.index_path.exists():
            return
        data = json.loads(self.index_path.read_text(encoding="utf-8"))
        self.exemplars = {
            d["id"]: _exemplar_from_dict(d, query_lookup) for d in data.get("exemplars", [])
        }
        self.idempotency = dict(data.get("idempotency", {}))
        self.revisions = [
            PromptRevision(
                index=d["index"],
                rule_blocks=tuple(d["rule_blocks"]),
                exemplar_ids=tuple(d["exemplar_ids"]),
                parent=d.get("parent"),
                metrics_snapshot=d.get("metrics_snapshot"),
            )
            for d in data.get("revisions", [])
        ]
        self._check_chain()

    def _check_chain(self) -> None:
        for i, rev in enumerate(self.revisions):
            if rev.index != i:
                raise ValueError(f"ledger revision at position {i} has index {rev.index}")
            expected_parent = None if i == 0 else i - 1
            if rev.parent != expected_parent:
                raise ValueError(f"revision {i} has parent {rev.parent}, expected {expected_parent}")
        if self.revisions and self.revisions[0].exemplar_ids:
            raise ValueError("revision 0 must have no exemplars")

    def save(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        data = {
            "revisions": [
                {
                    "index": r.index,
                    "rule_blocks": list(r.rule_blocks),
                    "exemplar_ids": list(r.exemplar_ids),
                    "parent": r.parent,
                    "metrics_snapshot": r.metrics_snapshot,
                }
                for r in self.revisions
            ],
            "exemplars": [_exemplar_to_dict(ex) for ex in self.exemplars.values()],
            "idempotency": self.idempotency,
        }
        tmp = self.index_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(data, indent=2, sort_keys=True), encoding="utf-8")
        tmp.replace(self.index_path)

    @property
    def latest(self) -> Optional[PromptRevision]:
        return self.revisions[-1] if self.revisions else None

    def get(self, index: int) -> PromptRevision:
        if 0 <= index < len(self.revisions):
            return self.revisions[index]
        raise KeyError(f"no revision {index}")

    def init_r0(self, rule_blocks: Sequence[str]) -> PromptRevision:
        """Create revision 0 if absent; returns the current R0 either way."""
        with self._lock:
            if self.revisions:
                return self.revisions[0]
            r0 = PromptRevision(index=0, rule_blocks=tuple(rule_blocks))
            self.revisions.append(r0)
            self.save()
            return r0

    def add_exemplar(self, ex: Exemplar, idempotency_key: Optional[str] = None) -> str:
        with self._lock:
            if idempotency_key and idempotency_key in self.idempotency:
                return self.idempotency[idempotency_key]
            self.exemplars[ex.id] = ex
            if idempotency_key:
                self.idempotency[idempotency_key] = ex.id
            self.save()
            return ex.id

    def get_exemplar(self, ex_id: str) -> Exemplar:
        if ex_id not in self.exemplars:
            raise UnknownExemplar(ex_id)
        return self.exemplars[ex_id]

    def advance(
        self,
        new_exemplar_ids: Sequence[str],
        rule_blocks_override: Optional[Sequence[str]] = None,
        validate: Optional[Callable[[Exemplar], None]] = None,
    ) -> PromptRevision:
        """Append R_{i+1} to the chain from the latest revision."""
        with self._lock:
            if not self.revisions:
                raise ValueError("ledger has no R0; initialize it first")
            prev = self.revisions[-1]
            new_exemplars = [self.get_exemplar(ex_id) for ex_id in new_exemplar_ids]
            rev = revise_prompt(prev, new_exemplars, validate=validate)
            if rule_blocks_override is not None:
                rev = replace(rev, rule_blocks=tuple(rule_blocks_override))
            self.revisions.append(rev)
            self.save()
            return rev

    def record_metrics(self, index: int, report: EvaluationReport) -> None:
        with self._lock:
            rev = self.get(index)
            snapshot = {name: str(getattr(report, name)) for name in RATE_FIELDS}
            self.revisions[index] = replace(rev, metrics_snapshot=snapshot)
            self.save()

    def write_prompt_file(self, index: int, prompt_text: str) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.prompt_path(index)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(prompt_text, encoding="utf-8")
        tmp.replace(path)
        return path
