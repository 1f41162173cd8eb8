"""Aggregate per-plan constraint outcomes into run-level pass-rate statistics.

Definitions: micro = passed applicable checks / total applicable checks;
macro = plans with zero failures in a category / total plans; final = plans
with zero failures in both categories / total plans. Not-applicable outcomes
are excluded from micro denominators and never block a macro pass. All rates
are percentages rounded half-up to 2 decimals.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Optional, Sequence

from .constraints import COMMONSENSE, HARD, ConstraintOutcome

RATE_FIELDS = (
    "delivery_rate",
    "commonsense_micro",
    "commonsense_macro",
    "hard_micro",
    "hard_macro",
    "final_pass_rate",
)


class EmptyRun(ValueError):
    """Metrics over zero plans are undefined."""


class RegistryMismatch(ValueError):
    """Outcome lists or reports cover different constraint registries."""


@dataclass(frozen=True)
class PlanEvaluation:
    """One plan's delivery flag and its full outcome list."""

    query_id: str
    delivered: bool
    outcomes: tuple[ConstraintOutcome, ...]
    reason: Optional[str] = None  # NotDelivered reason, if any

    @property
    def registry_ids(self) -> tuple[str, ...]:
        return tuple(o.constraint_id for o in self.outcomes)


@dataclass(frozen=True)
class EvaluationReport:
    run_id: str
    n_plans: int
    registry_ids: tuple[str, ...]
    evaluations: tuple[PlanEvaluation, ...]
    delivery_rate: Decimal
    commonsense_micro: Decimal
    commonsense_macro: Decimal
    hard_micro: Decimal
    hard_macro: Decimal
    final_pass_rate: Decimal

    def rates(self) -> dict[str, Decimal]:
        return {name: getattr(self, name) for name in RATE_FIELDS}


def _pct(numerator: int, denominator: int) -> Decimal:
    """Exact percentage rounded half-up to 2 decimals; empty denominators are vacuously 100."""
    if denominator == 0:
        return Decimal("100.00")
    scaled = Fraction(numerator * 100, denominator) * 100  # value in hundredths of a percent
    # round half-up on the exact rational, then place 2 decimals
    hundredths = (2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator)
    return Decimal(hundredths).scaleb(-2)


def compute_metrics(
    evaluations: Sequence[PlanEvaluation], run_id: str = ""
) -> EvaluationReport:
    """Aggregate evaluations into a report. Raises EmptyRun on zero plans."""
    if not evaluations:
        raise EmptyRun("cannot compute metrics over zero plans")
    registry_ids = evaluations[0].registry_ids
    for ev in evaluations:
        if ev.registry_ids != registry_ids:
            raise RegistryMismatch(
                f"plan {ev.query_id}: outcomes cover {ev.registry_ids}, expected {registry_ids}"
            )

    n = len(evaluations)
    delivered = sum(1 for ev in evaluations if ev.delivered)
    micro_pass = {COMMONSENSE: 0, HARD: 0}
    micro_total = {COMMONSENSE: 0, HARD: 0}
    macro_pass = {COMMONSENSE: 0, HARD: 0}
    final_pass = 0
    for ev in evaluations:
        fails = {COMMONSENSE: 0, HARD: 0}
        for outcome in ev.outcomes:
            if outcome.status == "not-applicable":
                continue
            micro_total[outcome.category] += 1
            if outcome.status == "pass":
                micro_pass[outcome.category] += 1
            else:
                fails[outcome.category] += 1
        for category in (COMMONSENSE, HARD):
            if fails[category] == 0:
                macro_pass[category] += 1
        if fails[COMMONSENSE] == 0 and fails[HARD] == 0:
            final_pass += 1

    return EvaluationReport(
        run_id=run_id,
        n_plans=n,
        registry_ids=registry_ids,
        evaluations=tuple(evaluations),
        delivery_rate=_pct(delivered, n),
        commonsense_micro=_pct(micro_pass[COMMONSENSE], micro_total[COMMONSENSE]),
        commonsense_macro=_pct(macro_pass[COMMONSENSE], n),
        hard_micro=_pct(micro_pass[HARD], micro_total[HARD]),
        hard_macro=_pct(macro_pass[HARD], n),
        final_pass_rate=_pct(final_pass, n),
    )


@dataclass(frozen=True)
class ReportDelta:
    delivery_rate: Decimal
    commonsense_micro: Decimal
    commonsense_macro: Decimal
    hard_micro: Decimal
    hard_macro: Decimal
    final_pass_rate: Decimal

    def rates(self) -> dict[str, Decimal]:
        return {name: getattr(self, name) for name in RATE_FIELDS}


def diff_reports(a: EvaluationReport, b: EvaluationReport) -> ReportDelta:
    """Per-metric deltas, b minus a. Reports must cover the same registry."""
    if a.registry_ids != b.registry_ids:
        raise RegistryMismatch(
            f"registries differ: {a.registry_ids} vs {b.registry_ids}"
        )
    return ReportDelta(
        **{name: getattr(b, name) - getattr(a, name) for name in RATE_FIELDS}
    )


# --------------------------------------------------------------------------
# Rendering

_COLUMNS = (
    ("Delivery", "delivery_rate"),
    ("CS Micro", "commonsense_micro"),
    ("CS Macro", "commonsense_macro"),
    ("Hard Micro", "hard_micro"),
    ("Hard Macro", "hard_macro"),
    ("Final", "final_pass_rate"),
)


def render_report_table(
    report: EvaluationReport, previous: Optional[EvaluationReport] = None
) -> str:
    """Fixed-width text table of the run's rates, with signed deltas vs a previous run."""
    delta = diff_reports(previous, report) if previous is not None else None
    header = ["Run"] + [label for label, _ in _COLUMNS]
    row = [report.run_id or "-"]
    for _label, field in _COLUMNS:
        cell = str(getattr(report, field))
        if delta is not None:
            cell += f" ({getattr(delta, field):+.2f})"
        row.append(cell)
    widths = [max(len(h), len(c)) for h, c in zip(header, row)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)),
        "  ".join("-" * w for w in widths),
        "  ".join(c.ljust(w) for c, w in zip(row, widths)),
    ]
    return "\n".join(lines) + "\n"


CSV_HEADER = ("run_id", "n_plans") + RATE_FIELDS


def render_report_csv_row(report: EvaluationReport, with_header: bool = False) -> str:
    """The report as a CSV row for cross-run comparison sheets."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if with_header:
        writer.writerow(CSV_HEADER)
    writer.writerow(
        [report.run_id, report.n_plans] + [str(getattr(report, f)) for f in RATE_FIELDS]
    )
    return buf.getvalue()
