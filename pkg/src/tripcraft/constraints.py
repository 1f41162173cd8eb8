"""Executable constraint checkers over (Plan, TravelQuery, ReferenceBundle).

Checkers come in two categories: commonsense rules every reasonable traveler
follows, and hard rules the query explicitly requests. Each checker is total
and pure; check_plan never raises and returns one outcome per registered
checker, in catalogue order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

from .ingest import ParsedPlanResult
from .model import (
    Plan,
    ReferenceBundle,
    TravelQuery,
    cost_breakdown,
    expected_day_specs,
    fmt_money_compact,
)

COMMONSENSE = "commonsense"
HARD = "hard"


@dataclass(frozen=True)
class Evidence:
    day: int  # 0 for plan-level evidence
    field: str
    detail: str

    def as_tuple(self) -> tuple[int, str, str]:
        return (self.day, self.field, self.detail)


@dataclass(frozen=True)
class ConstraintOutcome:
    constraint_id: str
    category: str
    status: str  # pass | fail | not-applicable
    message: str
    evidence: tuple[Evidence, ...] = ()

    @property
    def failed(self) -> bool:
        return self.status == "fail"


@dataclass(frozen=True)
class ConstraintDescriptor:
    """One registered checker: identity, rule sentence template, and logic."""

    id: str
    category: str
    rule_template: str
    applicable: Callable[[TravelQuery], bool]
    params: Callable[[TravelQuery], dict]
    check: Callable[[Plan, TravelQuery, ReferenceBundle], list[Evidence]]

    def rule_sentence(self, q: TravelQuery) -> str:
        return self.rule_template.format(**self.params(q))


def _always(_q: TravelQuery) -> bool:
    return True


def _no_params(_q: TravelQuery) -> dict:
    return {}


# --------------------------------------------------------------------------
# Commonsense checkers

def _check_within_sandbox(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    evidence = []
    for entry in p.days:
        leg = entry.transportation
        if leg is not None:
            if leg.mode == "flight":
                flight = b.flight_by_id.get(leg.flight_id or "")
                when = q.day_date(entry.day)
                if flight is None:
                    evidence.append(
                        Evidence(entry.day, "transportation", f"flight {leg.flight_id} not in reference data")
                    )
                elif (flight.origin, flight.destination) != (leg.origin, leg.destination):
                    evidence.append(
                        Evidence(
                            entry.day,
                            "transportation",
                            f"flight {leg.flight_id} flies {flight.origin} to "
                            f"{flight.destination}, not {leg.origin} to {leg.destination}",
                        )
                    )
                elif flight.date != when:
                    evidence.append(
                        Evidence(
                            entry.day,
                            "transportation",
                            f"flight {leg.flight_id} operates on {flight.date.isoformat()}, "
                            f"not {when.isoformat()}",
                        )
                    )
            else:
                if (leg.origin, leg.destination, leg.mode) not in b.distance_by_key:
                    evidence.append(
                        Evidence(
                            entry.day,
                            "transportation",
                            f"no {leg.mode} route from {leg.origin} to {leg.destination} in reference data",
                        )
                    )
        for slot, ref in entry.meals():
            if ref.key not in b.restaurant_by_key:
                evidence.append(
                    Evidence(entry.day, slot, f"restaurant {ref.name} not in {ref.city} reference data")
                )
        if entry.attraction is not None and entry.attraction.key not in b.attraction_by_key:
            evidence.append(
                Evidence(
                    entry.day,
                    "attraction",
                    f"attraction {entry.attraction.name} not in {entry.attraction.city} reference data",
                )
            )
        if entry.accommodation is not None and entry.accommodation.key not in b.accommodation_by_key:
            evidence.append(
                Evidence(
                    entry.day,
                    "accommodation",
                    f"accommodation {entry.accommodation.name} not in "
                    f"{entry.accommodation.city} reference data",
                )
            )
    return evidence


def _check_complete_information(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    evidence = []
    last_day = len(p.days)
    for entry in p.days:
        if entry.city.is_transition and entry.transportation is None:
            evidence.append(
                Evidence(entry.day, "transportation", "city change day without transportation")
            )
        if entry.day < last_day and entry.accommodation is None:
            evidence.append(Evidence(entry.day, "accommodation", "night without accommodation"))
    return evidence


def _check_within_current_city(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    evidence = []
    for entry in p.days:
        allowed = set(entry.city.cities)
        for slot, ref in entry.meals():
            if ref.city not in allowed:
                evidence.append(
                    Evidence(entry.day, slot, f"{ref.name} is in {ref.city}, not the current city")
                )
        if entry.attraction is not None and entry.attraction.city not in allowed:
            evidence.append(
                Evidence(
                    entry.day,
                    "attraction",
                    f"{entry.attraction.name} is in {entry.attraction.city}, not the current city",
                )
            )
    return evidence


def _check_reasonable_city_route(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    evidence = []
    specs = expected_day_specs(q)
    for entry, spec in zip(p.days, specs):
        if entry.city != spec.span:
            expected = (
                spec.span.start
                if not spec.span.is_transition
                else f"from {spec.span.start} to {spec.span.end}"
            )
            evidence.append(
                Evidence(entry.day, "current_city", f"expected '{expected}' on day {entry.day}")
            )
        leg = entry.transportation
        if leg is not None:
            if not entry.city.is_transition:
                evidence.append(
                    Evidence(entry.day, "transportation", "transportation listed on a stay day")
                )
            elif (leg.origin, leg.destination) != (entry.city.start, entry.city.end):
                evidence.append(
                    Evidence(
                        entry.day,
                        "transportation",
                        f"leg runs {leg.origin} to {leg.destination} but the day moves "
                        f"{entry.city.start} to {entry.city.end}",
                    )
                )
    return evidence


def _check_diverse_restaurants(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    seen: dict[tuple[str, str], list[tuple[int, str]]] = {}
    for entry in p.days:
        for slot, ref in entry.meals():
            seen.setdefault(ref.key, []).append((entry.day, slot))
    evidence = []
    for (name, city), uses in sorted(seen.items()):
        if len(uses) > 1:
            days = ", ".join(f"day {d} {slot}" for d, slot in uses)
            for d, slot in uses:
                evidence.append(Evidence(d, slot, f"{name} ({city}) repeated: {days}"))
    return evidence


def _check_diverse_attractions(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    seen: dict[tuple[str, str], list[int]] = {}
    for entry in p.days:
        if entry.attraction is not None:
            seen.setdefault(entry.attraction.key, []).append(entry.day)
    evidence = []
    for (name, city), days in sorted(seen.items()):
        if len(days) > 1:
            day_list = ", ".join(str(d) for d in days)
            for d in days:
                evidence.append(
                    Evidence(d, "attraction", f"{name} ({city}) visited on days {day_list}")
                )
    return evidence


def _check_no_conflicting_transportation(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    used: dict[str, list[int]] = {}
    for entry in p.days:
        if entry.transportation is not None:
            used.setdefault(entry.transportation.mode, []).append(entry.day)
    if "flight" in used and "self-driving" in used:
        return [
            Evidence(d, "transportation", f"{mode} conflicts with mixing flights and self-driving")
            for mode in ("flight", "self-driving")
            for d in used[mode]
        ]
    return []


def _accommodation_runs(p: Plan) -> list[tuple[tuple[str, str], int, int]]:
    """Maximal runs of consecutive days with the same accommodation: (key, first_day, nights)."""
    runs = []
    current: Optional[tuple[str, str]] = None
    start = 0
    count = 0
    for entry in p.days:
        key = entry.accommodation.key if entry.accommodation is not None else None
        if key != current:
            if current is not None:
                runs.append((current, start, count))
            current = key
            start = entry.day
            count = 0
        if key is not None:
            count += 1
    if current is not None:
        runs.append((current, start, count))
    return runs


def _check_minimum_nights_stay(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    evidence = []
    for key, first_day, nights in _accommodation_runs(p):
        acc = b.accommodation_by_key.get(key)
        if acc is None:
            continue  # unresolved lodging is within-sandbox's finding
        if nights < acc.minimum_nights:
            evidence.append(
                Evidence(
                    first_day,
                    "accommodation",
                    f"{acc.name} requires at least {acc.minimum_nights} nights, stayed {nights}",
                )
            )
    return evidence


# --------------------------------------------------------------------------
# Hard checkers

def _check_budget(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    breakdown = cost_breakdown(p, q, b)
    if breakdown.unresolved:
        return [
            Evidence(0, "cost", f"{item.name!r} not found in {item.table}; cost cannot be verified")
            for item in breakdown.unresolved
        ]
    if breakdown.total > q.budget:
        return [
            Evidence(
                0,
                "cost",
                f"total ${fmt_money_compact(breakdown.total)} exceeds "
                f"budget ${fmt_money_compact(q.budget)}",
            )
        ]
    return []


def _check_room_rules(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    required = {f"no-{tag}": tag for tag in q.house_rules}
    evidence = []
    reported: set[tuple[str, str]] = set()
    for entry in p.days:
        if entry.accommodation is None:
            continue
        acc = b.accommodation_by_key.get(entry.accommodation.key)
        if acc is None or (acc.name, acc.city) in reported:
            continue
        conflicts = sorted(set(required) & acc.house_rules)
        if conflicts:
            reported.add((acc.name, acc.city))
            for rule in conflicts:
                evidence.append(
                    Evidence(
                        entry.day,
                        "accommodation",
                        f"{acc.name} prohibits {required[rule]} ({rule})",
                    )
                )
    return evidence


def _room_type_matches(requested: str, offered: str) -> bool:
    if requested == "not-shared-room":
        return offered != "shared-room"
    return requested == offered


def _check_room_type(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    booked = []
    for entry in p.days:
        if entry.accommodation is not None:
            acc = b.accommodation_by_key.get(entry.accommodation.key)
            if acc is not None:
                booked.append(acc)
    evidence = []
    for requested in sorted(q.room_types):
        if not any(_room_type_matches(requested, acc.room_type) for acc in booked):
            evidence.append(
                Evidence(0, "accommodation", f"no booked accommodation offers {requested}")
            )
    return evidence


def _check_cuisine(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    covered: set[str] = set()
    for entry in p.days:
        for _slot, ref in entry.meals():
            rest = b.restaurant_by_key.get(ref.key)
            if rest is not None:
                covered |= rest.cuisines
    evidence = []
    for cuisine in sorted(q.cuisines):
        if cuisine not in covered:
            evidence.append(Evidence(0, "meals", f"no chosen restaurant serves {cuisine}"))
    return evidence


def _check_transportation_preference(p: Plan, q: TravelQuery, b: ReferenceBundle) -> list[Evidence]:
    banned = {pref.removeprefix("no-") for pref in q.transport_prefs}
    evidence = []
    for entry in p.days:
        leg = entry.transportation
        if leg is not None and leg.mode in banned:
            evidence.append(
                Evidence(entry.day, "transportation", f"{leg.mode} used despite no-{leg.mode} preference")
            )
    return evidence


# --------------------------------------------------------------------------
# Catalogue

def _route_param(q: TravelQuery) -> dict:
    return {"route": " -> ".join((q.origin,) + q.destinations + (q.origin,))}


def _budget_param(q: TravelQuery) -> dict:
    return {"budget": fmt_money_compact(q.budget)}


def _rules_param(q: TravelQuery) -> dict:
    return {"rules": ", ".join(sorted(q.house_rules))}


def _types_param(q: TravelQuery) -> dict:
    return {"types": ", ".join(sorted(q.room_types))}


def _cuisines_param(q: TravelQuery) -> dict:
    return {"cuisines": ", ".join(sorted(q.cuisines))}


def _modes_param(q: TravelQuery) -> dict:
    return {"modes": ", ".join(sorted(p.removeprefix("no-") for p in q.transport_prefs))}


_CATALOGUE: tuple[ConstraintDescriptor, ...] = (
    ConstraintDescriptor(
        id="within-sandbox",
        category=COMMONSENSE,
        rule_template=(
            "Only use flights, accommodations, restaurants, and attractions listed in the "
            "reference data, exactly as named and located there."
        ),
        applicable=_always,
        params=_no_params,
        check=_check_within_sandbox,
    ),
    ConstraintDescriptor(
        id="complete-information",
        category=COMMONSENSE,
        rule_template=(
            "Include transportation on every city-change day and an accommodation for every "
            "night before the final day."
        ),
        applicable=_always,
        params=_no_params,
        check=_check_complete_information,
    ),
    ConstraintDescriptor(
        id="within-current-city",
        category=COMMONSENSE,
        rule_template="Schedule meals and attractions only in the city (or cities) you are in that day.",
        applicable=_always,
        params=_no_params,
        check=_check_within_current_city,
    ),
    ConstraintDescriptor(
        id="reasonable-city-route",
        category=COMMONSENSE,
        rule_template="Follow the route {route} in order, changing cities only on the scheduled travel days.",
        applicable=_always,
        params=_route_param,
        check=_check_reasonable_city_route,
    ),
    ConstraintDescriptor(
        id="diverse-restaurants",
        category=COMMONSENSE,
        rule_template="Do not repeat any restaurant across the meals of the trip.",
        applicable=_always,
        params=_no_params,
        check=_check_diverse_restaurants,
    ),
    ConstraintDescriptor(
        id="diverse-attractions",
        category=COMMONSENSE,
        rule_template="Do not visit the same attraction on more than one day.",
        applicable=_always,
        params=_no_params,
        check=_check_diverse_attractions,
    ),
    ConstraintDescriptor(
        id="no-conflicting-transportation",
        category=COMMONSENSE,
        rule_template="Do not use both flights and self-driving in the same trip.",
        applicable=_always,
        params=_no_params,
        check=_check_no_conflicting_transportation,
    ),
    ConstraintDescriptor(
        id="minimum-nights-stay",
        category=COMMONSENSE,
        rule_template="Book each accommodation for at least its required minimum number of consecutive nights.",
        applicable=_always,
        params=_no_params,
        check=_check_minimum_nights_stay,
    ),
    ConstraintDescriptor(
        id="budget",
        category=HARD,
        rule_template="Total plan cost must not exceed ${budget}.",
        applicable=_always,
        params=_budget_param,
        check=_check_budget,
    ),
    ConstraintDescriptor(
        id="room-rules",
        category=HARD,
        rule_template="Book only accommodations whose house rules allow: {rules}.",
        applicable=lambda q: bool(q.house_rules),
        params=_rules_param,
        check=_check_room_rules,
    ),
    ConstraintDescriptor(
        id="room-type",
        category=HARD,
        rule_template="Across the trip, book at least one accommodation of each requested type: {types}.",
        applicable=lambda q: bool(q.room_types),
        params=_types_param,
        check=_check_room_type,
    ),
    ConstraintDescriptor(
        id="cuisine",
        category=HARD,
        rule_template="Across the trip, include at least one restaurant serving each requested cuisine: {cuisines}.",
        applicable=lambda q: bool(q.cuisines),
        params=_cuisines_param,
        check=_check_cuisine,
    ),
    ConstraintDescriptor(
        id="transportation",
        category=HARD,
        rule_template="Never use these transportation modes: {modes}.",
        applicable=lambda q: bool(q.transport_prefs),
        params=_modes_param,
        check=_check_transportation_preference,
    ),
)


@dataclass(frozen=True)
class Registry:
    """An ordered, optionally filtered view of the constraint catalogue."""

    descriptors: tuple[ConstraintDescriptor, ...]

    def __post_init__(self):
        ids = [d.id for d in self.descriptors]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate constraint ids: {ids}")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(d.id for d in self.descriptors)

    def get(self, constraint_id: str) -> ConstraintDescriptor:
        for d in self.descriptors:
            if d.id == constraint_id:
                return d
        raise KeyError(constraint_id)

    def without(self, disabled: Iterable[str]) -> "Registry":
        gone = set(disabled)
        unknown = gone - set(self.ids)
        if unknown:
            raise KeyError(f"unknown constraint ids: {sorted(unknown)}")
        return Registry(tuple(d for d in self.descriptors if d.id not in gone))

    def applicable(self, q: TravelQuery) -> tuple[ConstraintDescriptor, ...]:
        return tuple(d for d in self.descriptors if d.applicable(q))

    def manifest(self) -> list[dict]:
        """Machine-readable catalogue for prompt generation and the UI."""
        return [
            {"id": d.id, "category": d.category, "rule_template": d.rule_template}
            for d in self.descriptors
        ]


def default_registry() -> Registry:
    return Registry(_CATALOGUE)


def _outcome(d: ConstraintDescriptor, status: str, message: str, evidence: Sequence[Evidence] = ()) -> ConstraintOutcome:
    return ConstraintOutcome(
        constraint_id=d.id,
        category=d.category,
        status=status,
        message=message,
        evidence=tuple(evidence),
    )


def check_plan(
    p: Union[ParsedPlanResult, Plan],
    q: TravelQuery,
    b: ReferenceBundle,
    registry: Optional[Registry] = None,
) -> list[ConstraintOutcome]:
    """Evaluate every registered checker against a parse result or plan.

    Total: undelivered plans fail every applicable checker with message
    "not delivered"; checkers the query does not request stay not-applicable.
    """
    reg = registry if registry is not None else default_registry()
    if isinstance(p, Plan):
        p = ParsedPlanResult.ok(p)

    outcomes: list[ConstraintOutcome] = []
    for d in reg.descriptors:
        if not d.applicable(q):
            outcomes.append(_outcome(d, "not-applicable", "not requested by this query"))
            continue
        if not p.delivered:
            outcomes.append(
                _outcome(
                    d,
                    "fail",
                    "not delivered",
                    [Evidence(0, "plan", p.reason or "no plan text")],
                )
            )
            continue
        evidence = d.check(p.plan, q, b)
        if evidence:
            outcomes.append(_outcome(d, "fail", d.rule_sentence(q), evidence))
        else:
            outcomes.append(_outcome(d, "pass", "satisfied"))
    return outcomes
