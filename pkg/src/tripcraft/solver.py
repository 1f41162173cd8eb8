"""Deterministic plan synthesis by combinatorial search over the reference bundle.

The search space is the canonical assembly space (docs/data_formats.md):
the city route is fixed by the query; each city-change day carries one
transportation option; each city hosts a single accommodation for its two
nights; meal and attraction slots are filled maximally (a slot may stay
empty only when every candidate item is already used elsewhere in the plan,
or none exists). The exhaustive strategy enumerates that space and is
optimal; beam keeps the cheapest partial assemblies per decision stage and
is approximate at scale; greedy is beam with width 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Iterator, Optional, Sequence, Union

from .constraints import ConstraintOutcome, Registry, check_plan, default_registry
from .model import (
    Accommodation,
    Attraction,
    DayEntry,
    DaySpec,
    DistanceRow,
    Flight,
    ItemRef,
    Plan,
    ReferenceBundle,
    Restaurant,
    TransportLeg,
    TravelQuery,
    expected_day_specs,
    validate_query,
)

DEFAULT_BEAM_WIDTH = 8
DEFAULT_EXHAUSTIVE_CAP = 500_000

STRATEGIES = ("greedy", "beam", "exhaustive")
OBJECTIVES = ("min-cost", "first-feasible")


class CapExceeded(Exception):
    def __init__(self, size: int, cap: int):
        super().__init__(f"assembly space has {size} raw combinations, cap is {cap}")
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class SearchConfig:
    strategy: str = "beam"
    beam_width: int = DEFAULT_BEAM_WIDTH
    objective: str = "min-cost"
    disabled_constraints: frozenset[str] = frozenset()
    random_seed: int = 0
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP


@dataclass(frozen=True)
class Infeasible:
    """No feasible plan exists; names the tightest violated constraint found."""

    constraint_id: Optional[str]
    explanation: str


# --------------------------------------------------------------------------
# Assembly space

@dataclass(frozen=True)
class LegOption:
    mode: str
    flight: Optional[Flight] = None
    row: Optional[DistanceRow] = None

    @property
    def label(self) -> str:
        if self.mode == "flight":
            return f"flight:{self.flight.flight_id}"
        return self.mode

    def group_cost(self, n_people: int) -> Decimal:
        if self.mode == "flight":
            return self.flight.price * n_people
        return self.row.cost


@dataclass(frozen=True)
class Transition:
    index: int
    day: int
    origin: str
    destination: str


@dataclass(frozen=True)
class Segment:
    index: int
    city: str
    days: tuple[int, int]  # arrival day, stay day
    nights: int = 2


@dataclass(frozen=True)
class SpaceSpec:
    """Per-slot candidate lists for one (query, bundle) pair."""

    query: TravelQuery
    specs: tuple[DaySpec, ...]
    transitions: tuple[Transition, ...]
    segments: tuple[Segment, ...]
    leg_candidates: tuple[tuple[Optional[LegOption], ...], ...]
    hotel_candidates: tuple[tuple[Optional[Accommodation], ...], ...]
    attraction_candidates: tuple[tuple[Optional[Attraction], ...], ...]
    meal_candidates: tuple[tuple[tuple[Restaurant, ...], ...], ...]
    day_restaurants: tuple[tuple[Restaurant, ...], ...]
    day_attractions: tuple[tuple[Attraction, ...], ...]
    rest_last_day: dict[tuple[str, str], int] = field(default_factory=dict)
    attr_last_day: dict[tuple[str, str], int] = field(default_factory=dict)

    @property
    def raw_product(self) -> int:
        size = 1
        for cands in itertools.chain(
            self.leg_candidates,
            self.hotel_candidates,
            self.attraction_candidates,
            self.meal_candidates,
        ):
            size *= len(cands)
        return size


Assembly = tuple[
    tuple[Optional[LegOption], ...],
    tuple[Optional[Accommodation], ...],
    tuple[Optional[Attraction], ...],
    tuple[tuple[Restaurant, ...], ...],
]


def _leg_options(b: ReferenceBundle, t: Transition, q: TravelQuery) -> tuple[Optional[LegOption], ...]:
    options: list[LegOption] = [
        LegOption(mode="flight", flight=f)
        for f in sorted(
            b.flights_between(t.origin, t.destination, q.day_date(t.day)),
            key=lambda f: (f.price, f.flight_id),
        )
    ]
    for mode in ("taxi", "self-driving"):
        row = b.distance_by_key.get((t.origin, t.destination, mode))
        if row is not None:
            options.append(LegOption(mode=mode, row=row))
    if not options:
        return (None,)
    return tuple(options)


def build_space(q: TravelQuery, b: ReferenceBundle) -> SpaceSpec:
    specs = expected_day_specs(q)
    transitions = tuple(
        Transition(index=i, day=s.day, origin=s.span.start, destination=s.span.end)
        for i, s in enumerate(s for s in specs if s.span.is_transition)
    )
    n_segments = (q.n_days - 1) // 2
    segments = tuple(
        Segment(index=i, city=q.destinations[i], days=(2 * i + 1, 2 * i + 2))
        for i in range(n_segments)
    )

    leg_candidates = tuple(_leg_options(b, t, q) for t in transitions)
    hotel_candidates = tuple(
        tuple(sorted(b.accommodations_in(seg.city), key=lambda a: a.name)) or (None,)
        for seg in segments
    )

    day_restaurants = []
    day_attractions = []
    attraction_candidates = []
    meal_candidates = []
    for s in specs:
        rests = tuple(sorted(b.restaurants_in(*s.allowed_cities), key=lambda r: (r.name, r.city)))
        attrs = tuple(sorted(b.attractions_in(*s.allowed_cities), key=lambda a: (a.name, a.city)))
        day_restaurants.append(rests)
        day_attractions.append(attrs)
        attraction_candidates.append(tuple(attrs) + (None,))
        subsets: list[tuple[Restaurant, ...]] = []
        for size in range(0, min(3, len(rests)) + 1):
            subsets.extend(itertools.combinations(rests, size))
        meal_candidates.append(tuple(subsets))

    rest_last_day: dict[tuple[str, str], int] = {}
    attr_last_day: dict[tuple[str, str], int] = {}
    for s in specs:
        for r in day_restaurants[s.day - 1]:
            rest_last_day[r.key] = s.day
        for a in day_attractions[s.day - 1]:
            attr_last_day[a.key] = s.day

    return SpaceSpec(
        query=q,
        specs=specs,
        transitions=transitions,
        segments=segments,
        leg_candidates=leg_candidates,
        hotel_candidates=tuple(hotel_candidates),
        attraction_candidates=tuple(attraction_candidates),
        meal_candidates=tuple(meal_candidates),
        day_restaurants=tuple(day_restaurants),
        day_attractions=tuple(day_attractions),
        rest_last_day=rest_last_day,
        attr_last_day=attr_last_day,
    )


def shape_valid(space: SpaceSpec, assembly: Assembly) -> bool:
    """Maximality: an empty meal/attraction slot is only allowed when every
    candidate for that day is already used somewhere in the plan."""
    _legs, _hotels, attractions, meals = assembly
    used_rest = {r.key for day in meals for r in day}
    for day_idx, chosen in enumerate(meals):
        if len(chosen) < 3:
            for r in space.day_restaurants[day_idx]:
                if r.key not in used_rest:
                    return False
    used_attr = {a.key for a in attractions if a is not None}
    for day_idx, choice in enumerate(attractions):
        if choice is None:
            for a in space.day_attractions[day_idx]:
                if a.key not in used_attr:
                    return False
    return True


def _leg_to_transport(opt: LegOption, t: Transition) -> TransportLeg:
    if opt.mode == "flight":
        f = opt.flight
        return TransportLeg(
            mode="flight",
            origin=t.origin,
            destination=t.destination,
            cost=f.price,
            flight_id=f.flight_id,
            departure=f.departure,
            arrival=f.arrival,
        )
    return TransportLeg(
        mode=opt.mode,
        origin=t.origin,
        destination=t.destination,
        cost=opt.row.cost,
        duration_minutes=opt.row.duration_minutes,
    )


def assembly_to_plan(space: SpaceSpec, assembly: Assembly) -> Plan:
    legs, hotels, attractions, meals = assembly
    q = space.query
    entries = []
    for s in space.specs:
        idx = s.day - 1
        leg = None
        if s.span.is_transition:
            t_idx = (s.day - 1) // 2
            opt = legs[t_idx]
            if opt is not None:
                leg = _leg_to_transport(opt, space.transitions[t_idx])
        accommodation = None
        if s.night_city is not None:
            seg_idx = (s.day + 1) // 2 - 1
            hotel = hotels[seg_idx]
            if hotel is not None:
                accommodation = ItemRef(hotel.name, hotel.city)
        chosen = sorted(meals[idx], key=lambda r: (r.name, r.city))
        slots: dict[str, Optional[ItemRef]] = {"breakfast": None, "lunch": None, "dinner": None}
        for slot, rest in zip(("breakfast", "lunch", "dinner"), chosen):
            slots[slot] = ItemRef(rest.name, rest.city)
        attraction = attractions[idx]
        entries.append(
            DayEntry(
                day=s.day,
                city=s.span,
                transportation=leg,
                breakfast=slots["breakfast"],
                lunch=slots["lunch"],
                dinner=slots["dinner"],
                attraction=ItemRef(attraction.name, attraction.city) if attraction else None,
                accommodation=accommodation,
            )
        )
    return Plan(query_id=q.id, days=tuple(entries))


def _rooms(n_people: int, occupancy: int) -> int:
    return -(-n_people // occupancy)


def assembly_cost(space: SpaceSpec, assembly: Assembly) -> Decimal:
    legs, hotels, attractions, meals = assembly
    q = space.query
    total = Decimal("0.00")
    for opt in legs:
        if opt is not None:
            total += opt.group_cost(q.n_people)
    for hotel, seg in zip(hotels, space.segments):
        if hotel is not None:
            total += hotel.price * _rooms(q.n_people, hotel.maximum_occupancy) * seg.nights
    for day in meals:
        for rest in day:
            total += rest.average_cost * q.n_people
    return total


def assembly_key(assembly: Assembly) -> tuple:
    """Deterministic tie-break key over an assembly's choice labels."""
    legs, hotels, attractions, meals = assembly
    return (
        tuple(opt.label if opt is not None else "-" for opt in legs),
        tuple(h.name if h is not None else "-" for h in hotels),
        tuple(a.name if a is not None else "-" for a in attractions),
        tuple(tuple(r.key for r in sorted(day, key=lambda r: (r.name, r.city))) for day in meals),
    )


def iter_assemblies(space: SpaceSpec) -> Iterator[Assembly]:
    """Every raw combination of slot candidates, in deterministic order."""
    for legs in itertools.product(*space.leg_candidates):
        for hotels in itertools.product(*space.hotel_candidates):
            for attractions in itertools.product(*space.attraction_candidates):
                for meals in itertools.product(*space.meal_candidates):
                    yield (legs, hotels, attractions, meals)


# --------------------------------------------------------------------------
# Exhaustive search and oracle

def _fails(outcomes: Sequence[ConstraintOutcome]) -> list[ConstraintOutcome]:
    return [o for o in outcomes if o.status == "fail"]


def _diagnose(fail_counts: dict[str, int], registry: Registry, detail: dict[str, str]) -> Infeasible:
    if not fail_counts:
        return Infeasible(None, "no well-formed plan can be assembled from the reference data")
    order = {cid: i for i, cid in enumerate(registry.ids)}
    worst = max(fail_counts, key=lambda cid: (fail_counts[cid], -order[cid]))
    return Infeasible(worst, detail.get(worst, f"every candidate plan violates {worst}"))


@dataclass(frozen=True)
class OracleResult:
    """All feasible plans with costs, plus enumeration statistics."""

    survivors: tuple[tuple[Plan, Decimal], ...]
    enumerated: int
    shape_valid_count: int

    @property
    def feasible_count(self) -> int:
        return len(self.survivors)

    @property
    def min_cost(self) -> Optional[Decimal]:
        return min((c for _p, c in self.survivors), default=None)


def _enumerate_feasible(
    q: TravelQuery,
    b: ReferenceBundle,
    registry: Registry,
    cap: int,
    keep_survivors: bool,
    first_only: bool = False,
) -> tuple[OracleResult, dict[str, int], dict[str, str], Optional[tuple]]:
    space = build_space(q, b)
    size = space.raw_product
    if size > cap:
        raise CapExceeded(size, cap)

    survivors: list[tuple[tuple, Plan, Decimal]] = []
    best: Optional[tuple] = None  # (cost, key, plan)
    fail_counts: dict[str, int] = {}
    detail: dict[str, str] = {}
    enumerated = 0
    valid = 0
    for assembly in iter_assemblies(space):
        enumerated += 1
        if not shape_valid(space, assembly):
            continue
        valid += 1
        plan = assembly_to_plan(space, assembly)
        outcomes = check_plan(plan, q, b, registry)
        fails = _fails(outcomes)
        if fails:
            for o in fails:
                fail_counts[o.constraint_id] = fail_counts.get(o.constraint_id, 0) + 1
                if o.constraint_id not in detail and o.evidence:
                    detail[o.constraint_id] = o.evidence[0].detail
            continue
        cost = assembly_cost(space, assembly)
        key = assembly_key(assembly)
        if keep_survivors:
            survivors.append((key, plan, cost))
        if best is None or (cost, key) < (best[0], best[1]):
            best = (cost, key, plan)
        if first_only:
            break

    survivors.sort(key=lambda item: (item[2], item[0]))
    result = OracleResult(
        survivors=tuple((plan, cost) for _k, plan, cost in survivors),
        enumerated=enumerated,
        shape_valid_count=valid,
    )
    return result, fail_counts, detail, best


def brute_force_oracle(
    q: TravelQuery,
    b: ReferenceBundle,
    cap: int = DEFAULT_EXHAUSTIVE_CAP,
    registry: Optional[Registry] = None,
) -> OracleResult:
    """Enumerate every well-formed assembly, filter by check_plan, return survivors.

    Desk-scale only; raises CapExceeded when the raw combination count
    exceeds cap.
    """
    reg = registry if registry is not None else default_registry()
    result, _counts, _detail, _best = _enumerate_feasible(
        q, b, reg, cap, keep_survivors=True
    )
    return result


@dataclass(frozen=True)
class DifficultyScore:
    """Share of well-formed assemblies that satisfy every constraint."""

    feasible_count: int
    shape_valid_count: int

    @property
    def feasible_fraction(self) -> float:
        if self.shape_valid_count == 0:
            return 0.0
        return self.feasible_count / self.shape_valid_count


def difficulty_score(
    q: TravelQuery, b: ReferenceBundle, cap: int = DEFAULT_EXHAUSTIVE_CAP
) -> DifficultyScore:
    result = brute_force_oracle(q, b, cap=cap)
    return DifficultyScore(
        feasible_count=result.feasible_count,
        shape_valid_count=result.shape_valid_count,
    )


# --------------------------------------------------------------------------
# Beam search

@dataclass(frozen=True)
class _State:
    cost: Decimal
    legs: tuple[Optional[LegOption], ...]
    hotels: tuple[Optional[Accommodation], ...]
    attractions: tuple[Optional[Attraction], ...]
    meals: tuple[tuple[Restaurant, ...], ...]
    modes: frozenset[str]
    used_rest: frozenset[tuple[str, str]]
    used_attr: frozenset[tuple[str, str]]
    # Items a past partial day left unused; they must be placed on a later day
    # for the final plan to be shape-valid.
    rest_obl: frozenset[tuple[str, str]] = frozenset()
    attr_obl: frozenset[tuple[str, str]] = frozenset()

    def sort_key(self) -> tuple:
        partial: Assembly = (self.legs, self.hotels, self.attractions, self.meals)
        return (self.cost, assembly_key(partial))


def _beam_search(
    q: TravelQuery,
    b: ReferenceBundle,
    registry: Registry,
    width: int,
    cap: int,
) -> Union[Plan, Infeasible]:
    space = build_space(q, b)
    enabled = set(registry.ids)
    banned_modes = {p.removeprefix("no-") for p in q.transport_prefs} if "transportation" in enabled else set()
    budget = q.budget if "budget" in enabled else None

    fail_counts: dict[str, int] = {}
    detail: dict[str, str] = {}

    def note(cid: str, msg: str, n: int = 1) -> None:
        fail_counts[cid] = fail_counts.get(cid, 0) + n
        detail.setdefault(cid, msg)

    states = [
        _State(
            cost=Decimal("0.00"),
            legs=(),
            hotels=(),
            attractions=(),
            meals=(),
            modes=frozenset(),
            used_rest=frozenset(),
            used_attr=frozenset(),
        )
    ]

    # Stage 1: one leg per transition.
    for t in space.transitions:
        nxt: list[_State] = []
        for st in states:
            for opt in space.leg_candidates[t.index]:
                if opt is None:
                    if "complete-information" in enabled:
                        note(
                            "complete-information",
                            f"no transportation option from {t.origin} to {t.destination} "
                            f"on {q.day_date(t.day).isoformat()}",
                        )
                        continue
                    nxt.append(replace(st, legs=st.legs + (None,)))
                    continue
                if opt.mode in banned_modes:
                    note("transportation", f"{opt.mode} is excluded by the query preferences")
                    continue
                if "no-conflicting-transportation" in enabled and (
                    (opt.mode == "flight" and "self-driving" in st.modes)
                    or (opt.mode == "self-driving" and "flight" in st.modes)
                ):
                    note("no-conflicting-transportation", "plans cannot mix flights and self-driving")
                    continue
                cost = st.cost + opt.group_cost(q.n_people)
                if budget is not None and cost > budget:
                    note("budget", "every transportation combination exceeds the budget")
                    continue
                nxt.append(
                    replace(st, cost=cost, legs=st.legs + (opt,), modes=st.modes | {opt.mode})
                )
        states = sorted(nxt, key=_State.sort_key)[:width]
        if not states:
            return _diagnose(fail_counts, registry, detail)

    # Stage 2: one accommodation per destination city.
    required_types = sorted(q.room_types) if "room-type" in enabled else []
    prohibited = {f"no-{tag}" for tag in q.house_rules} if "room-rules" in enabled else set()
    for seg in space.segments:
        last = seg.index == len(space.segments) - 1
        nxt = []
        for st in states:
            for hotel in space.hotel_candidates[seg.index]:
                if hotel is None:
                    if "complete-information" in enabled:
                        note("complete-information", f"no accommodation available in {seg.city}")
                        continue
                    nxt.append(replace(st, hotels=st.hotels + (None,)))
                    continue
                if "minimum-nights-stay" in enabled and hotel.minimum_nights > seg.nights:
                    note(
                        "minimum-nights-stay",
                        f"{hotel.name} requires {hotel.minimum_nights} nights, "
                        f"only {seg.nights} are spent in {seg.city}",
                    )
                    continue
                if prohibited & hotel.house_rules:
                    note("room-rules", f"no accommodation satisfies the house rules in {seg.city}")
                    continue
                cost = st.cost + hotel.price * _rooms(q.n_people, hotel.maximum_occupancy) * seg.nights
                if budget is not None and cost > budget:
                    note("budget", "every accommodation combination exceeds the budget")
                    continue
                cand = replace(st, cost=cost, hotels=st.hotels + (hotel,))
                if last and required_types:
                    offered = [h.room_type for h in cand.hotels if h is not None]
                    missing = [
                        t for t in required_types
                        if not any(_room_type_match(t, o) for o in offered)
                    ]
                    if missing:
                        note("room-type", f"no accommodation combination offers {missing[0]}")
                        continue
                nxt.append(cand)
        states = sorted(nxt, key=_State.sort_key)[:width]
        if not states:
            return _diagnose(fail_counts, registry, detail)

    # Stage 3: attractions and meals, day by day. A slot may be left short
    # only when its leftover options remain reachable later; those leftovers
    # become obligations that must fit the remaining days' slot capacity.
    for s in space.specs:
        nxt = []
        for st in states:
            att_choices = _attraction_choices(space, st, s.day)
            if att_choices is None:
                note("diverse-attractions", f"too many attractions come due on day {s.day}")
                continue
            for attraction, attr_obl in att_choices:
                att_state = replace(
                    st,
                    attractions=st.attractions + (attraction,),
                    used_attr=st.used_attr | ({attraction.key} if attraction else set()),
                    attr_obl=attr_obl,
                )
                combos = _meal_choices(space, att_state, s.day, width)
                if combos is None:
                    note("diverse-restaurants", f"more than three restaurants come due on day {s.day}")
                    continue
                for combo, rest_obl in combos:
                    cost = att_state.cost + sum(
                        (r.average_cost * q.n_people for r in combo), Decimal("0.00")
                    )
                    if budget is not None and cost > budget:
                        note("budget", "meal choices exceed the remaining budget")
                        continue
                    nxt.append(
                        replace(
                            att_state,
                            cost=cost,
                            meals=att_state.meals + (combo,),
                            used_rest=att_state.used_rest | {r.key for r in combo},
                            rest_obl=rest_obl,
                        )
                    )
        states = sorted(nxt, key=_State.sort_key)[:width]
        if not states:
            return _diagnose(fail_counts, registry, detail)

    # Final verification against the real checkers.
    best: Optional[tuple] = None
    for st in states:
        assembly: Assembly = (st.legs, st.hotels, st.attractions, st.meals)
        if not shape_valid(space, assembly):
            note("shape", "slot left empty while unused options remain")
            continue
        plan = assembly_to_plan(space, assembly)
        fails = _fails(check_plan(plan, q, b, registry))
        if fails:
            for o in fails:
                note(o.constraint_id, o.evidence[0].detail if o.evidence else o.message)
            continue
        key = (st.cost, assembly_key(assembly))
        if best is None or key < best[:2]:
            best = (st.cost, key[1], plan)
    if best is None:
        fail_counts.pop("shape", None)
        return _diagnose(fail_counts, registry, detail)
    return best[2]


def _room_type_match(requested: str, offered: str) -> bool:
    if requested == "not-shared-room":
        return offered != "shared-room"
    return requested == offered


def _obligations_fit(
    obligations: frozenset[tuple[str, str]], last_day: dict[tuple[str, str], int], capacity: int
) -> bool:
    """No future day may owe more obligations than it has slots."""
    counts: dict[int, int] = {}
    for key in obligations:
        d = last_day[key]
        counts[d] = counts.get(d, 0) + 1
        if counts[d] > capacity:
            return False
    return True


def _attraction_choices(
    space: SpaceSpec, st: _State, day: int
) -> Optional[list[tuple[Optional[Attraction], frozenset]]]:
    """Viable (choice, new obligations) pairs for a day's attraction slot.

    A filled slot waives the maximality rule for the day; an empty slot
    obligates every unused option to appear on a later day. Obligations due
    today must be placed today; two due at once is a dead end (None).
    """
    unused = [a for a in space.day_attractions[day - 1] if a.key not in st.used_attr]
    due = [a for a in unused if a.key in st.attr_obl and space.attr_last_day[a.key] == day]
    if len(due) > 1:
        return None
    if len(due) == 1:
        a = due[0]
        return [(a, st.attr_obl - {a.key})]
    choices: list[tuple[Optional[Attraction], frozenset]] = [
        (a, st.attr_obl - {a.key}) for a in unused
    ]
    leftovers = {a.key for a in unused}
    if all(space.attr_last_day[k] > day for k in leftovers):
        new_obl = st.attr_obl | leftovers
        if _obligations_fit(new_obl, space.attr_last_day, 1):
            choices.append((None, new_obl))
    return choices


def _meal_choices(
    space: SpaceSpec, st: _State, day: int, width: int
) -> Optional[list[tuple[tuple[Restaurant, ...], frozenset]]]:
    """Viable (subset, new obligations) pairs for a day's three meal slots.

    Full days waive the maximality rule; short days obligate their unused
    leftovers, which must all remain reachable later. Returns None when more
    obligations come due today than slots exist.
    """
    unused = [r for r in space.day_restaurants[day - 1] if r.key not in st.used_rest]
    due = [r for r in unused if r.key in st.rest_obl and space.rest_last_day[r.key] == day]
    if len(due) > 3:
        return None
    unused_keys = {r.key for r in unused}
    results: list[tuple[tuple[Restaurant, ...], frozenset]] = []
    seen: set[tuple] = set()

    def emit(subset: tuple[Restaurant, ...]) -> None:
        marker = tuple(sorted(r.key for r in subset))
        if marker in seen:
            return
        seen.add(marker)
        used_keys = {r.key for r in subset}
        obligations = st.rest_obl - used_keys
        if len(subset) < 3:
            leftover = unused_keys - used_keys
            if any(space.rest_last_day[k] <= day for k in leftover):
                return
            obligations = obligations | leftover
        if not _obligations_fit(obligations, space.rest_last_day, 3):
            return
        results.append((subset, obligations))

    base = tuple(sorted(due, key=lambda r: (r.name, r.city)))
    pool = [r for r in unused if r.key not in {x.key for x in base}]
    pool.sort(key=lambda r: (r.average_cost, r.name, r.city))
    pool = pool[: max(3, width)]
    for size in range(0, 3 - len(base) + 1):
        for extra in itertools.combinations(pool, size):
            emit(base + extra)
    return results


# --------------------------------------------------------------------------
# Entry point

def generate_plan(
    q: TravelQuery, b: ReferenceBundle, c: SearchConfig = SearchConfig()
) -> Union[Plan, Infeasible]:
    """Search the bundle for a constraint-satisfying plan.

    Deterministic for identical inputs. With strategy "exhaustive" and
    objective "min-cost" the result cost is minimal over all feasible
    plans in the assembly space.
    """
    violations = validate_query(q)
    if violations:
        raise ValueError(f"invalid query {q.id}: {'; '.join(violations)}")
    if c.strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {c.strategy!r}")
    if c.objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {c.objective!r}")
    if c.beam_width < 1:
        raise ValueError("beam_width must be >= 1")

    registry = default_registry().without(c.disabled_constraints)

    if c.strategy == "exhaustive":
        result, fail_counts, detail, best = _enumerate_feasible(
            q,
            b,
            registry,
            cap=c.exhaustive_cap,
            keep_survivors=False,
            first_only=c.objective == "first-feasible",
        )
        if best is None:
            return _diagnose(fail_counts, registry, detail)
        return best[2]

    width = 1 if c.strategy == "greedy" else c.beam_width
    return _beam_search(q, b, registry, width=width, cap=c.exhaustive_cap)
