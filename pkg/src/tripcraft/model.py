"""Core domain types: travel queries, reference data tables, and day-by-day plans.

All types are immutable value objects; construct them once and share freely.
Money is decimal USD with exactly two fractional digits, compared exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta
from decimal import Decimal, InvalidOperation
from functools import cached_property
from typing import Iterator, Optional

TRIP_LENGTHS = (3, 5, 7)
SPLITS = ("train", "validation")

# Activities a travelling party may bring along; a query tag "pets" means the
# party travels with pets, so an accommodation listing "no-pets" conflicts.
HOUSE_RULE_ACTIVITIES = frozenset(
    {"parties", "smoking", "children-under-10", "pets", "visitors"}
)
HOUSE_RULE_PROHIBITIONS = frozenset("no-" + a for a in HOUSE_RULE_ACTIVITIES)

# Concrete room types an accommodation can offer. "not-shared-room" is valid
# only as a request and matches any non-shared room type.
ROOM_TYPES = frozenset({"entire-room", "private-room", "shared-room"})
ROOM_TYPE_REQUESTS = ROOM_TYPES | {"not-shared-room"}

TRANSPORT_PREFS = frozenset({"no-flight", "no-self-driving"})
GROUND_MODES = ("self-driving", "taxi")
MODES = ("flight",) + GROUND_MODES

MEAL_SLOTS = ("breakfast", "lunch", "dinner")

CENT = Decimal("0.01")


class MoneyError(ValueError):
    """Raised for amounts that do not fit decimal USD with 2 fractional digits."""


def money(value: object) -> Decimal:
    """Parse an amount into a Decimal quantized to cents.

    Accepts str, int, or Decimal. More than two fractional digits is an
    error, never silently rounded.
    """
    if isinstance(value, float):
        raise MoneyError(f"float {value!r} is not an exact currency amount")
    try:
        d = Decimal(str(value))
    except InvalidOperation as exc:
        raise MoneyError(f"not a currency amount: {value!r}") from exc
    quantized = d.quantize(CENT)
    if quantized != d:
        raise MoneyError(f"{value!r} has more than 2 fractional digits")
    return quantized


def fmt_money(amount: Decimal) -> str:
    """Canonical 2-decimal rendering, e.g. '1700.00'."""
    return str(amount.quantize(CENT))


def fmt_money_compact(amount: Decimal) -> str:
    """Human rendering without trailing '.00' on whole-dollar amounts."""
    q = amount.quantize(CENT)
    if q == q.to_integral_value():
        return str(q.quantize(Decimal("1")))
    return str(q)


class UnresolvedItem(Exception):
    """A plan references an item that is absent from the reference bundle."""

    def __init__(self, name: str, table: str):
        super().__init__(f"{name!r} not found in {table}")
        self.name = name
        self.table = table


@dataclass(frozen=True)
class TravelQuery:
    """One user request for a multi-day trip."""

    id: str
    origin: str
    destinations: tuple[str, ...]
    start_date: date
    n_days: int
    n_people: int
    budget: Decimal
    house_rules: frozenset[str] = frozenset()
    room_types: frozenset[str] = frozenset()
    cuisines: frozenset[str] = frozenset()
    transport_prefs: frozenset[str] = frozenset()
    split: str = "train"

    def day_date(self, day: int) -> date:
        return self.start_date + timedelta(days=day - 1)


def validate_query(q: TravelQuery) -> list[str]:
    """Return violation descriptions, empty iff the query is well-formed."""
    violations: list[str] = []
    if q.budget <= 0:
        violations.append("budget must be > 0")
    if q.n_people < 1:
        violations.append("n_people must be >= 1")
    if q.n_days not in TRIP_LENGTHS:
        violations.append("n_days must be 3, 5, or 7")
    else:
        expected = (q.n_days - 1) // 2
        if len(q.destinations) != expected:
            violations.append(f"destinations count must be {expected}")
    if q.origin in q.destinations:
        violations.append("origin must not appear in destinations")
    if q.split not in SPLITS:
        violations.append("split must be 'train' or 'validation'")
    for tag in sorted(q.house_rules - HOUSE_RULE_ACTIVITIES):
        violations.append(f"house_rules has unknown tag {tag!r}")
    for tag in sorted(q.room_types - ROOM_TYPE_REQUESTS):
        violations.append(f"room_types has unknown tag {tag!r}")
    for tag in sorted(q.transport_prefs - TRANSPORT_PREFS):
        violations.append(f"transport_prefs has unknown tag {tag!r}")
    return violations


# --------------------------------------------------------------------------
# Reference data

@dataclass(frozen=True)
class Flight:
    flight_id: str
    origin: str
    destination: str
    departure: str  # HH:MM
    arrival: str  # HH:MM
    price: Decimal  # per person
    date: date


@dataclass(frozen=True)
class DistanceRow:
    origin: str
    destination: str
    mode: str  # self-driving | taxi
    distance_miles: Decimal
    duration_minutes: int
    cost: Decimal  # per group


@dataclass(frozen=True)
class Accommodation:
    name: str
    city: str
    price: Decimal  # per room-night
    room_type: str
    house_rules: frozenset[str]  # prohibitions, e.g. "no-pets"
    minimum_nights: int
    maximum_occupancy: int

    @property
    def key(self) -> tuple[str, str]:
        return (self.name, self.city)


@dataclass(frozen=True)
class Restaurant:
    name: str
    city: str
    average_cost: Decimal  # per person
    cuisines: frozenset[str]

    @property
    def key(self) -> tuple[str, str]:
        return (self.name, self.city)


@dataclass(frozen=True)
class Attraction:
    name: str
    city: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.name, self.city)


@dataclass(frozen=True)
class ReferenceBundle:
    """The closed universe of bookable items a plan may reference."""

    flights: tuple[Flight, ...] = ()
    distances: tuple[DistanceRow, ...] = ()
    accommodations: tuple[Accommodation, ...] = ()
    restaurants: tuple[Restaurant, ...] = ()
    attractions: tuple[Attraction, ...] = ()

    @cached_property
    def flight_by_id(self) -> dict[str, Flight]:
        return {f.flight_id: f for f in self.flights}

    @cached_property
    def distance_by_key(self) -> dict[tuple[str, str, str], DistanceRow]:
        return {(d.origin, d.destination, d.mode): d for d in self.distances}

    @cached_property
    def accommodation_by_key(self) -> dict[tuple[str, str], Accommodation]:
        return {(a.name, a.city): a for a in self.accommodations}

    @cached_property
    def restaurant_by_key(self) -> dict[tuple[str, str], Restaurant]:
        return {(r.name, r.city): r for r in self.restaurants}

    @cached_property
    def attraction_by_key(self) -> dict[tuple[str, str], Attraction]:
        return {(a.name, a.city): a for a in self.attractions}

    def flights_between(self, origin: str, destination: str, on: date) -> list[Flight]:
        return [
            f
            for f in self.flights
            if f.origin == origin and f.destination == destination and f.date == on
        ]

    def accommodations_in(self, city: str) -> list[Accommodation]:
        return [a for a in self.accommodations if a.city == city]

    def restaurants_in(self, *cities: str) -> list[Restaurant]:
        wanted = set(cities)
        return [r for r in self.restaurants if r.city in wanted]

    def attractions_in(self, *cities: str) -> list[Attraction]:
        wanted = set(cities)
        return [a for a in self.attractions if a.city in wanted]


# --------------------------------------------------------------------------
# Plans

@dataclass(frozen=True)
class CitySpan:
    """Where a day takes place: a stay (start == end) or a transition."""

    start: str
    end: str

    @property
    def is_transition(self) -> bool:
        return self.start != self.end

    @property
    def cities(self) -> tuple[str, ...]:
        return (self.start,) if not self.is_transition else (self.start, self.end)

    @staticmethod
    def stay(city: str) -> "CitySpan":
        return CitySpan(city, city)


@dataclass(frozen=True)
class ItemRef:
    """A named item at a city, as written in a plan."""

    name: str
    city: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.name, self.city)


@dataclass(frozen=True)
class TransportLeg:
    mode: str  # flight | self-driving | taxi
    origin: str
    destination: str
    cost: Decimal
    flight_id: Optional[str] = None
    departure: Optional[str] = None
    arrival: Optional[str] = None
    duration_minutes: Optional[int] = None


@dataclass(frozen=True)
class DayEntry:
    day: int
    city: CitySpan
    transportation: Optional[TransportLeg] = None
    breakfast: Optional[ItemRef] = None
    lunch: Optional[ItemRef] = None
    dinner: Optional[ItemRef] = None
    attraction: Optional[ItemRef] = None
    accommodation: Optional[ItemRef] = None

    def meals(self) -> Iterator[tuple[str, ItemRef]]:
        for slot in MEAL_SLOTS:
            ref = getattr(self, slot)
            if ref is not None:
                yield slot, ref


@dataclass(frozen=True)
class Plan:
    """A day-by-day itinerary answering one query."""

    query_id: str
    days: tuple[DayEntry, ...]


# --------------------------------------------------------------------------
# Canonical route

@dataclass(frozen=True)
class DaySpec:
    """The route-derived shape of one trip day."""

    day: int
    span: CitySpan
    night_city: Optional[str]  # city slept in that night; None on the final day

    @property
    def allowed_cities(self) -> tuple[str, ...]:
        return self.span.cities


def expected_day_specs(q: TravelQuery) -> tuple[DaySpec, ...]:
    """The canonical day pattern for a query.

    Trips alternate travel and stay days: arrive at each destination on an
    odd day, spend the following day there, and return to the origin on the
    final day. Each destination hosts exactly two nights.
    """
    cities = (q.origin,) + q.destinations
    specs: list[DaySpec] = []
    segments = (q.n_days - 1) // 2
    for i in range(1, segments + 1):
        specs.append(
            DaySpec(2 * i - 1, CitySpan(cities[i - 1], cities[i]), cities[i])
        )
        specs.append(DaySpec(2 * i, CitySpan.stay(cities[i]), cities[i]))
    specs.append(DaySpec(q.n_days, CitySpan(cities[segments], q.origin), None))
    return tuple(specs)


# --------------------------------------------------------------------------
# Costing

@dataclass(frozen=True)
class CostLine:
    day: int
    field: str
    item: str
    amount: Decimal


@dataclass(frozen=True)
class CostBreakdown:
    total: Decimal
    lines: tuple[CostLine, ...]
    unresolved: tuple[UnresolvedItem, ...]


def _rooms_needed(n_people: int, maximum_occupancy: int) -> int:
    return -(-n_people // maximum_occupancy)


def cost_breakdown(p: Plan, q: TravelQuery, b: ReferenceBundle) -> CostBreakdown:
    """Line-item costing of a plan against bundle prices.

    Attribution: flights and meals are per person, ground transport per
    group, lodging per room-night with parties packed into as few rooms as
    occupancy allows. Attractions are free and never priced. Items that do
    not resolve in the bundle are collected, not raised.
    """
    lines: list[CostLine] = []
    unresolved: list[UnresolvedItem] = []
    for entry in p.days:
        leg = entry.transportation
        if leg is not None:
            if leg.mode == "flight":
                flight = b.flight_by_id.get(leg.flight_id or "")
                if flight is None:
                    unresolved.append(UnresolvedItem(leg.flight_id or "?", "flights"))
                else:
                    lines.append(
                        CostLine(
                            entry.day,
                            "transportation",
                            flight.flight_id,
                            flight.price * q.n_people,
                        )
                    )
            else:
                row = b.distance_by_key.get((leg.origin, leg.destination, leg.mode))
                if row is None:
                    unresolved.append(
                        UnresolvedItem(
                            f"{leg.origin} to {leg.destination} ({leg.mode})",
                            "distances",
                        )
                    )
                else:
                    lines.append(
                        CostLine(
                            entry.day,
                            "transportation",
                            f"{leg.mode} {leg.origin} to {leg.destination}",
                            row.cost,
                        )
                    )
        for slot, ref in entry.meals():
            rest = b.restaurant_by_key.get(ref.key)
            if rest is None:
                unresolved.append(UnresolvedItem(ref.name, "restaurants"))
            else:
                lines.append(
                    CostLine(entry.day, slot, rest.name, rest.average_cost * q.n_people)
                )
        if entry.accommodation is not None:
            acc = b.accommodation_by_key.get(entry.accommodation.key)
            if acc is None:
                unresolved.append(UnresolvedItem(entry.accommodation.name, "accommodations"))
            else:
                rooms = _rooms_needed(q.n_people, acc.maximum_occupancy)
                lines.append(
                    CostLine(entry.day, "accommodation", acc.name, acc.price * rooms)
                )
    total = sum((line.amount for line in lines), Decimal("0.00"))
    return CostBreakdown(total=total, lines=tuple(lines), unresolved=tuple(unresolved))


def plan_total_cost(
    p: Plan, q: TravelQuery, b: ReferenceBundle, strict: bool = True
) -> Decimal:
    """Total plan cost in USD.

    In strict mode the first unresolved reference raises UnresolvedItem;
    with strict=False unresolved items are skipped (partial cost).
    """
    breakdown = cost_breakdown(p, q, b)
    if strict and breakdown.unresolved:
        raise breakdown.unresolved[0]
    return breakdown.total
