"""Deterministic synthetic datasets.

Two flavors: full demo datasets (a shared reference bundle plus train and
validation query splits, every query guaranteed solvable) and tiny oracle
cases (at most three rows per table, three-day queries, deliberately mixed
feasible and infeasible) for exhaustive property testing.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from datetime import date, timedelta
from decimal import Decimal
from pathlib import Path

from . import ingest
from .model import (
    Accommodation,
    Attraction,
    DistanceRow,
    Flight,
    Plan,
    ReferenceBundle,
    Restaurant,
    TravelQuery,
    money,
    plan_total_cost,
    validate_query,
)
from .solver import SearchConfig, build_space, generate_plan

CITIES = (
    "Ardenville",
    "Breezewater",
    "Cinder Bluff",
    "Dorwick",
    "Eastmere",
    "Fernley Gap",
    "Graymoor",
    "Halcyon Bay",
)

CUISINES = (
    "american",
    "bakery",
    "barbecue",
    "chinese",
    "french",
    "indian",
    "italian",
    "mediterranean",
    "mexican",
    "seafood",
    "thai",
    "vegan",
)

_REST_A = ("Amber", "Basil", "Cobalt", "Dune", "Ember", "Fig", "Golden", "Harbor", "Iron", "Juniper")
_REST_B = ("Bistro", "Cantina", "Diner", "Grill", "Kitchen", "Oven", "Pantry", "Table", "Tavern", "Terrace")
_HOTEL_A = ("Alder", "Birch", "Cedar", "Dahlia", "Elm", "Fir", "Hazel", "Ivy")
_HOTEL_B = ("Court", "House", "Inn", "Lodge", "Rest", "Stay", "Suites", "View")
_ATTR_A = ("North", "Old", "Royal", "Silent", "Sunset", "Twin", "Whispering", "Wild")
_ATTR_B = ("Arboretum", "Falls", "Gallery", "Gardens", "Lookout", "Market", "Museum", "Pier", "Trail")

ROOM_TYPE_CYCLE = ("entire-room", "private-room", "shared-room")
PROHIBITIONS = ("no-parties", "no-smoking", "no-children-under-10", "no-pets", "no-visitors")

BASE_DATE = date(2025, 9, 1)


def _dollars(rng: random.Random, low: int, high: int) -> Decimal:
    return money(rng.randint(low, high))


def _time_pair(rng: random.Random) -> tuple[str, str]:
    dep_h, dep_m = rng.randint(5, 20), rng.choice((0, 10, 15, 20, 30, 40, 45, 50))
    dur = rng.randint(60, 300)
    arr = (dep_h * 60 + dep_m + dur) % (24 * 60)
    return f"{dep_h:02d}:{dep_m:02d}", f"{arr // 60:02d}:{arr % 60:02d}"


class _NamePool:
    def __init__(self, rng: random.Random, first: tuple[str, ...], second: tuple[str, ...]):
        combos = [f"{a} {b}" for a in first for b in second]
        rng.shuffle(combos)
        self._names = iter(combos)

    def take(self) -> str:
        return next(self._names)


# --------------------------------------------------------------------------
# Demo dataset: one bundle, guaranteed-solvable query splits

@dataclass
class _BundleDraft:
    flights: list[Flight]
    distances: list[DistanceRow]
    accommodations: list[Accommodation]
    restaurants: list[Restaurant]
    attractions: list[Attraction]

    def freeze(self) -> ReferenceBundle:
        return ReferenceBundle(
            flights=tuple(sorted(self.flights, key=lambda f: f.flight_id)),
            distances=tuple(sorted(self.distances, key=lambda d: (d.origin, d.destination, d.mode))),
            accommodations=tuple(sorted(self.accommodations, key=lambda a: (a.city, a.name))),
            restaurants=tuple(sorted(self.restaurants, key=lambda r: (r.city, r.name))),
            attractions=tuple(sorted(self.attractions, key=lambda a: (a.city, a.name))),
        )


def _city_inventory(rng: random.Random, cities: tuple[str, ...]) -> _BundleDraft:
    draft = _BundleDraft([], [], [], [], [])
    rest_pool = _NamePool(rng, _REST_A, _REST_B)
    hotel_pool = _NamePool(rng, _HOTEL_A, _HOTEL_B)
    attr_pool = _NamePool(rng, _ATTR_A, _ATTR_B)

    for city in cities:
        # First hotel is always permissive so house-rule preferences stay satisfiable.
        draft.accommodations.append(
            Accommodation(
                name=hotel_pool.take(),
                city=city,
                price=_dollars(rng, 90, 180),
                room_type="entire-room",
                house_rules=frozenset(),
                minimum_nights=1,
                maximum_occupancy=rng.randint(2, 4),
            )
        )
        draft.accommodations.append(
            Accommodation(
                name=hotel_pool.take(),
                city=city,
                price=_dollars(rng, 60, 140),
                room_type="private-room",
                house_rules=frozenset(),
                minimum_nights=rng.randint(1, 2),
                maximum_occupancy=rng.randint(1, 3),
            )
        )
        for _ in range(rng.randint(1, 2)):
            draft.accommodations.append(
                Accommodation(
                    name=hotel_pool.take(),
                    city=city,
                    price=_dollars(rng, 40, 260),
                    room_type=rng.choice(ROOM_TYPE_CYCLE),
                    house_rules=frozenset(rng.sample(PROHIBITIONS, rng.randint(0, 2))),
                    minimum_nights=rng.randint(1, 3),
                    maximum_occupancy=rng.randint(1, 4),
                )
            )
        city_cuisines = rng.sample(CUISINES, 5)
        for i in range(rng.randint(4, 6)):
            cuisines = {city_cuisines[i % 5]}
            if rng.random() < 0.4:
                cuisines.add(rng.choice(CUISINES))
            draft.restaurants.append(
                Restaurant(
                    name=rest_pool.take(),
                    city=city,
                    average_cost=_dollars(rng, 8, 60),
                    cuisines=frozenset(cuisines),
                )
            )
        for _ in range(rng.randint(3, 4)):
            draft.attractions.append(Attraction(name=attr_pool.take(), city=city))

    for origin in cities:
        for destination in cities:
            if origin == destination:
                continue
            miles = Decimal(rng.randint(40, 900))
            draft.distances.append(
                DistanceRow(
                    origin=origin,
                    destination=destination,
                    mode="self-driving",
                    distance_miles=miles,
                    duration_minutes=int(miles) * 60 // 55,
                    cost=money(int(miles) // 2 + 10),
                )
            )
            draft.distances.append(
                DistanceRow(
                    origin=origin,
                    destination=destination,
                    mode="taxi",
                    distance_miles=miles,
                    duration_minutes=int(miles) * 60 // 50,
                    cost=money(int(miles) + 30),
                )
            )
    return draft


def _ensure_flights(
    rng: random.Random, draft: _BundleDraft, origin: str, destination: str, on: date,
    counter: list[int],
) -> None:
    existing = [
        f for f in draft.flights
        if f.origin == origin and f.destination == destination and f.date == on
    ]
    if existing:
        return
    for _ in range(rng.randint(1, 2)):
        counter[0] += 1
        dep, arr = _time_pair(rng)
        draft.flights.append(
            Flight(
                flight_id=f"F{counter[0]:04d}",
                origin=origin,
                destination=destination,
                departure=dep,
                arrival=arr,
                price=_dollars(rng, 70, 380),
                date=on,
            )
        )


_PREF_STRIP_ORDER = ("room_types", "house_rules", "cuisines", "transport_prefs")


def _solve_with_repair(
    q: TravelQuery, bundle: ReferenceBundle, rng: random.Random
) -> TravelQuery:
    """Shrink preferences until the beam solver finds a plan, then set a budget
    with bounded headroom over that plan's cost."""
    config = SearchConfig(strategy="beam")
    probe = replace(q, budget=money(10_000_000))
    for strip_count in range(len(_PREF_STRIP_ORDER) + 1):
        stripped = probe
        for field_name in _PREF_STRIP_ORDER[:strip_count]:
            stripped = replace(stripped, **{field_name: frozenset()})
        plan = generate_plan(stripped, bundle, config)
        if isinstance(plan, Plan):
            cost = plan_total_cost(plan, stripped, bundle)
            factor = Decimal(rng.randint(112, 160)) / Decimal(100)
            budget = money(int(cost * factor) + 1)
            return replace(stripped, budget=budget)
    raise RuntimeError(f"could not make query {q.id} solvable")


def make_demo_dataset(
    seed: int = 0, n_train: int = 45, n_validation: int = 180
) -> tuple[ReferenceBundle, list[TravelQuery]]:
    """A shared bundle plus train/validation splits; every query is solvable."""
    rng = random.Random(f"demo:{seed}")
    draft = _city_inventory(rng, CITIES)
    flight_counter = [0]

    queries: list[TravelQuery] = []
    specs = [("train", n_train), ("validation", n_validation)]
    for split, count in specs:
        for i in range(count):
            n_days = rng.choice((3, 5, 7))
            n_dest = (n_days - 1) // 2
            cities = rng.sample(CITIES, n_dest + 1)
            origin, destinations = cities[0], tuple(cities[1:])
            start = BASE_DATE + timedelta(days=rng.randint(0, 27))
            q = TravelQuery(
                id=f"{split}-{i:04d}",
                origin=origin,
                destinations=destinations,
                start_date=start,
                n_days=n_days,
                n_people=rng.randint(1, 5),
                budget=money(1),  # placeholder until repaired
                house_rules=frozenset(
                    rng.sample(("parties", "smoking", "pets", "visitors", "children-under-10"),
                               rng.randint(0, 2))
                    if rng.random() < 0.5 else ()
                ),
                room_types=frozenset(
                    [rng.choice(("entire-room", "private-room", "not-shared-room"))]
                    if rng.random() < 0.4 else ()
                ),
                cuisines=frozenset(),
                transport_prefs=frozenset(
                    [rng.choice(("no-flight", "no-self-driving"))]
                    if rng.random() < 0.35 else ()
                ),
                split=split,
            )
            # Cuisine preferences drawn from what the destinations actually serve.
            dest_cuisines = sorted(
                {c for r in draft.restaurants if r.city in destinations for c in r.cuisines}
            )
            if dest_cuisines and rng.random() < 0.5:
                q = replace(
                    q,
                    cuisines=frozenset(rng.sample(dest_cuisines, rng.randint(1, min(2, len(dest_cuisines))))),
                )
            # Flights must exist for each transition date before solving.
            route = (origin,) + destinations + (origin,)
            for t in range(len(route) - 1):
                day = 2 * t + 1
                _ensure_flights(
                    rng, draft, route[t], route[t + 1],
                    start + timedelta(days=day - 1), flight_counter,
                )
            bundle = draft.freeze()
            q = _solve_with_repair(q, bundle, rng)
            assert validate_query(q) == []
            queries.append(q)

    return draft.freeze(), queries


def write_demo_dataset(
    out_dir: Path | str, seed: int = 0, n_train: int = 45, n_validation: int = 180
) -> tuple[Path, Path]:
    """Write queries.jsonl, raw_reference.json, and reference/ CSVs under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle, queries = make_demo_dataset(seed, n_train, n_validation)
    raw_doc = ingest.bundle_to_raw_document(bundle)
    raw_path = out / "raw_reference.json"
    import json

    raw_path.write_text(json.dumps(raw_doc, indent=2, sort_keys=True), encoding="utf-8")
    ingest.convert_reference_to_csv(raw_doc, out / "reference")
    queries_path = out / "queries.jsonl"
    ingest.save_queries(queries, queries_path)
    return queries_path, out / "reference"


# --------------------------------------------------------------------------
# Oracle cases: tiny bundles for exhaustive comparison

@dataclass(frozen=True)
class OracleCase:
    seed: int
    query: TravelQuery
    bundle: ReferenceBundle


def make_oracle_case(seed: int, max_product: int = 30_000) -> OracleCase:
    """A three-day query over a bundle with at most three rows per table.

    Deliberately not guaranteed feasible: hotels may demand three-night
    stays, budgets may be tight, requested cuisines may be unserved, and
    some transitions may lack any transportation.
    """
    rng = random.Random(f"oracle:{seed}")
    origin, destination = rng.sample(CITIES, 2)
    start = BASE_DATE + timedelta(days=rng.randint(0, 9))

    rest_pool = _NamePool(rng, _REST_A, _REST_B)
    hotel_pool = _NamePool(rng, _HOTEL_A, _HOTEL_B)
    attr_pool = _NamePool(rng, _ATTR_A, _ATTR_B)

    restaurants = tuple(
        Restaurant(
            name=rest_pool.take(),
            city=destination if rng.random() < 0.7 else origin,
            average_cost=_dollars(rng, 8, 70),
            cuisines=frozenset(rng.sample(CUISINES[:6], rng.randint(1, 2))),
        )
        for _ in range(rng.randint(1, 3))
    )
    attractions = tuple(
        Attraction(name=attr_pool.take(), city=destination if rng.random() < 0.8 else origin)
        for _ in range(rng.randint(0, 2))
    )
    accommodations = tuple(
        Accommodation(
            name=hotel_pool.take(),
            city=destination,
            price=_dollars(rng, 40, 240),
            room_type=rng.choice(ROOM_TYPE_CYCLE),
            house_rules=frozenset(rng.sample(PROHIBITIONS, rng.randint(0, 2))),
            minimum_nights=rng.choice((1, 1, 2, 3)),
            maximum_occupancy=rng.randint(1, 3),
        )
        for _ in range(rng.randint(0, 3) if rng.random() < 0.9 else 0)
    )

    flights: list[Flight] = []
    counter = 0
    for day, (a, bcity) in ((1, (origin, destination)), (3, (destination, origin))):
        for _ in range(rng.randint(0, 2)):
            counter += 1
            dep, arr = _time_pair(rng)
            flights.append(
                Flight(
                    flight_id=f"F{counter:04d}",
                    origin=a,
                    destination=bcity,
                    departure=dep,
                    arrival=arr,
                    price=_dollars(rng, 60, 300),
                    date=start + timedelta(days=day - 1),
                )
            )
    flights = flights[:3]

    distances: list[DistanceRow] = []
    for a, bcity in ((origin, destination), (destination, origin)):
        for mode in ("taxi", "self-driving"):
            if rng.random() < 0.6:
                miles = Decimal(rng.randint(30, 400))
                distances.append(
                    DistanceRow(
                        origin=a,
                        destination=bcity,
                        mode=mode,
                        distance_miles=miles,
                        duration_minutes=int(miles) * 60 // 50,
                        cost=money(int(miles) // 2 + 15),
                    )
                )
    distances = distances[:3]

    query = TravelQuery(
        id=f"oracle-{seed:04d}",
        origin=origin,
        destinations=(destination,),
        start_date=start,
        n_days=3,
        n_people=rng.randint(1, 3),
        budget=_dollars(rng, 250, 2600),
        house_rules=frozenset(
            [rng.choice(("parties", "smoking", "pets"))] if rng.random() < 0.35 else ()
        ),
        room_types=frozenset(
            [rng.choice(("entire-room", "private-room", "not-shared-room"))]
            if rng.random() < 0.35 else ()
        ),
        cuisines=frozenset(
            rng.sample(CUISINES[:6], rng.randint(1, 2)) if rng.random() < 0.4 else ()
        ),
        transport_prefs=frozenset(
            [rng.choice(("no-flight", "no-self-driving"))] if rng.random() < 0.3 else ()
        ),
        split="train",
    )

    bundle = ReferenceBundle(
        flights=tuple(flights),
        distances=tuple(distances),
        accommodations=accommodations,
        restaurants=restaurants,
        attractions=attractions,
    )
    # Keep exhaustive enumeration desk-sized.
    while build_space(query, bundle).raw_product > max_product:
        if bundle.restaurants:
            bundle = replace(bundle, restaurants=bundle.restaurants[:-1])
        elif bundle.attractions:
            bundle = replace(bundle, attractions=bundle.attractions[:-1])
        else:
            bundle = replace(bundle, flights=bundle.flights[:-1])
    return OracleCase(seed=seed, query=query, bundle=bundle)
