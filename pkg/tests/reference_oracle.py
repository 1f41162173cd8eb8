"""Straight-line reference implementations used as independent test oracles.

Everything here is re-derived from first principles with plain loops over
the value objects: the canonical day pattern, the plan assembly space, each
constraint verdict, and plan costing. Deliberately dumb and dependency-free;
it must never import the library's constraint registry or solver.
"""

from __future__ import annotations

from datetime import timedelta
from decimal import Decimal
from itertools import combinations, product

from tripcraft.model import CitySpan, DayEntry, ItemRef, Plan, TransportLeg


def route_days(query):
    """[(day, start_city, end_city, night_city_or_None)] for the fixed route."""
    cities = [query.origin] + list(query.destinations)
    out = []
    k = (query.n_days - 1) // 2
    for i in range(1, k + 1):
        out.append((2 * i - 1, cities[i - 1], cities[i], cities[i]))
        out.append((2 * i, cities[i], cities[i], cities[i]))
    out.append((query.n_days, cities[k], query.origin, None))
    return out


def _cities_of(day_tuple):
    _day, start, end, _night = day_tuple
    return {start, end}


def reference_cost(plan, query, bundle):
    """Total cost re-derived with plain lookups: flights and meals per person,
    ground legs per group, lodging per room-night. Unresolved items -> None."""
    total = Decimal("0.00")
    for entry in plan.days:
        leg = entry.transportation
        if leg is not None:
            if leg.mode == "flight":
                rows = [f for f in bundle.flights if f.flight_id == leg.flight_id]
                if not rows:
                    return None
                total += rows[0].price * query.n_people
            else:
                rows = [
                    d for d in bundle.distances
                    if d.origin == leg.origin and d.destination == leg.destination
                    and d.mode == leg.mode
                ]
                if not rows:
                    return None
                total += rows[0].cost
        for ref in (entry.breakfast, entry.lunch, entry.dinner):
            if ref is not None:
                rows = [r for r in bundle.restaurants if r.name == ref.name and r.city == ref.city]
                if not rows:
                    return None
                total += rows[0].average_cost * query.n_people
        if entry.accommodation is not None:
            rows = [
                a for a in bundle.accommodations
                if a.name == entry.accommodation.name and a.city == entry.accommodation.city
            ]
            if not rows:
                return None
            acc = rows[0]
            rooms = (query.n_people + acc.maximum_occupancy - 1) // acc.maximum_occupancy
            total += acc.price * rooms
    return total


def reference_verdicts(plan, query, bundle):
    """pass/fail per constraint id, re-derived from scratch. Hard constraints
    the query does not request are omitted."""
    v = {}
    expected = route_days(query)

    # within-sandbox: every referenced item exists in the bundle as claimed.
    ok = True
    for entry in plan.days:
        leg = entry.transportation
        when = query.start_date + timedelta(days=entry.day - 1)
        if leg is not None:
            if leg.mode == "flight":
                found = [
                    f for f in bundle.flights
                    if f.flight_id == leg.flight_id and f.origin == leg.origin
                    and f.destination == leg.destination and f.date == when
                ]
                if not found:
                    ok = False
            else:
                found = [
                    d for d in bundle.distances
                    if d.origin == leg.origin and d.destination == leg.destination
                    and d.mode == leg.mode
                ]
                if not found:
                    ok = False
        for ref in (entry.breakfast, entry.lunch, entry.dinner):
            if ref is not None:
                if not any(r.name == ref.name and r.city == ref.city for r in bundle.restaurants):
                    ok = False
        if entry.attraction is not None:
            a = entry.attraction
            if not any(x.name == a.name and x.city == a.city for x in bundle.attractions):
                ok = False
        if entry.accommodation is not None:
            h = entry.accommodation
            if not any(x.name == h.name and x.city == h.city for x in bundle.accommodations):
                ok = False
    v["within-sandbox"] = ok

    # complete-information: legs on city-change days, lodging on all but the last day.
    ok = True
    for entry in plan.days:
        if entry.city.start != entry.city.end and entry.transportation is None:
            ok = False
        if entry.day < len(plan.days) and entry.accommodation is None:
            ok = False
    v["complete-information"] = ok

    # within-current-city: meals and attractions only in that day's cities.
    ok = True
    for entry in plan.days:
        allowed = {entry.city.start, entry.city.end}
        for ref in (entry.breakfast, entry.lunch, entry.dinner):
            if ref is not None and ref.city not in allowed:
                ok = False
        if entry.attraction is not None and entry.attraction.city not in allowed:
            ok = False
    v["within-current-city"] = ok

    # reasonable-city-route: the fixed day pattern, with legs matching it.
    ok = len(plan.days) == len(expected)
    for entry, (day, start, end, _night) in zip(plan.days, expected):
        if (entry.city.start, entry.city.end) != (start, end):
            ok = False
        leg = entry.transportation
        if leg is not None:
            if entry.city.start == entry.city.end:
                ok = False
            elif (leg.origin, leg.destination) != (entry.city.start, entry.city.end):
                ok = False
    v["reasonable-city-route"] = ok

    # diverse-restaurants: no (name, city) served twice anywhere.
    served = []
    for entry in plan.days:
        for ref in (entry.breakfast, entry.lunch, entry.dinner):
            if ref is not None:
                served.append((ref.name, ref.city))
    v["diverse-restaurants"] = len(served) == len(set(served))

    # diverse-attractions: no attraction on two days.
    visited = [
        (e.attraction.name, e.attraction.city) for e in plan.days if e.attraction is not None
    ]
    v["diverse-attractions"] = len(visited) == len(set(visited))

    # no-conflicting-transportation: never both flight and self-driving.
    modes = {e.transportation.mode for e in plan.days if e.transportation is not None}
    v["no-conflicting-transportation"] = not ({"flight", "self-driving"} <= modes)

    # minimum-nights-stay: consecutive same-lodging runs vs the listing's minimum.
    ok = True
    runs = []
    current = None
    length = 0
    for entry in plan.days:
        key = (
            (entry.accommodation.name, entry.accommodation.city)
            if entry.accommodation is not None
            else None
        )
        if key != current:
            if current is not None:
                runs.append((current, length))
            current, length = key, 0
        if key is not None:
            length += 1
    if current is not None:
        runs.append((current, length))
    for key, nights in runs:
        rows = [a for a in bundle.accommodations if (a.name, a.city) == key]
        if rows and nights < rows[0].minimum_nights:
            ok = False
    v["minimum-nights-stay"] = ok

    # budget: resolvable cost within budget; unresolvable items fail it.
    cost = reference_cost(plan, query, bundle)
    v["budget"] = cost is not None and cost <= query.budget

    # room-rules: no booked listing prohibits something the party brings.
    if query.house_rules:
        ok = True
        for entry in plan.days:
            if entry.accommodation is None:
                continue
            rows = [
                a for a in bundle.accommodations
                if (a.name, a.city) == (entry.accommodation.name, entry.accommodation.city)
            ]
            for acc in rows:
                for tag in query.house_rules:
                    if ("no-" + tag) in acc.house_rules:
                        ok = False
        v["room-rules"] = ok

    # room-type: each requested type offered by some booked listing.
    if query.room_types:
        booked_types = []
        for entry in plan.days:
            if entry.accommodation is None:
                continue
            for acc in bundle.accommodations:
                if (acc.name, acc.city) == (entry.accommodation.name, entry.accommodation.city):
                    booked_types.append(acc.room_type)
        ok = True
        for wanted in query.room_types:
            if wanted == "not-shared-room":
                if not any(t != "shared-room" for t in booked_types):
                    ok = False
            elif wanted not in booked_types:
                ok = False
        v["room-type"] = ok

    # cuisine: every requested cuisine served by some chosen restaurant.
    if query.cuisines:
        covered = set()
        for entry in plan.days:
            for ref in (entry.breakfast, entry.lunch, entry.dinner):
                if ref is None:
                    continue
                for r in bundle.restaurants:
                    if (r.name, r.city) == (ref.name, ref.city):
                        covered |= set(r.cuisines)
        v["cuisine"] = all(c in covered for c in query.cuisines)

    # transportation: banned modes never used.
    if query.transport_prefs:
        used = [e.transportation.mode for e in plan.days if e.transportation is not None]
        ok = True
        if "no-flight" in query.transport_prefs and "flight" in used:
            ok = False
        if "no-self-driving" in query.transport_prefs and "self-driving" in used:
            ok = False
        v["transportation"] = ok

    return v


def enumerate_reference_plans(query, bundle):
    """Every well-formed assembly as a Plan, via nested products plus the
    maximality shape rule (an empty meal/attraction slot is allowed only when
    every option for that day is already used somewhere in the plan)."""
    days = route_days(query)
    n = len(days)

    leg_choices = []
    for day, start, end, _night in days:
        if start == end:
            leg_choices.append([None])
            continue
        when = query.start_date + timedelta(days=day - 1)
        options = []
        for f in bundle.flights:
            if f.origin == start and f.destination == end and f.date == when:
                options.append(("flight", f))
        for d in bundle.distances:
            if d.origin == start and d.destination == end and d.mode in ("taxi", "self-driving"):
                options.append((d.mode, d))
        leg_choices.append(options if options else [None])

    # One lodging choice per destination segment; days 2i-1 and 2i share it.
    n_segments = (query.n_days - 1) // 2
    segment_options = []
    for i in range(n_segments):
        city = query.destinations[i]
        options = sorted(
            [a for a in bundle.accommodations if a.city == city], key=lambda a: a.name
        )
        segment_options.append(options if options else [None])

    rest_by_day = []
    attr_by_day = []
    for day_tuple in days:
        cities = _cities_of(day_tuple)
        rest_by_day.append(
            sorted([r for r in bundle.restaurants if r.city in cities], key=lambda r: (r.name, r.city))
        )
        attr_by_day.append(
            sorted([a for a in bundle.attractions if a.city in cities], key=lambda a: (a.name, a.city))
        )

    meal_subset_choices = [
        [subset for size in range(0, min(3, len(rests)) + 1) for subset in combinations(rests, size)]
        for rests in rest_by_day
    ]
    attraction_slot_choices = [list(attrs) + [None] for attrs in attr_by_day]

    for legs in product(*leg_choices):
        for hotels in product(*segment_options):
            per_day_hotels = []
            for day, _start, _end, night in days:
                if night is None:
                    per_day_hotels.append(None)
                else:
                    per_day_hotels.append(hotels[(day + 1) // 2 - 1])
            for attractions in product(*attraction_slot_choices):
                used_attr = {(a.name, a.city) for a in attractions if a is not None}
                shape_ok = True
                for day_idx, choice in enumerate(attractions):
                    if choice is None:
                        for a in attr_by_day[day_idx]:
                            if (a.name, a.city) not in used_attr:
                                shape_ok = False
                if not shape_ok:
                    continue
                for meals in product(*meal_subset_choices):
                    used_rest = {(r.name, r.city) for day in meals for r in day}
                    ok = True
                    for day_idx, subset in enumerate(meals):
                        if len(subset) < 3:
                            for r in rest_by_day[day_idx]:
                                if (r.name, r.city) not in used_rest:
                                    ok = False
                    if not ok:
                        continue
                    yield _build_plan(query, days, legs, per_day_hotels, attractions, meals)


def _build_plan(query, days, legs, per_day_hotels, attractions, meals):
    entries = []
    for idx, (day, start, end, _night) in enumerate(days):
        leg = legs[idx]
        transport = None
        if leg is not None:
            mode, row = leg
            if mode == "flight":
                transport = TransportLeg(
                    mode="flight", origin=start, destination=end, cost=row.price,
                    flight_id=row.flight_id, departure=row.departure, arrival=row.arrival,
                )
            else:
                transport = TransportLeg(
                    mode=mode, origin=start, destination=end, cost=row.cost,
                    duration_minutes=row.duration_minutes,
                )
        hotel = per_day_hotels[idx]
        ordered = sorted(meals[idx], key=lambda r: (r.name, r.city))
        slots = [None, None, None]
        for i, r in enumerate(ordered):
            slots[i] = ItemRef(r.name, r.city)
        a = attractions[idx]
        entries.append(
            DayEntry(
                day=day,
                city=CitySpan(start, end),
                transportation=transport,
                breakfast=slots[0],
                lunch=slots[1],
                dinner=slots[2],
                attraction=ItemRef(a.name, a.city) if a is not None else None,
                accommodation=ItemRef(hotel.name, hotel.city) if hotel is not None else None,
            )
        )
    return Plan(query_id=query.id, days=tuple(entries))


def reference_survivors(query, bundle):
    """(plan, cost) for every enumerable plan whose verdicts all pass."""
    out = []
    for plan in enumerate_reference_plans(query, bundle):
        verdicts = reference_verdicts(plan, query, bundle)
        if all(verdicts.values()):
            cost = reference_cost(plan, query, bundle)
            out.append((plan, cost))
    return out
