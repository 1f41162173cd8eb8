"""Shared fixtures: small hand-built bundles and query factories."""

from __future__ import annotations

from datetime import date

import pytest

from tripcraft.model import (
    Accommodation,
    Attraction,
    CitySpan,
    DayEntry,
    DistanceRow,
    Flight,
    ItemRef,
    Plan,
    ReferenceBundle,
    Restaurant,
    TransportLeg,
    TravelQuery,
    money,
)

START = date(2025, 9, 1)


def make_query(**overrides) -> TravelQuery:
    defaults = dict(
        id="q-1",
        origin="Ashford",
        destinations=("Brookfield",),
        start_date=START,
        n_days=3,
        n_people=2,
        budget=money(5000),
        house_rules=frozenset(),
        room_types=frozenset(),
        cuisines=frozenset(),
        transport_prefs=frozenset(),
        split="train",
    )
    defaults.update(overrides)
    if "budget" in overrides and not hasattr(defaults["budget"], "quantize"):
        defaults["budget"] = money(defaults["budget"])
    return TravelQuery(**defaults)


def flight(fid, origin, destination, price, on, dep="08:00", arr="10:00") -> Flight:
    return Flight(
        flight_id=fid, origin=origin, destination=destination,
        departure=dep, arrival=arr, price=money(price), date=on,
    )


def distance(origin, destination, mode, cost, miles=100, minutes=120) -> DistanceRow:
    return DistanceRow(
        origin=origin, destination=destination, mode=mode,
        distance_miles=money(miles), duration_minutes=minutes, cost=money(cost),
    )


def hotel(name, city, price, room_type="entire-room", rules=(), min_nights=1, occupancy=2):
    return Accommodation(
        name=name, city=city, price=money(price), room_type=room_type,
        house_rules=frozenset(rules), minimum_nights=min_nights, maximum_occupancy=occupancy,
    )


def restaurant(name, city, cost, cuisines=("american",)) -> Restaurant:
    return Restaurant(name=name, city=city, average_cost=money(cost), cuisines=frozenset(cuisines))


def attraction(name, city) -> Attraction:
    return Attraction(name=name, city=city)


@pytest.fixture
def tiny_bundle() -> ReferenceBundle:
    """Ashford -> Brookfield 3-day world with one obvious feasible plan family."""
    return ReferenceBundle(
        flights=(
            flight("F100", "Ashford", "Brookfield", 120, START),
            flight("F200", "Brookfield", "Ashford", 110, date(2025, 9, 3)),
        ),
        distances=(
            distance("Ashford", "Brookfield", "taxi", 80),
            distance("Ashford", "Brookfield", "self-driving", 45),
            distance("Brookfield", "Ashford", "taxi", 80),
            distance("Brookfield", "Ashford", "self-driving", 45),
        ),
        accommodations=(
            hotel("Cedar Rest", "Brookfield", 100, "entire-room", (), 1, 2),
            hotel("Moss Inn", "Brookfield", 80, "private-room", ("no-pets",), 2, 1),
        ),
        restaurants=(
            restaurant("Fig Table", "Brookfield", 20, ("italian",)),
            restaurant("Amber Grill", "Brookfield", 30, ("mexican",)),
            restaurant("Dune Diner", "Brookfield", 15, ("american",)),
            restaurant("Cobalt Cantina", "Ashford", 25, ("seafood",)),
        ),
        attractions=(
            attraction("Sunset Pier", "Brookfield"),
            attraction("Old Gallery", "Brookfield"),
            attraction("North Trail", "Ashford"),
        ),
    )


@pytest.fixture
def tiny_query() -> TravelQuery:
    return make_query()


def day_entry(
    day,
    city,
    leg=None,
    breakfast=None,
    lunch=None,
    dinner=None,
    attraction_ref=None,
    accommodation=None,
) -> DayEntry:
    span = city if isinstance(city, CitySpan) else CitySpan.stay(city)
    return DayEntry(
        day=day,
        city=span,
        transportation=leg,
        breakfast=breakfast,
        lunch=lunch,
        dinner=dinner,
        attraction=attraction_ref,
        accommodation=accommodation,
    )


def flight_leg(fid, origin, destination, cost, dep="08:00", arr="10:00") -> TransportLeg:
    return TransportLeg(
        mode="flight", origin=origin, destination=destination,
        cost=money(cost), flight_id=fid, departure=dep, arrival=arr,
    )


def ground_leg(mode, origin, destination, cost, minutes=120) -> TransportLeg:
    return TransportLeg(
        mode=mode, origin=origin, destination=destination,
        cost=money(cost), duration_minutes=minutes,
    )


@pytest.fixture
def feasible_plan(tiny_bundle) -> Plan:
    """A hand-built plan over tiny_bundle satisfying every checker."""
    return Plan(
        query_id="q-1",
        days=(
            day_entry(
                1,
                CitySpan("Ashford", "Brookfield"),
                leg=flight_leg("F100", "Ashford", "Brookfield", 120),
                breakfast=ItemRef("Cobalt Cantina", "Ashford"),
                lunch=ItemRef("Dune Diner", "Brookfield"),
                dinner=ItemRef("Fig Table", "Brookfield"),
                attraction_ref=ItemRef("North Trail", "Ashford"),
                accommodation=ItemRef("Cedar Rest", "Brookfield"),
            ),
            day_entry(
                2,
                "Brookfield",
                breakfast=ItemRef("Amber Grill", "Brookfield"),
                attraction_ref=ItemRef("Sunset Pier", "Brookfield"),
                accommodation=ItemRef("Cedar Rest", "Brookfield"),
            ),
            day_entry(
                3,
                CitySpan("Brookfield", "Ashford"),
                leg=flight_leg("F200", "Brookfield", "Ashford", 110),
                attraction_ref=ItemRef("Old Gallery", "Brookfield"),
            ),
        ),
    )
