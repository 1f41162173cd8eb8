"""Ingestion: raw-document conversion, CSV parsing, and the plan grammar."""

import csv
import io
from datetime import date
from decimal import Decimal

import pytest
from hypothesis import given, settings, strategies as st

from tripcraft import ingest
from tripcraft.ingest import (
    InvariantViolation,
    MalformedBlock,
    MissingTable,
    ParsedPlanResult,
    SchemaMismatch,
    convert_reference_to_csv,
    parse_plan,
    parse_reference_csv,
    render_plan_text,
)
from tripcraft.model import CitySpan, ItemRef

from conftest import make_query

FLIGHTS_BLOCK = """\
flight_id,origin,destination,departure,arrival,price,date
F100,Ashford,Brookfield,08:00,10:00,120.00,2025-09-01
F101,Ashford,Brookfield,12:30,14:45,95.00,2025-09-01
F200,Brookfield,Ashford,18:00,20:00,110.00,2025-09-03
"""

FULL_DOC = {
    "flights": FLIGHTS_BLOCK,
    "distances": (
        "origin,destination,mode,distance_miles,duration_minutes,cost\n"
        "Ashford,Brookfield,taxi,120,140,80.00\n"
        "Brookfield,Ashford,self-driving,120,130,45.00\n"
    ),
    "accommodations": (
        "name,city,price,room_type,house_rules,minimum_nights,maximum_occupancy\n"
        "Cedar Rest,Brookfield,100.00,entire-room,,1,2\n"
        "Moss Inn,Brookfield,80.00,private-room,no-pets;no-smoking,2,1\n"
    ),
    "restaurants": (
        "name,city,average_cost,cuisines\n"
        "Fig Table,Brookfield,20.00,italian;vegan\n"
        "Cobalt Cantina,Ashford,25.00,seafood\n"
    ),
    "attractions": "name,city\nSunset Pier,Brookfield\nNorth Trail,Ashford\n",
}


class TestConvert:
    def test_all_five_keys_make_five_files(self, tmp_path):
        paths = convert_reference_to_csv(FULL_DOC, tmp_path)
        assert [p.name for p in paths] == [
            "flights.csv",
            "distances.csv",
            "accommodations.csv",
            "restaurants.csv",
            "attractions.csv",
        ]
        assert all(p.exists() for p in paths)

    def test_subset_passthrough(self, tmp_path):
        paths = convert_reference_to_csv({"attractions": FULL_DOC["attractions"]}, tmp_path)
        assert [p.name for p in paths] == ["attractions.csv"]

    def test_flights_round_trip_field_by_field(self, tmp_path):
        paths = convert_reference_to_csv({"flights": FLIGHTS_BLOCK}, tmp_path)
        source_rows = list(csv.reader(io.StringIO(FLIGHTS_BLOCK)))[1:]
        written_rows = list(csv.reader(io.StringIO(paths[0].read_text())))[1:]
        assert written_rows == source_rows

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(MalformedBlock):
            convert_reference_to_csv({"weather": "a,b\n1,2\n"}, tmp_path)

    def test_wrong_header_rejected(self, tmp_path):
        with pytest.raises(MalformedBlock):
            convert_reference_to_csv({"attractions": "name,city,stars\nX,Y,5\n"}, tmp_path)

    def test_ragged_row_rejected(self, tmp_path):
        with pytest.raises(MalformedBlock) as exc:
            convert_reference_to_csv({"attractions": "name,city\nOnlyName\n"}, tmp_path)
        assert exc.value.line == 2


class TestParseReference:
    def test_round_trips_converted_document(self, tmp_path):
        convert_reference_to_csv(FULL_DOC, tmp_path)
        bundle = parse_reference_csv(tmp_path)
        assert {f.flight_id for f in bundle.flights} == {"F100", "F101", "F200"}
        assert bundle.flight_by_id["F100"].price == Decimal("120.00")
        assert bundle.flight_by_id["F100"].date == date(2025, 9, 1)
        moss = bundle.accommodation_by_key[("Moss Inn", "Brookfield")]
        assert moss.house_rules == frozenset({"no-pets", "no-smoking"})
        assert moss.minimum_nights == 2
        fig = bundle.restaurant_by_key[("Fig Table", "Brookfield")]
        assert fig.cuisines == frozenset({"italian", "vegan"})
        # writing the bundle back out reproduces identical content
        out2 = tmp_path / "again"
        ingest.write_bundle_csv(bundle, out2)
        assert parse_reference_csv(out2) == bundle

    def test_missing_table(self, tmp_path):
        doc = {k: v for k, v in FULL_DOC.items() if k != "restaurants"}
        convert_reference_to_csv(doc, tmp_path)
        with pytest.raises(MissingTable) as exc:
            parse_reference_csv(tmp_path)
        assert exc.value.name == "restaurants"

    def test_zero_minimum_nights_rejected(self, tmp_path):
        doc = dict(FULL_DOC)
        doc["accommodations"] = (
            "name,city,price,room_type,house_rules,minimum_nights,maximum_occupancy\n"
            "Bad Inn,Brookfield,50.00,entire-room,,0,2\n"
        )
        convert_reference_to_csv(doc, tmp_path)
        with pytest.raises(InvariantViolation) as exc:
            parse_reference_csv(tmp_path)
        assert "minimum_nights" in exc.value.rule

    def test_duplicate_name_city_rejected(self, tmp_path):
        doc = dict(FULL_DOC)
        doc["attractions"] = "name,city\nSunset Pier,Brookfield\nSunset Pier,Brookfield\n"
        convert_reference_to_csv(doc, tmp_path)
        with pytest.raises(InvariantViolation):
            parse_reference_csv(tmp_path)

    def test_extra_column_rejected(self, tmp_path):
        convert_reference_to_csv(FULL_DOC, tmp_path)
        path = tmp_path / "attractions.csv"
        path.write_text("name,city,rating\nSunset Pier,Brookfield,4\n")
        with pytest.raises(SchemaMismatch) as exc:
            parse_reference_csv(tmp_path)
        assert exc.value.file == "attractions.csv"

    def test_header_labels_case_insensitive(self, tmp_path):
        convert_reference_to_csv(FULL_DOC, tmp_path)
        path = tmp_path / "attractions.csv"
        path.write_text("Name,City\nSunset Pier,Brookfield\n")
        bundle = parse_reference_csv(tmp_path)
        assert bundle.attractions[0].name == "Sunset Pier"

    def test_negative_price_rejected(self, tmp_path):
        doc = dict(FULL_DOC)
        doc["restaurants"] = "name,city,average_cost,cuisines\nFree Lunch,Brookfield,-5.00,vegan\n"
        convert_reference_to_csv(doc, tmp_path)
        with pytest.raises(InvariantViolation):
            parse_reference_csv(tmp_path)


WELL_FORMED = """\
Day 1:
Current City: from Ashford to Brookfield
Transportation: Flight Number: F100, from Ashford to Brookfield, Departure: 08:00, Arrival: 10:00, Cost: $120.00
Breakfast: -
Attraction: North Trail, Ashford
Lunch: Fig Table, Brookfield
Dinner: Amber Grill, Brookfield
Accommodation: Cedar Rest, Brookfield

Day 2:
Current City: Brookfield
Transportation: -
Breakfast: Dune Diner, Brookfield
Attraction: Sunset Pier, Brookfield
Lunch: -
Dinner: -
Accommodation: Cedar Rest, Brookfield

Day 3:
Current City: from Brookfield to Ashford
Transportation: Taxi, from Brookfield to Ashford, Duration: 140 minutes, Cost: $80.00
Breakfast: -
Attraction: -
Lunch: -
Dinner: -
Accommodation: -
"""


class TestParsePlan:
    def test_well_formed_three_day(self):
        result = parse_plan(WELL_FORMED, make_query())
        assert result.delivered
        plan = result.plan
        assert len(plan.days) == 3
        assert plan.days[0].city == CitySpan("Ashford", "Brookfield")
        assert plan.days[0].transportation.flight_id == "F100"
        assert plan.days[0].transportation.cost == Decimal("120.00")
        assert plan.days[0].breakfast is None
        assert plan.days[0].lunch == ItemRef("Fig Table", "Brookfield")
        assert plan.days[1].city == CitySpan.stay("Brookfield")
        assert plan.days[2].transportation.mode == "taxi"
        assert plan.days[2].transportation.duration_minutes == 140
        assert plan.days[2].accommodation is None

    def test_empty_string(self):
        result = parse_plan("", make_query())
        assert not result.delivered
        assert result.reason == "no day blocks"

    def test_day_count_mismatch(self):
        two_days = "\n\n".join(WELL_FORMED.split("\n\n")[:2])
        result = parse_plan(two_days, make_query(n_days=3))
        assert not result.delivered
        assert result.reason == "expected 3 days, found 2"

    def test_labels_case_insensitive(self):
        text = WELL_FORMED.replace("Current City:", "CURRENT CITY:").replace("Dinner:", "dinner:")
        result = parse_plan(text, make_query())
        assert result.delivered

    def test_preamble_is_ignored(self):
        result = parse_plan("Here is your itinerary!\n\n" + WELL_FORMED, make_query())
        assert result.delivered

    def test_bad_leg_reports_day(self):
        text = WELL_FORMED.replace(
            "Taxi, from Brookfield to Ashford, Duration: 140 minutes, Cost: $80.00",
            "Rocket, to the moon",
        )
        result = parse_plan(text, make_query())
        assert not result.delivered
        assert result.reason.startswith("day 3: bad transportation leg")

    def test_noncontiguous_days_rejected(self):
        text = WELL_FORMED.replace("Day 2:", "Day 5:")
        result = parse_plan(text, make_query())
        assert not result.delivered
        assert "contiguously" in result.reason

    def test_item_without_city_rejected(self):
        text = WELL_FORMED.replace("Breakfast: Dune Diner, Brookfield", "Breakfast: Dune Diner")
        result = parse_plan(text, make_query())
        assert not result.delivered
        assert "breakfast" in result.reason

    def test_round_trip_is_byte_exact(self):
        result = parse_plan(WELL_FORMED, make_query())
        rendered = render_plan_text(result.plan)
        assert rendered == WELL_FORMED
        assert parse_plan(rendered, make_query()).plan == result.plan

    def test_comma_in_restaurant_name_survives(self):
        text = WELL_FORMED.replace("Fig Table, Brookfield", "Soup, Salad & Co, Brookfield")
        result = parse_plan(text, make_query())
        assert result.delivered
        assert result.plan.days[0].lunch == ItemRef("Soup, Salad & Co", "Brookfield")
        assert render_plan_text(result.plan) == text

    @settings(max_examples=300, deadline=None)
    @given(st.text(max_size=400))
    def test_parse_never_raises(self, text):
        result = parse_plan(text, make_query())
        assert isinstance(result, ParsedPlanResult)
        assert result.delivered == (result.plan is not None)

    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_corrupted_canonical_text_never_raises(self, data):
        lines = WELL_FORMED.splitlines()
        idx = data.draw(st.integers(0, len(lines) - 1))
        mutation = data.draw(st.sampled_from(["drop", "dup", "garble"]))
        if mutation == "drop":
            del lines[idx]
        elif mutation == "dup":
            lines.insert(idx, lines[idx])
        else:
            lines[idx] = lines[idx][::-1]
        result = parse_plan("\n".join(lines), make_query())
        assert isinstance(result, ParsedPlanResult)
