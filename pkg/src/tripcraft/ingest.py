"""Reference-data ingestion and the plan text grammar.

Converts raw nested reference documents (category -> embedded CSV text) into
canonical per-table CSV files, parses those files into a ReferenceBundle,
and parses/renders agent plan text in the canonical line-oriented grammar
(see docs/plan_grammar.md for the EBNF).
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from datetime import date
from decimal import Decimal
from pathlib import Path
from typing import Mapping, Optional

from .model import (
    GROUND_MODES,
    HOUSE_RULE_PROHIBITIONS,
    ROOM_TYPES,
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
    MoneyError,
    fmt_money,
    money,
)

TABLE_ORDER = ("flights", "distances", "accommodations", "restaurants", "attractions")

TABLE_COLUMNS: dict[str, tuple[str, ...]] = {
    "flights": ("flight_id", "origin", "destination", "departure", "arrival", "price", "date"),
    "distances": ("origin", "destination", "mode", "distance_miles", "duration_minutes", "cost"),
    "accommodations": (
        "name",
        "city",
        "price",
        "room_type",
        "house_rules",
        "minimum_nights",
        "maximum_occupancy",
    ),
    "restaurants": ("name", "city", "average_cost", "cuisines"),
    "attractions": ("name", "city"),
}

_TIME_RE = re.compile(r"^\d{2}:\d{2}$")


class IngestError(Exception):
    """Base for all ingestion failures."""


class MalformedBlock(IngestError):
    def __init__(self, key: str, line: int, detail: str):
        super().__init__(f"{key} block, line {line}: {detail}")
        self.key = key
        self.line = line
        self.detail = detail


class IoFailure(IngestError):
    def __init__(self, path: Path, cause: Exception):
        super().__init__(f"cannot write {path}: {cause}")
        self.path = path


class MissingTable(IngestError):
    def __init__(self, name: str):
        super().__init__(f"missing table: {name}")
        self.name = name


class SchemaMismatch(IngestError):
    def __init__(self, file: str, expected: tuple[str, ...], found: tuple[str, ...]):
        super().__init__(f"{file}: expected columns {list(expected)}, found {list(found)}")
        self.file = file
        self.expected = expected
        self.found = found


class InvariantViolation(IngestError):
    def __init__(self, row: int, rule: str):
        super().__init__(f"row {row}: {rule}")
        self.row = row
        self.rule = rule


# --------------------------------------------------------------------------
# Raw document -> canonical CSV files

def _read_block_rows(key: str, text: str) -> list[list[str]]:
    """Parse an embedded CSV block, validating its header against the canonical schema."""
    columns = TABLE_COLUMNS[key]
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader]
    while rows and rows[-1] == []:
        rows.pop()
    if not rows:
        raise MalformedBlock(key, 1, "empty block (header row required)")
    header = tuple(cell.strip().lower() for cell in rows[0])
    if header != columns:
        raise MalformedBlock(key, 1, f"header {list(header)} does not match {list(columns)}")
    for lineno, row in enumerate(rows[1:], start=2):
        if row == []:
            raise MalformedBlock(key, lineno, "blank row inside block")
        if len(row) != len(columns):
            raise MalformedBlock(
                key, lineno, f"expected {len(columns)} fields, found {len(row)}"
            )
    return [list(row) for row in rows[1:]]


def convert_reference_to_csv(doc: Mapping[str, str], out_dir: Path | str) -> list[Path]:
    """Write one canonical CSV file per reference category present in doc.

    Returns the written paths in canonical table order.
    """
    out = Path(out_dir)
    unknown = sorted(set(doc) - set(TABLE_ORDER))
    if unknown:
        raise MalformedBlock(unknown[0], 0, "unknown reference category")
    paths: list[Path] = []
    for key in TABLE_ORDER:
        if key not in doc:
            continue
        rows = _read_block_rows(key, doc[key])
        path = out / f"{key}.csv"
        try:
            out.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(TABLE_COLUMNS[key])
                writer.writerows(rows)
        except OSError as exc:
            raise IoFailure(path, exc) from exc
        paths.append(path)
    return paths


def load_raw_document(path: Path | str) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or not all(isinstance(v, str) for v in doc.values()):
        raise MalformedBlock("document", 0, "expected an object mapping categories to CSV text")
    return doc


# --------------------------------------------------------------------------
# Canonical CSV files -> ReferenceBundle

def _parse_money_field(row: int, field: str, raw: str, allow_negative: bool = False) -> Decimal:
    try:
        value = money(raw.strip())
    except MoneyError as exc:
        raise InvariantViolation(row, f"{field}: {exc}") from exc
    if not allow_negative and value < 0:
        raise InvariantViolation(row, f"{field} must be >= 0, got {raw}")
    return value


def _parse_int_field(row: int, field: str, raw: str, minimum: int) -> int:
    try:
        value = int(raw.strip())
    except ValueError as exc:
        raise InvariantViolation(row, f"{field}: not an integer: {raw!r}") from exc
    if value < minimum:
        raise InvariantViolation(row, f"{field} must be >= {minimum}, got {value}")
    return value


def _parse_tags(row: int, field: str, raw: str, vocab: Optional[frozenset[str]]) -> frozenset[str]:
    tags = frozenset(t.strip() for t in raw.split(";") if t.strip())
    if vocab is not None:
        unknown = sorted(tags - vocab)
        if unknown:
            raise InvariantViolation(row, f"{field}: unknown tag {unknown[0]!r}")
    return tags


def _parse_time_field(row: int, field: str, raw: str) -> str:
    value = raw.strip()
    if not _TIME_RE.match(value):
        raise InvariantViolation(row, f"{field}: expected HH:MM, got {raw!r}")
    return value


def _parse_date_field(row: int, field: str, raw: str) -> date:
    try:
        return date.fromisoformat(raw.strip())
    except ValueError as exc:
        raise InvariantViolation(row, f"{field}: expected YYYY-MM-DD, got {raw!r}") from exc


def _read_table(dir_path: Path, name: str) -> list[tuple[int, list[str]]]:
    path = dir_path / f"{name}.csv"
    if not path.exists():
        raise MissingTable(name)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    while rows and rows[-1] == []:
        rows.pop()
    if not rows:
        raise SchemaMismatch(f"{name}.csv", TABLE_COLUMNS[name], ())
    header = tuple(cell.strip().lower() for cell in rows[0])
    if header != TABLE_COLUMNS[name]:
        raise SchemaMismatch(f"{name}.csv", TABLE_COLUMNS[name], header)
    numbered = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise SchemaMismatch(f"{name}.csv", header, tuple(row))
        numbered.append((lineno, row))
    return numbered


def parse_reference_csv(dir_path: Path | str) -> ReferenceBundle:
    """Parse the five canonical CSV files into a validated ReferenceBundle."""
    dir_path = Path(dir_path)

    flights: list[Flight] = []
    seen_ids: set[str] = set()
    for lineno, row in _read_table(dir_path, "flights"):
        fid = row[0].strip()
        if not fid:
            raise InvariantViolation(lineno, "flight_id must be non-empty")
        if fid in seen_ids:
            raise InvariantViolation(lineno, f"duplicate flight_id {fid!r}")
        seen_ids.add(fid)
        flights.append(
            Flight(
                flight_id=fid,
                origin=row[1].strip(),
                destination=row[2].strip(),
                departure=_parse_time_field(lineno, "departure", row[3]),
                arrival=_parse_time_field(lineno, "arrival", row[4]),
                price=_parse_money_field(lineno, "price", row[5]),
                date=_parse_date_field(lineno, "date", row[6]),
            )
        )

    distances: list[DistanceRow] = []
    seen_routes: set[tuple[str, str, str]] = set()
    for lineno, row in _read_table(dir_path, "distances"):
        mode = row[2].strip()
        if mode not in GROUND_MODES:
            raise InvariantViolation(lineno, f"mode must be one of {list(GROUND_MODES)}, got {mode!r}")
        key = (row[0].strip(), row[1].strip(), mode)
        if key in seen_routes:
            raise InvariantViolation(lineno, f"duplicate distance row {key}")
        seen_routes.add(key)
        try:
            miles = Decimal(row[3].strip())
        except Exception as exc:
            raise InvariantViolation(lineno, f"distance_miles: not a number: {row[3]!r}") from exc
        if miles < 0:
            raise InvariantViolation(lineno, f"distance_miles must be >= 0, got {miles}")
        distances.append(
            DistanceRow(
                origin=key[0],
                destination=key[1],
                mode=mode,
                distance_miles=miles,
                duration_minutes=_parse_int_field(lineno, "duration_minutes", row[4], 0),
                cost=_parse_money_field(lineno, "cost", row[5]),
            )
        )

    accommodations: list[Accommodation] = []
    seen_acc: set[tuple[str, str]] = set()
    for lineno, row in _read_table(dir_path, "accommodations"):
        key = (row[0].strip(), row[1].strip())
        if key in seen_acc:
            raise InvariantViolation(lineno, f"duplicate accommodation {key}")
        seen_acc.add(key)
        room_type = row[3].strip()
        if room_type not in ROOM_TYPES:
            raise InvariantViolation(
                lineno, f"room_type must be one of {sorted(ROOM_TYPES)}, got {room_type!r}"
            )
        accommodations.append(
            Accommodation(
                name=key[0],
                city=key[1],
                price=_parse_money_field(lineno, "price", row[2]),
                room_type=room_type,
                house_rules=_parse_tags(lineno, "house_rules", row[4], HOUSE_RULE_PROHIBITIONS),
                minimum_nights=_parse_int_field(lineno, "minimum_nights", row[5], 1),
                maximum_occupancy=_parse_int_field(lineno, "maximum_occupancy", row[6], 1),
            )
        )

    restaurants: list[Restaurant] = []
    seen_rest: set[tuple[str, str]] = set()
    for lineno, row in _read_table(dir_path, "restaurants"):
        key = (row[0].strip(), row[1].strip())
        if key in seen_rest:
            raise InvariantViolation(lineno, f"duplicate restaurant {key}")
        seen_rest.add(key)
        restaurants.append(
            Restaurant(
                name=key[0],
                city=key[1],
                average_cost=_parse_money_field(lineno, "average_cost", row[2]),
                cuisines=_parse_tags(lineno, "cuisines", row[3], None),
            )
        )

    attractions: list[Attraction] = []
    seen_attr: set[tuple[str, str]] = set()
    for lineno, row in _read_table(dir_path, "attractions"):
        key = (row[0].strip(), row[1].strip())
        if key in seen_attr:
            raise InvariantViolation(lineno, f"duplicate attraction {key}")
        seen_attr.add(key)
        attractions.append(Attraction(name=key[0], city=key[1]))

    return ReferenceBundle(
        flights=tuple(flights),
        distances=tuple(distances),
        accommodations=tuple(accommodations),
        restaurants=tuple(restaurants),
        attractions=tuple(attractions),
    )


def write_bundle_csv(bundle: ReferenceBundle, out_dir: Path | str) -> list[Path]:
    """Write a bundle back out as the five canonical CSV files."""
    doc = bundle_to_raw_document(bundle)
    return convert_reference_to_csv(doc, out_dir)


def render_table_csv(bundle: ReferenceBundle, key: str) -> str:
    """One table as canonical CSV text (header + rows)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS[key])
    if key == "flights":
        for f in bundle.flights:
            writer.writerow(
                [f.flight_id, f.origin, f.destination, f.departure, f.arrival,
                 fmt_money(f.price), f.date.isoformat()]
            )
    elif key == "distances":
        for d in bundle.distances:
            writer.writerow(
                [d.origin, d.destination, d.mode, str(d.distance_miles),
                 str(d.duration_minutes), fmt_money(d.cost)]
            )
    elif key == "accommodations":
        for a in bundle.accommodations:
            writer.writerow(
                [a.name, a.city, fmt_money(a.price), a.room_type,
                 ";".join(sorted(a.house_rules)), str(a.minimum_nights),
                 str(a.maximum_occupancy)]
            )
    elif key == "restaurants":
        for r in bundle.restaurants:
            writer.writerow([r.name, r.city, fmt_money(r.average_cost), ";".join(sorted(r.cuisines))])
    elif key == "attractions":
        for a in bundle.attractions:
            writer.writerow([a.name, a.city])
    else:
        raise KeyError(key)
    return buf.getvalue()


def bundle_to_raw_document(bundle: ReferenceBundle) -> dict[str, str]:
    return {key: render_table_csv(bundle, key) for key in TABLE_ORDER}


# --------------------------------------------------------------------------
# Query serialization (JSON records, one object per query)

def query_to_dict(q: TravelQuery) -> dict:
    return {
        "id": q.id,
        "origin": q.origin,
        "destinations": list(q.destinations),
        "start_date": q.start_date.isoformat(),
        "n_days": q.n_days,
        "n_people": q.n_people,
        "budget": fmt_money(q.budget),
        "house_rules": sorted(q.house_rules),
        "room_types": sorted(q.room_types),
        "cuisines": sorted(q.cuisines),
        "transport_prefs": sorted(q.transport_prefs),
        "split": q.split,
    }


def query_from_dict(d: Mapping) -> TravelQuery:
    return TravelQuery(
        id=str(d["id"]),
        origin=str(d["origin"]),
        destinations=tuple(str(c) for c in d["destinations"]),
        start_date=date.fromisoformat(d["start_date"]),
        n_days=int(d["n_days"]),
        n_people=int(d["n_people"]),
        budget=money(d["budget"]),
        house_rules=frozenset(d.get("house_rules", ())),
        room_types=frozenset(d.get("room_types", ())),
        cuisines=frozenset(d.get("cuisines", ())),
        transport_prefs=frozenset(d.get("transport_prefs", ())),
        split=str(d.get("split", "train")),
    )


def save_queries(queries: list[TravelQuery], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in queries:
            fh.write(json.dumps(query_to_dict(q), sort_keys=True) + "\n")


def load_queries(path: Path | str) -> list[TravelQuery]:
    queries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                queries.append(query_from_dict(json.loads(line)))
    return queries


# --------------------------------------------------------------------------
# Plan text grammar

@dataclass(frozen=True)
class ParsedPlanResult:
    """Outcome of parsing agent output: a delivered Plan or a reason it is not."""

    plan: Optional[Plan]
    reason: Optional[str] = None

    @property
    def delivered(self) -> bool:
        return self.plan is not None

    @staticmethod
    def ok(plan: Plan) -> "ParsedPlanResult":
        return ParsedPlanResult(plan=plan, reason=None)

    @staticmethod
    def not_delivered(reason: str) -> "ParsedPlanResult":
        return ParsedPlanResult(plan=None, reason=reason)


class _GrammarError(Exception):
    pass


_DAY_RE = re.compile(r"^day\s+(\d+):$", re.IGNORECASE)
_TRANSITION_RE = re.compile(r"^from\s+(.+?)\s+to\s+(.+)$", re.IGNORECASE)
_MONEY_PART = r"(\d+(?:\.\d{1,2})?)"
_FLIGHT_RE = re.compile(
    r"^flight number:\s*(\S+), from (.+?) to (.+?), "
    r"departure: (\d{2}:\d{2}), arrival: (\d{2}:\d{2}), cost: \$" + _MONEY_PART + r"$",
    re.IGNORECASE,
)
_GROUND_RE = re.compile(
    r"^(self-driving|taxi), from (.+?) to (.+?), "
    r"duration: (\d+) minutes, cost: \$" + _MONEY_PART + r"$",
    re.IGNORECASE,
)

_FIELD_LABELS = (
    "current city",
    "transportation",
    "breakfast",
    "attraction",
    "lunch",
    "dinner",
    "accommodation",
)


def _parse_item(day: int, field: str, value: str) -> Optional[ItemRef]:
    if value == "-":
        return None
    if ", " not in value:
        raise _GrammarError(f"day {day}: {field} must be 'Name, City' or '-', got {value!r}")
    name, city = value.rsplit(", ", 1)
    if not name.strip() or not city.strip():
        raise _GrammarError(f"day {day}: {field} must be 'Name, City' or '-', got {value!r}")
    return ItemRef(name=name.strip(), city=city.strip())


def _parse_leg(day: int, value: str) -> Optional[TransportLeg]:
    if value == "-":
        return None
    m = _FLIGHT_RE.match(value)
    if m:
        return TransportLeg(
            mode="flight",
            origin=m.group(2).strip(),
            destination=m.group(3).strip(),
            cost=money(m.group(6)),
            flight_id=m.group(1),
            departure=m.group(4),
            arrival=m.group(5),
        )
    m = _GROUND_RE.match(value)
    if m:
        return TransportLeg(
            mode=m.group(1).lower(),
            origin=m.group(2).strip(),
            destination=m.group(3).strip(),
            cost=money(m.group(5)),
            duration_minutes=int(m.group(4)),
        )
    raise _GrammarError(f"day {day}: bad transportation leg: {value!r}")


def _parse_day_block(day_num: int, lines: list[str]) -> DayEntry:
    values: dict[str, str] = {}
    for expected_label, line in zip(_FIELD_LABELS, lines):
        if ":" not in line:
            raise _GrammarError(f"day {day_num}: expected '{expected_label.title()}:' line, got {line!r}")
        label, _, rest = line.partition(":")
        if label.strip().lower() != expected_label:
            raise _GrammarError(
                f"day {day_num}: expected '{expected_label.title()}:' line, got {line!r}"
            )
        values[expected_label] = rest.strip()

    raw_city = values["current city"]
    if not raw_city or raw_city == "-":
        raise _GrammarError(f"day {day_num}: current city is required")
    m = _TRANSITION_RE.match(raw_city)
    span = CitySpan(m.group(1).strip(), m.group(2).strip()) if m else CitySpan.stay(raw_city)

    try:
        leg = _parse_leg(day_num, values["transportation"])
    except MoneyError as exc:
        raise _GrammarError(f"day {day_num}: {exc}") from exc

    return DayEntry(
        day=day_num,
        city=span,
        transportation=leg,
        breakfast=_parse_item(day_num, "breakfast", values["breakfast"]),
        attraction=_parse_item(day_num, "attraction", values["attraction"]),
        lunch=_parse_item(day_num, "lunch", values["lunch"]),
        dinner=_parse_item(day_num, "dinner", values["dinner"]),
        accommodation=_parse_item(day_num, "accommodation", values["accommodation"]),
    )


def parse_plan(text: str, q: TravelQuery) -> ParsedPlanResult:
    """Parse agent plan text; never raises.

    Text before the first day header is ignored (agents produce preambles);
    the day blocks themselves are parsed strictly per the grammar. The
    result is Delivered only when there are exactly q.n_days contiguous
    blocks starting at day 1.
    """
    lines = [line.strip() for line in text.splitlines()]
    headers = [
        (idx, int(m.group(1)))
        for idx, line in enumerate(lines)
        if (m := _DAY_RE.match(line))
    ]
    if not headers:
        return ParsedPlanResult.not_delivered("no day blocks")

    try:
        entries: list[DayEntry] = []
        for (idx, day_num), nxt in zip(headers, [h[0] for h in headers[1:]] + [len(lines)]):
            block = [line for line in lines[idx + 1 : nxt] if line]
            if len(block) != len(_FIELD_LABELS):
                raise _GrammarError(
                    f"day {day_num}: expected {len(_FIELD_LABELS)} field lines, found {len(block)}"
                )
            entries.append(_parse_day_block(day_num, block))
    except _GrammarError as exc:
        return ParsedPlanResult.not_delivered(str(exc))

    numbers = [e.day for e in entries]
    if numbers != list(range(1, len(numbers) + 1)):
        return ParsedPlanResult.not_delivered(
            f"day blocks must be numbered contiguously from 1, found {numbers}"
        )
    if len(entries) != q.n_days:
        return ParsedPlanResult.not_delivered(f"expected {q.n_days} days, found {len(entries)}")
    return ParsedPlanResult.ok(Plan(query_id=q.id, days=tuple(entries)))


def _render_item(ref: Optional[ItemRef]) -> str:
    return "-" if ref is None else f"{ref.name}, {ref.city}"


def _render_leg(leg: Optional[TransportLeg]) -> str:
    if leg is None:
        return "-"
    if leg.mode == "flight":
        return (
            f"Flight Number: {leg.flight_id}, from {leg.origin} to {leg.destination}, "
            f"Departure: {leg.departure}, Arrival: {leg.arrival}, Cost: ${fmt_money(leg.cost)}"
        )
    mode = "Self-driving" if leg.mode == "self-driving" else "Taxi"
    return (
        f"{mode}, from {leg.origin} to {leg.destination}, "
        f"Duration: {leg.duration_minutes} minutes, Cost: ${fmt_money(leg.cost)}"
    )


def render_plan_text(plan: Plan) -> str:
    """Canonical plan writer; re-parsing its output yields an identical Plan."""
    blocks = []
    for entry in plan.days:
        city = entry.city.start if not entry.city.is_transition else (
            f"from {entry.city.start} to {entry.city.end}"
        )
        blocks.append(
            "\n".join(
                [
                    f"Day {entry.day}:",
                    f"Current City: {city}",
                    f"Transportation: {_render_leg(entry.transportation)}",
                    f"Breakfast: {_render_item(entry.breakfast)}",
                    f"Attraction: {_render_item(entry.attraction)}",
                    f"Lunch: {_render_item(entry.lunch)}",
                    f"Dinner: {_render_item(entry.dinner)}",
                    f"Accommodation: {_render_item(entry.accommodation)}",
                ]
            )
        )
    return "\n\n".join(blocks) + "\n"
