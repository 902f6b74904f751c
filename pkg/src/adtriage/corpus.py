"""Corpus ingestion and cleaning for classified-ad listings.

Raw listings arrive as JSONL (canonical) or CSV files. Free text is noisy:
misspelled words, inconsistent phone formats, stray punctuation. Cleaning is
total per listing; malformed *records* are counted and logged, never fatal.
"""

from __future__ import annotations

import csv
import json
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

# (nnn) nnn-nnnn, nnn.nnn.nnnn, nnn-nnn-nnnn, 10-11 contiguous digits, and
# digit groups split by short separators; leading "1" of 11-digit numbers
# handled by the first group.
PHONE_RE = re.compile(
    r"(?<!\d)(?:1[\s\-\.\(\)]{0,2})?\(?(\d{3})\)?[\s\-\.]{0,2}(\d{3})[\s\-\.]{0,2}(\d{4})(?!\d)"
)

WEIGHT_RE = re.compile(r"(?<!\d)(\d{2,3})\s*(?:lbs?|pounds?)\b")
WEIGHT_MIN = 50
WEIGHT_MAX = 500

# Unicode-aware: letters and digits, underscore excluded.
TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class RawListing:
    """One advertisement as posted: title, body, timestamp, location."""

    id: str
    title: str
    body: str
    posted_at: datetime
    region: str
    poster_age: Optional[int] = None
    poster_id: Optional[str] = None


@dataclass(frozen=True)
class Listing:
    """A cleaned listing: lowercase tokens, canonical phones, parsed attributes."""

    id: str
    tokens: tuple[str, ...]
    normalized_text: str
    phones: tuple[str, ...]
    region: str
    age: Optional[int] = None
    weight_lbs: Optional[int] = None


@dataclass
class CorpusStats:
    raw_count: int = 0
    rejected_count: int = 0
    per_region_phone_counts: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class RejectedRecord:
    line_number: int
    reason: str


@dataclass
class IngestResult:
    listings: list[RawListing]
    stats: CorpusStats
    rejected: list[RejectedRecord]


REQUIRED_FIELDS = ("id", "title", "body", "posted_at", "region")


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp; naive values are taken as UTC."""
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _record_to_raw(record: dict) -> RawListing:
    for name in REQUIRED_FIELDS:
        if name not in record or record[name] is None:
            raise ValueError(f"missing field: {name}")
    listing_id = str(record["id"]).strip()
    if not listing_id:
        raise ValueError("empty id")
    age = record.get("age")
    if age in ("", None):
        age = None
    else:
        try:
            age = int(age)
        except (TypeError, ValueError):
            raise ValueError(f"unparseable age: {age!r}")
    poster_id = record.get("poster_id") or None
    return RawListing(
        id=listing_id,
        title=str(record["title"]),
        body=str(record["body"]),
        posted_at=parse_timestamp(str(record["posted_at"])),
        region=str(record["region"]),
        poster_age=age,
        poster_id=str(poster_id) if poster_id is not None else None,
    )


def _iter_jsonl(path: Path) -> Iterable[tuple[int, object]]:
    with path.open("r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield line_number, json.loads(line)
            except json.JSONDecodeError as exc:
                yield line_number, ValueError(f"invalid json: {exc.msg}")


def _iter_csv(path: Path) -> Iterable[tuple[int, object]]:
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        # +1 for the header row
        for line_number, row in enumerate(reader, start=2):
            yield line_number, {k: v for k, v in row.items() if k is not None}


def ingest(path: str | Path, format: str = "jsonl") -> IngestResult:
    """Read raw listings from disk, skipping (and counting) malformed records.

    Raises OSError for an unreadable file and ValueError for an unknown
    format tag; bad individual records never abort the run.
    """
    path = Path(path)
    if format == "jsonl":
        rows = _iter_jsonl(path)
    elif format == "csv":
        rows = _iter_csv(path)
    else:
        raise ValueError(f"unknown corpus format: {format!r}")

    listings: list[RawListing] = []
    rejected: list[RejectedRecord] = []
    seen_ids: set[str] = set()

    for line_number, record in rows:
        try:
            if isinstance(record, Exception):
                raise record
            if not isinstance(record, dict):
                raise ValueError("record is not an object")
            raw = _record_to_raw(record)
            if raw.id in seen_ids:
                raise ValueError(f"duplicate id: {raw.id}")
        except (ValueError, KeyError) as exc:
            rejected.append(RejectedRecord(line_number, str(exc)))
            continue
        seen_ids.add(raw.id)
        listings.append(raw)

    stats = CorpusStats(raw_count=len(listings) + len(rejected), rejected_count=len(rejected))
    return IngestResult(listings=listings, stats=stats, rejected=rejected)


def canonical_phone(digits: str) -> str:
    """Collapse an extracted number to its 10-digit form."""
    if len(digits) == 11 and digits.startswith("1"):
        digits = digits[1:]
    return digits


def extract_phones(text: str) -> tuple[list[str], str]:
    """Find phone numbers; return canonical digit-strings and the text with
    each matched span replaced by its canonical form."""
    phones: list[str] = []

    def repl(match: re.Match) -> str:
        number = "".join(match.groups())
        phones.append(number)
        return f" {number} "

    return phones, PHONE_RE.sub(repl, text)


def parse_weight(text: str) -> Optional[int]:
    """First plausible body weight mentioned, in pounds; None otherwise."""
    for match in WEIGHT_RE.finditer(text):
        value = int(match.group(1))
        if WEIGHT_MIN <= value <= WEIGHT_MAX:
            return value
    return None


def normalize(raw: RawListing) -> Listing:
    """Clean one listing: lowercase, canonicalize phones, tokenize.

    Total: never raises. Tokenizing ``normalized_text`` reproduces ``tokens``.
    """
    text = unicodedata.normalize("NFKC", f"{raw.title} {raw.body}").lower()
    phones, text = extract_phones(text)
    text = _WS_RE.sub(" ", text).strip()
    tokens = tuple(TOKEN_RE.findall(text))
    return Listing(
        id=raw.id,
        tokens=tokens,
        normalized_text=text,
        phones=tuple(phones),
        region=raw.region,
        age=raw.poster_age,
        weight_lbs=parse_weight(text),
    )


def phone_report(listings: Iterable[Listing], min_count: int = 0) -> CorpusStats:
    """Distinct-phone counts per region; regions at or below ``min_count``
    are omitted when the threshold is positive."""
    if min_count < 0:
        raise ValueError("min_count must be >= 0")
    per_region: dict[str, set[str]] = {}
    total = 0
    for listing in listings:
        total += 1
        if listing.phones:
            per_region.setdefault(listing.region, set()).update(listing.phones)
    counts = {region: len(phones) for region, phones in per_region.items()}
    if min_count > 0:
        counts = {r: c for r, c in counts.items() if c > min_count}
    return CorpusStats(raw_count=total, rejected_count=0, per_region_phone_counts=counts)


def write_rejected_log(rejected: Iterable[RejectedRecord], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in rejected:
            fh.write(json.dumps({"line_number": rec.line_number, "reason": rec.reason}) + "\n")


def write_listings_jsonl(listings: Iterable[Listing], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for listing in listings:
            fh.write(
                json.dumps(
                    {
                        "id": listing.id,
                        "tokens": list(listing.tokens),
                        "normalized_text": listing.normalized_text,
                        "phones": list(listing.phones),
                        "region": listing.region,
                        "age": listing.age,
                        "weight_lbs": listing.weight_lbs,
                    }
                )
                + "\n"
            )


def read_listings_jsonl(path: str | Path) -> list[Listing]:
    listings = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        listings.append(
            Listing(
                id=record["id"],
                tokens=tuple(record["tokens"]),
                normalized_text=record["normalized_text"],
                phones=tuple(record["phones"]),
                region=record["region"],
                age=record["age"],
                weight_lbs=record["weight_lbs"],
            )
        )
    return listings
