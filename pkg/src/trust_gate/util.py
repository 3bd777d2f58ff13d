"""Small shared helpers: RFC-3339 timestamps and canonical JSON."""

from __future__ import annotations

import json
import os
from datetime import date, datetime, timezone
from typing import Any


def utc_now() -> datetime:
    """Current UTC time; honors TRUST_GATE_CLOCK for reproducible runs."""
    frozen = os.environ.get("TRUST_GATE_CLOCK")
    if frozen:
        return parse_rfc3339(frozen)
    return datetime.now(timezone.utc)


def rfc3339(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat(timespec="microseconds").replace("+00:00", "Z")


def parse_rfc3339(text: str) -> datetime:
    # Python 3.10 fromisoformat does not accept a 'Z' suffix.
    cleaned = text.replace("Z", "+00:00") if text.endswith("Z") else text
    dt = datetime.fromisoformat(cleaned)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def iso_date(d: date) -> str:
    return d.isoformat()


def parse_date(text: str) -> date:
    return date.fromisoformat(text)


def canonical_json(obj: Any) -> str:
    """Deterministic serialization: sorted keys, no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
