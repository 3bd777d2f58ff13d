"""Durable governance repository.

An append-only, hash-chained audit log is the single source of truth; all
queryable state (systems, statuses, assessments, decisions, exceptions,
risks) is a deterministic fold of that log. Each log line is the canonical
JSON serialization of one event; event N carries the SHA-256 digest of event
N-1's bytes (the first event chains to the digest of the empty string), so
any byte-level tamper is detected when the store is reopened or verified.

One writer per store, enforced with a file lock; readers fold a consistent
prefix and never block the writer. Risk scoring and KPI banding are pure
functions kept here because their records live in this repository.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from filelock import FileLock

from .errors import StoreCorrupt, UnknownSystem, ValidationError, WriteFailed
from .lifecycle import AiSystem, ExceptionRecord, GateDecision, apply_decision
from .scoring import ControlStatus, PillarAssessment, TrustIndexResult
from .catalog import Pillar
from .util import canonical_json, parse_rfc3339, rfc3339, utc_now

GENESIS_DIGEST = hashlib.sha256(b"").hexdigest()


class EventKind(str, Enum):
    SYSTEM_REGISTERED = "system_registered"
    STATUS_UPDATED = "status_updated"
    ASSESSMENT_RECORDED = "assessment_recorded"
    GATE_DECIDED = "gate_decided"
    EXCEPTION_GRANTED = "exception_granted"
    EXCEPTION_EXPIRED = "exception_expired"
    TRIGGER_FIRED = "trigger_fired"
    RISK_UPSERTED = "risk_upserted"
    CHECK_EXECUTED = "check_executed"


@dataclass(frozen=True)
class AuditEvent:
    sequence: int
    timestamp: datetime
    actor: str
    event_kind: EventKind
    payload: dict
    prev_digest: str

    def to_dict(self) -> dict:
        return {
            "sequence": self.sequence,
            "timestamp": rfc3339(self.timestamp),
            "actor": self.actor,
            "event_kind": self.event_kind.value,
            "payload": self.payload,
            "prev_digest": self.prev_digest,
        }

    def canonical_bytes(self) -> bytes:
        return canonical_json(self.to_dict()).encode("utf-8")

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_bytes()).hexdigest()

    @classmethod
    def from_dict(cls, raw: Mapping) -> "AuditEvent":
        return cls(
            sequence=raw["sequence"],
            timestamp=parse_rfc3339(raw["timestamp"]),
            actor=raw["actor"],
            event_kind=EventKind(raw["event_kind"]),
            payload=raw["payload"],
            prev_digest=raw["prev_digest"],
        )


# --- risk register ------------------------------------------------------------

class Likelihood(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class Impact(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class RiskLevelLabel(str, Enum):
    CRITICAL = "critical"
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


class RiskStatus(str, Enum):
    OPEN = "open"
    IN_PROGRESS = "in_progress"
    MITIGATED = "mitigated"
    CLOSED = "closed"


#: Numeric scale behind the likelihood x impact product.
RISK_SCALE = {"low": 2, "medium": 3, "high": 5}


def risk_score(likelihood: Likelihood, impact: Impact) -> tuple[int, RiskLevelLabel]:
    """Score = likelihood x impact on the 2/3/5 scale; banded into four levels."""
    score = RISK_SCALE[likelihood.value] * RISK_SCALE[impact.value]
    if score >= 20:
        level = RiskLevelLabel.CRITICAL
    elif score >= 12:
        level = RiskLevelLabel.HIGH
    elif score >= 6:
        level = RiskLevelLabel.MEDIUM
    else:
        level = RiskLevelLabel.LOW
    return score, level


@dataclass(frozen=True)
class RiskItem:
    risk_id: str
    description: str
    pillar: Pillar
    project: str
    likelihood: Likelihood
    impact: Impact
    mitigation: str = ""
    owner: str = ""
    due_date: Optional[str] = None
    status: RiskStatus = RiskStatus.OPEN
    score: int = field(init=False, default=0)
    level: RiskLevelLabel = field(init=False, default=RiskLevelLabel.LOW)

    def __post_init__(self) -> None:
        score, level = risk_score(self.likelihood, self.impact)
        object.__setattr__(self, "score", score)
        object.__setattr__(self, "level", level)

    def to_dict(self) -> dict:
        return {
            "risk_id": self.risk_id,
            "description": self.description,
            "pillar": self.pillar.value,
            "project": self.project,
            "likelihood": self.likelihood.value,
            "impact": self.impact.value,
            "score": self.score,
            "level": self.level.value,
            "mitigation": self.mitigation,
            "owner": self.owner,
            "due_date": self.due_date,
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "RiskItem":
        return cls(
            risk_id=raw["risk_id"],
            description=raw["description"],
            pillar=Pillar(raw["pillar"]),
            project=raw.get("project", ""),
            likelihood=Likelihood(raw["likelihood"]),
            impact=Impact(raw["impact"]),
            mitigation=raw.get("mitigation", ""),
            owner=raw.get("owner", ""),
            due_date=raw.get("due_date"),
            status=RiskStatus(raw.get("status", "open")),
        )


# --- KPI metrics ----------------------------------------------------------------

class KpiDirection(str, Enum):
    HIGHER_BETTER = "higher_better"
    LOWER_BETTER = "lower_better"


class KpiCategory(str, Enum):
    LAGGING = "lagging"
    LEADING = "leading"


class KpiStatus(str, Enum):
    GREEN = "green"
    YELLOW = "yellow"
    RED = "red"


class KpiTrend(str, Enum):
    UP = "up"
    DOWN = "down"
    FLAT = "flat"


#: Relative miss at or below which a missed KPI stays yellow instead of red.
KPI_YELLOW_BAND = 0.75


@dataclass(frozen=True)
class KpiMetric:
    name: str
    current: float
    target: float
    direction: KpiDirection
    category: KpiCategory
    status: KpiStatus
    trend: KpiTrend = KpiTrend.FLAT
    yoy_change: float = 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "current": self.current,
            "target": self.target,
            "direction": self.direction.value,
            "category": self.category.value,
            "status": self.status.value,
            "trend": self.trend.value,
            "yoy_change": self.yoy_change,
        }


def kpi_status(
    name: str,
    current: float,
    target: float,
    direction: KpiDirection,
    category: KpiCategory = KpiCategory.LAGGING,
    trend: KpiTrend = KpiTrend.FLAT,
    yoy_change: float = 0.0,
    yellow_band: float = KPI_YELLOW_BAND,
) -> KpiMetric:
    """Band a KPI: green when the target is met, yellow on a relative miss of
    at most ``yellow_band``, red beyond. A lower-is-better target of zero is
    measured absolutely against one unit."""
    if target < 0:
        raise ValidationError(f"KPI target must be non-negative, got {target}", name=name)
    if direction is KpiDirection.HIGHER_BETTER:
        met = current >= target
        deviation = 0.0 if met or target == 0 else (target - current) / target
    else:
        met = current <= target
        if target == 0:
            deviation = 0.0 if met else float(current)
        else:
            deviation = 0.0 if met else (current - target) / target
    if met:
        status = KpiStatus.GREEN
    elif deviation <= yellow_band:
        status = KpiStatus.YELLOW
    else:
        status = KpiStatus.RED
    return KpiMetric(name, current, target, direction, category, status, trend, yoy_change)


# --- state fold -------------------------------------------------------------------

@dataclass
class SystemState:
    """Everything the log says about one system, folded in sequence order."""

    system: AiSystem
    statuses: dict[str, ControlStatus] = field(default_factory=dict)
    assessments: Optional[dict[Pillar, PillarAssessment]] = None
    trust_index: Optional[TrustIndexResult] = None
    assessment_sequence: Optional[int] = None
    decisions: list[GateDecision] = field(default_factory=list)
    exceptions: dict[str, ExceptionRecord] = field(default_factory=dict)
    checks: list[dict] = field(default_factory=list)

    def open_exceptions(self) -> list[ExceptionRecord]:
        return [e for e in self.exceptions.values() if e.active]


@dataclass
class GovernanceState:
    systems: dict[str, SystemState] = field(default_factory=dict)
    risks: dict[str, RiskItem] = field(default_factory=dict)
    last_sequence: int = 0


def apply_event(state: GovernanceState, event: AuditEvent) -> GovernanceState:
    """Pure fold step; replaying the log through this function rebuilds all state."""
    payload = event.payload
    kind = event.event_kind
    state.last_sequence = event.sequence

    if kind is EventKind.SYSTEM_REGISTERED:
        system = AiSystem.from_dict(payload["system"])
        state.systems[system.system_id] = SystemState(system=system)
    elif kind is EventKind.STATUS_UPDATED:
        entry = _system_state(state, payload["system_id"])
        for raw in payload["statuses"]:
            status = ControlStatus.from_dict(raw)
            entry.statuses[status.control_id] = status
    elif kind is EventKind.ASSESSMENT_RECORDED:
        entry = _system_state(state, payload["system_id"])
        trust_index = TrustIndexResult.from_dict(payload["trust_index"])
        entry.assessments = dict(trust_index.per_pillar)
        entry.trust_index = trust_index
        entry.assessment_sequence = event.sequence
    elif kind is EventKind.GATE_DECIDED:
        decision = GateDecision.from_dict(payload["decision"])
        entry = _system_state(state, decision.system_id)
        entry.decisions.append(decision)
        entry.system = apply_decision(entry.system, decision)
    elif kind is EventKind.EXCEPTION_GRANTED:
        record = ExceptionRecord.from_dict(payload["exception"])
        entry = _system_state(state, record.system_id)
        entry.exceptions[record.exception_id] = record
    elif kind is EventKind.EXCEPTION_EXPIRED:
        entry = _system_state(state, payload["system_id"])
        record = entry.exceptions.get(payload["exception_id"])
        if record is not None:
            entry.exceptions[record.exception_id] = replace(
                record,
                active=payload.get("active", record.active),
                overdue=payload.get("overdue", record.overdue),
            )
    elif kind is EventKind.TRIGGER_FIRED:
        entry = _system_state(state, payload["system_id"])
        entry.system = replace(entry.system, pending_gate=payload["pending_gate"])
    elif kind is EventKind.RISK_UPSERTED:
        risk = RiskItem.from_dict(payload["risk"])
        state.risks[risk.risk_id] = risk
    elif kind is EventKind.CHECK_EXECUTED:
        entry = _system_state(state, payload["system_id"])
        entry.checks.append(payload["result"])
    return state


def _system_state(state: GovernanceState, system_id: str) -> SystemState:
    try:
        return state.systems[system_id]
    except KeyError:
        raise StoreCorrupt(
            f"event references unregistered system {system_id!r}", system_id=system_id
        ) from None


def replay(events: Iterable[AuditEvent]) -> GovernanceState:
    state = GovernanceState()
    for event in events:
        apply_event(state, event)
    return state


# --- event store -------------------------------------------------------------------

class EventStore:
    """Append-only log file plus the folded state snapshot.

    The snapshot is rebuilt from the log on open; appends are durable (flush +
    fsync) before returning and update the snapshot incrementally. A sidecar
    ``.head`` file anchors the digest of the newest event: the prev-digest
    chain alone cannot expose tampering with the final line, so verification
    checks the chain and then the anchor.
    """

    def __init__(self, path: Union[str, Path], *, read_only: bool = False) -> None:
        self.path = Path(path)
        self.head_path = Path(str(path) + ".head")
        self.read_only = read_only
        self._lock = None
        if not read_only:
            self._lock = FileLock(str(self.path) + ".lock")
            self._lock.acquire(timeout=10)
        try:
            self._events = self._load()
        except Exception:
            self._release()
            raise
        self.state = replay(self._events)

    # -- lifecycle --

    def close(self) -> None:
        self._release()

    def _release(self) -> None:
        if self._lock is not None and self._lock.is_locked:
            self._lock.release()

    def __enter__(self) -> "EventStore":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # -- reading --

    def _load(self) -> list[AuditEvent]:
        if not self.path.exists():
            return []
        events = []
        prev_digest = GENESIS_DIGEST
        try:
            text = self.path.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise StoreCorrupt(f"log is not valid UTF-8: {exc}", first_bad_sequence=1) from exc
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            event, prev_digest = self._check_line(line, line_no, len(events) + 1, prev_digest)
            events.append(event)
        self._check_head(self.head_path, events, prev_digest)
        return events

    @staticmethod
    def _check_head(head_path: Path, events: list[AuditEvent], tip_digest: str) -> None:
        if not head_path.exists():
            return
        anchored = head_path.read_text(encoding="utf-8").strip()
        expected = tip_digest if events else GENESIS_DIGEST
        if anchored != expected:
            raise StoreCorrupt(
                "head anchor does not match the digest chain tip",
                first_bad_sequence=len(events) or 1,
            )

    @staticmethod
    def _check_line(
        line: str, line_no: int, expected_sequence: int, prev_digest: str
    ) -> tuple[AuditEvent, str]:
        import json

        try:
            raw = json.loads(line)
            event = AuditEvent.from_dict(raw)
        except Exception as exc:
            raise StoreCorrupt(
                f"line {line_no}: cannot decode event: {exc}", line=line_no,
                first_bad_sequence=expected_sequence,
            ) from exc
        if event.sequence != expected_sequence:
            raise StoreCorrupt(
                f"line {line_no}: expected sequence {expected_sequence}, found {event.sequence}",
                line=line_no, first_bad_sequence=expected_sequence,
            )
        if event.prev_digest != prev_digest:
            raise StoreCorrupt(
                f"line {line_no}: digest chain broken at sequence {event.sequence}",
                line=line_no, first_bad_sequence=event.sequence,
            )
        if canonical_json(raw) != canonical_json(event.to_dict()):
            raise StoreCorrupt(
                f"line {line_no}: event {event.sequence} is not canonically serialized",
                line=line_no, first_bad_sequence=event.sequence,
            )
        return event, event.digest()

    @property
    def last_sequence(self) -> int:
        return len(self._events)

    def events(self, since: int = 0) -> list[AuditEvent]:
        """Events with sequence > ``since``."""
        return self._events[since:]

    # -- writing --

    def append(self, event_kind: EventKind, payload: dict, actor: str) -> AuditEvent:
        if self.read_only:
            raise WriteFailed("store opened read-only", path=str(self.path))
        prev_digest = self._events[-1].digest() if self._events else GENESIS_DIGEST
        event = AuditEvent(
            sequence=len(self._events) + 1,
            timestamp=utc_now(),
            actor=actor,
            event_kind=event_kind,
            payload=payload,
            prev_digest=prev_digest,
        )
        line = event.canonical_bytes() + b"\n"
        try:
            with open(self.path, "ab") as handle:
                handle.write(line)
                handle.flush()
                os.fsync(handle.fileno())
            with open(self.head_path, "w", encoding="utf-8") as head:
                head.write(event.digest() + "\n")
                head.flush()
                os.fsync(head.fileno())
        except OSError as exc:
            raise WriteFailed(f"cannot append to {self.path}: {exc}", path=str(self.path)) from exc
        self._events.append(event)
        apply_event(self.state, event)
        return event

    # -- snapshots --

    def snapshot(self, system_id: str) -> SystemState:
        try:
            return self.state.systems[system_id]
        except KeyError:
            raise UnknownSystem(f"unknown system {system_id!r}", system_id=system_id) from None

    def has_system(self, system_id: str) -> bool:
        return system_id in self.state.systems

    def systems(self) -> list[SystemState]:
        return [self.state.systems[k] for k in sorted(self.state.systems)]

    def risks(self) -> list[RiskItem]:
        return [self.state.risks[k] for k in sorted(self.state.risks)]

    # -- verification & export --

    @staticmethod
    def verify_file(path: Union[str, Path]) -> tuple[bool, Optional[int], str]:
        """Walk the chain and check the head anchor; returns (ok, first broken
        sequence, message)."""
        path = Path(path)
        if not path.exists():
            return True, None, "empty store"
        prev_digest = GENESIS_DIGEST
        count = 0
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            return False, 1, f"log is not valid UTF-8: {exc}"
        events: list[AuditEvent] = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                event, prev_digest = EventStore._check_line(line, line_no, count + 1, prev_digest)
            except StoreCorrupt as exc:
                return False, exc.details.get("first_bad_sequence"), exc.message
            events.append(event)
            count += 1
        try:
            EventStore._check_head(Path(str(path) + ".head"), events, prev_digest)
        except StoreCorrupt as exc:
            return False, exc.details.get("first_bad_sequence"), exc.message
        return True, None, f"{count} events verified"

    def export(self, out_path: Union[str, Path], system_id: Optional[str] = None) -> int:
        """Write the log (optionally filtered to one system) in wire format."""
        out = Path(out_path)
        count = 0
        with open(out, "w", encoding="utf-8") as handle:
            for event in self._events:
                if system_id is not None and not _touches_system(event, system_id):
                    continue
                handle.write(canonical_json(event.to_dict()) + "\n")
                count += 1
        return count


def _touches_system(event: AuditEvent, system_id: str) -> bool:
    payload = event.payload
    direct = payload.get("system_id")
    if direct == system_id:
        return True
    for key in ("system", "decision", "exception"):
        nested = payload.get(key)
        if isinstance(nested, dict) and nested.get("system_id") == system_id:
            return True
    return False
