"""Automated compliance checks over supplied tabular data.

Three check kinds, each bound to a catalog control:

* demographic parity — positive-rate disparity across protected groups must
  stay strictly below the threshold (default 0.05);
* robustness thresholds — externally measured per-attack accuracies must
  strictly exceed their minimums (defaults FGSM 0.85, PGD 0.80); the attacks
  themselves run upstream of this engine;
* PII scan — pattern detectors (SSN, North-American phone, email, Luhn-valid
  card numbers, configurable medical record numbers) over every cell.

Boundary semantics are deliberate: a disparity equal to the threshold fails,
an accuracy equal to its minimum fails.

Known detector false negatives are documented in the README: phone numbers
without separators, card numbers split across cells, and medical record
numbers that do not match the configured prefix.
"""

from __future__ import annotations

import csv
import io
import json
import re
import uuid
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .catalog import CheckKind
from .errors import (
    EmptyGroup,
    InvalidPredictionValue,
    MissingColumn,
    MissingMeasurement,
    ParseError,
    SingleGroup,
    UnknownControl,
    ValidationError,
)
from .scoring import ControlStatus, Effectiveness, Implementation
from .util import parse_rfc3339, rfc3339, utc_now

DEFAULT_PARITY_THRESHOLD = 0.05
DEFAULT_ROBUSTNESS_THRESHOLDS = {"FGSM": 0.85, "PGD": 0.80}

#: Control each check kind reports against unless the caller overrides it.
DEFAULT_BOUND_CONTROLS = {
    CheckKind.DEMOGRAPHIC_PARITY: "GRC-11",
    CheckKind.ROBUSTNESS_THRESHOLD: "MDS-02",
    CheckKind.PII_SCAN: "DSP-11",
}


class ColumnKind(str, Enum):
    TEXT = "text"
    NUMBER = "number"
    CATEGORY = "category"
    BOOLEAN = "boolean"


@dataclass(frozen=True)
class Column:
    name: str
    kind: ColumnKind


@dataclass(frozen=True)
class TabularDataset:
    """Columnar data with inferred or declared column kinds; values are kept
    as delivered (strings when read from CSV)."""

    columns: tuple[Column, ...]
    rows: tuple[tuple, ...]

    def __post_init__(self) -> None:
        width = len(self.columns)
        for index, row in enumerate(self.rows):
            if len(row) != width:
                raise ValidationError(
                    f"row {index} has {len(row)} values, expected {width}", row=index
                )

    def column_index(self, name: str) -> int:
        for index, column in enumerate(self.columns):
            if column.name == name:
                return index
        raise MissingColumn(f"column {name!r} not in dataset", column=name)

    def column_values(self, name: str) -> list:
        index = self.column_index(name)
        return [row[index] for row in self.rows]


_BOOLEAN_TOKENS = {"0", "1", "true", "false"}
CATEGORY_MAX_DISTINCT = 32


def _infer_kind(values: Sequence[str]) -> ColumnKind:
    non_empty = [v for v in values if v != ""]
    if non_empty and all(_is_number(v) for v in non_empty):
        return ColumnKind.NUMBER
    if non_empty and all(v.strip().lower() in _BOOLEAN_TOKENS for v in non_empty):
        return ColumnKind.BOOLEAN
    if len(set(non_empty)) <= CATEGORY_MAX_DISTINCT:
        return ColumnKind.CATEGORY
    return ColumnKind.TEXT


def _is_number(value: str) -> bool:
    try:
        float(value)
        return True
    except ValueError:
        return False


def load_dataset_csv(
    source: Union[str, Path], schema_path: Optional[Union[str, Path]] = None
) -> TabularDataset:
    """Load a CSV (UTF-8, header row, RFC-4180 quoting) into a dataset.

    Column kinds are inferred (all-numeric -> number; all in {0,1,true,false}
    -> boolean; at most 32 distinct values -> category; otherwise text) and
    may be overridden per column by a sidecar JSON schema file of the form
    ``{"columns": {"name": "kind"}}``.
    """
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read dataset {path}: {exc}", path=str(path)) from exc
    return parse_dataset_csv(text, _load_schema(schema_path))


def parse_dataset_csv(text: str, overrides: Optional[Mapping[str, str]] = None) -> TabularDataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("dataset CSV has no header row") from None
    rows = [tuple(row) for row in reader]
    for index, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ParseError(f"line {index}: expected {len(header)} fields, got {len(row)}", line=index)
    columns = []
    for position, name in enumerate(header):
        declared = (overrides or {}).get(name)
        if declared is not None:
            kind = ColumnKind(declared)
        else:
            kind = _infer_kind([row[position] for row in rows])
        columns.append(Column(name, kind))
    return TabularDataset(tuple(columns), tuple(rows))


def _load_schema(schema_path: Optional[Union[str, Path]]) -> Optional[dict[str, str]]:
    if schema_path is None:
        return None
    raw = json.loads(Path(schema_path).read_text(encoding="utf-8"))
    return dict(raw.get("columns") or {})


# --- results -------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    result_id: str
    kind: CheckKind
    bound_control: str
    passed: bool
    measured: dict
    message: str
    executed_at: datetime

    def to_dict(self) -> dict:
        return {
            "result_id": self.result_id,
            "kind": self.kind.value,
            "bound_control": self.bound_control,
            "passed": self.passed,
            "measured": self.measured,
            "message": self.message,
            "executed_at": rfc3339(self.executed_at),
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "CheckResult":
        return cls(
            result_id=raw["result_id"],
            kind=CheckKind(raw["kind"]),
            bound_control=raw["bound_control"],
            passed=raw["passed"],
            measured=raw["measured"],
            message=raw["message"],
            executed_at=parse_rfc3339(raw["executed_at"]),
        )


def _result(
    kind: CheckKind,
    bound_control: str,
    passed: bool,
    measured: dict,
    detail: str,
    result_id: Optional[str],
) -> CheckResult:
    verdict = "PASS" if passed else "FAIL"
    return CheckResult(
        result_id=result_id or f"chk-{uuid.uuid4().hex[:12]}",
        kind=kind,
        bound_control=bound_control,
        passed=passed,
        measured=measured,
        message=f"{bound_control} {verdict}: {detail}",
        executed_at=utc_now(),
    )


# --- demographic parity ----------------------------------------------------------

_TRUTHY = {"1", "true"}
_FALSY = {"0", "false"}


def _as_binary(value, column: str, row: int) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)) and value in (0, 1):
        return bool(value)
    token = str(value).strip().lower()
    if token in _TRUTHY:
        return True
    if token in _FALSY:
        return False
    raise InvalidPredictionValue(
        f"prediction column {column!r} must be boolean or 0/1; row {row} has {value!r}",
        column=column, row=row,
    )


def demographic_parity(
    data: TabularDataset,
    protected_column: str,
    prediction_column: str,
    threshold: float = DEFAULT_PARITY_THRESHOLD,
    *,
    bound_control: Optional[str] = None,
    result_id: Optional[str] = None,
) -> CheckResult:
    """Max-minus-min positive rate across protected groups; strict threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValidationError(f"parity threshold must lie in (0, 1), got {threshold}")
    protected = data.column_values(protected_column)
    predictions = data.column_values(prediction_column)

    by_group: dict[str, list[bool]] = {}
    for row, (group, prediction) in enumerate(zip(protected, predictions)):
        by_group.setdefault(str(group), []).append(
            _as_binary(prediction, prediction_column, row)
        )
    if len(by_group) < 2:
        raise SingleGroup(
            f"need at least 2 protected groups, found {len(by_group)}",
            column=protected_column, groups=sorted(by_group),
        )
    for group, outcomes in by_group.items():
        if not outcomes:
            raise EmptyGroup(f"protected group {group!r} has no rows", group=group)

    rates = {group: sum(v) / len(v) for group, v in sorted(by_group.items())}
    disparity = max(rates.values()) - min(rates.values())
    passed = disparity < threshold
    control = bound_control or DEFAULT_BOUND_CONTROLS[CheckKind.DEMOGRAPHIC_PARITY]
    detail = (
        f"demographic parity disparity {disparity:.2%} "
        f"{'below' if passed else 'violation at'} threshold {threshold:.2%}"
    )
    return _result(
        CheckKind.DEMOGRAPHIC_PARITY,
        control,
        passed,
        {"disparity": disparity, "threshold": threshold, "group_rates": rates},
        detail,
        result_id,
    )


# --- robustness ---------------------------------------------------------------------

def robustness_threshold(
    accuracies: Mapping[str, float],
    thresholds: Optional[Mapping[str, float]] = None,
    *,
    bound_control: Optional[str] = None,
    result_id: Optional[str] = None,
) -> CheckResult:
    """Every thresholded attack's measured accuracy must strictly exceed its
    minimum; accuracies are measured upstream (no attacks are executed here)."""
    if thresholds is None:
        thresholds = DEFAULT_ROBUSTNESS_THRESHOLDS
    for attack, minimum in thresholds.items():
        if not 0.0 < minimum < 1.0:
            raise ValidationError(f"threshold for {attack} must lie in (0, 1), got {minimum}")
        if attack not in accuracies:
            raise MissingMeasurement(f"no measured accuracy for attack {attack!r}", attack=attack)
    failing = {
        attack: accuracies[attack]
        for attack, minimum in thresholds.items()
        if not accuracies[attack] > minimum
    }
    passed = not failing
    control = bound_control or DEFAULT_BOUND_CONTROLS[CheckKind.ROBUSTNESS_THRESHOLD]
    measured = {
        "accuracies": {a: accuracies[a] for a in sorted(thresholds)},
        "thresholds": dict(sorted(thresholds.items())),
    }
    if passed:
        detail = "adversarial robustness above thresholds " + _fmt_accuracies(thresholds, accuracies)
    else:
        detail = "adversarial robustness below threshold " + _fmt_accuracies(thresholds, accuracies, failing)
    return _result(CheckKind.ROBUSTNESS_THRESHOLD, control, passed, measured, detail, result_id)


def _fmt_accuracies(
    thresholds: Mapping[str, float],
    accuracies: Mapping[str, float],
    failing: Optional[Mapping[str, float]] = None,
) -> str:
    names = sorted(failing) if failing else sorted(thresholds)
    return ", ".join(f"{a}={accuracies[a]:.3f} (min {thresholds[a]:.2f})" for a in names)


# --- PII scan -------------------------------------------------------------------------

@dataclass(frozen=True)
class PiiHit:
    pii_type: str
    row: int
    column: str
    value: str
    allowed: bool = False

    def to_dict(self) -> dict:
        return {
            "type": self.pii_type,
            "row": self.row,
            "column": self.column,
            "value": self.value,
            "allowed": self.allowed,
        }


DEFAULT_MRN_PATTERN = r"\bMRN[-: ]?\d{6,10}\b"

_PII_PATTERNS: dict[str, re.Pattern] = {
    "SSN": re.compile(r"(?<!\d)\d{3}-\d{2}-\d{4}(?!\d)"),
    "PHONE": re.compile(
        r"(?<![\d.-])(?:\+?1[\s.-]?)?(?:\(\d{3}\)\s?|\d{3}[\s.-])\d{3}[\s.-]\d{4}(?![\d.-])"
    ),
    "EMAIL": re.compile(r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}\b"),
    "CREDIT_CARD": re.compile(r"(?<![\d-])\d(?:[ -]?\d){12,15}(?![\d-])"),
}

PII_TYPES = ("SSN", "PHONE", "EMAIL", "CREDIT_CARD", "MEDICAL_RECORD")


def _luhn_valid(digits: str) -> bool:
    total = 0
    for position, char in enumerate(reversed(digits)):
        digit = int(char)
        if position % 2 == 1:
            digit *= 2
            if digit > 9:
                digit -= 9
        total += digit
    return total % 10 == 0


def pii_scan(
    data: TabularDataset,
    allowed_types: Iterable[str] = (),
    *,
    mrn_pattern: str = DEFAULT_MRN_PATTERN,
    bound_control: Optional[str] = None,
    result_id: Optional[str] = None,
) -> CheckResult:
    """Scan every cell (as text) with the five detectors; passes iff no hit of
    a type outside ``allowed_types``. All hits are reported with locations."""
    allowed = {t.upper() for t in allowed_types}
    unknown = allowed - set(PII_TYPES)
    if unknown:
        raise ValidationError(f"unknown PII types {sorted(unknown)}", types=sorted(unknown))
    patterns = dict(_PII_PATTERNS)
    patterns["MEDICAL_RECORD"] = re.compile(mrn_pattern)

    hits: list[PiiHit] = []
    for row_index, row in enumerate(data.rows):
        for column, value in zip(data.columns, row):
            text = str(value)
            for pii_type in PII_TYPES:
                for match in patterns[pii_type].finditer(text):
                    token = match.group(0)
                    if pii_type == "CREDIT_CARD":
                        digits = re.sub(r"[ -]", "", token)
                        if not (13 <= len(digits) <= 16 and _luhn_valid(digits)):
                            continue
                    hits.append(
                        PiiHit(pii_type, row_index, column.name, token, pii_type in allowed)
                    )

    unexpected = [h for h in hits if not h.allowed]
    passed = not unexpected
    control = bound_control or DEFAULT_BOUND_CONTROLS[CheckKind.PII_SCAN]
    if passed:
        detail = f"0 unexpected PII instances ({len(hits)} allowed)" if hits else "0 PII instances"
    else:
        detail = f"{len(unexpected)} unexpected PII instances"
    return _result(
        CheckKind.PII_SCAN,
        control,
        passed,
        {
            "hits": [h.to_dict() for h in hits],
            "unexpected_count": len(unexpected),
            "allowed_types": sorted(allowed),
        },
        detail,
        result_id,
    )


# --- applying results --------------------------------------------------------------

@dataclass(frozen=True)
class UnappliedResult:
    """A passing check whose control is not implemented; reported, not applied."""

    result_id: str
    control_id: str
    reason: str


def apply_results(
    results: Iterable[CheckResult], statuses: Mapping[str, ControlStatus]
) -> tuple[dict[str, ControlStatus], list[UnappliedResult]]:
    """Fold check outcomes into control effectiveness.

    PASS validates an implemented control effective; FAIL marks the control
    ineffective; a PASS against a non-implemented control is reported back
    (setting it effective would break the status invariant). The result id is
    appended to the control's evidence references either way.
    """
    from dataclasses import replace as _replace

    updated = dict(statuses)
    reports: list[UnappliedResult] = []
    for result in results:
        control_id = result.bound_control
        if control_id not in updated:
            raise UnknownControl(
                f"check result bound to unknown control {control_id!r}", control_id=control_id
            )
        status = updated[control_id]
        evidence = status.evidence_refs + (result.result_id,)
        if result.passed:
            if status.implementation is Implementation.IMPLEMENTED:
                updated[control_id] = _replace(
                    status,
                    effectiveness=Effectiveness.VALIDATED_EFFECTIVE,
                    evidence_refs=evidence,
                )
            else:
                reports.append(
                    UnappliedResult(
                        result.result_id,
                        control_id,
                        f"{control_id} passed its check but is not implemented "
                        f"({status.implementation.value})",
                    )
                )
        else:
            updated[control_id] = _replace(
                status,
                effectiveness=Effectiveness.VALIDATED_INEFFECTIVE,
                evidence_refs=evidence,
            )
    return updated, reports
