"""Controls catalog and framework configuration.

Loads and validates the catalog document that drives the whole engine: the
eight trust pillars and their aggregation weights, control families, control
definitions (priority, pillar mapping, earliest gate), per-phase minimum
pillar scores, cumulative gate control counts, and the minimum-score ranges
attached to pillar priority levels.

The catalog is plain JSON so it can be reviewed, diffed, and hand-edited.
A default catalog ships with the package (see :func:`default_catalog_path`).
Loaded configurations are immutable and safe to share across threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Union

from .errors import GateOutOfRange, ParseError, ValidationError

GATES = (0, 1, 2, 3, 4, 5)
PHASES = (0, 1, 2, 3, 4, 5, 6)

_CONTROL_ID_RE = re.compile(r"^([A-Z][A-Z&]{1,5})-(\d{2})$")


class Pillar(str, Enum):
    """The eight trust dimensions, each scored 0-100."""

    CYBERSECURITY = "cybersecurity"
    PRIVACY = "privacy"
    ETHICS_BIAS = "ethics_bias"
    TRANSPARENCY = "transparency"
    EXPLAINABILITY = "explainability"
    REGULATIONS = "regulations"
    AUDIT = "audit"
    ACCOUNTABILITY = "accountability"


#: Aggregation weights used when no per-system priorities are in play.
DEFAULT_PILLAR_WEIGHTS: dict[Pillar, float] = {
    Pillar.CYBERSECURITY: 0.15,
    Pillar.PRIVACY: 0.15,
    Pillar.ETHICS_BIAS: 0.15,
    Pillar.TRANSPARENCY: 0.10,
    Pillar.EXPLAINABILITY: 0.10,
    Pillar.REGULATIONS: 0.15,
    Pillar.AUDIT: 0.10,
    Pillar.ACCOUNTABILITY: 0.10,
}


class ControlPriority(str, Enum):
    """Per-control weighting for implementation scoring."""

    CRITICAL = "critical"
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"

    @property
    def weight(self) -> float:
        return _CONTROL_PRIORITY_WEIGHTS[self]


_CONTROL_PRIORITY_WEIGHTS = {
    ControlPriority.CRITICAL: 3.0,
    ControlPriority.HIGH: 2.0,
    ControlPriority.MEDIUM: 1.0,
    ControlPriority.LOW: 0.5,
}


class PillarPriority(str, Enum):
    """Per-use-case pillar importance; sets weights and minimum-score ranges."""

    CRITICAL = "critical"
    HIGH = "high"
    STANDARD = "standard"
    LOW = "low"

    @property
    def weight(self) -> float:
        return _PILLAR_PRIORITY_WEIGHTS[self]


_PILLAR_PRIORITY_WEIGHTS = {
    PillarPriority.CRITICAL: 3.0,
    PillarPriority.HIGH: 2.0,
    PillarPriority.STANDARD: 1.0,
    PillarPriority.LOW: 0.5,
}

#: Minimum-score range per pillar priority level.
DEFAULT_PRIORITY_MIN_RANGES: dict[PillarPriority, tuple[float, float]] = {
    PillarPriority.CRITICAL: (85.0, 95.0),
    PillarPriority.HIGH: (75.0, 85.0),
    PillarPriority.STANDARD: (60.0, 75.0),
    PillarPriority.LOW: (50.0, 65.0),
}


class CheckKind(str, Enum):
    """Automated-check kinds a control may be bound to."""

    DEMOGRAPHIC_PARITY = "demographic_parity"
    ROBUSTNESS_THRESHOLD = "robustness_threshold"
    PII_SCAN = "pii_scan"


@dataclass(frozen=True)
class PillarWeight:
    pillar: Pillar
    weight: float


@dataclass(frozen=True)
class ControlFamily:
    code: str
    name: str
    declared_count: Optional[int] = None


@dataclass(frozen=True)
class ControlDefinition:
    """One auditable requirement from the controls catalog.

    ``pillars`` is ordered: the first entry is the control's primary pillar.
    ``required_from_gate`` is the earliest gate (0-5) at which the control
    becomes applicable; controls are cumulative from that gate onward.
    """

    control_id: str
    family: str
    title: str
    priority: ControlPriority
    pillars: tuple[Pillar, ...]
    required_from_gate: Optional[int] = None
    check_binding: Optional[CheckKind] = None

    @property
    def primary_pillar(self) -> Pillar:
        return self.pillars[0]


@dataclass(frozen=True)
class PhaseRequirements:
    """Minimum pillar scores for a phase and the control count for its gate."""

    phase: int
    per_pillar_min: Optional[Mapping[Pillar, float]] = None
    min_cumulative_controls: Optional[int] = None


@dataclass(frozen=True)
class FamilyCountDiscrepancy:
    code: str
    declared: int
    actual: int


@dataclass(frozen=True)
class FrameworkConfig:
    pillar_weights: Mapping[Pillar, float]
    families: tuple[ControlFamily, ...]
    controls: tuple[ControlDefinition, ...]
    phase_requirements: tuple[PhaseRequirements, ...]
    priority_min_score_ranges: Mapping[PillarPriority, tuple[float, float]]
    controls_by_id: Mapping[str, ControlDefinition] = field(repr=False, default_factory=dict)

    def phase(self, phase: int) -> PhaseRequirements:
        for req in self.phase_requirements:
            if req.phase == phase:
                return req
        raise GateOutOfRange(f"no requirements defined for phase {phase}", phase=phase)

    def control(self, control_id: str) -> ControlDefinition:
        try:
            return self.controls_by_id[control_id]
        except KeyError:
            raise ValidationError(f"unknown control {control_id!r}", control_id=control_id) from None

    def controls_for_pillar(self, pillar: Pillar) -> tuple[ControlDefinition, ...]:
        return tuple(c for c in self.controls if pillar in c.pillars)


def applicable_controls(config: FrameworkConfig, gate: int) -> set[ControlDefinition]:
    """All controls required at ``gate``: cumulative over earlier gates."""
    if gate not in GATES:
        raise GateOutOfRange(f"gate must be 0-5, got {gate}", gate=gate)
    return {
        c
        for c in config.controls
        if c.required_from_gate is not None and c.required_from_gate <= gate
    }


def validate_family_counts(config: FrameworkConfig) -> list[FamilyCountDiscrepancy]:
    """Report declared-vs-actual control counts per family (advisory only)."""
    actual: dict[str, int] = {}
    for control in config.controls:
        actual[control.family] = actual.get(control.family, 0) + 1
    reports = []
    for family in config.families:
        if family.declared_count is None:
            continue
        have = actual.get(family.code, 0)
        if have != family.declared_count:
            reports.append(
                FamilyCountDiscrepancy(family.code, family.declared_count, have)
            )
    return reports


# --- loading ----------------------------------------------------------------

_TOP_LEVEL_KEYS = {"pillars", "families", "controls", "phases", "priority_min_ranges"}


def load_catalog(path: Union[str, Path]) -> FrameworkConfig:
    """Load and fully validate a catalog document.

    Raises :class:`ParseError` for malformed JSON or schema violations and
    :class:`ValidationError` for semantic problems (duplicate ids, weight sum,
    missing phases, dangling references), naming the offending entity.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read catalog {path}: {exc}", path=str(path)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"malformed catalog {path}: {exc.msg} at line {exc.lineno} column {exc.colno}",
            path=str(path), line=exc.lineno, column=exc.colno,
        ) from exc
    return parse_catalog(doc, source=str(path))


def parse_catalog(doc: object, source: str = "<memory>") -> FrameworkConfig:
    if not isinstance(doc, dict):
        raise ParseError(f"catalog root must be an object ({source})")
    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise ParseError(f"unknown top-level fields: {sorted(unknown)}", fields=sorted(unknown))
    missing = _TOP_LEVEL_KEYS - set(doc)
    if missing:
        raise ParseError(f"missing top-level fields: {sorted(missing)}", fields=sorted(missing))

    pillar_weights = _parse_pillars(doc["pillars"])
    families = _parse_families(doc["families"])
    controls = _parse_controls(doc["controls"])
    phases = _parse_phases(doc["phases"])
    ranges = _parse_ranges(doc["priority_min_ranges"])

    config = FrameworkConfig(
        pillar_weights=pillar_weights,
        families=families,
        controls=controls,
        phase_requirements=phases,
        priority_min_score_ranges=ranges,
        controls_by_id={c.control_id: c for c in controls},
    )
    _validate(config)
    return config


def _reject_unknown(entry: dict, allowed: set[str], where: str) -> None:
    unknown = set(entry) - allowed
    if unknown:
        raise ParseError(f"unknown fields {sorted(unknown)} in {where}", where=where)


def _parse_pillars(raw: object) -> dict[Pillar, float]:
    if not isinstance(raw, list):
        raise ParseError("'pillars' must be a list")
    weights: dict[Pillar, float] = {}
    for entry in raw:
        _reject_unknown(entry, {"id", "weight"}, f"pillar {entry.get('id')!r}")
        try:
            pillar = Pillar(entry["id"])
        except (ValueError, KeyError):
            raise ParseError(f"unknown pillar id {entry.get('id')!r}", pillar=entry.get("id")) from None
        if pillar in weights:
            raise ValidationError(f"pillar {pillar.value!r} listed twice", pillar=pillar.value)
        weights[pillar] = float(entry["weight"])
    return weights


def _parse_families(raw: object) -> tuple[ControlFamily, ...]:
    if not isinstance(raw, list):
        raise ParseError("'families' must be a list")
    families = []
    seen: set[str] = set()
    for entry in raw:
        _reject_unknown(entry, {"code", "name", "declared_count"}, f"family {entry.get('code')!r}")
        code = entry["code"]
        if code in seen:
            raise ValidationError(f"family {code!r} listed twice", family=code)
        seen.add(code)
        declared = entry.get("declared_count")
        families.append(ControlFamily(code, entry["name"], int(declared) if declared is not None else None))
    return tuple(families)


def _parse_controls(raw: object) -> tuple[ControlDefinition, ...]:
    if not isinstance(raw, list):
        raise ParseError("'controls' must be a list")
    allowed = {"id", "family", "title", "priority", "pillars", "required_from_gate", "check_binding"}
    controls = []
    seen: set[str] = set()
    for entry in raw:
        cid = entry.get("id", "<missing id>")
        _reject_unknown(entry, allowed, f"control {cid!r}")
        if cid in seen:
            raise ValidationError(f"control {cid!r} listed twice", control_id=cid)
        seen.add(cid)
        match = _CONTROL_ID_RE.match(cid)
        if not match:
            raise ValidationError(f"control id {cid!r} is not of the form FAMILY-NN", control_id=cid)
        family = entry["family"]
        if match.group(1) != family:
            raise ValidationError(
                f"control {cid!r} prefix does not match family {family!r}",
                control_id=cid, family=family,
            )
        try:
            priority = ControlPriority(entry["priority"])
        except ValueError:
            raise ParseError(f"control {cid!r} has unknown priority {entry['priority']!r}", control_id=cid) from None
        pillars_raw = entry.get("pillars") or []
        if not pillars_raw:
            raise ValidationError(f"control {cid!r} maps to no pillar", control_id=cid)
        try:
            pillars = tuple(Pillar(p) for p in pillars_raw)
        except ValueError:
            raise ParseError(f"control {cid!r} names an unknown pillar", control_id=cid) from None
        gate = entry.get("required_from_gate")
        if gate is not None:
            gate = int(gate)
            if gate not in GATES:
                raise ValidationError(f"control {cid!r} required_from_gate {gate} outside 0-5", control_id=cid)
        binding = entry.get("check_binding")
        if binding is not None:
            try:
                binding = CheckKind(binding)
            except ValueError:
                raise ParseError(f"control {cid!r} has unknown check binding {binding!r}", control_id=cid) from None
        controls.append(
            ControlDefinition(cid, family, entry["title"], priority, pillars, gate, binding)
        )
    return tuple(controls)


def _parse_phases(raw: object) -> tuple[PhaseRequirements, ...]:
    if not isinstance(raw, list):
        raise ParseError("'phases' must be a list")
    phases = []
    for entry in raw:
        _reject_unknown(entry, {"phase", "per_pillar_min", "min_cumulative_controls"},
                        f"phase {entry.get('phase')!r}")
        number = int(entry["phase"])
        mins_raw = entry.get("per_pillar_min")
        mins = None
        if mins_raw is not None:
            try:
                mins = {Pillar(k): float(v) for k, v in mins_raw.items()}
            except ValueError:
                raise ParseError(f"phase {number} names an unknown pillar", phase=number) from None
        controls_min = entry.get("min_cumulative_controls")
        phases.append(
            PhaseRequirements(number, mins, int(controls_min) if controls_min is not None else None)
        )
    return tuple(phases)


def _parse_ranges(raw: object) -> dict[PillarPriority, tuple[float, float]]:
    if not isinstance(raw, dict):
        raise ParseError("'priority_min_ranges' must be an object")
    ranges: dict[PillarPriority, tuple[float, float]] = {}
    for key, bounds in raw.items():
        try:
            priority = PillarPriority(key)
        except ValueError:
            raise ParseError(f"unknown priority level {key!r}", priority=key) from None
        lo, hi = float(bounds[0]), float(bounds[1])
        if not 0 <= lo <= hi <= 100:
            raise ValidationError(f"priority {key!r} range [{lo}, {hi}] invalid", priority=key)
        ranges[priority] = (lo, hi)
    for priority in PillarPriority:
        if priority not in ranges:
            raise ValidationError(f"priority {priority.value!r} has no min-score range", priority=priority.value)
    return ranges


def _validate(config: FrameworkConfig) -> None:
    if set(config.pillar_weights) != set(Pillar):
        missing = sorted(p.value for p in set(Pillar) - set(config.pillar_weights))
        raise ValidationError(f"catalog must define exactly 8 pillars; missing {missing}", missing=missing)
    total = sum(config.pillar_weights.values())
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"pillar weights sum to {total}, expected 1.0", sum=total)

    family_codes = {f.code for f in config.families}
    for control in config.controls:
        if control.family not in family_codes:
            raise ValidationError(
                f"control {control.control_id!r} references unknown family {control.family!r}",
                control_id=control.control_id, family=control.family,
            )

    seen_phases = [req.phase for req in config.phase_requirements]
    if sorted(seen_phases) != list(PHASES):
        raise ValidationError(
            f"phases must cover 0-6 exactly once, got {sorted(seen_phases)}", phases=sorted(seen_phases)
        )
    for req in config.phase_requirements:
        if req.phase in GATES:
            if req.per_pillar_min is None or set(req.per_pillar_min) != set(Pillar):
                raise ValidationError(
                    f"phase {req.phase} must define minimums for all 8 pillars", phase=req.phase
                )
            if req.min_cumulative_controls is None:
                raise ValidationError(
                    f"phase {req.phase} must define min_cumulative_controls", phase=req.phase
                )
    by_phase = {req.phase: req for req in config.phase_requirements}
    previous = 0
    for gate in GATES:
        count = by_phase[gate].min_cumulative_controls or 0
        if count < previous:
            raise ValidationError(
                f"min_cumulative_controls decreases at gate {gate} ({previous} -> {count})",
                gate=gate,
            )
        previous = count


def default_catalog_path() -> Path:
    """Filesystem path of the catalog shipped with the package."""
    return Path(str(resources.files("trust_gate").joinpath("data/default_catalog.json")))


def load_default_catalog() -> FrameworkConfig:
    return load_catalog(default_catalog_path())
