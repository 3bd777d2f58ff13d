"""Score computation: component scores, pillar scores, Trust Indices, bands.

Everything here is a pure function of its inputs; no I/O, no shared state.
All arithmetic is 64-bit floating point and band/threshold comparisons are
exact >=/< on the computed value.

Vacuous cases (no implemented controls, zero total requirements, empty
applicable set) score 100: absence of obligation is not a deficiency.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional

from .catalog import ControlDefinition, Pillar
from .errors import (
    MetExceedsTotal,
    MissingPillar,
    NonPositiveAppetite,
    ParseError,
    ScoreOutOfRange,
    UnknownControl,
    ValidationError,
    ValueOutOfRange,
    WeightSumInvalid,
)

#: Pillar-score blend: implementation 40%, effectiveness 30%, risk exposure
#: 20%, compliance 10%.
COMPONENT_WEIGHTS = (0.40, 0.30, 0.20, 0.10)


class Implementation(str, Enum):
    NOT_APPLICABLE = "not_applicable"
    NOT_STARTED = "not_started"
    PARTIAL = "partial"
    IMPLEMENTED = "implemented"


class Effectiveness(str, Enum):
    NOT_VALIDATED = "not_validated"
    VALIDATED_EFFECTIVE = "effective"
    VALIDATED_INEFFECTIVE = "ineffective"


@dataclass(frozen=True)
class ControlStatus:
    """Per-system implementation/effectiveness state of one control."""

    control_id: str
    implementation: Implementation
    partial_fraction: Optional[float] = None
    effectiveness: Effectiveness = Effectiveness.NOT_VALIDATED
    evidence_refs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.implementation is Implementation.PARTIAL:
            if self.partial_fraction is None or not 0.0 < self.partial_fraction < 1.0:
                raise ValidationError(
                    f"{self.control_id}: partial fraction must be strictly between 0 and 1",
                    control_id=self.control_id,
                )
        elif self.partial_fraction is not None:
            raise ValidationError(
                f"{self.control_id}: partial_fraction only valid with partial implementation",
                control_id=self.control_id,
            )
        if (
            self.effectiveness is Effectiveness.VALIDATED_EFFECTIVE
            and self.implementation is not Implementation.IMPLEMENTED
        ):
            raise ValidationError(
                f"{self.control_id}: cannot be validated effective unless implemented",
                control_id=self.control_id,
            )

    @property
    def fraction(self) -> float:
        if self.implementation is Implementation.IMPLEMENTED:
            return 1.0
        if self.implementation is Implementation.PARTIAL:
            return float(self.partial_fraction)  # type: ignore[arg-type]
        return 0.0

    def to_dict(self) -> dict:
        return {
            "control_id": self.control_id,
            "implementation": self.implementation.value,
            "partial_fraction": self.partial_fraction,
            "effectiveness": self.effectiveness.value,
            "evidence_refs": list(self.evidence_refs),
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ControlStatus":
        return cls(
            control_id=raw["control_id"],
            implementation=Implementation(raw["implementation"]),
            partial_fraction=raw.get("partial_fraction"),
            effectiveness=Effectiveness(raw.get("effectiveness", "not_validated")),
            evidence_refs=tuple(raw.get("evidence_refs") or ()),
        )


class RiskLevel(str, Enum):
    """Trust band; lower bounds 90 / 75 / 60 inclusive, below 60 is high."""

    LOW = "low"
    MODERATE = "moderate"
    ELEVATED = "elevated"
    HIGH = "high"

    @property
    def color(self) -> str:
        return _BAND_COLORS[self]


_BAND_COLORS = {
    RiskLevel.LOW: "green",
    RiskLevel.MODERATE: "yellow",
    RiskLevel.ELEVATED: "orange",
    RiskLevel.HIGH: "red",
}


def classify(score: float) -> RiskLevel:
    """Map a 0-100 score to its risk band."""
    if not 0.0 <= score <= 100.0:
        raise ScoreOutOfRange(f"score {score} outside 0-100", score=score)
    if score >= 90.0:
        return RiskLevel.LOW
    if score >= 75.0:
        return RiskLevel.MODERATE
    if score >= 60.0:
        return RiskLevel.ELEVATED
    return RiskLevel.HIGH


@dataclass(frozen=True)
class PillarInputs:
    """Everything needed to score one pillar for one system."""

    pillar: Pillar
    statuses: tuple[ControlStatus, ...]
    current_risk_level: float = 0.0
    risk_appetite: float = 1.0
    met_requirements: int = 0
    total_requirements: int = 0

    def __post_init__(self) -> None:
        if self.met_requirements > self.total_requirements:
            raise MetExceedsTotal(
                f"{self.pillar.value}: met {self.met_requirements} exceeds total {self.total_requirements}",
                pillar=self.pillar.value,
            )


@dataclass(frozen=True)
class PillarAssessment:
    """The four component scores and the composite for one pillar."""

    pillar: Pillar
    ci: float
    ce: float
    re_score: float
    cs: float
    composite: float

    def __post_init__(self) -> None:
        expected = (
            COMPONENT_WEIGHTS[0] * self.ci
            + COMPONENT_WEIGHTS[1] * self.ce
            + COMPONENT_WEIGHTS[2] * self.re_score
            + COMPONENT_WEIGHTS[3] * self.cs
        )
        if abs(self.composite - expected) > 1e-9:
            raise ValidationError(
                f"{self.pillar.value}: composite {self.composite} deviates from component blend {expected}",
                pillar=self.pillar.value,
            )

    def to_dict(self) -> dict:
        return {
            "pillar": self.pillar.value,
            "ci": self.ci,
            "ce": self.ce,
            "re_score": self.re_score,
            "cs": self.cs,
            "composite": self.composite,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "PillarAssessment":
        return cls(
            pillar=Pillar(raw["pillar"]),
            ci=raw["ci"],
            ce=raw["ce"],
            re_score=raw["re_score"],
            cs=raw["cs"],
            composite=raw["composite"],
        )

    @classmethod
    def from_score(cls, pillar: Pillar, score: float) -> "PillarAssessment":
        """Build from an externally measured composite (components unknown)."""
        return cls(pillar, score, score, score, score, score)


@dataclass(frozen=True)
class TrustIndexResult:
    static_ti: float
    weighted_ti: float
    per_pillar: Mapping[Pillar, PillarAssessment]
    band: RiskLevel
    injected: bool = False

    def to_dict(self) -> dict:
        return {
            "static_ti": self.static_ti,
            "weighted_ti": self.weighted_ti,
            "per_pillar": {p.value: a.to_dict() for p, a in sorted(self.per_pillar.items())},
            "band": self.band.value,
            "injected": self.injected,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "TrustIndexResult":
        return cls(
            static_ti=raw["static_ti"],
            weighted_ti=raw["weighted_ti"],
            per_pillar={
                Pillar(k): PillarAssessment.from_dict(v) for k, v in raw["per_pillar"].items()
            },
            band=RiskLevel(raw["band"]),
            injected=raw.get("injected", False),
        )


# --- component scores --------------------------------------------------------

def control_implementation_score(
    statuses: Iterable[ControlStatus], applicable: Iterable[ControlDefinition]
) -> float:
    """Priority-weighted implementation ratio over the applicable set, 0-100.

    Controls marked not-applicable leave both numerator and denominator;
    applicable controls without a status count as not started.
    """
    weights = {c.control_id: c.priority.weight for c in applicable}
    fractions = {cid: 0.0 for cid in weights}
    for status in statuses:
        if status.control_id not in weights:
            raise UnknownControl(
                f"status for {status.control_id!r} not in applicable set",
                control_id=status.control_id,
            )
        if status.implementation is Implementation.NOT_APPLICABLE:
            del weights[status.control_id]
            del fractions[status.control_id]
        else:
            fractions[status.control_id] = status.fraction
    denominator = sum(weights.values())
    if denominator == 0:
        return 100.0
    numerator = sum(weights[cid] * fractions[cid] for cid in weights)
    return 100.0 * numerator / denominator


def control_effectiveness_score(statuses: Iterable[ControlStatus]) -> float:
    """Validated-effective share of implemented controls, 0-100."""
    implemented = 0
    effective = 0
    for status in statuses:
        if status.implementation is Implementation.IMPLEMENTED:
            implemented += 1
            if status.effectiveness is Effectiveness.VALIDATED_EFFECTIVE:
                effective += 1
    if implemented == 0:
        return 100.0
    return 100.0 * effective / implemented


def risk_exposure_score(current_risk_level: float, risk_appetite: float) -> float:
    """100 minus the risk-vs-appetite ratio, clamped to [0, 100]."""
    if risk_appetite <= 0:
        raise NonPositiveAppetite(f"risk appetite must be positive, got {risk_appetite}")
    if current_risk_level < 0:
        raise ValueOutOfRange(f"current risk level must be non-negative, got {current_risk_level}")
    raw = 100.0 - 100.0 * current_risk_level / risk_appetite
    return min(100.0, max(0.0, raw))


def compliance_score(met: int, total: int) -> float:
    """Met-requirements ratio, 0-100; vacuously 100 when nothing is required."""
    if met < 0 or total < 0:
        raise ValueOutOfRange(f"requirement counts must be non-negative ({met}/{total})")
    if met > total:
        raise MetExceedsTotal(f"met {met} exceeds total {total}", met=met, total=total)
    if total == 0:
        return 100.0
    return 100.0 * met / total


def pillar_score(inputs: PillarInputs, applicable: Iterable[ControlDefinition]) -> PillarAssessment:
    """Blend the four component scores into a pillar assessment."""
    ci = control_implementation_score(inputs.statuses, applicable)
    ce = control_effectiveness_score(inputs.statuses)
    re_score = risk_exposure_score(inputs.current_risk_level, inputs.risk_appetite)
    cs = compliance_score(inputs.met_requirements, inputs.total_requirements)
    composite = (
        COMPONENT_WEIGHTS[0] * ci
        + COMPONENT_WEIGHTS[1] * ce
        + COMPONENT_WEIGHTS[2] * re_score
        + COMPONENT_WEIGHTS[3] * cs
    )
    return PillarAssessment(inputs.pillar, ci, ce, re_score, cs, composite)


# --- trust indices -----------------------------------------------------------

def static_trust_index(
    weights: Mapping[Pillar, float],
    cm: Mapping[Pillar, float],
    re: Mapping[Pillar, float],
) -> float:
    """Maturity discounted by exposure, aggregated with fractional weights."""
    total = sum(weights.values())
    if abs(total - 1.0) > 1e-9:
        raise WeightSumInvalid(f"weights sum to {total}, expected 1.0", sum=total)
    for name, mapping in (("cm", cm), ("re", re)):
        for pillar in weights:
            if pillar not in mapping:
                raise MissingPillar(f"{name} missing pillar {pillar.value!r}", pillar=pillar.value)
            value = mapping[pillar]
            if not 0.0 <= value <= 1.0:
                raise ValueOutOfRange(
                    f"{name}[{pillar.value}] = {value} outside [0, 1]", pillar=pillar.value
                )
    return 100.0 * sum(w * cm[p] * (1.0 - re[p]) for p, w in weights.items())


def weighted_trust_index(
    priorities: Mapping[Pillar, float], scores: Mapping[Pillar, float]
) -> float:
    """Priority-weighted mean of pillar scores; invariant under weight scaling."""
    for pillar in Pillar:
        if pillar not in priorities:
            raise MissingPillar(f"priorities missing {pillar.value!r}", pillar=pillar.value)
        if pillar not in scores:
            raise MissingPillar(f"scores missing {pillar.value!r}", pillar=pillar.value)
    denominator = sum(priorities.values())
    if denominator <= 0:
        raise WeightSumInvalid("priority weights must sum to a positive value")
    return sum(priorities[p] * scores[p] for p in Pillar) / denominator


# --- status import -----------------------------------------------------------

_IMPORT_COLUMNS = ["control_id", "implementation", "effectiveness", "evidence_refs"]

_EFFECTIVENESS_ALIASES = {
    "not_validated": Effectiveness.NOT_VALIDATED,
    "effective": Effectiveness.VALIDATED_EFFECTIVE,
    "ineffective": Effectiveness.VALIDATED_INEFFECTIVE,
}


def parse_status_csv(text: str) -> list[ControlStatus]:
    """Parse the control-status import format (CSV with header row)."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != _IMPORT_COLUMNS:
        raise ParseError(
            f"status CSV header must be {','.join(_IMPORT_COLUMNS)}",
            header=reader.fieldnames,
        )
    statuses = []
    for line_no, row in enumerate(reader, start=2):
        impl_raw = (row["implementation"] or "").strip()
        fraction = None
        if impl_raw.startswith("partial:"):
            implementation = Implementation.PARTIAL
            try:
                fraction = float(impl_raw.split(":", 1)[1])
            except ValueError:
                raise ParseError(f"line {line_no}: bad partial fraction {impl_raw!r}", line=line_no) from None
        else:
            try:
                implementation = Implementation(impl_raw)
            except ValueError:
                raise ParseError(f"line {line_no}: unknown implementation {impl_raw!r}", line=line_no) from None
        eff_raw = (row["effectiveness"] or "not_validated").strip()
        if eff_raw not in _EFFECTIVENESS_ALIASES:
            raise ParseError(f"line {line_no}: unknown effectiveness {eff_raw!r}", line=line_no)
        refs = tuple(r for r in (row["evidence_refs"] or "").split(";") if r)
        try:
            statuses.append(
                ControlStatus(
                    control_id=(row["control_id"] or "").strip(),
                    implementation=implementation,
                    partial_fraction=fraction,
                    effectiveness=_EFFECTIVENESS_ALIASES[eff_raw],
                    evidence_refs=refs,
                )
            )
        except ValidationError as exc:
            raise ParseError(f"line {line_no}: {exc.message}", line=line_no) from exc
    return statuses
