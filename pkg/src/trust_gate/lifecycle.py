"""Gate state machine: readiness evaluation, approvals, exceptions, triggers.

Gate mechanics
--------------
A system in phase ``g`` faces gate ``g`` next (gates 0-5 close phases 0-5;
gate 6 closes retirement). Passing gate ``g`` moves the system to phase
``g + 1``; gate 6 instead marks the system retired. A re-validation trigger
on an operational (phase 5) system sets its pending gate back to 3, so the
system must re-pass gates 3 and 4 to return to monitored operation.

Recommendation rules
--------------------
The deficit trichotomy: all deficits zero -> pass; one or two pillars short
by at most 5 points -> conditional pass; anything worse -> fail. On top of
that, a gate fails on a control-count shortfall, a trust index below the
system threshold, or a red trust band; an orange band caps the outcome at
conditional pass and adds the executive sponsor to the required approvals.
Reviewers may tighten the engine's recommendation but never loosen it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import date, datetime
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from .catalog import (
    GATES,
    FrameworkConfig,
    Pillar,
    PillarPriority,
    applicable_controls,
)
from .errors import (
    ApproverInsufficient,
    AuthorityInsufficient,
    ExpiryTooLate,
    GateOutOfRange,
    IncompleteAssessment,
    MissingPlan,
    MissingRemediationPlan,
    ReReviewOutOfWindow,
    UnacceptableTier,
    UpgradeForbidden,
    ValidationError,
    WrongPhase,
)
from .scoring import (
    ControlStatus,
    Implementation,
    PillarAssessment,
    RiskLevel,
    TrustIndexResult,
    classify,
    weighted_trust_index,
)
from .util import iso_date, parse_date, parse_rfc3339, rfc3339

ALL_GATES = (0, 1, 2, 3, 4, 5, 6)

#: Maximum lifetime of a temporary exception, in days.
TEMPORARY_EXCEPTION_MAX_DAYS = 90

#: Conditional-pass re-review window, in days after the decision.
RE_REVIEW_MIN_DAYS = 14
RE_REVIEW_MAX_DAYS = 28


class RiskTier(str, Enum):
    UNACCEPTABLE = "unacceptable"
    HIGH_RISK = "high_risk"
    LIMITED_RISK = "limited_risk"
    MINIMAL_RISK = "minimal_risk"


class GateOutcome(str, Enum):
    PASS = "pass"
    CONDITIONAL_PASS = "conditional_pass"
    FAIL = "fail"


_PERMISSIVENESS = {GateOutcome.FAIL: 0, GateOutcome.CONDITIONAL_PASS: 1, GateOutcome.PASS: 2}


class ApprovalRole(str, Enum):
    RISK_COMMITTEE = "risk_committee"
    C_SUITE = "c_suite"
    BUSINESS_UNIT_LEAD = "business_unit_lead"
    AI_COE = "ai_coe"
    PRIVACY_OFFICER = "privacy_officer"
    SECURITY_ENGINEERING = "security_engineering"
    LEGAL = "legal"
    MODEL_RISK_MANAGER = "model_risk_manager"
    ETHICS_BOARD = "ethics_board"
    DATA_SCIENCE_LEAD = "data_science_lead"
    INDEPENDENT_VALIDATOR = "independent_validator"
    PRODUCTION_APPROVAL_BOARD = "production_approval_board"
    EXECUTIVE_SPONSOR = "executive_sponsor"
    IT_OPERATIONS = "it_operations"
    BUSINESS_OWNER = "business_owner"
    SYSTEM_OWNER = "system_owner"


class RevalidationTrigger(str, Enum):
    RETRAIN_SIGNIFICANT_DATA = "retrain_significant_data"
    ARCHITECTURE_CHANGE = "architecture_change"
    NEW_USER_POPULATION = "new_user_population"
    REGULATORY_CHANGE = "regulatory_change"
    MATERIAL_PERFORMANCE_DEGRADATION = "material_performance_degradation"
    SECURITY_INCIDENT_REQUIRING_CHANGE = "security_incident_requiring_change"


class ExceptionKind(str, Enum):
    RISK_ACCEPTANCE = "risk_acceptance"
    TEMPORARY = "temporary"
    PERMANENT = "permanent"


class ResidualRisk(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


# --- systems -----------------------------------------------------------------

def default_trust_index_threshold(tier: RiskTier) -> Optional[float]:
    """Gate trust-index floor by tier; limited/minimal values are engine
    defaults (configurable per system), only the high-risk floor is fixed."""
    if tier is RiskTier.HIGH_RISK:
        return 70.0
    if tier is RiskTier.LIMITED_RISK:
        return 60.0
    return None


@dataclass(frozen=True)
class AiSystem:
    """A governed AI system and its risk posture."""

    system_id: str
    name: str
    risk_tier: RiskTier
    current_phase: int = 0
    pillar_priorities: Mapping[Pillar, PillarPriority] = field(default_factory=dict)
    pillar_min_overrides: Mapping[Pillar, float] = field(default_factory=dict)
    trust_index_threshold: Optional[float] = None
    owner: str = ""
    business_unit: Optional[str] = None
    origin: str = "internal"
    pending_gate: Optional[int] = None
    retired: bool = False

    def __post_init__(self) -> None:
        priorities = dict(self.pillar_priorities)
        for pillar in Pillar:
            priorities.setdefault(pillar, PillarPriority.STANDARD)
        object.__setattr__(self, "pillar_priorities", priorities)
        if self.current_phase not in ALL_GATES:
            raise ValidationError(
                f"{self.system_id}: phase {self.current_phase} outside 0-6",
                system_id=self.system_id,
            )

    @property
    def next_gate(self) -> int:
        return self.pending_gate if self.pending_gate is not None else self.current_phase

    def priority_weights(self) -> dict[Pillar, float]:
        return {p: prio.weight for p, prio in self.pillar_priorities.items()}

    def to_dict(self) -> dict:
        return {
            "system_id": self.system_id,
            "name": self.name,
            "risk_tier": self.risk_tier.value,
            "current_phase": self.current_phase,
            "pillar_priorities": {p.value: v.value for p, v in sorted(self.pillar_priorities.items())},
            "pillar_min_overrides": {p.value: v for p, v in sorted(self.pillar_min_overrides.items())},
            "trust_index_threshold": self.trust_index_threshold,
            "owner": self.owner,
            "business_unit": self.business_unit,
            "origin": self.origin,
            "pending_gate": self.pending_gate,
            "retired": self.retired,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "AiSystem":
        return cls(
            system_id=raw["system_id"],
            name=raw["name"],
            risk_tier=RiskTier(raw["risk_tier"]),
            current_phase=raw.get("current_phase", 0),
            pillar_priorities={
                Pillar(k): PillarPriority(v) for k, v in (raw.get("pillar_priorities") or {}).items()
            },
            pillar_min_overrides={
                Pillar(k): float(v) for k, v in (raw.get("pillar_min_overrides") or {}).items()
            },
            trust_index_threshold=raw.get("trust_index_threshold"),
            owner=raw.get("owner", ""),
            business_unit=raw.get("business_unit"),
            origin=raw.get("origin", "internal"),
            pending_gate=raw.get("pending_gate"),
            retired=raw.get("retired", False),
        )


def validate_system(system: AiSystem, config: FrameworkConfig) -> None:
    """Check override bounds against the priority ranges in the catalog."""
    for pillar, override in system.pillar_min_overrides.items():
        priority = system.pillar_priorities[pillar]
        lo, hi = config.priority_min_score_ranges[priority]
        if not lo <= override <= hi:
            raise ValidationError(
                f"{system.system_id}: {pillar.value} override {override} outside "
                f"{priority.value} range [{lo}, {hi}]",
                system_id=system.system_id, pillar=pillar.value,
            )


# --- approval authority --------------------------------------------------------

_R = ApprovalRole
_RC_OR_CSUITE = frozenset({_R.RISK_COMMITTEE, _R.C_SUITE})


def _slots(*groups: Iterable[_R]) -> tuple[frozenset[_R], ...]:
    return tuple(frozenset(g) for g in groups)


_AUTHORITY_HIGH = {
    0: _slots(_RC_OR_CSUITE),
    1: _slots({_R.PRIVACY_OFFICER}, {_R.SECURITY_ENGINEERING}, {_R.LEGAL}),
    2: _slots({_R.MODEL_RISK_MANAGER}, {_R.ETHICS_BOARD}),
    3: _slots(
        {_R.RISK_COMMITTEE},
        {_R.PRIVACY_OFFICER},
        {_R.SECURITY_ENGINEERING},
        {_R.LEGAL},
        {_R.ETHICS_BOARD},
        {_R.INDEPENDENT_VALIDATOR},
    ),
    4: _slots({_R.PRODUCTION_APPROVAL_BOARD}, {_R.EXECUTIVE_SPONSOR}),
    5: _slots({_R.RISK_COMMITTEE}),
    6: _slots({_R.SYSTEM_OWNER}, {_R.PRIVACY_OFFICER}, {_R.LEGAL}),
}

_AUTHORITY_LIMITED = {
    0: _slots({_R.BUSINESS_UNIT_LEAD}, {_R.AI_COE}),
    1: _slots({_R.PRIVACY_OFFICER}, {_R.SECURITY_ENGINEERING}),
    2: _slots({_R.MODEL_RISK_MANAGER}),
    3: _slots(
        {_R.BUSINESS_UNIT_LEAD},
        {_R.AI_COE},
        {_R.MODEL_RISK_MANAGER},
        {_R.PRIVACY_OFFICER},
        {_R.SECURITY_ENGINEERING},
    ),
    4: _slots({_R.PRODUCTION_APPROVAL_BOARD}),
    5: _slots({_R.BUSINESS_UNIT_LEAD}),
    6: _slots({_R.SYSTEM_OWNER}, {_R.AI_COE}),
}

_AUTHORITY_MINIMAL = {
    0: _slots({_R.AI_COE}),
    1: _slots({_R.AI_COE}),
    2: _slots({_R.AI_COE}, {_R.DATA_SCIENCE_LEAD}),
    3: _slots({_R.AI_COE}, {_R.BUSINESS_OWNER}),
    4: _slots({_R.AI_COE}, {_R.IT_OPERATIONS}),
    5: _slots({_R.AI_COE}),
    6: _slots({_R.SYSTEM_OWNER}),
}

AUTHORITY_MATRIX: dict[RiskTier, dict[int, tuple[frozenset[ApprovalRole], ...]]] = {
    RiskTier.HIGH_RISK: _AUTHORITY_HIGH,
    RiskTier.LIMITED_RISK: _AUTHORITY_LIMITED,
    RiskTier.MINIMAL_RISK: _AUTHORITY_MINIMAL,
    # Unacceptable systems cannot be gated at all; the row exists only to keep
    # the matrix total.
    RiskTier.UNACCEPTABLE: _AUTHORITY_HIGH,
}


def required_roles(gate: int, tier: RiskTier) -> tuple[frozenset[ApprovalRole], ...]:
    """Required-approval slots for a gate; each slot accepts any of its roles."""
    if gate not in ALL_GATES:
        raise GateOutOfRange(f"gate must be 0-6, got {gate}", gate=gate)
    return AUTHORITY_MATRIX[tier][gate]


def _slot_name(slot: frozenset[ApprovalRole]) -> str:
    return "|".join(sorted(role.value for role in slot))


# --- gate evaluation -----------------------------------------------------------

def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def effective_minimums(
    system: AiSystem, config: FrameworkConfig, gate: int
) -> dict[Pillar, float]:
    """Per-pillar floor at a gate: the phase table combined element-wise with
    the system's override (or its priority-range midpoint when unset)."""
    if gate not in GATES:
        raise GateOutOfRange(f"gate must be 0-5, got {gate}", gate=gate)
    table = config.phase(gate).per_pillar_min or {}
    minimums = {}
    for pillar in Pillar:
        override = system.pillar_min_overrides.get(pillar)
        if override is None:
            lo, hi = config.priority_min_score_ranges[system.pillar_priorities[pillar]]
            floor_value = float(_round_half_up((lo + hi) / 2.0))
        else:
            floor_value = float(override)
        minimums[pillar] = max(float(table.get(pillar, 0.0)), floor_value)
    return minimums


@dataclass(frozen=True)
class PillarGateCheck:
    pillar: Pillar
    required: float
    actual: float
    deficit: float
    excepted: bool = False

    def to_dict(self) -> dict:
        return {
            "pillar": self.pillar.value,
            "required": self.required,
            "actual": self.actual,
            "deficit": self.deficit,
            "excepted": self.excepted,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "PillarGateCheck":
        return cls(Pillar(raw["pillar"]), raw["required"], raw["actual"],
                   raw["deficit"], raw.get("excepted", False))


@dataclass(frozen=True)
class GateEvaluation:
    """Computed gate readiness; the scorecard snapshot behind a decision."""

    system_id: str
    gate: int
    per_pillar: tuple[PillarGateCheck, ...]
    trust_index: TrustIndexResult
    trust_index_threshold: Optional[float]
    controls_satisfied: int
    controls_required: int
    recommended: GateOutcome
    band_constraint: RiskLevel
    requires_executive_approval: bool = False
    excepted_controls: tuple[str, ...] = ()
    fail_reasons: tuple[str, ...] = ()
    as_of_sequence: Optional[int] = None

    def deficits(self) -> dict[Pillar, float]:
        return {c.pillar: c.deficit for c in self.per_pillar}

    def to_dict(self) -> dict:
        return {
            "system_id": self.system_id,
            "gate": self.gate,
            "per_pillar": [c.to_dict() for c in self.per_pillar],
            "trust_index": self.trust_index.to_dict(),
            "trust_index_threshold": self.trust_index_threshold,
            "controls_satisfied": self.controls_satisfied,
            "controls_required": self.controls_required,
            "recommended": self.recommended.value,
            "band_constraint": self.band_constraint.value,
            "requires_executive_approval": self.requires_executive_approval,
            "excepted_controls": list(self.excepted_controls),
            "fail_reasons": list(self.fail_reasons),
            "as_of_sequence": self.as_of_sequence,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "GateEvaluation":
        return cls(
            system_id=raw["system_id"],
            gate=raw["gate"],
            per_pillar=tuple(PillarGateCheck.from_dict(c) for c in raw["per_pillar"]),
            trust_index=TrustIndexResult.from_dict(raw["trust_index"]),
            trust_index_threshold=raw.get("trust_index_threshold"),
            controls_satisfied=raw["controls_satisfied"],
            controls_required=raw["controls_required"],
            recommended=GateOutcome(raw["recommended"]),
            band_constraint=RiskLevel(raw["band_constraint"]),
            requires_executive_approval=raw.get("requires_executive_approval", False),
            excepted_controls=tuple(raw.get("excepted_controls") or ()),
            fail_reasons=tuple(raw.get("fail_reasons") or ()),
            as_of_sequence=raw.get("as_of_sequence"),
        )


def recommend_from_deficits(deficits: Iterable[float]) -> GateOutcome:
    """The deficit trichotomy, exhaustive and mutually exclusive."""
    nonzero = [d for d in deficits if d > 0]
    if any(d > 5 for d in nonzero) or len(nonzero) >= 3:
        return GateOutcome.FAIL
    if nonzero:
        return GateOutcome.CONDITIONAL_PASS
    return GateOutcome.PASS


def compute_trust_index(
    system: AiSystem,
    config: FrameworkConfig,
    assessments: Mapping[Pillar, PillarAssessment],
    injected_weighted_ti: Optional[float] = None,
) -> TrustIndexResult:
    """Aggregate pillar assessments into both Trust Index forms.

    The static form discounts each pillar's implementation maturity by its
    risk exposure under the catalog's fractional weights; the weighted form is
    the priority-weighted mean of composites. ``injected_weighted_ti``
    substitutes an externally measured index (recorded as injected).
    """
    scores = {p: a.composite for p, a in assessments.items()}
    static_ti = sum(
        config.pillar_weights[p] * assessments[p].ci * assessments[p].re_score / 100.0
        for p in assessments
    )
    if injected_weighted_ti is not None:
        weighted = float(injected_weighted_ti)
        injected = True
    else:
        weighted = weighted_trust_index(system.priority_weights(), scores)
        injected = False
    return TrustIndexResult(
        static_ti=static_ti,
        weighted_ti=weighted,
        per_pillar=dict(assessments),
        band=classify(weighted),
        injected=injected,
    )


def evaluate_gate(
    system: AiSystem,
    config: FrameworkConfig,
    assessments: Mapping[Pillar, PillarAssessment],
    statuses: Iterable[ControlStatus],
    *,
    gate: Optional[int] = None,
    exceptions: Sequence["ExceptionRecord"] = (),
    trust_index: Optional[TrustIndexResult] = None,
    on_date: Optional[date] = None,
    as_of_sequence: Optional[int] = None,
) -> GateEvaluation:
    """Compute gate readiness for a system against its effective minimums."""
    if system.risk_tier is RiskTier.UNACCEPTABLE:
        raise UnacceptableTier(
            "prohibited use — cannot be gated", system_id=system.system_id
        )
    if gate is None:
        gate = system.next_gate
    if gate not in ALL_GATES:
        raise GateOutOfRange(f"gate must be 0-6, got {gate}", gate=gate)
    missing = [p.value for p in Pillar if p not in assessments]
    if missing:
        raise IncompleteAssessment(
            f"assessments missing pillars: {', '.join(missing)}", pillars=missing
        )

    if gate in GATES:
        minimums = effective_minimums(system, config, gate)
    else:
        minimums = {p: 0.0 for p in Pillar}  # retirement gate has no score floors

    active = [e for e in exceptions if e.in_force(on_date)]
    excepted_pillars = {e.pillar for e in active if e.pillar is not None}
    excepted_control_ids = {e.control_id for e in active if e.control_id is not None}

    per_pillar = []
    for pillar in Pillar:
        required = minimums[pillar]
        actual = assessments[pillar].composite
        deficit = required - actual if required > actual else 0.0
        per_pillar.append(
            PillarGateCheck(
                pillar=pillar,
                required=required,
                actual=actual,
                deficit=deficit,
                excepted=pillar in excepted_pillars and deficit > 0,
            )
        )

    ti = trust_index if trust_index is not None else compute_trust_index(system, config, assessments)
    band = ti.band
    threshold = system.trust_index_threshold

    control_gate = min(gate, max(GATES))
    applicable = applicable_controls(config, control_gate)
    applicable_ids = {c.control_id for c in applicable}
    implemented = {
        s.control_id
        for s in statuses
        if s.implementation is Implementation.IMPLEMENTED and s.control_id in applicable_ids
    }
    excepted_here = tuple(sorted(excepted_control_ids & (applicable_ids - implemented)))
    controls_satisfied = len(implemented) + len(excepted_here)
    declared_min = config.phase(gate).min_cumulative_controls or 0
    # Minimum control counts are capped at what the loaded catalog can supply.
    controls_required = min(declared_min, len(applicable_ids))

    effective = [c.deficit for c in per_pillar if not c.excepted]
    recommended = recommend_from_deficits(effective)
    reasons = []
    nonzero = [c for c in per_pillar if c.deficit > 0 and not c.excepted]
    if any(c.deficit > 5 for c in nonzero):
        worst = max(nonzero, key=lambda c: c.deficit)
        reasons.append(f"{worst.pillar.value} is {worst.deficit:g} points below its minimum")
    elif len(nonzero) >= 3:
        reasons.append(f"{len(nonzero)} pillars below their minimums")
    if controls_satisfied < controls_required:
        recommended = GateOutcome.FAIL
        reasons.append(
            f"controls satisfied {controls_satisfied} below required {controls_required}"
        )
    if threshold is not None and ti.weighted_ti < threshold:
        recommended = GateOutcome.FAIL
        reasons.append(f"trust index {ti.weighted_ti:g} below threshold {threshold:g}")
    if band is RiskLevel.HIGH:
        recommended = GateOutcome.FAIL
        reasons.append("trust band red: gate blocked")
    requires_exec = band is RiskLevel.ELEVATED and recommended is not GateOutcome.FAIL
    if band is RiskLevel.ELEVATED and recommended is GateOutcome.PASS:
        recommended = GateOutcome.CONDITIONAL_PASS
        reasons.append("trust band orange: progression capped at conditional pass")

    return GateEvaluation(
        system_id=system.system_id,
        gate=gate,
        per_pillar=tuple(per_pillar),
        trust_index=ti,
        trust_index_threshold=threshold,
        controls_satisfied=controls_satisfied,
        controls_required=controls_required,
        recommended=recommended,
        band_constraint=band,
        requires_executive_approval=requires_exec,
        excepted_controls=excepted_here,
        fail_reasons=tuple(reasons),
        as_of_sequence=as_of_sequence,
    )


# --- decisions -------------------------------------------------------------------

@dataclass(frozen=True)
class Approval:
    role: ApprovalRole
    actor: str
    timestamp: datetime

    def to_dict(self) -> dict:
        return {"role": self.role.value, "actor": self.actor, "timestamp": rfc3339(self.timestamp)}

    @classmethod
    def from_dict(cls, raw: Mapping) -> "Approval":
        return cls(ApprovalRole(raw["role"]), raw["actor"], parse_rfc3339(raw["timestamp"]))


@dataclass(frozen=True)
class GateDecision:
    decision_id: str
    system_id: str
    gate: int
    outcome: GateOutcome
    approvals: tuple[Approval, ...]
    scorecard_snapshot: GateEvaluation
    decided_at: datetime
    remediation_plan_ref: Optional[str] = None
    re_review_due: Optional[date] = None
    rationale: str = ""

    def to_dict(self) -> dict:
        return {
            "decision_id": self.decision_id,
            "system_id": self.system_id,
            "gate": self.gate,
            "outcome": self.outcome.value,
            "approvals": [a.to_dict() for a in self.approvals],
            "scorecard_snapshot": self.scorecard_snapshot.to_dict(),
            "decided_at": rfc3339(self.decided_at),
            "remediation_plan_ref": self.remediation_plan_ref,
            "re_review_due": iso_date(self.re_review_due) if self.re_review_due else None,
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "GateDecision":
        return cls(
            decision_id=raw["decision_id"],
            system_id=raw["system_id"],
            gate=raw["gate"],
            outcome=GateOutcome(raw["outcome"]),
            approvals=tuple(Approval.from_dict(a) for a in raw["approvals"]),
            scorecard_snapshot=GateEvaluation.from_dict(raw["scorecard_snapshot"]),
            decided_at=parse_rfc3339(raw["decided_at"]),
            remediation_plan_ref=raw.get("remediation_plan_ref"),
            re_review_due=parse_date(raw["re_review_due"]) if raw.get("re_review_due") else None,
            rationale=raw.get("rationale", ""),
        )


def make_decision(
    evaluation: GateEvaluation,
    system: AiSystem,
    outcome: GateOutcome,
    approvals: Sequence[Approval],
    *,
    decision_id: str,
    decided_at: datetime,
    remediation_plan_ref: Optional[str] = None,
    re_review_due: Optional[date] = None,
    rationale: str = "",
) -> GateDecision:
    """Validate a human gate decision against the engine recommendation and
    the approval-authority matrix; reviewers may downgrade but never upgrade."""
    if _PERMISSIVENESS[outcome] > _PERMISSIVENESS[evaluation.recommended]:
        raise UpgradeForbidden(
            f"outcome {outcome.value} is more permissive than the engine "
            f"recommendation {evaluation.recommended.value}",
            outcome=outcome.value, recommended=evaluation.recommended.value,
        )

    slots = list(required_roles(evaluation.gate, system.risk_tier))
    if evaluation.requires_executive_approval and outcome is not GateOutcome.FAIL:
        exec_slot = frozenset({ApprovalRole.EXECUTIVE_SPONSOR})
        if exec_slot not in slots:
            slots.append(exec_slot)
    provided = {a.role for a in approvals}
    missing = [_slot_name(slot) for slot in slots if not slot & provided]
    if missing:
        raise AuthorityInsufficient(
            f"missing required approvals: {', '.join(missing)}",
            missing_roles=missing, gate=evaluation.gate, risk_tier=system.risk_tier.value,
        )

    if outcome is GateOutcome.CONDITIONAL_PASS:
        if not remediation_plan_ref:
            raise MissingRemediationPlan(
                "conditional pass requires a remediation plan reference"
            )
        if re_review_due is None:
            raise ReReviewOutOfWindow("conditional pass requires a re-review date")
        days = (re_review_due - decided_at.date()).days
        if not RE_REVIEW_MIN_DAYS <= days <= RE_REVIEW_MAX_DAYS:
            raise ReReviewOutOfWindow(
                f"re-review must fall 2-4 weeks after the decision, got {days} days",
                days=days,
            )

    return GateDecision(
        decision_id=decision_id,
        system_id=evaluation.system_id,
        gate=evaluation.gate,
        outcome=outcome,
        approvals=tuple(approvals),
        scorecard_snapshot=evaluation,
        decided_at=decided_at,
        remediation_plan_ref=remediation_plan_ref,
        re_review_due=re_review_due,
        rationale=rationale,
    )


def apply_decision(system: AiSystem, decision: GateDecision) -> AiSystem:
    """Phase transition for a recorded decision: +1 on (conditional) pass at
    gates 0-5, retirement flag at gate 6, no movement on fail."""
    if decision.outcome is GateOutcome.FAIL:
        return system
    if decision.gate >= 6:
        return replace(system, retired=True, pending_gate=None)
    cleared = None if system.pending_gate == decision.gate else system.pending_gate
    return replace(system, current_phase=decision.gate + 1, pending_gate=cleared)


# --- exceptions --------------------------------------------------------------------

_EXCEPTION_AUTHORITY = {
    ApprovalRole.AI_COE: 1,
    ApprovalRole.MODEL_RISK_MANAGER: 2,
    ApprovalRole.RISK_COMMITTEE: 3,
    ApprovalRole.C_SUITE: 3,
}

_REQUIRED_AUTHORITY = {ResidualRisk.LOW: 1, ResidualRisk.MEDIUM: 2, ResidualRisk.HIGH: 3}


@dataclass(frozen=True)
class ExceptionRecord:
    """An authority-approved deviation that suppresses one named gap."""

    exception_id: str
    system_id: str
    kind: ExceptionKind
    gap_description: str
    compensating_controls: tuple[str, ...]
    residual_risk: ResidualRisk
    approver_role: ApprovalRole
    granted: date
    expiry: Optional[date] = None
    remediation_plan_ref: Optional[str] = None
    pillar: Optional[Pillar] = None
    control_id: Optional[str] = None
    annual_reassessment_due: Optional[date] = None
    active: bool = True
    overdue: bool = False

    def in_force(self, on_date: Optional[date] = None) -> bool:
        if not self.active:
            return False
        if self.kind is ExceptionKind.TEMPORARY and on_date is not None:
            return self.expiry is not None and on_date <= self.expiry
        return True

    def to_dict(self) -> dict:
        return {
            "exception_id": self.exception_id,
            "system_id": self.system_id,
            "kind": self.kind.value,
            "gap_description": self.gap_description,
            "compensating_controls": list(self.compensating_controls),
            "residual_risk": self.residual_risk.value,
            "approver_role": self.approver_role.value,
            "granted": iso_date(self.granted),
            "expiry": iso_date(self.expiry) if self.expiry else None,
            "remediation_plan_ref": self.remediation_plan_ref,
            "pillar": self.pillar.value if self.pillar else None,
            "control_id": self.control_id,
            "annual_reassessment_due": (
                iso_date(self.annual_reassessment_due) if self.annual_reassessment_due else None
            ),
            "active": self.active,
            "overdue": self.overdue,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ExceptionRecord":
        return cls(
            exception_id=raw["exception_id"],
            system_id=raw["system_id"],
            kind=ExceptionKind(raw["kind"]),
            gap_description=raw["gap_description"],
            compensating_controls=tuple(raw.get("compensating_controls") or ()),
            residual_risk=ResidualRisk(raw["residual_risk"]),
            approver_role=ApprovalRole(raw["approver_role"]),
            granted=parse_date(raw["granted"]),
            expiry=parse_date(raw["expiry"]) if raw.get("expiry") else None,
            remediation_plan_ref=raw.get("remediation_plan_ref"),
            pillar=Pillar(raw["pillar"]) if raw.get("pillar") else None,
            control_id=raw.get("control_id"),
            annual_reassessment_due=(
                parse_date(raw["annual_reassessment_due"])
                if raw.get("annual_reassessment_due")
                else None
            ),
            active=raw.get("active", True),
            overdue=raw.get("overdue", False),
        )


def make_exception(
    system: AiSystem,
    kind: ExceptionKind,
    gap_description: str,
    compensating_controls: Sequence[str],
    residual_risk: ResidualRisk,
    approver_role: ApprovalRole,
    granted: date,
    *,
    exception_id: str,
    expiry: Optional[date] = None,
    remediation_plan_ref: Optional[str] = None,
    pillar: Optional[Pillar] = None,
    control_id: Optional[str] = None,
    annual_reassessment_due: Optional[date] = None,
) -> ExceptionRecord:
    """Validate and build an exception record (approver authority, duration)."""
    if pillar is not None and control_id is not None:
        raise ValidationError("an exception targets a pillar or a control, not both")

    level = _EXCEPTION_AUTHORITY.get(approver_role, 0)
    required = _REQUIRED_AUTHORITY[residual_risk]
    if kind is ExceptionKind.PERMANENT:
        required = max(required, 3)
    if level < required:
        raise ApproverInsufficient(
            f"{approver_role.value} cannot approve a {kind.value} exception with "
            f"{residual_risk.value} residual risk",
            approver_role=approver_role.value, residual_risk=residual_risk.value,
        )

    if kind is ExceptionKind.TEMPORARY:
        if expiry is None:
            raise ExpiryTooLate("temporary exception requires an expiry date")
        days = (expiry - granted).days
        if days > TEMPORARY_EXCEPTION_MAX_DAYS:
            raise ExpiryTooLate(
                f"temporary exception may last at most {TEMPORARY_EXCEPTION_MAX_DAYS} days, got {days}",
                days=days,
            )
        if not remediation_plan_ref:
            raise MissingPlan("temporary exception requires a remediation plan")
    if kind is ExceptionKind.PERMANENT and annual_reassessment_due is None:
        raise ValidationError("permanent exception requires an annual re-assessment due date")

    return ExceptionRecord(
        exception_id=exception_id,
        system_id=system.system_id,
        kind=kind,
        gap_description=gap_description,
        compensating_controls=tuple(compensating_controls),
        residual_risk=residual_risk,
        approver_role=approver_role,
        granted=granted,
        expiry=expiry,
        remediation_plan_ref=remediation_plan_ref,
        pillar=pillar,
        control_id=control_id,
        annual_reassessment_due=annual_reassessment_due,
    )


def expire_exceptions(
    records: Iterable[ExceptionRecord], now: date
) -> list[ExceptionRecord]:
    """Enforcement sweep: returns the records whose state changed.

    Temporary records past expiry stop suppressing; permanent records past
    their annual re-assessment stay in force but are flagged overdue.
    """
    changed = []
    for record in records:
        if (
            record.kind is ExceptionKind.TEMPORARY
            and record.active
            and record.expiry is not None
            and now > record.expiry
        ):
            changed.append(replace(record, active=False))
        elif (
            record.kind is ExceptionKind.PERMANENT
            and record.active
            and not record.overdue
            and record.annual_reassessment_due is not None
            and now > record.annual_reassessment_due
        ):
            changed.append(replace(record, overdue=True))
    return changed


# --- re-validation triggers ------------------------------------------------------

def fire_trigger(system: AiSystem, trigger: RevalidationTrigger) -> AiSystem:
    """Send an operational system back to gate 3 for re-validation."""
    if system.current_phase != 5:
        raise WrongPhase(
            f"re-validation triggers apply to operational (phase 5) systems; "
            f"{system.system_id} is in phase {system.current_phase}",
            system_id=system.system_id, phase=system.current_phase,
        )
    return replace(system, pending_gate=3)
