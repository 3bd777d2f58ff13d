"""Orchestration facade over the catalog, scoring, lifecycle, checks, and
registry modules.

The CLI and the HTTP service both drive this one class, so an operation
sequence produces the same audit log regardless of surface. Record ids are
derived from per-system counters (not random), keeping replayed logs and
cross-surface logs byte-identical apart from timestamps and actors.
"""

from __future__ import annotations

from datetime import date
from typing import Iterable, Mapping, Optional, Sequence, Union

from .catalog import (
    CheckKind,
    FrameworkConfig,
    Pillar,
    PillarPriority,
    applicable_controls,
)
from .checks import (
    CheckResult,
    TabularDataset,
    UnappliedResult,
    apply_results,
    demographic_parity,
    pii_scan,
    robustness_threshold,
)
from .errors import (
    DuplicateSystem,
    UnknownControl,
    ValidationError,
    WrongGate,
)
from .lifecycle import (
    AiSystem,
    Approval,
    ApprovalRole,
    ExceptionKind,
    ExceptionRecord,
    GateDecision,
    GateEvaluation,
    GateOutcome,
    ResidualRisk,
    RevalidationTrigger,
    RiskTier,
    compute_trust_index,
    default_trust_index_threshold,
    evaluate_gate,
    fire_trigger,
    make_decision,
    make_exception,
    validate_system,
)
from .lifecycle import expire_exceptions as sweep_exceptions
from .registry import EventKind, EventStore, RiskItem, SystemState
from .scoring import (
    ControlStatus,
    PillarAssessment,
    PillarInputs,
    TrustIndexResult,
    pillar_score,
)
from .util import utc_now


class GovernanceEngine:
    def __init__(self, store: EventStore, config: FrameworkConfig) -> None:
        self.store = store
        self.config = config

    # -- systems ---------------------------------------------------------------

    def register_system(
        self,
        *,
        system_id: str,
        name: str,
        risk_tier: RiskTier,
        owner: str = "",
        current_phase: int = 0,
        pillar_priorities: Optional[Mapping[Pillar, PillarPriority]] = None,
        pillar_min_overrides: Optional[Mapping[Pillar, float]] = None,
        trust_index_threshold: Union[float, None, str] = "default",
        business_unit: Optional[str] = None,
        origin: str = "internal",
        actor: str = "system",
    ) -> AiSystem:
        if self.store.has_system(system_id):
            raise DuplicateSystem(f"system {system_id!r} already registered", system_id=system_id)
        threshold = (
            default_trust_index_threshold(risk_tier)
            if trust_index_threshold == "default"
            else trust_index_threshold
        )
        system = AiSystem(
            system_id=system_id,
            name=name,
            risk_tier=risk_tier,
            current_phase=current_phase,
            pillar_priorities=dict(pillar_priorities or {}),
            pillar_min_overrides=dict(pillar_min_overrides or {}),
            trust_index_threshold=threshold,
            owner=owner,
            business_unit=business_unit,
            origin=origin,
        )
        validate_system(system, self.config)
        self.store.append(EventKind.SYSTEM_REGISTERED, {"system": system.to_dict()}, actor)
        return system

    def get_system(self, system_id: str) -> AiSystem:
        return self.store.snapshot(system_id).system

    def state(self, system_id: str) -> SystemState:
        return self.store.snapshot(system_id)

    # -- control statuses --------------------------------------------------------

    def import_statuses(
        self, system_id: str, statuses: Iterable[ControlStatus], actor: str = "system"
    ) -> int:
        self.store.snapshot(system_id)
        statuses = list(statuses)
        for status in statuses:
            if status.control_id not in self.config.controls_by_id:
                raise UnknownControl(
                    f"status references control {status.control_id!r} absent from the catalog",
                    control_id=status.control_id,
                )
        self.store.append(
            EventKind.STATUS_UPDATED,
            {"system_id": system_id, "statuses": [s.to_dict() for s in statuses]},
            actor,
        )
        return len(statuses)

    # -- assessments ---------------------------------------------------------------

    def record_assessment(
        self,
        system_id: str,
        pillar_inputs: Mapping[Pillar, object],
        *,
        trust_index_override: Optional[float] = None,
        actor: str = "system",
    ) -> TrustIndexResult:
        """Compute and persist pillar assessments plus the Trust Indices.

        Each pillar's entry may be a ready :class:`PillarAssessment`, a bare
        score (externally measured composite), a component mapping, or a raw
        input mapping (risk level/appetite, met/total requirements) from which
        implementation and effectiveness are computed over the system's
        control statuses. Pillars with no entry default to raw inputs with
        zero risk and no tracked requirements.
        """
        state = self.store.snapshot(system_id)
        assessments = {
            pillar: self._assess_pillar(state, pillar, pillar_inputs.get(pillar))
            for pillar in Pillar
        }
        trust_index = compute_trust_index(
            state.system, self.config, assessments, injected_weighted_ti=trust_index_override
        )
        self.store.append(
            EventKind.ASSESSMENT_RECORDED,
            {"system_id": system_id, "trust_index": trust_index.to_dict()},
            actor,
        )
        return trust_index

    def _assess_pillar(self, state: SystemState, pillar: Pillar, entry: object) -> PillarAssessment:
        if isinstance(entry, PillarAssessment):
            if entry.pillar is not pillar:
                raise ValidationError(
                    f"assessment for {entry.pillar.value} supplied under {pillar.value}"
                )
            return entry
        if isinstance(entry, (int, float)):
            return PillarAssessment.from_score(pillar, float(entry))
        raw = dict(entry) if isinstance(entry, Mapping) else {}
        unknown = set(raw) - {
            "score", "ci", "ce", "re_score", "cs",
            "current_risk_level", "risk_appetite", "met_requirements", "total_requirements",
        }
        if unknown:
            raise ValidationError(
                f"{pillar.value}: unknown assessment fields {sorted(unknown)}", pillar=pillar.value
            )
        if "score" in raw:
            return PillarAssessment.from_score(pillar, float(raw["score"]))
        if {"ci", "ce", "re_score", "cs"} <= set(raw):
            from .scoring import COMPONENT_WEIGHTS

            ci, ce = float(raw["ci"]), float(raw["ce"])
            re_score, cs = float(raw["re_score"]), float(raw["cs"])
            composite = (
                COMPONENT_WEIGHTS[0] * ci + COMPONENT_WEIGHTS[1] * ce
                + COMPONENT_WEIGHTS[2] * re_score + COMPONENT_WEIGHTS[3] * cs
            )
            return PillarAssessment(pillar, ci, ce, re_score, cs, composite)

        gate = min(state.system.next_gate, 5)
        pillar_controls = [
            c for c in applicable_controls(self.config, gate) if pillar in c.pillars
        ]
        ids = {c.control_id for c in pillar_controls}
        statuses = tuple(s for s in state.statuses.values() if s.control_id in ids)
        inputs = PillarInputs(
            pillar=pillar,
            statuses=statuses,
            current_risk_level=float(raw.get("current_risk_level", 0.0)),
            risk_appetite=float(raw.get("risk_appetite", 1.0)),
            met_requirements=int(raw.get("met_requirements", 0)),
            total_requirements=int(raw.get("total_requirements", 0)),
        )
        return pillar_score(inputs, pillar_controls)

    # -- gates -----------------------------------------------------------------------

    def evaluate_gate(
        self,
        system_id: str,
        gate: Optional[int] = None,
        *,
        on_date: Optional[date] = None,
    ) -> GateEvaluation:
        state = self.store.snapshot(system_id)
        if state.assessments is None:
            raise ValidationError(
                f"system {system_id!r} has no recorded assessment", system_id=system_id
            )
        return evaluate_gate(
            state.system,
            self.config,
            state.assessments,
            state.statuses.values(),
            gate=gate,
            exceptions=tuple(state.exceptions.values()),
            trust_index=state.trust_index,
            on_date=on_date or utc_now().date(),
            as_of_sequence=self.store.last_sequence,
        )

    def record_decision(
        self,
        system_id: str,
        gate: int,
        outcome: GateOutcome,
        approvals: Sequence[Union[Approval, tuple[ApprovalRole, str]]],
        *,
        remediation_plan_ref: Optional[str] = None,
        re_review_due: Optional[date] = None,
        rationale: str = "",
        actor: str = "system",
    ) -> GateDecision:
        state = self.store.snapshot(system_id)
        if gate != state.system.next_gate:
            raise WrongGate(
                f"system {system_id!r} is at gate {state.system.next_gate}, not {gate}",
                system_id=system_id, expected=state.system.next_gate, gate=gate,
            )
        evaluation = self.evaluate_gate(system_id, gate)
        now = utc_now()
        normalized = [
            a if isinstance(a, Approval) else Approval(role=a[0], actor=a[1], timestamp=now)
            for a in approvals
        ]
        decision_id = f"{system_id}-g{gate}-d{len(state.decisions) + 1}"
        decision = make_decision(
            evaluation,
            state.system,
            outcome,
            normalized,
            decision_id=decision_id,
            decided_at=now,
            remediation_plan_ref=remediation_plan_ref,
            re_review_due=re_review_due,
            rationale=rationale,
        )
        self.store.append(EventKind.GATE_DECIDED, {"decision": decision.to_dict()}, actor)
        return decision

    # -- exceptions ---------------------------------------------------------------------

    def grant_exception(
        self,
        system_id: str,
        kind: ExceptionKind,
        gap_description: str,
        residual_risk: ResidualRisk,
        approver_role: ApprovalRole,
        *,
        compensating_controls: Sequence[str] = (),
        granted: Optional[date] = None,
        expiry: Optional[date] = None,
        remediation_plan_ref: Optional[str] = None,
        pillar: Optional[Pillar] = None,
        control_id: Optional[str] = None,
        annual_reassessment_due: Optional[date] = None,
        actor: str = "system",
    ) -> ExceptionRecord:
        state = self.store.snapshot(system_id)
        if control_id is not None and control_id not in self.config.controls_by_id:
            raise UnknownControl(
                f"exception targets control {control_id!r} absent from the catalog",
                control_id=control_id,
            )
        record = make_exception(
            state.system,
            kind,
            gap_description,
            compensating_controls,
            residual_risk,
            approver_role,
            granted or utc_now().date(),
            exception_id=f"{system_id}-x{len(state.exceptions) + 1}",
            expiry=expiry,
            remediation_plan_ref=remediation_plan_ref,
            pillar=pillar,
            control_id=control_id,
            annual_reassessment_due=annual_reassessment_due,
        )
        self.store.append(EventKind.EXCEPTION_GRANTED, {"exception": record.to_dict()}, actor)
        return record

    def expire_exceptions(self, now: Optional[date] = None, actor: str = "system") -> list[ExceptionRecord]:
        now = now or utc_now().date()
        changed_all = []
        for state in self.store.systems():
            changed = sweep_exceptions(state.exceptions.values(), now)
            for record in changed:
                self.store.append(
                    EventKind.EXCEPTION_EXPIRED,
                    {
                        "system_id": record.system_id,
                        "exception_id": record.exception_id,
                        "active": record.active,
                        "overdue": record.overdue,
                    },
                    actor,
                )
            changed_all.extend(changed)
        return changed_all

    # -- triggers -----------------------------------------------------------------------

    def fire_trigger(
        self, system_id: str, trigger: RevalidationTrigger, actor: str = "system"
    ) -> AiSystem:
        state = self.store.snapshot(system_id)
        updated = fire_trigger(state.system, trigger)
        self.store.append(
            EventKind.TRIGGER_FIRED,
            {
                "system_id": system_id,
                "trigger": trigger.value,
                "pending_gate": updated.pending_gate,
            },
            actor,
        )
        return updated

    # -- checks -------------------------------------------------------------------------

    def run_check(
        self,
        system_id: str,
        kind: CheckKind,
        *,
        data: Optional[TabularDataset] = None,
        params: Optional[Mapping] = None,
        actor: str = "system",
    ) -> tuple[CheckResult, list[UnappliedResult]]:
        state = self.store.snapshot(system_id)
        params = dict(params or {})
        result_id = f"{system_id}-c{len(state.checks) + 1}"
        bound_control = params.pop("bound_control", None)

        if kind is CheckKind.DEMOGRAPHIC_PARITY:
            if data is None:
                raise ValidationError("demographic parity check requires a dataset")
            result = demographic_parity(
                data,
                params.pop("protected_column"),
                params.pop("prediction_column"),
                float(params.pop("threshold", 0.05)),
                bound_control=bound_control,
                result_id=result_id,
            )
        elif kind is CheckKind.ROBUSTNESS_THRESHOLD:
            result = robustness_threshold(
                {k: float(v) for k, v in dict(params.pop("accuracies")).items()},
                params.pop("thresholds", None),
                bound_control=bound_control,
                result_id=result_id,
            )
        elif kind is CheckKind.PII_SCAN:
            if data is None:
                raise ValidationError("PII scan requires a dataset")
            result = pii_scan(
                data,
                params.pop("allowed_types", ()),
                mrn_pattern=params.pop("mrn_pattern", None) or r"\bMRN[-: ]?\d{6,10}\b",
                bound_control=bound_control,
                result_id=result_id,
            )
        else:
            raise ValidationError(f"unknown check kind {kind!r}")
        if params:
            raise ValidationError(f"unknown check parameters {sorted(params)}", params=sorted(params))

        updated, reports = apply_results([result], state.statuses)
        self.store.append(
            EventKind.CHECK_EXECUTED,
            {"system_id": system_id, "result": result.to_dict()},
            actor,
        )
        changed = [
            s for cid, s in updated.items() if state.statuses.get(cid) != s
        ]
        if changed:
            self.store.append(
                EventKind.STATUS_UPDATED,
                {"system_id": system_id, "statuses": [s.to_dict() for s in changed]},
                actor,
            )
        return result, reports

    # -- risks --------------------------------------------------------------------------

    def upsert_risk(self, risk: RiskItem, actor: str = "system") -> RiskItem:
        self.store.append(EventKind.RISK_UPSERTED, {"risk": risk.to_dict()}, actor)
        return risk
