"""trust-gate: governance scoring and gated-lifecycle engine for AI systems."""

__version__ = "0.1.0"

from .catalog import (
    CheckKind,
    ControlDefinition,
    ControlFamily,
    ControlPriority,
    FrameworkConfig,
    Pillar,
    PillarPriority,
    applicable_controls,
    load_catalog,
    load_default_catalog,
    validate_family_counts,
)
from .engine import GovernanceEngine
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
    effective_minimums,
    evaluate_gate,
)
from .registry import EventKind, EventStore, KpiMetric, RiskItem, kpi_status, risk_score
from .scoring import (
    ControlStatus,
    Effectiveness,
    Implementation,
    PillarAssessment,
    PillarInputs,
    RiskLevel,
    TrustIndexResult,
    classify,
    compliance_score,
    control_effectiveness_score,
    control_implementation_score,
    pillar_score,
    risk_exposure_score,
    static_trust_index,
    weighted_trust_index,
)

__all__ = [
    "AiSystem",
    "Approval",
    "ApprovalRole",
    "CheckKind",
    "ControlDefinition",
    "ControlFamily",
    "ControlPriority",
    "ControlStatus",
    "Effectiveness",
    "EventKind",
    "EventStore",
    "ExceptionKind",
    "ExceptionRecord",
    "FrameworkConfig",
    "GateDecision",
    "GateEvaluation",
    "GateOutcome",
    "GovernanceEngine",
    "Implementation",
    "KpiMetric",
    "Pillar",
    "PillarAssessment",
    "PillarInputs",
    "PillarPriority",
    "ResidualRisk",
    "RevalidationTrigger",
    "RiskItem",
    "RiskLevel",
    "RiskTier",
    "TrustIndexResult",
    "applicable_controls",
    "classify",
    "compliance_score",
    "control_effectiveness_score",
    "control_implementation_score",
    "effective_minimums",
    "evaluate_gate",
    "kpi_status",
    "load_catalog",
    "load_default_catalog",
    "pillar_score",
    "risk_exposure_score",
    "risk_score",
    "static_trust_index",
    "validate_family_counts",
    "weighted_trust_index",
]
