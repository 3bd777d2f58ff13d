"""Role-based scorecard reports at five levels.

Every report is a deterministic function of the audit log prefix it was
rendered at; the prefix's sequence number is embedded so any number in the
report can be recomputed from the registry. Reports are available as plain
dicts (machine-readable) and as aligned text tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .catalog import applicable_controls
from .engine import GovernanceEngine
from .errors import UnknownScope, UnknownSystem
from .registry import RiskStatus, SystemState
from .scoring import Implementation

PORTFOLIO_SCOPE = "portfolio"


class ScorecardLevel(str, Enum):
    ENTERPRISE = "enterprise"
    BUSINESS_UNIT = "business_unit"
    PROJECT = "project"
    CONTROL_TRACKER = "control_tracker"
    VENDOR = "vendor"


_CADENCE = {
    ScorecardLevel.ENTERPRISE: "quarterly",
    ScorecardLevel.BUSINESS_UNIT: "monthly",
    ScorecardLevel.PROJECT: "continuous",
    ScorecardLevel.CONTROL_TRACKER: "continuous",
    ScorecardLevel.VENDOR: "quarterly",
}


@dataclass(frozen=True)
class ScorecardReport:
    level: ScorecardLevel
    scope: str
    as_of_sequence: int
    cadence: str
    body: dict

    def to_dict(self) -> dict:
        return {
            "level": self.level.value,
            "scope": self.scope,
            "as_of_sequence": self.as_of_sequence,
            "cadence": self.cadence,
            "body": self.body,
        }

    def to_text(self) -> str:
        lines = [
            f"{self.level.value.replace('_', ' ').title()} Scorecard — scope: {self.scope} "
            f"(audit sequence {self.as_of_sequence}, cadence {self.cadence})"
        ]
        lines.extend(_render_body(self.level, self.body))
        return "\n".join(lines) + "\n"


def render_scorecard(engine: GovernanceEngine, level: ScorecardLevel, scope: Optional[str] = None) -> ScorecardReport:
    """Build the report for ``level`` at the store's current sequence."""
    sequence = engine.store.last_sequence
    if level is ScorecardLevel.ENTERPRISE:
        scope = scope or PORTFOLIO_SCOPE
        body = _enterprise_body(engine)
    elif level is ScorecardLevel.BUSINESS_UNIT:
        if not scope:
            raise UnknownScope("business-unit report requires a unit scope")
        body = _business_unit_body(engine, scope)
    elif level is ScorecardLevel.PROJECT:
        if not scope:
            raise UnknownScope("project report requires a system scope")
        body = _project_body(engine, scope)
    elif level is ScorecardLevel.CONTROL_TRACKER:
        if not scope:
            raise UnknownScope("control-tracker report requires a system scope")
        body = _control_tracker_body(engine, scope)
    elif level is ScorecardLevel.VENDOR:
        scope = scope or PORTFOLIO_SCOPE
        body = _vendor_body(engine)
    else:  # pragma: no cover - enum is closed
        raise UnknownScope(f"unknown scorecard level {level!r}")
    return ScorecardReport(level, scope, sequence, _CADENCE[level], body)


def _system_row(state: SystemState) -> dict:
    ti = state.trust_index
    return {
        "system_id": state.system.system_id,
        "name": state.system.name,
        "risk_tier": state.system.risk_tier.value,
        "phase": state.system.current_phase,
        "pending_gate": state.system.pending_gate,
        "trust_index": ti.weighted_ti if ti else None,
        "band": ti.band.value if ti else None,
        "retired": state.system.retired,
    }


def _enterprise_body(engine: GovernanceEngine) -> dict:
    states = engine.store.systems()
    assessed = [s for s in states if s.trust_index is not None]
    band_distribution: dict[str, int] = {}
    for state in assessed:
        band = state.trust_index.band.value
        band_distribution[band] = band_distribution.get(band, 0) + 1

    open_statuses = {RiskStatus.OPEN, RiskStatus.IN_PROGRESS}
    open_risks: dict[str, int] = {}
    for risk in engine.store.risks():
        if risk.status in open_statuses:
            open_risks[risk.level.value] = open_risks.get(risk.level.value, 0) + 1

    with_threshold = [
        s for s in assessed if s.system.trust_index_threshold is not None
    ]
    meeting = sum(
        1 for s in with_threshold
        if s.trust_index.weighted_ti >= s.system.trust_index_threshold
    )
    mean_ti = (
        sum(s.trust_index.weighted_ti for s in assessed) / len(assessed) if assessed else None
    )
    return {
        "systems_total": len(states),
        "systems_assessed": len(assessed),
        "no_systems": not states,
        "portfolio_trust_index": mean_ti,
        "band_distribution": dict(sorted(band_distribution.items())),
        "open_risks": dict(sorted(open_risks.items())),
        "compliance": {
            "systems_with_threshold": len(with_threshold),
            "meeting_threshold": meeting,
            "below_threshold": len(with_threshold) - meeting,
        },
        "industry_benchmark": None,
        "systems": [_system_row(s) for s in states],
    }


def _business_unit_body(engine: GovernanceEngine, unit: str) -> dict:
    states = [s for s in engine.store.systems() if s.system.business_unit == unit]
    if not states:
        raise UnknownScope(f"no systems in business unit {unit!r}", unit=unit)
    return {"business_unit": unit, "systems": [_system_row(s) for s in states]}


def _project_body(engine: GovernanceEngine, system_id: str) -> dict:
    try:
        state = engine.store.snapshot(system_id)
    except UnknownSystem:
        raise UnknownScope(f"unknown system {system_id!r}", system_id=system_id) from None

    row = _system_row(state)
    body: dict = {"system": row}
    if state.trust_index is None:
        body["assessed"] = False
        return body
    evaluation = engine.evaluate_gate(system_id)
    failed_checks = [c["message"] for c in state.checks if not c.get("passed", True)]
    open_exceptions = [e.to_dict() for e in sorted(state.open_exceptions(), key=lambda e: e.exception_id)]
    body.update(
        {
            "assessed": True,
            "gate": evaluation.gate,
            "recommended": evaluation.recommended.value,
            "trust_index": evaluation.trust_index.weighted_ti,
            "trust_index_threshold": evaluation.trust_index_threshold,
            "band": evaluation.band_constraint.value,
            "controls_satisfied": evaluation.controls_satisfied,
            "controls_required": evaluation.controls_required,
            "pillars": [c.to_dict() for c in evaluation.per_pillar],
            "fail_reasons": list(evaluation.fail_reasons),
            "failed_checks": failed_checks,
            "open_exceptions": open_exceptions,
        }
    )
    return body


def _control_tracker_body(engine: GovernanceEngine, system_id: str) -> dict:
    try:
        state = engine.store.snapshot(system_id)
    except UnknownSystem:
        raise UnknownScope(f"unknown system {system_id!r}", system_id=system_id) from None
    rows = []
    for control in sorted(engine.config.controls, key=lambda c: c.control_id):
        status = state.statuses.get(control.control_id)
        rows.append(
            {
                "control_id": control.control_id,
                "family": control.family,
                "title": control.title,
                "priority": control.priority.value,
                "required_from_gate": control.required_from_gate,
                "implementation": status.implementation.value if status else "not_started",
                "fraction": status.fraction if status else 0.0,
                "effectiveness": status.effectiveness.value if status else "not_validated",
                "evidence_refs": list(status.evidence_refs) if status else [],
            }
        )
    return {"system_id": system_id, "controls": rows}


def _vendor_body(engine: GovernanceEngine) -> dict:
    rows = []
    full_set = applicable_controls(engine.config, 5)
    for state in engine.store.systems():
        if state.system.origin != "vendor":
            continue
        implemented = sum(
            1
            for s in state.statuses.values()
            if s.implementation is Implementation.IMPLEMENTED
        )
        row = _system_row(state)
        row["attestation"] = {
            "implemented_controls": implemented,
            "applicable_controls": len(full_set),
        }
        rows.append(row)
    return {"vendor_systems": rows, "no_systems": not rows}


# --- text rendering -----------------------------------------------------------

def _table(rows: list[dict], columns: list[str]) -> list[str]:
    if not rows:
        return ["  (none)"]
    widths = {c: max(len(c), *(len(_cell(r.get(c))) for r in rows)) for c in columns}
    header = "  " + "  ".join(c.ljust(widths[c]) for c in columns)
    sep = "  " + "  ".join("-" * widths[c] for c in columns)
    lines = [header, sep]
    for row in rows:
        lines.append("  " + "  ".join(_cell(row.get(c)).ljust(widths[c]) for c in columns))
    return lines


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:g}"
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    return str(value)


def _render_body(level: ScorecardLevel, body: dict) -> list[str]:
    lines: list[str] = []
    if level is ScorecardLevel.ENTERPRISE:
        if body["no_systems"]:
            return ["  no systems registered"]
        ti = body["portfolio_trust_index"]
        lines.append(f"  portfolio trust index: {ti:.1f}" if ti is not None else "  portfolio trust index: n/a")
        lines.append(f"  band distribution: {body['band_distribution']}")
        lines.append(f"  open risks by level: {body['open_risks']}")
        compliance = body["compliance"]
        lines.append(
            f"  threshold compliance: {compliance['meeting_threshold']}/{compliance['systems_with_threshold']} meeting"
        )
        lines.extend(_table(body["systems"], ["system_id", "trust_index", "band", "phase", "risk_tier"]))
    elif level is ScorecardLevel.BUSINESS_UNIT:
        lines.extend(_table(body["systems"], ["system_id", "name", "trust_index", "band", "phase"]))
    elif level is ScorecardLevel.PROJECT:
        if not body.get("assessed"):
            return ["  system has no recorded assessment"]
        lines.append(
            f"  gate {body['gate']} readiness: {body['recommended']} "
            f"(trust index {body['trust_index']:g}, band {body['band']})"
        )
        lines.append(
            f"  controls: {body['controls_satisfied']}/{body['controls_required']} satisfied"
        )
        lines.extend(_table(body["pillars"], ["pillar", "required", "actual", "deficit", "excepted"]))
        for reason in body["fail_reasons"]:
            lines.append(f"  ! {reason}")
        for message in body["failed_checks"]:
            lines.append(f"  ! {message}")
    elif level is ScorecardLevel.CONTROL_TRACKER:
        lines.extend(
            _table(
                body["controls"],
                ["control_id", "priority", "implementation", "effectiveness", "title"],
            )
        )
    elif level is ScorecardLevel.VENDOR:
        if body["no_systems"]:
            return ["  no vendor-origin systems"]
        lines.extend(_table(body["vendor_systems"], ["system_id", "name", "trust_index", "band", "phase"]))
    return lines
