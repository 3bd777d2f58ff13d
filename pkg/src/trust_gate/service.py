"""HTTP API over the governance engine (versioned under /api/v1).

Authentication is static bearer tokens mapped to {actor, roles} in a JSON
config file; every mutation is audit-logged with the authenticated actor.
The service and the CLI drive the exact same engine operations.

Error bodies are {"code", "message", "details"} with engine error kinds
mapped onto 400/401/403/404/409.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Optional, Union

from fastapi import Depends, FastAPI, Request
from fastapi.responses import JSONResponse

from . import errors
from .catalog import CheckKind, Pillar, PillarPriority, load_catalog
from .checks import Column, ColumnKind, TabularDataset, parse_dataset_csv
from .engine import GovernanceEngine
from .errors import AuthConfigMissing, TrustGateError, ValidationError
from .lifecycle import (
    Approval,
    ApprovalRole,
    ExceptionKind,
    GateOutcome,
    ResidualRisk,
    RiskTier,
)
from .registry import EventStore, Impact, Likelihood, RiskItem, RiskStatus
from .reports import ScorecardLevel, render_scorecard
from .scoring import ControlStatus
from .util import utc_now

_STATUS_BY_CODE = {
    "AuthorityInsufficient": 403,
    "ApproverInsufficient": 403,
    "UnknownSystem": 404,
    "UnknownScope": 404,
    "UpgradeForbidden": 409,
    "WrongGate": 409,
    "WrongPhase": 409,
    "DuplicateSystem": 409,
    "StoreCorrupt": 500,
    "WriteFailed": 500,
}


@dataclass(frozen=True)
class Session:
    actor: str
    roles: tuple[ApprovalRole, ...]


class TokenAuth:
    """Bearer-token table loaded from the auth config file."""

    def __init__(self, tokens: dict[str, Session]) -> None:
        self._tokens = tokens

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "TokenAuth":
        path = Path(path)
        if not path.exists():
            raise AuthConfigMissing(f"auth config {path} not found", path=str(path))
        raw = json.loads(path.read_text(encoding="utf-8"))
        tokens = {}
        for token, entry in (raw.get("tokens") or {}).items():
            tokens[token] = Session(
                actor=entry["actor"],
                roles=tuple(ApprovalRole(r) for r in entry.get("roles") or ()),
            )
        if not tokens:
            raise AuthConfigMissing(f"auth config {path} defines no tokens", path=str(path))
        return cls(tokens)

    def authenticate(self, header: Optional[str]) -> Session:
        if not header or not header.startswith("Bearer "):
            raise _Unauthorized("missing bearer token")
        session = self._tokens.get(header[len("Bearer "):])
        if session is None:
            raise _Unauthorized("unknown token")
        return session


class _Unauthorized(Exception):
    def __init__(self, message: str) -> None:
        self.message = message


def create_app(engine: GovernanceEngine, auth: TokenAuth) -> FastAPI:
    app = FastAPI(title="trust-gate", version="1")

    def session_dep(request: Request) -> Session:
        return auth.authenticate(request.headers.get("Authorization"))

    @app.exception_handler(TrustGateError)
    async def _engine_error(_request: Request, exc: TrustGateError) -> JSONResponse:
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status, content=exc.to_dict())

    @app.exception_handler(_Unauthorized)
    async def _auth_error(_request: Request, exc: _Unauthorized) -> JSONResponse:
        return JSONResponse(
            status_code=401,
            content={"code": "Unauthorized", "message": exc.message, "details": {}},
        )

    # -- systems --

    @app.get("/api/v1/systems")
    def list_systems(_session: Session = Depends(session_dep)):
        return {
            "systems": [
                {
                    "system_id": s.system.system_id,
                    "name": s.system.name,
                    "risk_tier": s.system.risk_tier.value,
                    "phase": s.system.current_phase,
                    "pending_gate": s.system.pending_gate,
                    "origin": s.system.origin,
                    "business_unit": s.system.business_unit,
                    "trust_index": s.trust_index.weighted_ti if s.trust_index else None,
                    "band": s.trust_index.band.value if s.trust_index else None,
                }
                for s in engine.store.systems()
            ],
            "as_of_sequence": engine.store.last_sequence,
        }

    @app.post("/api/v1/systems", status_code=201)
    async def register_system(request: Request, session: Session = Depends(session_dep)):
        body = await _body(request)
        kwargs = dict(
            system_id=_require(body, "system_id"),
            name=body.get("name") or body["system_id"],
            risk_tier=RiskTier(_require(body, "risk_tier")),
            owner=body.get("owner", ""),
            current_phase=int(body.get("current_phase", 0)),
            pillar_priorities={
                Pillar(k): PillarPriority(v)
                for k, v in (body.get("pillar_priorities") or {}).items()
            },
            pillar_min_overrides={
                Pillar(k): float(v)
                for k, v in (body.get("pillar_min_overrides") or {}).items()
            },
            business_unit=body.get("business_unit"),
            origin=body.get("origin", "internal"),
            actor=session.actor,
        )
        if "trust_index_threshold" in body:
            kwargs["trust_index_threshold"] = body["trust_index_threshold"]
        system = engine.register_system(**kwargs)
        return system.to_dict()

    @app.get("/api/v1/systems/{system_id}/scorecard")
    def system_scorecard(system_id: str, _session: Session = Depends(session_dep)):
        return render_scorecard(engine, ScorecardLevel.PROJECT, system_id).to_dict()

    @app.put("/api/v1/systems/{system_id}/statuses")
    async def put_statuses(system_id: str, request: Request, session: Session = Depends(session_dep)):
        body = await _body(request)
        statuses = [ControlStatus.from_dict(raw) for raw in _require(body, "statuses")]
        count = engine.import_statuses(system_id, statuses, actor=session.actor)
        return {"system_id": system_id, "imported": count}

    @app.post("/api/v1/systems/{system_id}/assess")
    async def assess(system_id: str, request: Request, session: Session = Depends(session_dep)):
        body = await _body(request)
        pillar_inputs = {Pillar(k): v for k, v in (body.get("pillars") or {}).items()}
        result = engine.record_assessment(
            system_id,
            pillar_inputs,
            trust_index_override=body.get("trust_index_override"),
            actor=session.actor,
        )
        return result.to_dict()

    @app.post("/api/v1/systems/{system_id}/checks/{kind}")
    async def run_check(
        system_id: str, kind: str, request: Request, session: Session = Depends(session_dep)
    ):
        body = await _body(request)
        try:
            check_kind = CheckKind(kind)
        except ValueError:
            raise ValidationError(f"unknown check kind {kind!r}", kind=kind) from None
        data = _parse_dataset(body)
        params = dict(body.get("params") or {})
        for key in ("accuracies", "thresholds", "allowed_types",
                    "protected_column", "prediction_column", "threshold"):
            if key in body:
                params.setdefault(key, body[key])
        result, unapplied = engine.run_check(
            system_id, check_kind, data=data, params=params, actor=session.actor
        )
        payload = result.to_dict()
        payload["unapplied"] = [
            {"result_id": r.result_id, "control_id": r.control_id, "reason": r.reason}
            for r in unapplied
        ]
        return payload

    # -- gates --

    @app.get("/api/v1/systems/{system_id}/gates/{gate}/evaluation")
    def gate_evaluation(system_id: str, gate: int, _session: Session = Depends(session_dep)):
        return engine.evaluate_gate(system_id, gate).to_dict()

    @app.post("/api/v1/systems/{system_id}/gates/{gate}/decision", status_code=201)
    async def gate_decision(
        system_id: str, gate: int, request: Request, session: Session = Depends(session_dep)
    ):
        body = await _body(request)
        raw_approvals = body.get("approvals")
        now = utc_now()
        if raw_approvals is None:
            approvals = [Approval(role, session.actor, now) for role in session.roles]
        else:
            approvals = [
                Approval(
                    ApprovalRole(entry["role"]),
                    entry.get("actor") or session.actor,
                    now,
                )
                for entry in raw_approvals
            ]
        re_review = body.get("re_review_due")
        decision = engine.record_decision(
            system_id,
            gate,
            GateOutcome(_require(body, "outcome")),
            approvals,
            remediation_plan_ref=body.get("remediation_plan_ref"),
            re_review_due=date.fromisoformat(re_review) if re_review else None,
            rationale=body.get("rationale", ""),
            actor=session.actor,
        )
        return decision.to_dict()

    # -- exceptions --

    @app.post("/api/v1/systems/{system_id}/exceptions", status_code=201)
    async def grant_exception(
        system_id: str, request: Request, session: Session = Depends(session_dep)
    ):
        body = await _body(request)
        record = engine.grant_exception(
            system_id,
            ExceptionKind(_require(body, "kind")),
            _require(body, "gap_description"),
            ResidualRisk(_require(body, "residual_risk")),
            ApprovalRole(_require(body, "approver_role")),
            compensating_controls=tuple(body.get("compensating_controls") or ()),
            granted=_opt_date(body.get("granted")),
            expiry=_opt_date(body.get("expiry")),
            remediation_plan_ref=body.get("remediation_plan_ref"),
            pillar=Pillar(body["pillar"]) if body.get("pillar") else None,
            control_id=body.get("control_id"),
            annual_reassessment_due=_opt_date(body.get("annual_reassessment_due")),
            actor=session.actor,
        )
        return record.to_dict()

    @app.get("/api/v1/systems/{system_id}/exceptions")
    def list_exceptions(system_id: str, _session: Session = Depends(session_dep)):
        state = engine.state(system_id)
        return {
            "exceptions": [
                e.to_dict()
                for e in sorted(state.exceptions.values(), key=lambda e: e.exception_id)
            ]
        }

    # -- portfolio, risks, audit --

    @app.get("/api/v1/portfolio/scorecard")
    def portfolio_scorecard(_session: Session = Depends(session_dep)):
        return render_scorecard(engine, ScorecardLevel.ENTERPRISE).to_dict()

    @app.get("/api/v1/risks")
    def list_risks(_session: Session = Depends(session_dep)):
        return {"risks": [r.to_dict() for r in engine.store.risks()]}

    @app.post("/api/v1/risks", status_code=201)
    async def add_risk(request: Request, session: Session = Depends(session_dep)):
        body = await _body(request)
        risk = RiskItem(
            risk_id=_require(body, "risk_id"),
            description=_require(body, "description"),
            pillar=Pillar(_require(body, "pillar")),
            project=body.get("project", ""),
            likelihood=Likelihood(_require(body, "likelihood")),
            impact=Impact(_require(body, "impact")),
            mitigation=body.get("mitigation", ""),
            owner=body.get("owner", ""),
            due_date=body.get("due_date"),
            status=RiskStatus(body.get("status", "open")),
        )
        engine.upsert_risk(risk, actor=session.actor)
        return risk.to_dict()

    @app.get("/api/v1/audit")
    def audit(since: int = 0, _session: Session = Depends(session_dep)):
        return {"events": [e.to_dict() for e in engine.store.events(since=since)]}

    return app


async def _body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise ValidationError("request body must be a JSON object") from None
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object")
    return body


def _require(body: dict, key: str):
    if key not in body:
        raise ValidationError(f"missing required field {key!r}", field=key)
    return body[key]


def _opt_date(text: Optional[str]) -> Optional[date]:
    return date.fromisoformat(text) if text else None


def _parse_dataset(body: dict) -> Optional[TabularDataset]:
    if "csv" in body:
        return parse_dataset_csv(body["csv"], (body.get("schema") or {}).get("columns"))
    if "data" in body:
        raw = body["data"]
        rows = [tuple(r) for r in raw.get("rows") or []]
        columns_raw = raw.get("columns")
        if columns_raw:
            columns = tuple(Column(c["name"], ColumnKind(c["kind"])) for c in columns_raw)
            return TabularDataset(columns, rows)
        raise ValidationError("inline data requires explicit columns")
    return None


def serve(
    *,
    catalog_path: Union[str, Path],
    store_path: Union[str, Path],
    auth_config_path: Optional[Union[str, Path]] = None,
    fallback_token: Optional[str] = None,
    host: str = "127.0.0.1",
    port: int = 8400,
) -> None:
    """Open the store, build the app, and run it (blocking).

    Without an auth config file, TRUST_GATE_TOKEN (``fallback_token``) serves
    as a single role-less token: enough to read scorecards, never enough to
    approve anything.
    """
    import errno

    import uvicorn

    if auth_config_path is not None:
        auth = TokenAuth.from_file(auth_config_path)
    elif fallback_token:
        auth = TokenAuth({fallback_token: Session(actor="token-client", roles=())})
    else:
        raise AuthConfigMissing("pass --auth-config or set TRUST_GATE_TOKEN")
    config = load_catalog(catalog_path)
    store = EventStore(store_path)
    app = create_app(GovernanceEngine(store, config), auth)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        if exc.errno in (errno.EADDRINUSE, errno.EACCES, errno.EADDRNOTAVAIL):
            raise errors.BindFailed(f"cannot bind {host}:{port}: {exc}") from exc
        raise
    finally:
        store.close()
