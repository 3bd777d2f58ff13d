"""Command-line interface.

Environment: TRUST_GATE_STORE (audit-log path), TRUST_GATE_CATALOG (catalog
path; the shipped default catalog is used when unset), TRUST_GATE_TOKEN
(bearer token for `serve` smoke requests, optional).

Exit codes: 0 success; 1 error; `gate evaluate` exits 0 only when the
recommendation is pass and 2 otherwise, so pipelines can gate on it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import date
from pathlib import Path
from typing import Optional

from .catalog import (
    CheckKind,
    Pillar,
    PillarPriority,
    load_catalog,
    default_catalog_path,
    validate_family_counts,
)
from .checks import load_dataset_csv
from .engine import GovernanceEngine
from .errors import TrustGateError
from .lifecycle import (
    ApprovalRole,
    ExceptionKind,
    GateOutcome,
    ResidualRisk,
    RevalidationTrigger,
    RiskTier,
)
from .registry import EventStore, Impact, Likelihood, RiskItem, RiskStatus
from .reports import ScorecardLevel, render_scorecard
from .scoring import parse_status_csv

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_GATE_NOT_PASSED = 2


def _json_print(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _catalog_path(args) -> Path:
    if args.catalog:
        return Path(args.catalog)
    env = os.environ.get("TRUST_GATE_CATALOG")
    return Path(env) if env else default_catalog_path()


def _store_path(args) -> Path:
    if args.store:
        return Path(args.store)
    env = os.environ.get("TRUST_GATE_STORE")
    if not env:
        raise TrustGateError("no store path: pass --store or set TRUST_GATE_STORE")
    return Path(env)


def _engine(args) -> GovernanceEngine:
    config = load_catalog(_catalog_path(args))
    store = EventStore(_store_path(args))
    return GovernanceEngine(store, config)


def _parse_pillar_map(pairs, value_parser, what):
    result = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise TrustGateError(f"bad {what} {pair!r}, expected pillar=value")
        key, value = pair.split("=", 1)
        result[Pillar(key)] = value_parser(value)
    return result


def _parse_date(text: Optional[str]) -> Optional[date]:
    return date.fromisoformat(text) if text else None


# --- subcommand handlers -------------------------------------------------------

def _cmd_catalog_validate(args) -> int:
    path = Path(args.path) if args.path else _catalog_path(args)
    config = load_catalog(path)
    discrepancies = validate_family_counts(config)
    summary = {
        "path": str(path),
        "pillars": len(config.pillar_weights),
        "families": len(config.families),
        "controls": len(config.controls),
        "phases": len(config.phase_requirements),
        "family_count_discrepancies": [
            {"family": d.code, "declared": d.declared, "actual": d.actual}
            for d in discrepancies
        ],
    }
    _json_print(summary)
    return EXIT_OK


def _cmd_system_register(args) -> int:
    engine = _engine(args)
    if args.from_file:
        raw = json.loads(Path(args.from_file).read_text(encoding="utf-8"))
        spec = {
            "system_id": raw["system_id"],
            "name": raw.get("name", raw["system_id"]),
            "risk_tier": RiskTier(raw["risk_tier"]),
            "owner": raw.get("owner", ""),
            "current_phase": raw.get("current_phase", 0),
            "pillar_priorities": {
                Pillar(k): PillarPriority(v)
                for k, v in (raw.get("pillar_priorities") or {}).items()
            },
            "pillar_min_overrides": {
                Pillar(k): float(v)
                for k, v in (raw.get("pillar_min_overrides") or {}).items()
            },
            "business_unit": raw.get("business_unit"),
            "origin": raw.get("origin", "internal"),
        }
        if "trust_index_threshold" in raw:
            spec["trust_index_threshold"] = raw["trust_index_threshold"]
    else:
        if not args.id or not args.name or not args.tier:
            raise TrustGateError("system register requires --id, --name and --tier (or --from-file)")
        spec = {
            "system_id": args.id,
            "name": args.name,
            "risk_tier": RiskTier(args.tier),
            "owner": args.owner or "",
            "current_phase": args.phase,
            "pillar_priorities": _parse_pillar_map(args.priority, PillarPriority, "priority"),
            "pillar_min_overrides": _parse_pillar_map(args.min_override, float, "override"),
            "business_unit": args.business_unit,
            "origin": args.origin,
        }
        if args.threshold is not None:
            spec["trust_index_threshold"] = (
                None if args.threshold.lower() == "none" else float(args.threshold)
            )
    system = engine.register_system(actor=args.actor, **spec)
    _json_print(system.to_dict())
    return EXIT_OK


def _cmd_system_show(args) -> int:
    engine = _engine(args)
    state = engine.state(args.id)
    payload = state.system.to_dict()
    payload["statuses"] = len(state.statuses)
    payload["assessed"] = state.trust_index is not None
    if state.trust_index:
        payload["trust_index"] = state.trust_index.weighted_ti
        payload["band"] = state.trust_index.band.value
    payload["decisions"] = len(state.decisions)
    payload["open_exceptions"] = len(state.open_exceptions())
    _json_print(payload)
    return EXIT_OK


def _cmd_status_import(args) -> int:
    engine = _engine(args)
    text = Path(args.csv).read_text(encoding="utf-8")
    statuses = parse_status_csv(text)
    count = engine.import_statuses(args.system, statuses, actor=args.actor)
    _json_print({"system_id": args.system, "imported": count})
    return EXIT_OK


def _cmd_assess(args) -> int:
    engine = _engine(args)
    raw = {}
    override = None
    if args.inputs:
        doc = json.loads(Path(args.inputs).read_text(encoding="utf-8"))
        raw = {Pillar(k): v for k, v in (doc.get("pillars") or {}).items()}
        override = doc.get("trust_index_override")
    if args.trust_index_override is not None:
        override = args.trust_index_override
    result = engine.record_assessment(
        args.system, raw, trust_index_override=override, actor=args.actor
    )
    _json_print(result.to_dict())
    return EXIT_OK


def _cmd_check_run(args) -> int:
    engine = _engine(args)
    kind = CheckKind(args.kind)
    params = {}
    if args.params:
        text = Path(args.params).read_text(encoding="utf-8") if Path(args.params).exists() else args.params
        params = json.loads(text)
    data = load_dataset_csv(args.data, args.schema) if args.data else None
    result, reports = engine.run_check(
        args.system, kind, data=data, params=params, actor=args.actor
    )
    payload = result.to_dict()
    payload["unapplied"] = [
        {"result_id": r.result_id, "control_id": r.control_id, "reason": r.reason}
        for r in reports
    ]
    _json_print(payload)
    return EXIT_OK


def _cmd_gate_evaluate(args) -> int:
    engine = _engine(args)
    evaluation = engine.evaluate_gate(args.system, args.gate)
    if args.format == "json":
        _json_print(evaluation.to_dict())
    else:
        print(f"system {evaluation.system_id} — gate {evaluation.gate}")
        print(f"recommendation: {evaluation.recommended.value.upper()}")
        print(
            f"trust index: {evaluation.trust_index.weighted_ti:g} "
            f"(band {evaluation.band_constraint.value}"
            + (f", threshold {evaluation.trust_index_threshold:g})" if evaluation.trust_index_threshold is not None else ")")
        )
        print(f"controls: {evaluation.controls_satisfied}/{evaluation.controls_required}")
        print(f"{'pillar':<16} {'required':>8} {'actual':>8} {'deficit':>8}")
        for check in evaluation.per_pillar:
            marker = " (excepted)" if check.excepted else ""
            print(
                f"{check.pillar.value:<16} {check.required:>8g} {check.actual:>8g} "
                f"{check.deficit:>8g}{marker}"
            )
        for reason in evaluation.fail_reasons:
            print(f"! {reason}")
    return EXIT_OK if evaluation.recommended is GateOutcome.PASS else EXIT_GATE_NOT_PASSED


def _cmd_gate_decide(args) -> int:
    engine = _engine(args)
    approvals = []
    for pair in args.approve or []:
        role, _, actor = pair.partition(":")
        approvals.append((ApprovalRole(role), actor or args.actor))
    decision = engine.record_decision(
        args.system,
        args.gate,
        GateOutcome(args.outcome),
        approvals,
        remediation_plan_ref=args.remediation_plan,
        re_review_due=_parse_date(args.re_review_due),
        rationale=args.rationale or "",
        actor=args.actor,
    )
    _json_print(decision.to_dict())
    return EXIT_OK


def _cmd_exception_grant(args) -> int:
    engine = _engine(args)
    record = engine.grant_exception(
        args.system,
        ExceptionKind(args.kind),
        args.gap,
        ResidualRisk(args.residual),
        ApprovalRole(args.approver),
        compensating_controls=tuple((args.compensating or "").split(",")) if args.compensating else (),
        granted=_parse_date(args.granted),
        expiry=_parse_date(args.expiry),
        remediation_plan_ref=args.plan,
        pillar=Pillar(args.pillar) if args.pillar else None,
        control_id=args.control,
        annual_reassessment_due=_parse_date(args.annual_due),
        actor=args.actor,
    )
    _json_print(record.to_dict())
    return EXIT_OK


def _cmd_exception_list(args) -> int:
    engine = _engine(args)
    state = engine.state(args.system)
    _json_print([e.to_dict() for e in sorted(state.exceptions.values(), key=lambda e: e.exception_id)])
    return EXIT_OK


def _cmd_trigger_fire(args) -> int:
    engine = _engine(args)
    system = engine.fire_trigger(args.system, RevalidationTrigger(args.trigger), actor=args.actor)
    _json_print(system.to_dict())
    return EXIT_OK


def _cmd_risk_add(args) -> int:
    engine = _engine(args)
    risk = RiskItem(
        risk_id=args.id,
        description=args.description,
        pillar=Pillar(args.pillar),
        project=args.project or "",
        likelihood=Likelihood(args.likelihood),
        impact=Impact(args.impact),
        mitigation=args.mitigation or "",
        owner=args.owner or "",
        due_date=args.due,
        status=RiskStatus(args.status),
    )
    engine.upsert_risk(risk, actor=args.actor)
    _json_print(risk.to_dict())
    return EXIT_OK


def _cmd_risk_list(args) -> int:
    engine = _engine(args)
    _json_print([r.to_dict() for r in engine.store.risks()])
    return EXIT_OK


def _cmd_report(args) -> int:
    engine = _engine(args)
    report = render_scorecard(engine, ScorecardLevel(args.level), args.scope)
    if args.format == "json":
        _json_print(report.to_dict())
    else:
        print(report.to_text(), end="")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve

    host, _, port = args.bind.partition(":")
    serve(
        catalog_path=_catalog_path(args),
        store_path=_store_path(args),
        auth_config_path=args.auth_config,
        fallback_token=os.environ.get("TRUST_GATE_TOKEN"),
        host=host or "127.0.0.1",
        port=int(port or 8400),
    )
    return EXIT_OK


def _cmd_log_verify(args) -> int:
    ok, first_bad, message = EventStore.verify_file(_store_path(args))
    _json_print({"ok": ok, "first_bad_sequence": first_bad, "message": message})
    return EXIT_OK if ok else EXIT_ERROR


def _cmd_log_export(args) -> int:
    engine = _engine(args)
    out = args.out or "-"
    if out == "-":
        for event in engine.store.events():
            if args.system and not _event_touches(event, args.system):
                continue
            print(json.dumps(event.to_dict(), sort_keys=True, separators=(",", ":")))
        return EXIT_OK
    count = engine.store.export(out, system_id=args.system)
    _json_print({"exported": count, "path": out})
    return EXIT_OK


def _event_touches(event, system_id: str) -> bool:
    from .registry import _touches_system

    return _touches_system(event, system_id)


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trust-gate", description=__doc__)
    parser.add_argument("--store", help="audit log path (or TRUST_GATE_STORE)")
    parser.add_argument("--catalog", help="catalog path (or TRUST_GATE_CATALOG)")
    parser.add_argument("--actor", default="cli", help="actor recorded on audit events")
    sub = parser.add_subparsers(dest="command", required=True)

    catalog = sub.add_parser("catalog", help="catalog operations").add_subparsers(
        dest="subcommand", required=True
    )
    validate = catalog.add_parser("validate", help="validate a catalog document")
    validate.add_argument("path", nargs="?", help="catalog path (default: active catalog)")
    validate.set_defaults(handler=_cmd_catalog_validate)

    system = sub.add_parser("system", help="system registry").add_subparsers(
        dest="subcommand", required=True
    )
    register = system.add_parser("register", help="register a governed system")
    register.add_argument("--id")
    register.add_argument("--name")
    register.add_argument("--tier", choices=[t.value for t in RiskTier])
    register.add_argument("--owner")
    register.add_argument("--phase", type=int, default=0)
    register.add_argument("--business-unit", dest="business_unit")
    register.add_argument("--origin", choices=["internal", "vendor"], default="internal")
    register.add_argument("--threshold", help="trust-index threshold (number or 'none')")
    register.add_argument("--priority", action="append", metavar="PILLAR=LEVEL")
    register.add_argument("--min-override", dest="min_override", action="append", metavar="PILLAR=SCORE")
    register.add_argument("--from-file", dest="from_file", help="JSON system description")
    register.set_defaults(handler=_cmd_system_register)
    show = system.add_parser("show", help="show one system's state")
    show.add_argument("--id", required=True)
    show.set_defaults(handler=_cmd_system_show)

    status = sub.add_parser("status", help="control statuses").add_subparsers(
        dest="subcommand", required=True
    )
    imp = status.add_parser("import", help="import a control-status CSV")
    imp.add_argument("--system", required=True)
    imp.add_argument("csv", help="CSV path")
    imp.set_defaults(handler=_cmd_status_import)

    assess = sub.add_parser("assess", help="compute pillar scores and trust indices")
    assess.add_argument("--system", required=True)
    assess.add_argument("--inputs", help="JSON file with per-pillar inputs")
    assess.add_argument(
        "--trust-index-override", dest="trust_index_override", type=float,
        help="externally measured weighted trust index",
    )
    assess.set_defaults(handler=_cmd_assess)

    check = sub.add_parser("check", help="automated compliance checks").add_subparsers(
        dest="subcommand", required=True
    )
    run = check.add_parser("run", help="run one check against a system")
    run.add_argument("--system", required=True)
    run.add_argument("--kind", required=True, choices=[k.value for k in CheckKind])
    run.add_argument("--data", help="dataset CSV path")
    run.add_argument("--schema", help="sidecar column-kind schema JSON")
    run.add_argument("--params", help="check parameters (JSON text or file)")
    run.set_defaults(handler=_cmd_check_run)

    gate = sub.add_parser("gate", help="gate evaluation and decisions").add_subparsers(
        dest="subcommand", required=True
    )
    evaluate = gate.add_parser("evaluate", help="compute gate readiness")
    evaluate.add_argument("--system", required=True)
    evaluate.add_argument("--gate", type=int)
    evaluate.add_argument("--format", choices=["text", "json"], default="text")
    evaluate.set_defaults(handler=_cmd_gate_evaluate)
    decide = gate.add_parser("decide", help="record a human gate decision")
    decide.add_argument("--system", required=True)
    decide.add_argument("--gate", type=int, required=True)
    decide.add_argument("--outcome", required=True, choices=[o.value for o in GateOutcome])
    decide.add_argument("--approve", action="append", metavar="ROLE[:ACTOR]")
    decide.add_argument("--remediation-plan", dest="remediation_plan")
    decide.add_argument("--re-review-due", dest="re_review_due")
    decide.add_argument("--rationale")
    decide.set_defaults(handler=_cmd_gate_decide)

    exception = sub.add_parser("exception", help="exception registry").add_subparsers(
        dest="subcommand", required=True
    )
    grant = exception.add_parser("grant", help="grant an exception")
    grant.add_argument("--system", required=True)
    grant.add_argument("--kind", required=True, choices=[k.value for k in ExceptionKind])
    grant.add_argument("--gap", required=True)
    grant.add_argument("--residual", required=True, choices=[r.value for r in ResidualRisk])
    grant.add_argument("--approver", required=True, choices=[r.value for r in ApprovalRole])
    grant.add_argument("--pillar", choices=[p.value for p in Pillar])
    grant.add_argument("--control")
    grant.add_argument("--compensating", help="comma-separated compensating controls")
    grant.add_argument("--granted", help="grant date YYYY-MM-DD (default today)")
    grant.add_argument("--expiry", help="expiry date (temporary only)")
    grant.add_argument("--plan", help="remediation plan reference (temporary only)")
    grant.add_argument("--annual-due", dest="annual_due", help="annual re-assessment date (permanent only)")
    grant.set_defaults(handler=_cmd_exception_grant)
    listing = exception.add_parser("list", help="list exceptions for a system")
    listing.add_argument("--system", required=True)
    listing.set_defaults(handler=_cmd_exception_list)

    trigger = sub.add_parser("trigger", help="re-validation triggers").add_subparsers(
        dest="subcommand", required=True
    )
    fire = trigger.add_parser("fire", help="fire a re-validation trigger")
    fire.add_argument("--system", required=True)
    fire.add_argument("--trigger", required=True, choices=[t.value for t in RevalidationTrigger])
    fire.set_defaults(handler=_cmd_trigger_fire)

    risk = sub.add_parser("risk", help="risk register").add_subparsers(
        dest="subcommand", required=True
    )
    add = risk.add_parser("add", help="add or update a risk")
    add.add_argument("--id", required=True)
    add.add_argument("--description", required=True)
    add.add_argument("--pillar", required=True, choices=[p.value for p in Pillar])
    add.add_argument("--project")
    add.add_argument("--likelihood", required=True, choices=[l.value for l in Likelihood])
    add.add_argument("--impact", required=True, choices=[i.value for i in Impact])
    add.add_argument("--mitigation")
    add.add_argument("--owner")
    add.add_argument("--due")
    add.add_argument("--status", default="open", choices=[s.value for s in RiskStatus])
    add.set_defaults(handler=_cmd_risk_add)
    rlist = risk.add_parser("list", help="list risks")
    rlist.set_defaults(handler=_cmd_risk_list)

    report = sub.add_parser("report", help="render a scorecard")
    report.add_argument("level", choices=[l.value for l in ScorecardLevel])
    report.add_argument("--scope", help="unit id or system id (level-dependent)")
    report.add_argument("--format", choices=["text", "json"], default="text")
    report.set_defaults(handler=_cmd_report)

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--bind", default="127.0.0.1:8400", metavar="HOST:PORT")
    serve.add_argument("--auth-config", dest="auth_config",
                       help="JSON file mapping bearer tokens to {actor, roles}; "
                            "falls back to TRUST_GATE_TOKEN as a read-only token")
    serve.set_defaults(handler=_cmd_serve)

    log = sub.add_parser("log", help="audit log").add_subparsers(
        dest="subcommand", required=True
    )
    verify = log.add_parser("verify", help="verify the digest chain")
    verify.set_defaults(handler=_cmd_log_verify)
    export = log.add_parser("export", help="export the log in wire format")
    export.add_argument("--system", help="filter to one system")
    export.add_argument("--out", help="output path (default: stdout)")
    export.set_defaults(handler=_cmd_log_export)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except TrustGateError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
