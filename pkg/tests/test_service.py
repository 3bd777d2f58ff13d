"""HTTP API: auth, error mapping, and CLI/HTTP behavioral identity."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from trust_gate.engine import GovernanceEngine
from trust_gate.registry import EventStore
from trust_gate.service import Session, TokenAuth, create_app
from trust_gate.lifecycle import ApprovalRole

from .conftest import setup_humana

REVIEW_BOARD = [
    "risk_committee", "privacy_officer", "security_engineering",
    "legal", "ethics_board", "independent_validator",
]


def _auth() -> TokenAuth:
    return TokenAuth(
        {
            "coe-token": Session("casey", (ApprovalRole.AI_COE,)),
            "board-token": Session(
                "board", tuple(ApprovalRole(r) for r in REVIEW_BOARD)
            ),
        }
    )


@pytest.fixture
def client(engine):
    return TestClient(create_app(engine, _auth()))


def _headers(token="coe-token"):
    return {"Authorization": f"Bearer {token}"}


class TestAuth:
    def test_missing_token_is_401(self, client):
        response = client.get("/api/v1/systems")
        assert response.status_code == 401
        assert response.json()["code"] == "Unauthorized"

    def test_unknown_token_is_401(self, client):
        response = client.get("/api/v1/systems", headers=_headers("wrong"))
        assert response.status_code == 401

    def test_auth_config_must_exist(self, tmp_path):
        from trust_gate.errors import AuthConfigMissing

        with pytest.raises(AuthConfigMissing):
            TokenAuth.from_file(tmp_path / "missing.json")

    def test_auth_config_round_trip(self, tmp_path):
        path = tmp_path / "auth.json"
        path.write_text(
            json.dumps({"tokens": {"t": {"actor": "amari", "roles": ["legal"]}}}),
            encoding="utf-8",
        )
        auth = TokenAuth.from_file(path)
        session = auth.authenticate("Bearer t")
        assert session.actor == "amari"
        assert session.roles == (ApprovalRole.LEGAL,)


class TestSystemsApi:
    def test_register_and_list(self, client):
        response = client.post(
            "/api/v1/systems",
            headers=_headers(),
            json={"system_id": "api-sys", "name": "via api", "risk_tier": "minimal_risk"},
        )
        assert response.status_code == 201
        listed = client.get("/api/v1/systems", headers=_headers()).json()
        assert [s["system_id"] for s in listed["systems"]] == ["api-sys"]

    def test_duplicate_is_409(self, client):
        body = {"system_id": "api-sys", "name": "x", "risk_tier": "minimal_risk"}
        client.post("/api/v1/systems", headers=_headers(), json=body)
        response = client.post("/api/v1/systems", headers=_headers(), json=body)
        assert response.status_code == 409
        assert response.json()["code"] == "DuplicateSystem"

    def test_unknown_system_is_404(self, client):
        response = client.get("/api/v1/systems/ghost/scorecard", headers=_headers())
        assert response.status_code == 404


class TestGateApi:
    def _setup(self, engine):
        setup_humana(engine)

    def test_evaluation_read(self, engine, client):
        self._setup(engine)
        response = client.get(
            "/api/v1/systems/humana-fixture/gates/3/evaluation", headers=_headers()
        )
        assert response.status_code == 200
        body = response.json()
        assert body["recommended"] == "fail"
        deficits = {c["pillar"]: c["deficit"] for c in body["per_pillar"]}
        assert deficits["ethics_bias"] == 60.0

    def test_project_scorecard_read(self, engine, client):
        self._setup(engine)
        response = client.get("/api/v1/systems/humana-fixture/scorecard", headers=_headers())
        assert response.status_code == 200
        assert response.json()["body"]["recommended"] == "fail"

    def test_insufficient_roles_403_names_missing(self, engine, client):
        self._setup(engine)
        response = client.post(
            "/api/v1/systems/humana-fixture/gates/3/decision",
            headers=_headers("coe-token"),
            json={"outcome": "fail", "rationale": "blocked"},
        )
        assert response.status_code == 403
        body = response.json()
        assert body["code"] == "AuthorityInsufficient"
        assert "risk_committee" in body["details"]["missing_roles"]

    def test_upgrade_forbidden_409(self, engine, client):
        self._setup(engine)
        response = client.post(
            "/api/v1/systems/humana-fixture/gates/3/decision",
            headers=_headers("board-token"),
            json={"outcome": "pass"},
        )
        assert response.status_code == 409
        assert response.json()["code"] == "UpgradeForbidden"

    def test_fail_decision_records(self, engine, client):
        self._setup(engine)
        response = client.post(
            "/api/v1/systems/humana-fixture/gates/3/decision",
            headers=_headers("board-token"),
            json={"outcome": "fail", "rationale": "deficits"},
        )
        assert response.status_code == 201
        body = response.json()
        assert body["outcome"] == "fail"
        assert body["scorecard_snapshot"]["recommended"] == "fail"
        assert engine.get_system("humana-fixture").current_phase == 3


class TestChecksApi:
    def test_parity_check_inline_data(self, engine, client):
        client.post(
            "/api/v1/systems",
            headers=_headers(),
            json={"system_id": "s", "name": "s", "risk_tier": "minimal_risk"},
        )
        client.put(
            "/api/v1/systems/s/statuses",
            headers=_headers(),
            json={"statuses": [{"control_id": "GRC-11", "implementation": "implemented"}]},
        )
        rows = [["A", "1"]] * 6 + [["A", "0"]] * 4 + [["B", "1"]] * 4 + [["B", "0"]] * 6
        response = client.post(
            "/api/v1/systems/s/checks/demographic_parity",
            headers=_headers(),
            json={
                "params": {"protected_column": "race", "prediction_column": "approved"},
                "data": {
                    "columns": [
                        {"name": "race", "kind": "category"},
                        {"name": "approved", "kind": "number"},
                    ],
                    "rows": rows,
                },
            },
        )
        assert response.status_code == 200
        body = response.json()
        assert body["passed"] is False
        assert body["measured"]["disparity"] == pytest.approx(0.2)

    def test_robustness_check(self, engine, client):
        client.post(
            "/api/v1/systems", headers=_headers(),
            json={"system_id": "s", "name": "s", "risk_tier": "minimal_risk"},
        )
        client.put(
            "/api/v1/systems/s/statuses", headers=_headers(),
            json={"statuses": [{"control_id": "MDS-02", "implementation": "implemented"}]},
        )
        response = client.post(
            "/api/v1/systems/s/checks/robustness_threshold",
            headers=_headers(),
            json={"accuracies": {"FGSM": 0.851, "PGD": 0.801}},
        )
        assert response.status_code == 200
        assert response.json()["passed"] is True


class TestPortfolioRisksAudit:
    def test_portfolio_scorecard(self, engine, client):
        setup_humana(engine)
        response = client.get("/api/v1/portfolio/scorecard", headers=_headers())
        assert response.status_code == 200
        assert response.json()["body"]["band_distribution"] == {"high": 1}

    def test_risk_round_trip(self, client):
        response = client.post(
            "/api/v1/risks",
            headers=_headers(),
            json={
                "risk_id": "RISK-001", "description": "bias", "pillar": "ethics_bias",
                "likelihood": "high", "impact": "high", "project": "TalentAI",
            },
        )
        assert response.status_code == 201
        assert response.json()["score"] == 25
        listed = client.get("/api/v1/risks", headers=_headers()).json()
        assert len(listed["risks"]) == 1

    def test_audit_since(self, engine, client):
        setup_humana(engine)
        everything = client.get("/api/v1/audit", headers=_headers()).json()["events"]
        tail = client.get("/api/v1/audit?since=1", headers=_headers()).json()["events"]
        assert len(everything) == len(tail) + 1
        assert tail[0]["sequence"] == 2


class TestSurfaceIdentity:
    """The same operation sequence through CLI and HTTP yields byte-identical
    audit logs once timestamps are frozen and actors matched."""

    def test_cli_and_http_logs_match(self, tmp_path, monkeypatch, default_config):
        from trust_gate.cli import main

        monkeypatch.setenv("TRUST_GATE_CLOCK", "2026-03-02T12:00:00Z")

        # CLI surface
        cli_store = tmp_path / "cli.jsonl"
        monkeypatch.setenv("TRUST_GATE_STORE", str(cli_store))
        system_file = tmp_path / "sys.json"
        system_file.write_text(
            json.dumps({
                "system_id": "twin", "name": "twin", "risk_tier": "minimal_risk",
                "trust_index_threshold": None,
            }),
            encoding="utf-8",
        )
        inputs_file = tmp_path / "inputs.json"
        inputs_file.write_text(
            json.dumps({"pillars": {p: {"score": 90.0} for p in [
                "cybersecurity", "privacy", "ethics_bias", "transparency",
                "explainability", "regulations", "audit", "accountability"]}}),
            encoding="utf-8",
        )
        assert main(["--actor", "casey", "system", "register", "--from-file", str(system_file)]) == 0
        assert main(["--actor", "casey", "assess", "--system", "twin", "--inputs", str(inputs_file)]) == 0

        # HTTP surface
        http_store_path = tmp_path / "http.jsonl"
        store = EventStore(http_store_path)
        client = TestClient(create_app(GovernanceEngine(store, default_config), _auth()))
        response = client.post(
            "/api/v1/systems",
            headers=_headers("coe-token"),
            json={
                "system_id": "twin", "name": "twin", "risk_tier": "minimal_risk",
                "trust_index_threshold": None,
            },
        )
        assert response.status_code == 201
        response = client.post(
            "/api/v1/systems/twin/assess",
            headers=_headers("coe-token"),
            json={"pillars": {p: {"score": 90.0} for p in [
                "cybersecurity", "privacy", "ethics_bias", "transparency",
                "explainability", "regulations", "audit", "accountability"]}},
        )
        assert response.status_code == 200
        store.close()

        assert cli_store.read_text(encoding="utf-8") == http_store_path.read_text(
            encoding="utf-8"
        )
