"""Shared fixtures: default catalog, toy catalogs, engines, golden fixtures."""

from __future__ import annotations

import pytest

from trust_gate.catalog import (
    FrameworkConfig,
    Pillar,
    PillarPriority,
    load_default_catalog,
    parse_catalog,
)
from trust_gate.engine import GovernanceEngine
from trust_gate.lifecycle import RiskTier, effective_minimums
from trust_gate.registry import EventStore


@pytest.fixture(scope="session")
def default_config() -> FrameworkConfig:
    return load_default_catalog()


@pytest.fixture
def store(tmp_path):
    store = EventStore(tmp_path / "events.jsonl")
    yield store
    store.close()


@pytest.fixture
def engine(store, default_config) -> GovernanceEngine:
    return GovernanceEngine(store, default_config)


def toy_catalog_doc(controls=None, gate_minimums=None) -> dict:
    """A minimal valid catalog document for focused tests."""
    pillars = [
        {"id": "cybersecurity", "weight": 0.15},
        {"id": "privacy", "weight": 0.15},
        {"id": "ethics_bias", "weight": 0.15},
        {"id": "transparency", "weight": 0.10},
        {"id": "explainability", "weight": 0.10},
        {"id": "regulations", "weight": 0.15},
        {"id": "audit", "weight": 0.10},
        {"id": "accountability", "weight": 0.10},
    ]
    if controls is None:
        controls = [
            {"id": "TST-01", "family": "TST", "title": "Toy control 1",
             "priority": "medium", "pillars": ["privacy"], "required_from_gate": 0},
            {"id": "TST-02", "family": "TST", "title": "Toy control 2",
             "priority": "medium", "pillars": ["privacy"], "required_from_gate": 2},
            {"id": "TST-03", "family": "TST", "title": "Toy control 3",
             "priority": "medium", "pillars": ["audit"], "required_from_gate": 2},
        ]
    minimum_table = {
        "cybersecurity": [40, 60, 70, 80, 90, 90],
        "privacy": [50, 70, 75, 85, 90, 90],
        "ethics_bias": [40, 50, 70, 85, 90, 90],
        "transparency": [30, 50, 60, 75, 90, 90],
        "explainability": [30, 40, 60, 80, 90, 90],
        "regulations": [50, 60, 70, 80, 90, 90],
        "audit": [30, 50, 65, 80, 90, 90],
        "accountability": [50, 60, 70, 80, 90, 90],
    }
    if gate_minimums is None:
        gate_minimums = [0, 0, 0, 0, 0, 0]
    phases = [
        {
            "phase": phase,
            "per_pillar_min": {p: vals[phase] for p, vals in minimum_table.items()},
            "min_cumulative_controls": gate_minimums[phase],
        }
        for phase in range(6)
    ]
    phases.append({"phase": 6, "min_cumulative_controls": gate_minimums[5]})
    return {
        "pillars": pillars,
        "families": [{"code": "TST", "name": "Toy"}],
        "controls": controls,
        "phases": phases,
        "priority_min_ranges": {
            "critical": [85, 95],
            "high": [75, 85],
            "standard": [60, 75],
            "low": [50, 65],
        },
    }


@pytest.fixture
def toy_config() -> FrameworkConfig:
    return parse_catalog(toy_catalog_doc())


@pytest.fixture
def toy_engine(tmp_path, toy_config) -> GovernanceEngine:
    store = EventStore(tmp_path / "toy-events.jsonl")
    yield GovernanceEngine(store, toy_config)
    store.close()


HUMANA_PRIORITIES = {
    Pillar.ETHICS_BIAS: PillarPriority.CRITICAL,
    Pillar.EXPLAINABILITY: PillarPriority.CRITICAL,
    Pillar.ACCOUNTABILITY: PillarPriority.CRITICAL,
    Pillar.AUDIT: PillarPriority.HIGH,
    Pillar.PRIVACY: PillarPriority.HIGH,
    Pillar.REGULATIONS: PillarPriority.HIGH,
    Pillar.CYBERSECURITY: PillarPriority.STANDARD,
    Pillar.TRANSPARENCY: PillarPriority.STANDARD,
}

HUMANA_OVERRIDES = {
    Pillar.ETHICS_BIAS: 90.0,
    Pillar.EXPLAINABILITY: 85.0,
    Pillar.ACCOUNTABILITY: 85.0,
    Pillar.AUDIT: 80.0,
    Pillar.PRIVACY: 80.0,
    Pillar.REGULATIONS: 85.0,
    Pillar.CYBERSECURITY: 70.0,
    Pillar.TRANSPARENCY: 70.0,
}

HUMANA_ACTUALS = {
    Pillar.ETHICS_BIAS: 30.0,
    Pillar.EXPLAINABILITY: 40.0,
    Pillar.ACCOUNTABILITY: 35.0,
    Pillar.AUDIT: 25.0,
}


def setup_humana(engine: GovernanceEngine, system_id: str = "humana-fixture") -> None:
    """High-risk healthcare claims fixture at gate 3; injects the externally
    reported trust index of 41.1."""
    engine.register_system(
        system_id=system_id,
        name="claims determination model",
        risk_tier=RiskTier.HIGH_RISK,
        current_phase=3,
        owner="claims-ops",
        pillar_priorities=HUMANA_PRIORITIES,
        pillar_min_overrides=HUMANA_OVERRIDES,
    )
    minimums = effective_minimums(engine.get_system(system_id), engine.config, 3)
    inputs = {
        pillar: {"score": HUMANA_ACTUALS.get(pillar, minimums[pillar])} for pillar in Pillar
    }
    engine.record_assessment(system_id, inputs, trust_index_override=41.1)


WELLS_FARGO_PRIORITIES = {
    Pillar.ETHICS_BIAS: PillarPriority.CRITICAL,
    Pillar.ACCOUNTABILITY: PillarPriority.CRITICAL,
    Pillar.TRANSPARENCY: PillarPriority.CRITICAL,
    Pillar.AUDIT: PillarPriority.HIGH,
}

WELLS_FARGO_OVERRIDES = {
    Pillar.ETHICS_BIAS: 90.0,
    Pillar.ACCOUNTABILITY: 85.0,
    Pillar.TRANSPARENCY: 85.0,
    Pillar.AUDIT: 80.0,
}

WELLS_FARGO_ACTUALS = {
    Pillar.ETHICS_BIAS: 35.0,
    Pillar.ACCOUNTABILITY: 30.0,
    Pillar.TRANSPARENCY: 40.0,
    Pillar.AUDIT: 25.0,
}


def setup_wells_fargo(engine: GovernanceEngine, system_id: str = "wf-fixture") -> None:
    """High-risk sales-monitoring fixture at gate 2 with the reported 38.2 index."""
    engine.register_system(
        system_id=system_id,
        name="sales target monitoring",
        risk_tier=RiskTier.HIGH_RISK,
        current_phase=2,
        owner="retail-banking",
        pillar_priorities=WELLS_FARGO_PRIORITIES,
        pillar_min_overrides=WELLS_FARGO_OVERRIDES,
    )
    minimums = effective_minimums(engine.get_system(system_id), engine.config, 2)
    inputs = {
        pillar: {"score": WELLS_FARGO_ACTUALS.get(pillar, minimums[pillar])}
        for pillar in Pillar
    }
    engine.record_assessment(system_id, inputs, trust_index_override=38.2)


def write_humana_cli_fixture(tmp_path):
    """System + assessment input files for driving the golden fixture via CLI."""
    import json

    system_file = tmp_path / "humana.json"
    system_file.write_text(
        json.dumps(
            {
                "system_id": "humana-fixture",
                "name": "claims determination model",
                "risk_tier": "high_risk",
                "current_phase": 3,
                "owner": "claims-ops",
                "pillar_priorities": {p.value: v.value for p, v in HUMANA_PRIORITIES.items()},
                "pillar_min_overrides": {p.value: v for p, v in HUMANA_OVERRIDES.items()},
            }
        ),
        encoding="utf-8",
    )
    minimums = {
        "cybersecurity": 80.0, "privacy": 85.0, "transparency": 75.0, "regulations": 85.0,
    }
    pillar_scores = {p.value: {"score": v} for p, v in HUMANA_ACTUALS.items()}
    pillar_scores.update({k: {"score": v} for k, v in minimums.items()})
    inputs_file = tmp_path / "humana-inputs.json"
    inputs_file.write_text(
        json.dumps({"pillars": pillar_scores, "trust_index_override": 41.1}),
        encoding="utf-8",
    )
    return system_file, inputs_file
