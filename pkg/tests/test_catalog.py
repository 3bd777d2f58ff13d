"""Catalog loading, validation, and applicability."""

from __future__ import annotations

import copy

import pytest
from hypothesis import given, strategies as st

from trust_gate.catalog import (
    DEFAULT_PILLAR_WEIGHTS,
    ControlPriority,
    applicable_controls,
    load_catalog,
    parse_catalog,
    validate_family_counts,
)
from trust_gate.errors import GateOutOfRange, ParseError, ValidationError

from .conftest import toy_catalog_doc

EXPECTED_FAMILY_COUNTS = {
    "GRC": 14, "DSP": 24, "IAM": 16, "MDS": 13, "IVS": 13, "TVM": 9,
    "LOG": 15, "SIM": 7, "BCR": 11, "EKM": 5, "SEF": 9, "AMA": 6, "A&A": 6,
}


class TestDefaultCatalog:
    def test_eight_pillars_with_default_weights(self, default_config):
        assert len(default_config.pillar_weights) == 8
        assert default_config.pillar_weights == DEFAULT_PILLAR_WEIGHTS
        assert abs(sum(default_config.pillar_weights.values()) - 1.0) <= 1e-9

    def test_family_counts_match_declarations(self, default_config):
        assert validate_family_counts(default_config) == []
        actual = {}
        for control in default_config.controls:
            actual[control.family] = actual.get(control.family, 0) + 1
        assert actual == EXPECTED_FAMILY_COUNTS
        assert len(default_config.controls) == sum(EXPECTED_FAMILY_COUNTS.values()) == 148

    def test_control_gate_minimums_non_decreasing(self, default_config):
        declared = [
            default_config.phase(g).min_cumulative_controls for g in range(6)
        ]
        assert declared == [30, 45, 50, 60, 70, 80]

    def test_check_bindings_present(self, default_config):
        bindings = {
            c.control_id: c.check_binding.value
            for c in default_config.controls
            if c.check_binding
        }
        assert bindings == {
            "GRC-11": "demographic_parity",
            "MDS-02": "robustness_threshold",
            "DSP-11": "pii_scan",
        }

    def test_load_is_deterministic(self, default_config, tmp_path):
        from trust_gate.catalog import default_catalog_path

        again = load_catalog(default_catalog_path())
        assert again == default_config


class TestApplicableControls:
    def test_gate_zero_only_base_controls(self, toy_config):
        ids = {c.control_id for c in applicable_controls(toy_config, 0)}
        assert ids == {"TST-01"}

    def test_gate_five_is_full_union(self, default_config):
        everything = {
            c.control_id
            for c in default_config.controls
            if c.required_from_gate is not None
        }
        assert {c.control_id for c in applicable_controls(default_config, 5)} == everything

    def test_toy_catalog_enumeration(self, toy_config):
        # catalog {A@G0, B@G2, C@G2}: gate 2 -> {A,B,C}; gate 1 -> {A}
        assert {c.control_id for c in applicable_controls(toy_config, 2)} == {
            "TST-01", "TST-02", "TST-03",
        }
        assert {c.control_id for c in applicable_controls(toy_config, 1)} == {"TST-01"}

    def test_monotone_superset_chain(self, default_config):
        previous: set = set()
        for gate in range(6):
            current = {c.control_id for c in applicable_controls(default_config, gate)}
            assert previous <= current
            previous = current

    @pytest.mark.parametrize("gate", [-1, 6, 99])
    def test_gate_out_of_range(self, default_config, gate):
        with pytest.raises(GateOutOfRange):
            applicable_controls(default_config, gate)


class TestValidation:
    def test_weight_sum_violation(self):
        doc = toy_catalog_doc()
        doc["pillars"] = [{"id": p["id"], "weight": 0.2} for p in doc["pillars"]]
        with pytest.raises(ValidationError, match="sum"):
            parse_catalog(doc)

    def test_duplicate_control_named(self):
        doc = toy_catalog_doc()
        doc["controls"].append(copy.deepcopy(doc["controls"][0]))
        with pytest.raises(ValidationError, match="TST-01"):
            parse_catalog(doc)

    def test_family_prefix_must_match(self):
        doc = toy_catalog_doc()
        doc["controls"][0]["family"] = "OTH"
        doc["families"].append({"code": "OTH", "name": "Other"})
        with pytest.raises(ValidationError, match="TST-01"):
            parse_catalog(doc)

    def test_dangling_family_reference(self):
        doc = toy_catalog_doc()
        doc["families"] = [{"code": "ZZZ", "name": "Nope"}]
        with pytest.raises(ValidationError, match="TST-01"):
            parse_catalog(doc)

    def test_missing_phase_rejected(self):
        doc = toy_catalog_doc()
        doc["phases"] = doc["phases"][:-1]
        with pytest.raises(ValidationError, match="phases"):
            parse_catalog(doc)

    def test_unknown_fields_rejected(self):
        doc = toy_catalog_doc()
        doc["controls"][0]["surprise"] = True
        with pytest.raises(ParseError, match="surprise"):
            parse_catalog(doc)

    def test_decreasing_control_minimums_rejected(self):
        doc = toy_catalog_doc(gate_minimums=[3, 2, 1, 1, 1, 1])
        with pytest.raises(ValidationError, match="decreases"):
            parse_catalog(doc)

    def test_malformed_json_names_location(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"pillars": [}', encoding="utf-8")
        with pytest.raises(ParseError) as info:
            load_catalog(path)
        assert "line" in str(info.value)

    def test_family_count_discrepancy_reported(self):
        doc = toy_catalog_doc()
        doc["families"][0]["declared_count"] = 24
        config = parse_catalog(doc)
        reports = validate_family_counts(config)
        assert len(reports) == 1
        assert (reports[0].code, reports[0].declared, reports[0].actual) == ("TST", 24, 3)

    def test_no_declared_counts_is_quiet(self, toy_config):
        assert validate_family_counts(toy_config) == []


class TestPriorityWeights:
    @pytest.mark.parametrize(
        "priority,weight",
        [
            (ControlPriority.CRITICAL, 3.0),
            (ControlPriority.HIGH, 2.0),
            (ControlPriority.MEDIUM, 1.0),
            (ControlPriority.LOW, 0.5),
        ],
    )
    def test_priority_weight_constants(self, priority, weight):
        assert priority.weight == weight


@given(
    gates=st.lists(
        st.one_of(st.none(), st.integers(min_value=0, max_value=5)),
        min_size=1,
        max_size=12,
    )
)
def test_applicability_monotone_on_random_catalogs(gates):
    controls = [
        {
            "id": f"TST-{i + 1:02d}",
            "family": "TST",
            "title": f"Toy control {i + 1}",
            "priority": "medium",
            "pillars": ["privacy"],
        }
        for i in range(len(gates))
    ]
    for control, gate in zip(controls, gates):
        if gate is not None:
            control["required_from_gate"] = gate
    config = parse_catalog(toy_catalog_doc(controls=controls))
    previous: set = set()
    for gate in range(6):
        current = {c.control_id for c in applicable_controls(config, gate)}
        assert previous <= current
        previous = current
    tagged = {c["id"] for c in controls if "required_from_gate" in c}
    assert previous == tagged
