"""Automated checks: parity vs brute-force oracle, PII detectors, robustness."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from trust_gate.checks import (
    Column,
    ColumnKind,
    TabularDataset,
    apply_results,
    demographic_parity,
    load_dataset_csv,
    parse_dataset_csv,
    pii_scan,
    robustness_threshold,
)
from trust_gate.errors import (
    InvalidPredictionValue,
    MissingColumn,
    MissingMeasurement,
    SingleGroup,
    UnknownControl,
)
from trust_gate.scoring import ControlStatus, Effectiveness, Implementation


def _dataset(groups_and_predictions: list[tuple[str, int]]) -> TabularDataset:
    columns = (Column("group", ColumnKind.CATEGORY), Column("prediction", ColumnKind.NUMBER))
    rows = tuple((g, str(p)) for g, p in groups_and_predictions)
    return TabularDataset(columns, rows)


def parity_oracle(groups_and_predictions: list[tuple[str, int]]) -> float:
    """Independent brute force: explicit group-by, then max - min of means."""
    by_group: dict[str, list[int]] = {}
    for group, prediction in groups_and_predictions:
        by_group.setdefault(group, []).append(prediction)
    rates = [sum(v) / len(v) for v in by_group.values()]
    return max(rates) - min(rates)


class TestDemographicParity:
    def test_fixture_six_of_ten_vs_four_of_ten(self):
        rows = [("A", 1)] * 6 + [("A", 0)] * 4 + [("B", 1)] * 4 + [("B", 0)] * 6
        result = demographic_parity(_dataset(rows), "group", "prediction", 0.05)
        assert result.measured["disparity"] == pytest.approx(0.2, abs=1e-12)
        assert result.measured["disparity"] == pytest.approx(parity_oracle(rows), abs=1e-12)
        assert not result.passed
        assert result.message.startswith("GRC-11 FAIL:")

    def test_identical_rates_pass(self):
        rows = [("A", 1), ("A", 0), ("B", 1), ("B", 0)]
        result = demographic_parity(_dataset(rows), "group", "prediction")
        assert result.measured["disparity"] == 0.0
        assert result.passed
        assert result.message.startswith("GRC-11 PASS:")

    def test_boundary_equality_fails(self):
        # disparity exactly 0.05: group A 55% of 20, group B 50% of 20
        rows = [("A", 1)] * 11 + [("A", 0)] * 9 + [("B", 1)] * 10 + [("B", 0)] * 10
        result = demographic_parity(_dataset(rows), "group", "prediction", 0.05)
        assert result.measured["disparity"] == pytest.approx(0.05, abs=1e-15)
        assert not result.passed  # strict comparison: equality is a violation

    def test_missing_column(self):
        with pytest.raises(MissingColumn):
            demographic_parity(_dataset([("A", 1), ("B", 0)]), "nope", "prediction")

    def test_single_group_rejected(self):
        with pytest.raises(SingleGroup):
            demographic_parity(_dataset([("A", 1), ("A", 0)]), "group", "prediction")

    def test_multiclass_predictions_rejected(self):
        rows = [("A", 2), ("B", 1)]
        with pytest.raises(InvalidPredictionValue):
            demographic_parity(_dataset(rows), "group", "prediction")

    def test_boolean_text_predictions_accepted(self):
        columns = (Column("group", ColumnKind.CATEGORY), Column("prediction", ColumnKind.BOOLEAN))
        rows = (("A", "true"), ("A", "false"), ("B", "false"), ("B", "false"))
        result = demographic_parity(TabularDataset(columns, rows), "group", "prediction")
        assert result.measured["disparity"] == pytest.approx(0.5)

    @settings(max_examples=150, deadline=None)
    @given(
        data=st.lists(
            st.tuples(st.integers(0, 9), st.integers(0, 1)),
            min_size=2,
            max_size=400,
        )
    )
    def test_matches_oracle_on_random_data(self, data):
        rows = [(f"g{g}", p) for g, p in data]
        if len({g for g, _ in rows}) < 2:
            rows.append(("g-extra", 0))
        result = demographic_parity(_dataset(rows), "group", "prediction", 0.05)
        assert result.measured["disparity"] == pytest.approx(parity_oracle(rows), abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(
        data=st.lists(
            st.tuples(st.integers(0, 4), st.integers(0, 1)), min_size=2, max_size=100
        ),
        seed=st.integers(0, 2**16),
    )
    def test_row_permutation_invariance(self, data, seed):
        rows = [(f"g{g}", p) for g, p in data]
        if len({g for g, _ in rows}) < 2:
            rows.append(("g-extra", 0))
        shuffled = rows[:]
        random.Random(seed).shuffle(shuffled)
        a = demographic_parity(_dataset(rows), "group", "prediction", 0.05)
        b = demographic_parity(_dataset(shuffled), "group", "prediction", 0.05)
        assert a.measured["disparity"] == b.measured["disparity"]
        assert a.passed == b.passed


class TestRobustness:
    def test_above_thresholds_pass(self):
        result = robustness_threshold({"FGSM": 0.90, "PGD": 0.85})
        assert result.passed
        assert result.message.startswith("MDS-02 PASS:")

    def test_equality_fails_strictly(self):
        result = robustness_threshold({"FGSM": 0.85, "PGD": 0.90})
        assert not result.passed
        assert "FGSM" in result.message
        assert result.message.startswith("MDS-02 FAIL:")

    def test_just_above_default_thresholds_pass(self):
        assert robustness_threshold({"FGSM": 0.851, "PGD": 0.801}).passed

    def test_at_default_thresholds_fail(self):
        assert not robustness_threshold({"FGSM": 0.85, "PGD": 0.80}).passed

    def test_empty_thresholds_vacuous_pass(self):
        assert robustness_threshold({}, {}).passed

    def test_missing_measurement_names_attack(self):
        with pytest.raises(MissingMeasurement, match="PGD"):
            robustness_threshold({"FGSM": 0.9})


def _text_dataset(cells: list[str], column: str = "notes") -> TabularDataset:
    return TabularDataset((Column(column, ColumnKind.TEXT),), tuple((c,) for c in cells))


class TestPiiScan:
    def test_ssn_hit_fails(self):
        result = pii_scan(_text_dataset(["patient ssn 123-45-6789 on file"]))
        assert not result.passed
        hits = result.measured["hits"]
        assert len(hits) == 1
        assert hits[0]["type"] == "SSN"
        assert (hits[0]["row"], hits[0]["column"]) == (0, "notes")
        assert result.message == "DSP-11 FAIL: 1 unexpected PII instances"

    def test_empty_dataset_passes(self):
        result = pii_scan(TabularDataset((Column("a", ColumnKind.TEXT),), ()))
        assert result.passed

    def test_allowed_type_reported_but_passes(self):
        result = pii_scan(_text_dataset(["123-45-6789"]), allowed_types={"SSN"})
        assert result.passed
        assert result.measured["hits"][0]["allowed"] is True
        assert result.measured["unexpected_count"] == 0

    @pytest.mark.parametrize(
        "cell,expected_type",
        [
            ("call (203) 555-0187 today", "PHONE"),
            ("call 203-555-0187 today", "PHONE"),
            ("call +1 203 555 0187", "PHONE"),
            ("mail person@example.org now", "EMAIL"),
            ("card 4539578763621486 works", "CREDIT_CARD"),  # Luhn-valid 16 digits
            ("card 4539 5787 6362 1486 works", "CREDIT_CARD"),
            ("record MRN-0042137 transferred", "MEDICAL_RECORD"),
        ],
    )
    def test_detector_fixtures(self, cell, expected_type):
        result = pii_scan(_text_dataset([cell]))
        types = {h["type"] for h in result.measured["hits"]}
        assert expected_type in types

    def test_luhn_invalid_number_ignored(self):
        # 16 digits failing the Luhn checksum is not a card number
        result = pii_scan(_text_dataset(["ref 4539578763621487"]))
        assert result.passed
        assert result.measured["hits"] == []

    def test_numeric_column_still_scanned(self):
        columns = (Column("account", ColumnKind.NUMBER),)
        data = TabularDataset(columns, (("4539578763621486",),))
        result = pii_scan(data)
        assert not result.passed

    def test_deterministic_and_location_exact(self):
        cells = ["a@b.co and 123-45-6789", "nothing", "MRN 555123456"]
        first = pii_scan(_text_dataset(cells), result_id="fixed")
        second = pii_scan(_text_dataset(cells), result_id="fixed")
        assert first.measured == second.measured
        locations = [(h["type"], h["row"]) for h in first.measured["hits"]]
        assert ("SSN", 0) in locations and ("EMAIL", 0) in locations

    def test_row_permutation_does_not_change_verdict(self):
        cells = ["ok", "123-45-6789", "fine"]
        forward = pii_scan(_text_dataset(cells))
        backward = pii_scan(_text_dataset(list(reversed(cells))))
        assert forward.passed == backward.passed
        assert len(forward.measured["hits"]) == len(backward.measured["hits"])


class TestApplyResults:
    def _statuses(self, implementation=Implementation.IMPLEMENTED):
        return {
            "GRC-11": ControlStatus("GRC-11", implementation),
        }

    def test_pass_on_implemented_validates_effective(self):
        result = robustness_threshold({"FGSM": 0.9, "PGD": 0.9}, bound_control="GRC-11",
                                      result_id="r-1")
        updated, reports = apply_results([result], self._statuses())
        assert updated["GRC-11"].effectiveness is Effectiveness.VALIDATED_EFFECTIVE
        assert "r-1" in updated["GRC-11"].evidence_refs
        assert reports == []

    def test_fail_marks_ineffective(self):
        result = robustness_threshold({"FGSM": 0.1, "PGD": 0.1}, bound_control="GRC-11",
                                      result_id="r-2")
        updated, _ = apply_results([result], self._statuses())
        assert updated["GRC-11"].effectiveness is Effectiveness.VALIDATED_INEFFECTIVE

    def test_pass_on_not_implemented_reported_not_applied(self):
        result = robustness_threshold({"FGSM": 0.9, "PGD": 0.9}, bound_control="GRC-11",
                                      result_id="r-3")
        statuses = self._statuses(Implementation.NOT_STARTED)
        updated, reports = apply_results([result], statuses)
        assert updated["GRC-11"].effectiveness is Effectiveness.NOT_VALIDATED
        assert len(reports) == 1 and reports[0].control_id == "GRC-11"

    def test_unknown_control_rejected(self):
        result = robustness_threshold({"FGSM": 0.9, "PGD": 0.9}, bound_control="ZZZ-99")
        with pytest.raises(UnknownControl):
            apply_results([result], self._statuses())

    def test_invariant_never_violated(self):
        # a pass against each non-implemented state leaves effectiveness alone
        for implementation in (Implementation.NOT_STARTED, Implementation.NOT_APPLICABLE):
            result = robustness_threshold({"FGSM": 0.9, "PGD": 0.9}, bound_control="GRC-11")
            updated, _ = apply_results([result], self._statuses(implementation))
            assert updated["GRC-11"].effectiveness is not Effectiveness.VALIDATED_EFFECTIVE


class TestCsvLoading:
    CSV = (
        "name,age,active,grade,notes\n"
        "ann,34,true,A,likes long walks on the beach and other documented pastimes 01\n"
        "bob,55,false,B,second distinct note that pushes this column well past32\n"
    )

    def test_kind_inference(self, tmp_path):
        # 34 distinct notes force the text fallback
        rows = [
            f"p{i},{20 + i},true,G{i % 3},note number {i} with unique content {i * 17}"
            for i in range(34)
        ]
        path = tmp_path / "d.csv"
        path.write_text("name,age,active,grade,notes\n" + "\n".join(rows) + "\n", encoding="utf-8")
        data = load_dataset_csv(path)
        kinds = {c.name: c.kind for c in data.columns}
        assert kinds["age"] is ColumnKind.NUMBER
        assert kinds["active"] is ColumnKind.BOOLEAN
        assert kinds["grade"] is ColumnKind.CATEGORY
        assert kinds["notes"] is ColumnKind.TEXT

    def test_zero_one_column_is_number(self):
        data = parse_dataset_csv("pred\n0\n1\n0\n")
        assert data.columns[0].kind is ColumnKind.NUMBER

    def test_sidecar_schema_overrides(self, tmp_path):
        csv_path = tmp_path / "d.csv"
        csv_path.write_text("pred\n0\n1\n", encoding="utf-8")
        schema = tmp_path / "d.schema.json"
        schema.write_text('{"columns": {"pred": "boolean"}}', encoding="utf-8")
        data = load_dataset_csv(csv_path, schema)
        assert data.columns[0].kind is ColumnKind.BOOLEAN

    def test_rfc4180_quoting(self):
        data = parse_dataset_csv('a,b\n"x, y",2\n')
        assert data.rows[0] == ("x, y", "2")
