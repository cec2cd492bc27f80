#!/usr/bin/env python3
"""
Tests for run records, reports and run configuration
"""
import jsonschema
import pytest

import config
from pauli_algebra import PauliString
from run_models import (
    ConfigError,
    FidelityReport,
    RunConfig,
    RunRecord,
    SweepRow,
    VerificationReport,
    validate_document,
)


def test_run_config_defaults():
    rc = RunConfig(command="simulate")
    assert rc.p2 == 0.0
    assert rc.p1 is None and rc.p_idle is None
    assert rc.eps0 == pytest.approx(1 - config.READOUT_F0)
    assert rc.threads == config.THREADS
    assert RunConfig(command="simulate", shots=10).p2 == config.DEFAULT_P2
    assert RunConfig(command="ghz", noise=0.02).p2 == 0.02


@pytest.mark.parametrize("values", [
    {"p2": 2.0},
    {"eps1": -0.5},
    {"shots": -1},
    {"threads": 0},
    {"policy": "strict"},
    {"format": "xml"},
    {"colour": "red"},
])
def test_run_config_rejects_bad_values(values):
    with pytest.raises(ConfigError):
        RunConfig(**values)


def test_run_record_round_trip():
    record = RunRecord("encoding_ft", [("m3", 1), ("m4", -1)], True, False,
                       PauliString.from_compact("X1", 5), seed=4,
                       residual=PauliString.identity(5), logical_class="I_L", metadata={"probability": 0.125})
    again = RunRecord.from_dict(record.to_dict())
    assert again.outcome("m4") == -1
    assert again.pauli_frame == record.pauli_frame
    assert again.residual.is_identity()
    assert again.metadata == {"probability": 0.125}
    validate_document(record.to_dict(), "run_record")
    with pytest.raises(KeyError):
        record.outcome("flag")


def test_fidelity_report_consistency():
    report = FidelityReport(0.9, "exact_dense", overlaps=(0.5, 0.4, 0.06, 0.04))
    assert report.consistent()
    assert report.p1_plus == 0.04
    assert not FidelityReport(0.8, "exact_dense", overlaps=(0.5, 0.4, 0.06, 0.04)).consistent()
    assert not FidelityReport(0.9, "exact_dense", overlaps=(0.5, 0.4, 0.0, 0.0)).consistent()
    assert FidelityReport(0.5, "mc_estimate").consistent()
    with pytest.raises(ConfigError):
        FidelityReport(1.0, "guess")


def test_fidelity_report_document():
    document = FidelityReport(1.0, "mc_estimate", stderr=0.0, shots=10, seed=2, protocol="ghz").to_dict()
    validate_document(document, "fidelity_report")
    document["mode"] = "guess"
    with pytest.raises(jsonschema.ValidationError):
        validate_document(document, "fidelity_report")


def test_verification_report():
    ok = VerificationReport("tables", True, summary={"rows": 16})
    assert str(ok) == "tables: PASS [rows=16]"
    assert ok.raise_on_failure() is ok
    failed = VerificationReport("cycle", False, [{"problem": "x"}])
    with pytest.raises(ValueError):
        failed.raise_on_failure(ValueError)
    validate_document(failed.to_dict(), "verification_report")


def test_sweep_row():
    row = SweepRow(0.01, 0.98, 0.01, 1.0, 100)
    assert row.to_row() == [0.01, 0.98, 0.01, 1.0, 100]
    validate_document({"protocol": "ghz", "parameter": "p2", "seed": 1, "rows": [row.to_dict()]}, "sweep")
