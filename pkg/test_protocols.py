#!/usr/bin/env python3
"""
Tests for encoding, transversal gates, flagged measurement, the QEC cycle and GHZ preparation
"""
import numpy as np
import pytest

import metrics
import protocols
from code_tables import CODE
from fault_injection import Fault
from noise_mc import NoiseModel
from pauli_algebra import PauliString
from protocols import (
    HARMLESS_FOR_MINUS,
    LogicalRegister,
    encoding_acceptance,
    find_permutation,
    logical_state,
    logical_target,
    residual_error,
    run_encoding,
    run_flagged_s1,
    run_ghz,
    run_qec_cycle,
    tomography_operators,
)


def C(text):
    return PauliString.from_compact(text, 5)


@pytest.mark.parametrize("backend", ["tableau", "dense"])
@pytest.mark.parametrize("ft", [True, False])
def test_noiseless_encoding_prepares_minus_l(backend, ft):
    for seed in range(4):
        record = run_encoding(ft=ft, backend=backend, seed=seed)
        assert record.accepted
        assert record.residual.is_identity()
        assert metrics.logical_fidelity(record.final_state) == pytest.approx(1.0)


def test_herald_plus_accepts_only_all_plus_outcomes():
    forced = {"m3": 1, "m4": 1, "m5": 1}
    record = run_encoding(ft=True, policy="herald_plus", forced=forced)
    assert record.accepted
    assert record.pauli_frame.is_identity()
    record = run_encoding(ft=True, policy="herald_plus", forced=dict(forced, m4=-1))
    assert not record.accepted


def test_acceptance_rule():
    outcomes = {"m3": -1, "m4": 1, "m5": -1, "mT1": -1, "mT2": 1, "flag": 1}
    assert encoding_acceptance(outcomes, ft=True)
    assert not encoding_acceptance(dict(outcomes, flag=-1), ft=True)
    assert not encoding_acceptance(dict(outcomes, mT2=-1), ft=True)
    assert encoding_acceptance(dict(outcomes, mT2=-1), ft=False)
    with pytest.raises(ValueError):
        encoding_acceptance(outcomes, ft=True, policy="strict")


def test_encoding_branches_carry_probabilities():
    records = protocols.encoding_branches(ft=True)
    assert len(records) == 8
    assert sum(r.metadata["probability"] for r in records) == pytest.approx(1.0)
    assert all(r.accepted and r.logical_class == "I_L" for r in records)


def test_residual_error_reads_target_signs():
    state = logical_state()
    state.apply_pauli(C("X1"))
    assert residual_error(state) == C("X1").unsigned()
    state.apply_pauli(CODE.z_l)
    assert residual_error(state) == (C("X1") * CODE.z_l).unsigned()
    assert metrics.logical_fidelity(state) == pytest.approx(0.0)


def test_transversal_x_needs_no_relabelling():
    assert find_permutation("X_L") == (0, 1, 2, 3, 4)


@pytest.mark.parametrize("gates", [["X_L"], ["H_L"], ["S_L"], ["H_L", "S_L"], ["S_L", "H_L", "Y_L"]])
def test_physical_and_virtual_gates_agree(gates):
    physical = LogicalRegister(logical_state())
    virtual = LogicalRegister(logical_state())
    for g in gates:
        physical.apply(g, physical=True)
        virtual.apply(g, physical=False)
    target = logical_target(gates)
    for op in tomography_operators(target):
        assert physical.expectation(op) == virtual.expectation(op) == 1


def test_hadamard_maps_minus_to_one():
    register = LogicalRegister(logical_state()).apply("H_L")
    assert register.expectation(CODE.z_l) == -1


def test_fidelity_against_a_rotated_target():
    target = logical_target(["H_L"])
    operators = tomography_operators(target)
    assert len(operators) == 31
    assert len({(p.x, p.z, p.k) for p in operators}) == 31
    one = LogicalRegister(logical_state()).apply("H_L").materialize()
    assert metrics.logical_fidelity(one, target=target) == pytest.approx(1.0)
    assert metrics.logical_fidelity(one) == pytest.approx(0.5)
    one.apply_pauli(C("Y2"))
    assert metrics.logical_fidelity(one, target=target) == pytest.approx(1.0)
    one.apply_pauli(CODE.x_l)
    assert metrics.logical_fidelity(one, target=target) == pytest.approx(0.0)
    assert metrics.logical_fidelity(logical_state(), target=logical_target(["X_L"])) == pytest.approx(1.0)


def test_materialize_applies_pending_gates():
    register = LogicalRegister(logical_state()).apply("H_L", physical=False)
    state = register.materialize()
    assert protocols.expect(state, CODE.z_l) == -1
    assert not register.virtual


@pytest.mark.parametrize("backend", ["tableau", "dense"])
def test_injected_y_is_caught_by_the_flag(backend):
    record = run_flagged_s1(inject_y=True, backend=backend, seed=3)
    assert record.flag_raised
    assert record.residual.same_letters(C("Y3Y5"))
    assert record.metadata["syndrome"] == [1, -1, -1, -1]
    assert record.metadata["recovery_with_flag"] == "Y3Y5"
    assert record.metadata["class_with_flag"] == "I_L"
    assert record.metadata["class_no_flag"] not in HARMLESS_FOR_MINUS


def test_clean_flagged_measurement():
    record = run_flagged_s1(seed=0)
    assert not record.flag_raised
    assert record.outcome("s1") == 1
    assert record.residual.is_identity()


def test_pe_draws_the_injection():
    assert run_flagged_s1(pe=1.0, seed=0).metadata["inject_y"]
    assert not run_flagged_s1(pe=0.0, seed=0).metadata["inject_y"]


def test_clean_cycle_stops_after_flagged_round():
    record = run_qec_cycle(seed=0)
    assert record.metadata["stages"] == ["flagged_s1", "flagged_s2", "flagged_s3", "flagged_s4"]
    assert record.pauli_frame.is_identity()
    assert record.residual.is_identity()


def test_cycle_corrects_single_qubit_input_error():
    record = run_qec_cycle(input_error=C("X1"), seed=0)
    assert record.metadata["stages"] == ["flagged_s1", "flagged_s2", "unflagged_s1", "unflagged_s2",
                                         "unflagged_s3", "unflagged_s4"]
    assert record.metadata["recovery"] == "X1"
    assert record.residual.is_identity()


def test_cycle_uses_flag_table_after_raised_flag():
    cycle = protocols.circuit_ir.qec_cycle_circuits()
    circuit = cycle.stage("flagged_s1")
    loc = circuit.find(tag="b")[0]
    fault = Fault(loc.index, PauliString.from_letters("XI"), loc.qubits)
    record = run_qec_cycle(faults={"flagged_s1": [fault]}, seed=0)
    assert record.metadata["raised_at"] == 1
    assert record.metadata["recovery"] == "Y3Y5"
    assert record.logical_class in HARMLESS_FOR_MINUS


@pytest.mark.parametrize("mXXXX", [1, -1])
def test_ghz_feedforward(mXXXX):
    record = run_ghz(forced={"mXXXX": mXXXX})
    assert record.metadata["corrected"] == (mXXXX == -1)
    assert metrics.ghz_fidelity(record.final_state) == pytest.approx(1.0)


def test_noiseless_model_changes_nothing():
    rng = np.random.default_rng(5)
    record = run_encoding(ft=True, noise=NoiseModel(), rng=rng)
    assert record.accepted
    assert record.residual.is_identity()


def test_readout_errors_feed_forward_the_reported_value():
    # eps0 = 1 reports every outcome as -1, so a physical +1 wrongly triggers the Z1 correction
    noise = NoiseModel(eps0=1.0)
    for seed in range(8):
        record = run_ghz(noise=noise, rng=np.random.default_rng(seed))
        assert record.outcome("mXXXX") == -1
        assert round(metrics.ghz_fidelity(record.final_state), 9) in (0.0, 1.0)


def test_unknown_backend():
    with pytest.raises(ValueError):
        run_encoding(backend="gpu")


def test_apply_logical_gate_wraps_a_state():
    register = protocols.apply_logical_gate(logical_state(), "X_L")
    assert register.expectation(CODE.x_l) == -1
    assert protocols.apply_logical_gate(register, "H_L", physical=False) is register
