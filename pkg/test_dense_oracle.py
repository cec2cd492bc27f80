#!/usr/bin/env python3
"""
Tests for the dense state-vector oracle and its agreement with the tableau
"""
import numpy as np
import pytest

import circuit_ir
import config
import dense_oracle
import tableau_engine
from code_tables import CODE
from dense_oracle import (
    DenseSizeError,
    DenseState,
    ImpossibleBranchError,
    MeasurementInCircuitError,
    equal_up_to_phase,
    expectation_dense,
    run_circuit,
    state_fidelity,
    unitary_of_circuit,
)
from pauli_algebra import GateSpec, PauliString


def P(text):
    return PauliString.parse(text)


def test_native_cx_decomposition_matches_cx():
    c = circuit_ir.CircuitBuilder(2, {0: "control", 1: "target"}, "cx")
    c.gate("CX", 0, 1)
    source = c.build()
    compiled = circuit_ir.compile_to_native(source)
    assert equal_up_to_phase(unitary_of_circuit(source), unitary_of_circuit(compiled))


def test_rotation_gates():
    assert np.allclose(dense_oracle.rx(np.pi), -1j * dense_oracle.ONE_QUBIT_MATRICES["X"])
    assert np.allclose(dense_oracle.u3(0, 0, 0), np.eye(2))
    s = DenseState.zeros(1).apply_gate(GateSpec("RY", [0], [np.pi / 2]))
    assert expectation_dense(s, P("X")) == pytest.approx(1.0)


def test_minus_l_from_stabilizers():
    s = DenseState.from_stabilizers(CODE.p)
    for p in CODE.p:
        assert expectation_dense(s, p) == pytest.approx(1.0)
    assert expectation_dense(s, CODE.x_l) == pytest.approx(-1.0)


def test_tableau_and_dense_agree_on_encoding_branches():
    c = circuit_ir.encoding_circuit(ft=True)
    for branch in tableau_engine.enumerate_branches(c):
        physical = {k: v for k, v in branch.outcomes.items()}
        state, outcomes, probability = run_circuit(c, physical)
        assert outcomes == branch.outcomes
        assert probability == pytest.approx(branch.probability)
        reference = DenseState.from_tableau(branch.state)
        assert state_fidelity(state, reference) == pytest.approx(1.0)


def test_forced_impossible_outcome_raises():
    b = circuit_ir.CircuitBuilder(1, {0: "ancilla"}, "zero")
    b.measure_reset(0, "m")
    with pytest.raises(ImpossibleBranchError):
        run_circuit(b.build(), {"m": -1})


def test_forced_outcomes_by_position():
    c = circuit_ir.ghz_circuit()
    state, outcomes, probability = run_circuit(c, [-1])
    assert outcomes == {"mXXXX": -1}
    assert probability == pytest.approx(0.5)
    assert expectation_dense(state, P("XXXXI")) == pytest.approx(1.0)


def test_unitary_rejects_measurements():
    with pytest.raises(MeasurementInCircuitError):
        unitary_of_circuit(circuit_ir.ghz_circuit())


def test_size_limit():
    too_big = circuit_ir.Circuit(config.MAX_DENSE_QUBITS + 1, [], {})
    with pytest.raises(DenseSizeError):
        run_circuit(too_big)


def test_restrict_drops_clean_qubits():
    s = DenseState.basis("01").restrict([1])
    assert expectation_dense(s, P("Z")) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        DenseState.basis("10").restrict([1])


def test_permute_moves_qubits():
    s = DenseState.basis("100").permute([2, 0, 1])
    assert expectation_dense(s, P("IIZ")) == pytest.approx(-1.0)


def test_compiled_equivalence_detects_a_wrong_gate():
    source = circuit_ir.flagged_s1_circuit()
    compiled = circuit_ir.compile_to_native(source)
    locations = list(compiled.locations)
    i = next(i for i, loc in enumerate(locations) if loc.gate is not None and loc.gate.kind == "SXDG")
    locations[i] = locations[i].replace(gate=GateSpec("SX", locations[i].qubits))
    assert not dense_oracle.compiled_equivalent(source, compiled.with_locations(locations))


def test_random_clifford_circuits_match_tableau():
    rng = np.random.default_rng(20240611)
    one_qubit = ["H", "S", "SDG", "X", "Y", "Z"]
    two_qubit = ["CX", "CY", "CZ"]
    for _ in range(500):
        n = int(rng.integers(1, 8))
        tableau = tableau_engine.StabilizerState.zeros(n, seed=0)
        dense = DenseState.zeros(n)
        for _ in range(30):
            if n >= 2 and rng.random() < 0.4:
                a, b = rng.choice(n, size=2, replace=False)
                g = GateSpec(str(rng.choice(two_qubit)), (int(a), int(b)))
            else:
                g = GateSpec(str(rng.choice(one_qubit)), (int(rng.integers(n)),))
            tableau.apply_gate(g)
            dense.apply_gate(g)
        for _ in range(10):
            p = PauliString.from_letters("".join(rng.choice(list("IXYZ"), size=n)))
            assert abs(tableau.expectation(p) - expectation_dense(dense, p)) < 1e-10
