#!/usr/bin/env python3
"""
Tests for the stabilizer tableau simulator
"""
import pytest

import circuit_ir
import tableau_engine
from code_tables import CODE
from pauli_algebra import GateSpec, PauliString
from tableau_engine import (
    ForcedOutcomeError,
    NonCliffordGateError,
    StabilizerState,
    UnknownBasisError,
    enumerate_branches,
    from_stabilizers,
    prepare_product,
    run_circuit,
)


def P(text):
    return PauliString.parse(text)


def bell_state():
    s = StabilizerState.zeros(2, seed=1)
    s.apply_gate(GateSpec("H", [0])).apply_gate(GateSpec("CX", [0, 1]))
    return s


def test_bell_state_expectations():
    s = bell_state()
    assert s.expectation(P("XX")) == 1
    assert s.expectation(P("ZZ")) == 1
    assert s.expectation(P("YY")) == -1
    assert s.expectation(P("ZI")) == 0


def test_measurement_collapses_partner_qubit():
    s = bell_state()
    outcome, deterministic = s.measure(P("ZI"), forced=-1)
    assert (outcome, deterministic) == (-1, False)
    assert s.expectation(P("IZ")) == -1
    assert s.measure(P("IZ")) == (-1, True)


def test_forcing_a_deterministic_outcome_is_rejected():
    s = StabilizerState.zeros(1)
    with pytest.raises(ForcedOutcomeError):
        s.measure(P("Z"), forced=-1)
    with pytest.raises(ForcedOutcomeError):
        s.measure(P("X"), forced=0)


def test_non_clifford_gates_are_rejected():
    with pytest.raises(NonCliffordGateError):
        StabilizerState.zeros(1).apply_gate(GateSpec("RX", [0], [0.2]))


@pytest.mark.parametrize("basis,stabilizer", [("0", "Z"), ("1", "-Z"), ("+", "X"), ("-", "-X"),
                                              ("i", "Y"), ("-i", "-Y")])
def test_prepare_bases(basis, stabilizer):
    s = prepare_product(1, [basis])
    assert s.expectation(P(stabilizer)) == 1


def test_prepare_rejects_unknown_basis():
    with pytest.raises(UnknownBasisError):
        StabilizerState.zeros(1).prepare(0, "2")


def test_from_stabilizers_builds_minus_l():
    s = from_stabilizers(CODE.p)
    for p in CODE.p:
        assert s.expectation(p) == 1
    assert s.expectation(CODE.x_l) == -1
    for stabilizer in CODE.stabilizers:
        assert s.expectation(stabilizer) == 1


def test_from_stabilizers_rejects_dependent_generators():
    with pytest.raises(ValueError):
        from_stabilizers([P("ZI"), P("ZI")])


def test_pauli_flips_anticommuting_signs():
    s = from_stabilizers(CODE.p)
    s.apply_pauli(PauliString.from_compact("Z4", 5))
    # Z4 anticommutes with p5 only among p1..p5
    assert [s.expectation(p) for p in CODE.p] == [1, 1, 1, 1, -1]


def test_extended_and_permuted_state():
    s = prepare_product(2, ["+", "0"]).extended(3)
    assert s.expectation(P("XZZ")) == 1
    s.permute([2, 0, 1])
    assert s.expectation(P("ZZX")) == 1


def test_ghz_circuit_outcomes_are_random_but_state_is_fixed():
    c = circuit_ir.ghz_circuit()
    for forced in (1, -1):
        state, outcomes = run_circuit(c, forced={"mXXXX": forced})
        assert outcomes["mXXXX"] == forced
        assert state.expectation(P("XXXXI")) == 1
        assert state.expectation(P("ZZIII")) == 1


def test_measure_reset_reports_flipped_outcome():
    b = circuit_ir.CircuitBuilder(1, {0: "ancilla"}, "flip")
    b.measure_reset(0, "m")
    c = b.build()
    flipped = c.with_locations([c.locations[0].replace(flip=True)])
    _, outcomes = run_circuit(flipped)
    assert outcomes == {"m": -1}


def test_enumerate_branches_covers_random_outcomes():
    branches = enumerate_branches(circuit_ir.encoding_circuit(ft=False))
    assert len(branches) == 8
    assert sum(b.probability for b in branches) == pytest.approx(1.0)
    assert {tuple(b.outcomes[k] for k in ("m3", "m4", "m5")) for b in branches} == \
        {(a, b, c) for a in (1, -1) for b in (1, -1) for c in (1, -1)}


def test_encoding_branches_are_deterministic_after_preparation():
    branches = enumerate_branches(circuit_ir.encoding_circuit(ft=True))
    # T1, T2 and the flag are fixed once m3..m5 are known
    assert len(branches) == 8
    for b in branches:
        assert b.outcomes["flag"] == 1
        assert b.outcomes["mT1"] == b.outcomes["m4"] * b.outcomes["m5"]
        assert b.outcomes["mT2"] == b.outcomes["m3"] * b.outcomes["m5"]


def test_seeded_runs_repeat():
    c = circuit_ir.encoding_circuit(ft=True)
    assert run_circuit(c, seed=7)[1] == run_circuit(c, seed=7)[1]


def test_module_level_helpers_delegate():
    s = StabilizerState.zeros(1)
    tableau_engine.apply_gate(s, GateSpec("H", [0]))
    assert tableau_engine.expectation(s, P("X")) == 1
    assert tableau_engine.measure_pauli(s, P("X"))[0] == 1
