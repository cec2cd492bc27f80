#!/usr/bin/env python3
"""
Tests for the circuit IR, the protocol circuits and native compilation
"""
import pytest

import circuit_ir
import dense_oracle
from circuit_ir import Circuit, CircuitBuilder, CircuitError, Location, UnsupportedGateError
from fault_injection import fault_counts
from pauli_algebra import GateSpec


def test_encoding_circuit_layout():
    c = circuit_ir.encoding_circuit(ft=True)
    assert c.n == 7
    assert c.measurement_labels == ["m3", "m4", "m5", "mT1", "mT2", "flag"]
    assert c.qubit("flag") == circuit_ir.FLAG
    assert [loc.basis for loc in c.locations[:5]] == list("00+0+")
    flag_gates = c.find(tag="flag1") + c.find(tag="flag2")
    assert all(loc.qubits == (circuit_ir.ANCILLA, circuit_ir.FLAG) for loc in flag_gates)


def test_nonft_encoding_has_no_verification():
    c = circuit_ir.encoding_circuit(ft=False)
    assert c.n == 6
    assert c.measurement_labels == ["m3", "m4", "m5"]
    assert not c.find(block="T1")


def test_drop_flag_keeps_verification_without_flag_qubit():
    c = circuit_ir.encoding_circuit(ft=True, drop_flag=True)
    assert c.n == 6
    assert "mT2" in c.measurement_labels
    assert "flag" not in c.measurement_labels


def test_location_counts_per_kind():
    ft = fault_counts(circuit_ir.encoding_circuit(True))
    assert ft == {"prepare": 21, "gate1q": 30, "gate2q": 255, "idle": 30, "measure_reset": 6}
    assert sum(ft.values()) == 342
    assert sum(fault_counts(circuit_ir.encoding_circuit(False)).values()) == 192


def test_flagged_s1_gate_order():
    c = circuit_ir.flagged_s1_circuit()
    gates = [(loc.gate.kind, loc.qubits, loc.tag) for loc in c.locations if loc.kind == "gate2q"]
    assert gates == [
        ("CX", (5, 0), None),
        ("CX", (5, 6), "a"),
        ("CX", (5, 1), "b"),
        ("CY", (5, 2), "c"),
        ("CX", (5, 6), "d"),
        ("CY", (5, 4), None),
    ]
    assert c.measurement_labels == ["s1", "f1"]


def test_injected_y_follows_second_data_gate():
    c = circuit_ir.flagged_s1_circuit(inject_y=True)
    kinds = [loc.tag for loc in c.locations if loc.kind in ("gate1q", "gate2q")]
    assert kinds.index("inject") == kinds.index("b") + 1


@pytest.mark.parametrize("k,first_target", [(1, 0), (2, 1), (3, 2), (4, 3)])
def test_stabilizer_circuits_are_cyclic_shifts(k, first_target):
    c = circuit_ir.stabilizer_circuit(k, flagged=False)
    first = next(loc for loc in c.locations if loc.kind == "gate2q")
    assert first.qubits == (circuit_ir.ANCILLA, first_target)
    assert c.measurement_labels == [f"u{k}"]


def test_stabilizer_index_is_checked():
    with pytest.raises(CircuitError):
        circuit_ir.stabilizer_steps(5)


def test_ghz_feedforward_is_conditional():
    c = circuit_ir.ghz_circuit()
    conditional = [loc for loc in c.locations if loc.condition is not None]
    assert len(conditional) == 1
    assert conditional[0].condition == "mXXXX"
    assert conditional[0].gate == GateSpec("Z", [0])


def test_validation_rejects_bad_circuits():
    roles = {0: "data1", 1: "ancilla"}
    with pytest.raises(CircuitError):
        Circuit(2, [Location(0, "measure_reset", [1], label="m"), Location(1, "measure_reset", [1], label="m")], roles)
    with pytest.raises(CircuitError):
        Circuit(2, [Location(0, "gate1q", [0], GateSpec("X", [0]), condition="m")], roles)
    with pytest.raises(CircuitError):
        Circuit(2, [Location(0, "prepare", [3], basis="0")], roles)


def test_text_format_round_trip():
    c = circuit_ir.ghz_circuit()
    parsed = Circuit.from_text(c.to_text())
    assert parsed.n == c.n
    assert [loc.to_dict() for loc in parsed.locations] == [loc.to_dict() for loc in c.locations]


def test_text_format_needs_register_size():
    with pytest.raises(CircuitError):
        Circuit.from_text("prepare 0 basis=0\n")


def test_builder_inserts_idles_for_untouched_data():
    b = CircuitBuilder(3, {0: "data1", 1: "data2", 2: "ancilla"}, "t")
    circuit_ir.measure_parity(b, 2, [("data", 0, "Z", None)], "m", "blk", data_qubits=[0, 1])
    c = b.build()
    idles = [loc for loc in c.locations if loc.kind == "idle"]
    assert [loc.qubits for loc in idles] == [(1,)]


@pytest.mark.parametrize("name", ["encoding_ft", "encoding_nonft", "flagged_s1", "ghz"])
def test_native_compilation_is_equivalent(name):
    builders = {
        "encoding_ft": lambda: circuit_ir.encoding_circuit(True),
        "encoding_nonft": lambda: circuit_ir.encoding_circuit(False),
        "flagged_s1": circuit_ir.flagged_s1_circuit,
        "ghz": circuit_ir.ghz_circuit,
    }
    source = builders[name]()
    compiled = circuit_ir.compile_to_native(source)
    kinds = {loc.gate.kind for loc in compiled.locations if loc.gate is not None and loc.condition is None}
    assert not kinds & {"CX", "CY", "CZ", "H"}
    assert dense_oracle.compiled_equivalent(source, compiled)
    controls = {}
    for loc in source.locations:
        if loc.gate is not None and loc.condition is None and loc.gate.kind in ("CX", "CY", "CZ"):
            controls[loc.qubits[0]] = controls.get(loc.qubits[0], 0) + 1
    turns = {}
    for loc in compiled.find(tag="readout_phase"):
        quarter_turns = loc.metadata["readout_phase_quarter_turns"]
        assert quarter_turns in (1, 2, 3)
        assert loc.gate.kind == {1: "SDG", 2: "Z", 3: "S"}[quarter_turns]
        turns[loc.qubits[0]] = turns.get(loc.qubits[0], 0) + quarter_turns
    for q in set(controls) | set(turns):
        assert turns.get(q, 0) % 4 == controls.get(q, 0) % 4, q
    assert all(not loc.metadata for loc in compiled.locations if loc.tag != "readout_phase")


def test_compiler_rejects_rotations():
    b = CircuitBuilder(1, {0: "data1"}, "rot")
    b._add("gate1q", [0], gate=GateSpec("RX", [0], [0.1]))
    with pytest.raises(UnsupportedGateError):
        circuit_ir.compile_to_native(b.build())


def test_transversal_gate_records_relabelling():
    c = circuit_ir.transversal_gate_circuit("X_L")
    assert len(c.locations) == 5
    assert sorted(c.metadata["relabel"]) == [0, 1, 2, 3, 4]
    virtual = circuit_ir.transversal_gate_circuit("H_L", physical=False)
    assert len(virtual.locations) == 0


def test_enumerate_locations_follows_execution_order():
    c = circuit_ir.encoding_circuit(ft=True)
    locations = circuit_ir.enumerate_locations(c)
    assert [loc.index for loc in locations] == list(range(len(c)))
    assert circuit_ir.count_kinds(c)["measure_reset"] == 6
