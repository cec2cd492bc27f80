#!/usr/bin/env python3
"""
Tests for logical fidelities, overlap distributions and GHZ fidelity
"""
import itertools

import numpy as np
import pytest

import metrics
from code_tables import CODE, ERROR_SET_E, ERROR_SET_E_PRIME, logical_class
from dense_oracle import DenseState, pauli_matrix
from pauli_algebra import GateSpec, PauliString
from protocols import HARMLESS_FOR_MINUS, logical_state
from run_models import RunRecord
from tableau_engine import StabilizerState


def C(text):
    return PauliString.from_compact(text, 5)


def minus_with(error=None):
    state = logical_state()
    if error is not None:
        state.apply_pauli(error)
    return state


def test_ideal_state_has_unit_fidelity():
    assert metrics.logical_fidelity(minus_with()) == pytest.approx(1.0)


def test_single_qubit_errors_are_tolerated():
    for error in ("X1", "Y3", "Z5"):
        assert metrics.logical_fidelity(minus_with(C(error))) == pytest.approx(1.0)


def test_orthogonal_logical_state_has_zero_fidelity():
    assert metrics.logical_fidelity(minus_with(CODE.z_l)) == pytest.approx(0.0)
    assert metrics.logical_fidelity(minus_with(C("Z4") * C("Y3Y5"))) == pytest.approx(0.0)


def test_closed_form_matches_projector_sum():
    for error in (None, C("X1"), C("Y3Y5"), CODE.z_l):
        state = minus_with(error)
        assert metrics.logical_fidelity(state) == pytest.approx(metrics.projector_sum_fidelity(state))


def test_closed_forms_match_projector_sums_on_random_states():
    rng = np.random.default_rng(31)
    for _ in range(100):
        v = rng.normal(size=32) + 1j * rng.normal(size=32)
        state = DenseState(5, v / np.linalg.norm(v))
        assert abs(metrics.logical_fidelity(state) - metrics.projector_sum_fidelity(state)) < 1e-10
        raised = metrics.projector_sum_fidelity(state, errors=ERROR_SET_E_PRIME)
        assert abs(metrics.logical_fidelity_raised(state) - raised) < 1e-10


def test_correctable_images_of_both_logical_states_span_the_space():
    minus = logical_state(backend="dense").amplitudes
    total = np.zeros((32, 32), dtype=complex)
    for logical in (PauliString.identity(5), CODE.z_l):
        for error in ERROR_SET_E:
            v = pauli_matrix(error) @ pauli_matrix(logical) @ minus
            total += np.outer(v, v.conj())
    assert np.allclose(total, np.eye(32), atol=1e-10)


def test_syndrome_projectors_sum_to_identity():
    generators = [pauli_matrix(p) for p in CODE.p]
    total = np.zeros((32, 32), dtype=complex)
    for signs in itertools.product((1, -1), repeat=5):
        projector = np.eye(32, dtype=complex)
        for s, g in zip(signs, generators):
            projector = projector @ (np.eye(32) + s * g) / 2
        assert np.allclose(projector @ projector, projector, atol=1e-10)
        total += projector
    assert np.allclose(total, np.eye(32), atol=1e-10)


def test_fidelity_agrees_with_logical_class_for_every_pauli():
    ideal = logical_state()
    for letters in itertools.product("IXYZ", repeat=5):
        error = PauliString.from_letters("".join(letters))
        state = ideal.copy().apply_pauli(error)
        expected = 1.0 if logical_class(error).name in HARMLESS_FOR_MINUS else 0.0
        assert metrics.logical_fidelity(state) == pytest.approx(expected, abs=1e-10)


def test_raised_flag_fidelity_uses_flag_errors():
    # Y3Y5 is recoverable only with the flag table, Z4 only without it
    assert metrics.logical_fidelity_raised(minus_with(C("Y3Y5"))) == pytest.approx(1.0)
    assert metrics.logical_fidelity_raised(minus_with(C("Z4"))) == pytest.approx(0.0)
    assert metrics.logical_fidelity(minus_with(C("Y3Y5"))) == pytest.approx(0.0)
    state = minus_with(C("X2Y3Y5"))
    assert metrics.logical_fidelity_raised(state) == pytest.approx(
        metrics.projector_sum_fidelity(state, errors=ERROR_SET_E_PRIME))


def test_projector_expansion_reproduces_closed_form():
    expansion = metrics.projector_expansion()
    assert expansion["IIIII"] == pytest.approx(0.5)
    for term in metrics.FIDELITY_TERMS:
        assert abs(expansion[term]) == pytest.approx(1 / 8)


def test_combined_and_linear_fidelities():
    assert metrics.combined_fidelity(0.5, 0.8, 0.6) == pytest.approx(0.7)
    assert metrics.fidelity_vs_pe(0.0, 0.9, 0.1) == pytest.approx(0.9)
    assert metrics.fidelity_vs_pe(0.25, 1.0, 0.0) == pytest.approx(0.75)


def test_overlap_distribution():
    assert metrics.overlap_distribution(minus_with()) == pytest.approx((1.0, 0.0, 0.0, 0.0))
    assert metrics.overlap_distribution(minus_with(C("X2"))) == pytest.approx((0.0, 1.0, 0.0, 0.0))
    plus = minus_with(CODE.z_l)
    assert metrics.overlap_distribution(plus) == pytest.approx((0.0, 0.0, 1.0, 0.0))
    plus.apply_pauli(C("Y2"))
    assert metrics.overlap_distribution(plus) == pytest.approx((0.0, 0.0, 0.0, 1.0))


def test_mc_fidelity():
    assert metrics.mc_fidelity([True] * 10) == (1.0, 0.0)
    estimate, stderr = metrics.mc_fidelity([True, False] * 50)
    assert estimate == pytest.approx(0.5)
    assert stderr == pytest.approx(0.05)


def test_record_success_decodes_residual():
    ok = RunRecord("encoding_ft", [], residual=C("X1"))
    bad = RunRecord("encoding_ft", [], residual=C("Y3Y5"))
    flagged = RunRecord("flagged_s1", [], flag_raised=True, residual=C("Y3Y5"))
    assert metrics.record_success(ok)
    assert not metrics.record_success(bad)
    assert metrics.record_success(flagged)
    with pytest.raises(ValueError):
        metrics.record_success(RunRecord("encoding_ft", []))


def ghz_state(sign=1, prepare_zero=False):
    s = StabilizerState.zeros(5)
    if prepare_zero:
        return s
    s.apply_gate(GateSpec("H", [0]))
    for q in (1, 2, 3):
        s.apply_gate(GateSpec("CX", [0, q]))
    if sign < 0:
        s.apply_gate(GateSpec("Z", [0]))
    return s


def test_ghz_fidelity():
    assert len(metrics.ghz_group()) == 15
    assert metrics.ghz_fidelity(ghz_state()) == pytest.approx(1.0)
    assert metrics.ghz_fidelity(ghz_state(prepare_zero=True)) == pytest.approx(0.5)
    assert metrics.ghz_fidelity(ghz_state(sign=-1)) == pytest.approx(0.0)


def test_flag_fidelity_curve_endpoints():
    rows = metrics.flag_fidelity_curve([0.0, 0.5, 1.0])
    assert rows[0]["with_flag"] == pytest.approx(1.0)
    assert rows[0]["without_flag"] == pytest.approx(1.0)
    assert rows[-1]["with_flag"] == pytest.approx(1.0)
    assert rows[-1]["without_flag"] == pytest.approx(0.0)
    assert rows[1]["without_flag"] == pytest.approx(0.5)


def test_flag_fidelity_curve_sampling():
    rows = metrics.flag_fidelity_curve([1.0], shots=5, seed=11)
    assert rows[0]["with_flag_mc"] == pytest.approx(1.0)
    assert rows[0]["without_flag_mc"] == pytest.approx(0.0)
