#!/usr/bin/env python3
"""
Tests for the noise model, exact evaluation and the Monte Carlo driver
"""
import numpy as np
import pytest

import circuit_ir
import noise_mc
from fault_injection import TWO_QUBIT_FAULTS, Fault
from noise_mc import NoiseModel, ResetFlip, run_exact, run_experiment, sample_faults, shot_rng, sweep
from run_models import ConfigError, RunConfig


def test_one_qubit_and_idle_rates_follow_p2():
    nm = NoiseModel(p2=0.02)
    assert nm.p1 == pytest.approx(0.002)
    assert nm.p_idle == pytest.approx(0.002)
    assert NoiseModel(p2=0.02, p1=0.0).p1 == 0.0


def test_rates_are_validated():
    with pytest.raises(ConfigError):
        NoiseModel(p2=1.5)
    with pytest.raises(ConfigError):
        NoiseModel(eps0=-0.1)
    with pytest.raises(ConfigError):
        NoiseModel().with_rate("p3", 0.1)


def test_with_rate_keeps_derived_rates_derived():
    base = NoiseModel(p2=0.01, p_idle=0.0)
    swept = base.with_rate("p2", 0.05)
    assert swept.p1 == pytest.approx(0.005)
    assert swept.p_idle == 0.0
    assert base.p2 == 0.01


def test_from_config():
    nm = NoiseModel.from_config(RunConfig(p2=0.01, eps0=0.1, eps1=0.0, shots=10, seed=1))
    assert nm.p2 == 0.01
    assert nm.p1 == pytest.approx(0.001)
    assert nm.eps0 == 0.1
    assert not nm.is_noiseless
    assert NoiseModel.noiseless().is_noiseless


def test_certain_faults_fire_everywhere():
    c = circuit_ir.encoding_circuit(ft=True)
    faults = sample_faults(c, NoiseModel(p2=1.0, p1=1.0, p_idle=1.0, p_prep=1.0, p_meas=1.0),
                           np.random.default_rng(0))
    assert len(faults) == len(c)
    assert all(isinstance(f, Fault) for f in faults)
    assert sample_faults(c, NoiseModel(), np.random.default_rng(0)) == []


def test_reset_flips_follow_retention():
    c = circuit_ir.ghz_circuit()
    faults = sample_faults(c, NoiseModel(reset_flip=True, retention=0.0), np.random.default_rng(0))
    flips = [f for f in faults if isinstance(f, ResetFlip)]
    assert len(flips) == len(c.measurement_labels)
    flipped = flips[0].apply(c)
    assert len(flipped) == len(c) + 1


def test_readout_misassignment_depends_on_physical_value():
    c = circuit_ir.ghz_circuit()
    rng = np.random.default_rng(0)
    nm = NoiseModel(eps0=1.0, eps1=0.0)
    assert len(nm.readout_faults(c, {"mXXXX": 1}, rng)) == 1
    assert nm.readout_faults(c, {"mXXXX": -1}, rng) == []


def test_shot_streams_are_independent_of_order():
    a = shot_rng(3, 7).random()
    shot_rng(3, 6).random()
    assert shot_rng(3, 7).random() == a
    assert shot_rng(3, 8).random() != a


@pytest.mark.parametrize("protocol", ["encoding_ft", "encoding_nonft"])
def test_exact_encoding(protocol):
    report = run_exact(protocol)
    assert report.f_l == pytest.approx(1.0)
    assert report.acceptance_rate == pytest.approx(1.0)
    assert report.consistent()
    assert report.mode == "exact_dense"


def test_exact_tableau_matches_dense():
    assert run_exact("encoding_ft", backend="tableau").f_l == pytest.approx(run_exact("encoding_ft").f_l)


def test_herald_plus_accepts_one_branch_in_eight():
    report = run_exact("encoding_ft", policy="herald_plus")
    assert report.acceptance_rate == pytest.approx(1 / 8)
    assert report.f_l == pytest.approx(1.0)


def test_exact_flagged_measurement_is_linear_in_pe():
    report = run_exact("flagged_s1", pe=0.3)
    assert report.f_l == pytest.approx(1.0)
    assert report.p_flag == pytest.approx(0.3)
    assert report.f_l_raised == pytest.approx(1.0)


def test_exact_ghz():
    assert run_exact("ghz").f_l == pytest.approx(1.0)


def test_unknown_protocol():
    with pytest.raises(ConfigError):
        run_exact("steane")


def test_exact_mode_rejects_noise():
    with pytest.raises(ConfigError):
        run_experiment("encoding_ft", NoiseModel(p2=0.01), shots=0)


def test_monte_carlo_needs_a_seed():
    with pytest.raises(ConfigError):
        run_experiment("encoding_ft", NoiseModel(p2=0.01), shots=4)
    with pytest.raises(ConfigError):
        run_experiment("encoding_ft", shots=-1)


def test_noiseless_monte_carlo():
    report = run_experiment("encoding_ft", NoiseModel(), shots=6, seed=2, threads=1)
    assert report.f_l == pytest.approx(1.0)
    assert report.acceptance_rate == pytest.approx(1.0)
    assert report.mode == "mc_estimate"


def test_seeded_runs_do_not_depend_on_threads():
    nm = NoiseModel(p2=0.05, eps0=0.05)
    one = run_experiment("encoding_ft", nm, shots=20, seed=9, threads=1)
    many = run_experiment("encoding_ft", nm, shots=20, seed=9, threads=4)
    np.testing.assert_equal((one.f_l, one.stderr, one.acceptance_rate, one.p_flag),
                            (many.f_l, many.stderr, many.acceptance_rate, many.p_flag))


def test_sweep_rows():
    rows = sweep("ghz", [0.0, 0.1], shots=5, seed=4, threads=1)
    assert [r.rate for r in rows] == [0.0, 0.1]
    assert rows[0].f_l == pytest.approx(1.0)
    assert all(r.shots == 5 for r in rows)


def test_sweep_over_pe():
    rows = sweep("flagged_s1", [0.0, 1.0], shots=3, seed=1, parameter="pe", threads=1)
    assert rows[0].f_l == pytest.approx(1.0)
    assert rows[1].f_l == pytest.approx(1.0)


def test_protocol_registry():
    assert set(noise_mc.PROTOCOLS) == {"encoding_ft", "encoding_nonft", "flagged_s1", "ghz"}


def within_sigmas(count, trials, rate, sigmas=3.0):
    sigma = np.sqrt(trials * rate * (1 - rate))
    return abs(count - trials * rate) <= sigmas * sigma


def test_fault_frequencies_match_rates():
    c = circuit_ir.encoding_circuit(ft=True)
    rates = {"gate2q": 0.1, "gate1q": 0.05, "idle": 0.02, "prepare": 0.03, "measure_reset": 0.04}
    nm = NoiseModel(p2=rates["gate2q"], p1=rates["gate1q"], p_idle=rates["idle"], p_prep=rates["prepare"],
                    p_meas=rates["measure_reset"])
    per_kind = {kind: sum(1 for loc in c.locations if loc.kind == kind) for kind in rates}
    fired = dict.fromkeys(rates, 0)
    letters = dict.fromkeys(TWO_QUBIT_FAULTS, 0)
    rng = np.random.default_rng(123)
    draws = 3000
    for _ in range(draws):
        for fault in sample_faults(c, nm, rng):
            kind = c.locations[fault.location_index].kind
            fired[kind] += 1
            if kind == "gate2q":
                letters[fault.error.letters] += 1
    for kind, rate in rates.items():
        assert within_sigmas(fired[kind], draws * per_kind[kind], rate), (kind, fired[kind])
    # chi-square with 14 degrees of freedom; 36.1 is the 0.1% tail
    expected = fired["gate2q"] / len(TWO_QUBIT_FAULTS)
    chi2 = sum((n - expected) ** 2 / expected for n in letters.values())
    assert chi2 < 36.1, letters


def test_readout_misassignment_rates():
    c = circuit_ir.ghz_circuit()
    nm = NoiseModel(eps0=0.02, eps1=0.1)
    rng = np.random.default_rng(8)
    draws = 20000
    from_one = sum(len(nm.readout_faults(c, {"mXXXX": -1}, rng)) for _ in range(draws))
    from_zero = sum(len(nm.readout_faults(c, {"mXXXX": 1}, rng)) for _ in range(draws))
    assert within_sigmas(from_one, draws, 0.1)
    assert within_sigmas(from_zero, draws, 0.02)


def test_false_heralds_follow_eps1():
    # only -1 outcomes can be misread, so herald_plus accepts a branch with w minus signs at eps1**w;
    # the eight branches carry 0, 2, 2, 3, 3, 3, 3, 4 minus signs over m3, m4, m5, mT1, mT2
    eps1 = 0.5
    shots = 3000
    report = run_experiment("encoding_ft", NoiseModel(eps1=eps1), shots=shots, seed=17, threads=1,
                            policy="herald_plus")
    expected = (1 + 2 * eps1 ** 2 + 4 * eps1 ** 3 + eps1 ** 4) / 8
    assert within_sigmas(report.acceptance_rate * shots, shots, expected)


@pytest.mark.slow
def test_flagged_encoding_beats_unflagged_at_low_noise():
    nm = NoiseModel(p2=1e-3, p1=1e-4, p_idle=1e-4)
    shots = 100_000
    ft = run_experiment("encoding_ft", nm, shots=shots, seed=2024)
    nonft = run_experiment("encoding_nonft", nm, shots=shots, seed=2024)
    gap = (1 - nonft.f_l) - (1 - ft.f_l)
    assert gap >= 5 * np.hypot(ft.stderr, nonft.stderr), (ft, nonft)
