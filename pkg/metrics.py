"""
Logical-fidelity and error-distribution metrics
"""
import itertools
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from circuit_ir import DATA
from code_tables import ERROR_SET_E, ERROR_SET_E_PRIME, decode, logical_class, syndrome_of
from pauli_algebra import PauliString, commutes, embed, product
from protocols import (
    GHZ_GENERATORS,
    HARMLESS_FOR_MINUS,
    expect,
    minus_l_generators,
    run_flagged_s1,
)
from run_models import RunRecord

logger = logging.getLogger(__name__)

# F_L for |-⟩_L: 1/2 + 1/8 · (sum of these expectation values)
FIDELITY_TERMS = (
    "IZXZI", "ZIIZX", "XZIIZ", "ZXZII", "IIZXZ", "YIXIY", "IYYIX", "XIYYI",
    "IXIYY", "YYIXI", "ZZYXY", "YXYZZ", "ZYXYZ", "XYZZY", "YZZYX", "XXXXX",
)

# F_L with a raised flag: 1/2 + 1/32 · (sum of coefficient × expectation value)
RAISED_FIDELITY_TERMS = {
    "IIZXZ": 6, "ZXZII": 6, "YYIXI": 6, "ZIIZX": -2, "IXIYY": 6, "YZZYX": 2,
    "XYZZY": 2, "IZXZI": -2, "ZYXYZ": 2, "XIYYI": 6, "YXYZZ": 2, "ZZYXY": 2,
    "IYYIX": 6, "YIXIY": -2, "XXXXX": 2, "XZIIZ": -2,
}


def _expect_data(state, letters: Union[str, PauliString], data_qubits: Sequence[int]) -> float:
    p = PauliString.parse(letters) if isinstance(letters, str) else letters
    return float(expect(state, embed(p, state.n, data_qubits)))


def logical_fidelity(state, target: Optional[Sequence[PauliString]] = None,
                     data_qubits: Sequence[int] = DATA) -> float:
    """Probability of at most a single-qubit error on the target (default |-⟩_L)

    Without a target the closed-form expansion is evaluated term by term.
    """
    if target is not None:
        return projector_sum_fidelity(state, target, ERROR_SET_E, data_qubits)
    total = sum(_expect_data(state, term, data_qubits) for term in FIDELITY_TERMS)
    return 0.5 + total / 8


def logical_fidelity_raised(state, target: Optional[Sequence[PauliString]] = None,
                            data_qubits: Sequence[int] = DATA) -> float:
    """Fidelity when a raised flag selects the E′ recovery table; a target switches to the projector sum"""
    if target is not None:
        return projector_sum_fidelity(state, target, ERROR_SET_E_PRIME, data_qubits)
    total = sum(c * _expect_data(state, term, data_qubits) for term, c in RAISED_FIDELITY_TERMS.items())
    return 0.5 + total / 32


def projector_sum_fidelity(state, target: Optional[Sequence[PauliString]] = None,
                           errors: Iterable[PauliString] = ERROR_SET_E,
                           data_qubits: Sequence[int] = DATA) -> float:
    """Σ_E Tr(E|t⟩⟨t|E ρ), expanded over the 32 elements of the target's stabilizer group"""
    target = list(target or minus_l_generators())
    errors = list(errors)
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(target)):
        chosen = [g for g, b in zip(target, bits) if b]
        g_s = product(chosen, target[0].n)
        # E g E = ±g, so E|t⟩⟨t|E has coefficient χ_E(S) on g_S
        weight = sum(1 if commutes(e, g_s) else -1 for e in errors)
        if weight:
            total += weight * _expect_data(state, g_s, data_qubits)
    return total / 2 ** len(target)


def projector_expansion(target: Optional[Sequence[PauliString]] = None,
                        errors: Iterable[PauliString] = ERROR_SET_E) -> Dict[str, float]:
    """Coefficients c_O with Σ_E E|t⟩⟨t|E = Σ c_O · O over signed Pauli strings"""
    target = list(target or minus_l_generators())
    errors = list(errors)
    expansion = {}
    for bits in itertools.product((0, 1), repeat=len(target)):
        g_s = product([g for g, b in zip(target, bits) if b], target[0].n)
        coefficient = sum(1 if commutes(e, g_s) else -1 for e in errors) / 2 ** len(target)
        if coefficient:
            sign = 1 if g_s.k == 0 else -1
            expansion[g_s.letters] = sign * coefficient
    return expansion


def combined_fidelity(p_f: float, f_raised: float, f_not_raised: float) -> float:
    return p_f * f_raised + (1 - p_f) * f_not_raised


def fidelity_vs_pe(pe: float, f0: float, f1: float) -> float:
    return (1 - pe) * f0 + pe * f1


def overlap_distribution(state, data_qubits: Sequence[int] = DATA) -> Tuple[float, float, float, float]:
    """(P_{0,-}, P_{1,-}, P_{0,+}, P_{1,+}): weight on |±⟩_L with no or exactly one single-qubit error"""
    minus = minus_l_generators()
    plus = [-g for g in minus]
    singles = ERROR_SET_E[1:]
    identity = [ERROR_SET_E[0]]
    return (
        projector_sum_fidelity(state, minus, identity, data_qubits),
        projector_sum_fidelity(state, minus, singles, data_qubits),
        projector_sum_fidelity(state, plus, identity, data_qubits),
        projector_sum_fidelity(state, plus, singles, data_qubits),
    )


def record_success(record: RunRecord, harmless: Sequence[str] = HARMLESS_FOR_MINUS) -> bool:
    """Whether perfect decoding (E′ after a raised flag, else E) removes the record's residual"""
    if "success" in record.metadata:
        return bool(record.metadata["success"])
    if record.residual is None:
        raise ValueError(f"{record} carries no residual error")
    recovery = decode(syndrome_of(record.residual), record.flag_raised and record.protocol.startswith("flagged"))
    return logical_class(recovery * record.residual).name in harmless


def mc_fidelity(samples: Sequence[Union[RunRecord, bool]]) -> Tuple[float, float]:
    """Fraction of successful shots and its binomial standard error"""
    if not samples:
        return float("nan"), float("nan")
    successes = np.array([s if isinstance(s, (bool, np.bool_)) else record_success(s) for s in samples],
                         dtype=float)
    estimate = float(successes.mean())
    stderr = float(np.sqrt(estimate * (1 - estimate) / len(successes)))
    return estimate, stderr


def ghz_group(generators: Sequence[PauliString] = GHZ_GENERATORS) -> List[PauliString]:
    """The 15 non-identity signed elements of the GHZ stabilizer group"""
    group = []
    for bits in itertools.product((0, 1), repeat=len(generators)):
        if any(bits):
            group.append(product([g for g, b in zip(generators, bits) if b]))
    return group


def ghz_fidelity(state, qubits: Sequence[int] = (0, 1, 2, 3)) -> float:
    """(1 + Σ⟨O⟩)/16 over the 15 non-identity stabilizers of |Ψ+⟩"""
    total = sum(_expect_data(state, op, qubits) for op in ghz_group())
    return (1 + total) / 16


def flag_fidelity_curve(pe_grid: Sequence[float], shots: int = 0, seed: Optional[int] = None,
                        backend: str = "dense") -> List[Dict]:
    """Fidelity after a flagged s1 measurement versus the ancilla Y-injection probability

    Exact values come from the two endpoints by linearity; with shots > 0 each point
    is also estimated by sampling the injection.
    """
    endpoints = {}
    for inject in (False, True):
        record = run_flagged_s1(inject_y=inject, backend=backend, seed=seed)
        state = record.final_state
        f_plain = logical_fidelity(state)
        f_flag = logical_fidelity_raised(state) if record.flag_raised else f_plain
        endpoints[inject] = {"with_flag": f_flag, "without_flag": f_plain,
                             "flag_raised": record.flag_raised}
    rows = []
    rng = np.random.default_rng(seed)
    for pe in pe_grid:
        row = {
            "pe": pe,
            "with_flag": fidelity_vs_pe(pe, endpoints[False]["with_flag"], endpoints[True]["with_flag"]),
            "without_flag": fidelity_vs_pe(pe, endpoints[False]["without_flag"], endpoints[True]["without_flag"]),
        }
        if shots:
            with_flag, without_flag = [], []
            for _ in range(shots):
                record = run_flagged_s1(pe=pe, seed=int(rng.integers(2 ** 63)))
                with_flag.append(record.metadata["class_with_flag"] in HARMLESS_FOR_MINUS)
                without_flag.append(record.metadata["class_no_flag"] in HARMLESS_FOR_MINUS)
            row["with_flag_mc"], row["with_flag_stderr"] = mc_fidelity(with_flag)
            row["without_flag_mc"], row["without_flag_stderr"] = mc_fidelity(without_flag)
        rows.append(row)
    logger.info(f"Flag fidelity curve computed for {len(rows)} point(s)")
    return rows
