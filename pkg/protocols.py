"""
End-to-end protocols on the 5-qubit code: heralded encoding, transversal logical gates,
flagged stabilizer measurement, the flag error-correction cycle and the GHZ demo
"""
import itertools
import logging
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import circuit_ir
import dense_oracle
import tableau_engine
from circuit_ir import DATA, Circuit, QecCycle
from code_tables import (
    CODE,
    ERROR_SET_E,
    N_DATA,
    coset_class,
    decode,
    decode_for,
    frame_correction,
    in_stabilizer_group,
    logical_class,
    syndrome_of,
)
from dense_oracle import DenseState
from pauli_algebra import (
    GateSpec,
    PauliString,
    commutes,
    conjugate_by_gate,
    embed,
    inverse_gate,
    inverse_permutation,
    permute,
    product,
)
from run_models import RunRecord
from tableau_engine import StabilizerState

logger = logging.getLogger(__name__)

BACKENDS = ("tableau", "dense")
POLICIES = ("general", "herald_plus")
HARMLESS_FOR_MINUS = ("I_L", "X_L")
GHZ_GENERATORS = [PauliString.parse(s) for s in ("XXXX", "ZZII", "IZZI", "IIZZ")]
MAX_CYCLE_STAGES = 8


class ConventionError(RuntimeError):
    """Raised when no qubit permutation makes a transversal gate preserve the code"""


class FlowchartError(RuntimeError):
    """Raised when the error-correction flowchart exceeds its stage budget"""


State = Union[StabilizerState, DenseState]


# backend helpers ------------------------------------------------------------------

def _check_backend(backend: str):
    if backend not in BACKENDS:
        raise ValueError(f"Unknown backend '{backend}', expected one of {BACKENDS}")


def expect(state: State, p: PauliString) -> float:
    if isinstance(state, DenseState):
        return dense_oracle.expectation_dense(state, p)
    return state.expectation(p)


def run_on(backend: str, circuit: Circuit, state: Optional[State] = None,
           forced: Optional[Dict[str, int]] = None, seed: Optional[int] = None) -> Tuple[State, Dict[str, int]]:
    """Execute a circuit on either backend and return (state, reported outcomes)"""
    _check_backend(backend)
    if backend == "dense":
        final, outcomes, _ = dense_oracle.run_circuit(circuit, forced, initial=state, seed=seed)
        return final, outcomes
    return tableau_engine.run_circuit(circuit, initial=state, forced=forced, seed=seed)


def apply_faults(circuit: Circuit, faults) -> Circuit:
    """Insert faults (objects with an `apply(circuit)` method), latest location first"""
    for fault in sorted(faults or [], key=lambda f: f.location_index, reverse=True):
        circuit = fault.apply(circuit)
    return circuit


def run_noisy(backend: str, circuit: Circuit, state: Optional[State] = None, noise=None,
              rng: Optional[np.random.Generator] = None, faults: Sequence = ()) -> Tuple[State, Dict[str, int]]:
    """Execute with explicit faults plus faults drawn from `noise`

    Readout misassignment depends on the physical outcome, so it is drawn after the run;
    circuits with conditional gates are replayed on the same physical outcomes so the
    feedforward sees the reported values.
    """
    rng = rng if rng is not None else np.random.default_rng()
    sampled = list(faults)
    if noise is not None:
        sampled += noise.sample(circuit, rng)
    noisy = apply_faults(circuit, sampled)
    seed = int(rng.integers(2 ** 63))
    final, outcomes = run_on(backend, noisy, state, seed=seed)
    if noise is None:
        return final, outcomes
    flips = noise.readout_faults(noisy, outcomes, rng)
    if not flips:
        return final, outcomes
    flipped = {noisy.locations[f.location_index].label for f in flips}
    if not any(loc.condition is not None for loc in noisy.locations):
        return final, {k: -v if k in flipped else v for k, v in outcomes.items()}
    physical = {loc.label: -outcomes[loc.label] if loc.flip else outcomes[loc.label]
                for loc in noisy.locations if loc.kind == "measure_reset"}
    return run_on(backend, apply_faults(noisy, flips), state, forced=physical, seed=seed)


# logical states ---------------------------------------------------------------------

def minus_l_generators() -> List[PauliString]:
    return list(CODE.p)


def logical_state(generators: Optional[Sequence[PauliString]] = None, backend: str = "tableau",
                  n: int = N_DATA, seed: Optional[int] = None) -> State:
    """Encoded state stabilized by the given five data generators (default |-⟩_L), padded with |0⟩"""
    _check_backend(backend)
    generators = list(generators or minus_l_generators())
    if backend == "dense":
        return DenseState.from_stabilizers(generators).extended(n)
    return tableau_engine.from_stabilizers(generators, seed).extended(n)


def logical_target(gates: Sequence[str] = ()) -> List[PauliString]:
    """Generators of the state reached from |-⟩_L by the given transversal logical gates"""
    generators = minus_l_generators()
    for g in gates:
        perm = find_permutation(g)
        kind = circuit_ir.LOGICAL_GATES[g]
        generators = [_transversal_image(p, kind, perm) for p in generators]
    return generators


def tomography_operators(target: Optional[Sequence[PauliString]] = None) -> List[PauliString]:
    """The 31 signed non-identity elements of the group generated by the target's generators"""
    target = list(target or minus_l_generators())
    ops = []
    for bits in itertools.product((0, 1), repeat=len(target)):
        if any(bits):
            ops.append(product([g for g, b in zip(target, bits) if b]))
    return ops


def flip_operator(target: Sequence[PauliString]) -> PauliString:
    """A logical operator anticommuting with every target generator"""
    for logical in (CODE.z_l, CODE.x_l, CODE.y_l):
        if all(not commutes(logical, g) for g in target):
            return logical
    raise ConventionError("Target generators are not all equivalent to one logical operator")


@lru_cache(maxsize=64)
def _residual_table(target: Tuple[PauliString, ...]) -> Dict[Tuple[int, ...], PauliString]:
    flip = flip_operator(target)
    table = {}
    for e in ERROR_SET_E:
        signs = tuple(1 if commutes(e, g) else -1 for g in target)
        table[signs] = e
        table[tuple(-s for s in signs)] = (e * flip).unsigned()
    return table


def residual_error(state: State, target: Optional[Sequence[PauliString]] = None,
                   data_qubits: Sequence[int] = DATA) -> PauliString:
    """Pauli R (phase dropped) with data state ∝ R|target⟩, read from the target generators' signs"""
    target = tuple(target or minus_l_generators())
    n = state.n
    signs = []
    for g in target:
        value = expect(state, embed(g, n, data_qubits))
        if abs(abs(value) - 1) > 1e-8:
            raise ValueError(f"Data state is not a Pauli image of the target (<{g}> = {value})")
        signs.append(1 if value > 0 else -1)
    return _residual_table(target)[tuple(signs)]


# transversal gates -----------------------------------------------------------------

def _transversal_image(p: PauliString, kind: str, perm: Sequence[int]) -> PauliString:
    for q in range(p.n):
        p = conjugate_by_gate(p, GateSpec(kind, [q]))
    return permute(p, perm)


def _preserves_code(kind: str, perm: Sequence[int], expected: Dict[str, Tuple[str, ...]]) -> bool:
    for s in CODE.stabilizers:
        if not in_stabilizer_group(_transversal_image(s, kind, perm)):
            return False
    for name, allowed in expected.items():
        if coset_class(_transversal_image(CODE.logicals[name], kind, perm)) not in allowed:
            return False
    return True


LOGICAL_ACTION = {
    "X_L": {"X_L": ("X_L",), "Z_L": ("Z_L",)},
    "Y_L": {"X_L": ("X_L",), "Z_L": ("Z_L",)},
    "H_L": {"X_L": ("Z_L",), "Z_L": ("X_L",)},
    "S_L": {"X_L": ("Y_L",), "Z_L": ("Z_L",)},
}


@lru_cache(maxsize=None)
def find_permutation(g: str) -> Tuple[int, ...]:
    """First permutation (lexicographic) making P·g⊗5 a logical gate of the code"""
    if g not in LOGICAL_ACTION:
        raise circuit_ir.UnknownGateError(f"Unknown logical gate '{g}'")
    kind = circuit_ir.LOGICAL_GATES[g]
    for perm in itertools.permutations(range(N_DATA)):
        if _preserves_code(kind, perm, LOGICAL_ACTION[g]):
            logger.debug(f"{g}: permutation {perm}")
            return perm
    raise ConventionError(f"No qubit permutation turns {kind}^5 into {g}")


def apply_transversal(state: State, circuit: Circuit) -> State:
    """Run the physical gates of a transversal-gate circuit, then relabel the data qubits"""
    for loc in circuit.locations:
        state.apply_gate(loc.gate)
    perm = list(circuit.metadata["relabel"]) + list(range(N_DATA, state.n))
    return state.permute(perm)


class LogicalRegister:
    """An encoded state plus logical gates tracked only in software

    Virtually applied gates rewrite the operators handed to `expectation`
    instead of touching the state.
    """

    def __init__(self, state: State):
        self.state = state
        self.virtual: List[Tuple[str, Tuple[int, ...]]] = []

    def apply(self, g: str, physical: bool = True) -> "LogicalRegister":
        circuit = circuit_ir.transversal_gate_circuit(g, physical=physical, n=self.state.n)
        if physical:
            if self.virtual:
                self.materialize()
            apply_transversal(self.state, circuit)
        else:
            self.virtual.append((circuit_ir.LOGICAL_GATES[g], tuple(circuit.metadata["relabel"])))
        return self

    def rewrite(self, operator: PauliString) -> PauliString:
        """U†·O·U for the accumulated virtual unitary U"""
        for kind, perm in reversed(self.virtual):
            operator = permute(operator, list(inverse_permutation(perm)) + list(range(N_DATA, operator.n)))
            for q in range(N_DATA):
                operator = conjugate_by_gate(operator, inverse_gate(GateSpec(kind, [q])))
        return operator

    def expectation(self, operator: PauliString) -> float:
        return expect(self.state, self.rewrite(operator))

    def materialize(self) -> State:
        pending, self.virtual = self.virtual, []
        for kind, perm in pending:
            for q in range(N_DATA):
                self.state.apply_gate(GateSpec(kind, [q]))
            self.state.permute(list(perm) + list(range(N_DATA, self.state.n)))
        return self.state


def apply_logical_gate(state: Union[State, LogicalRegister], g: str, physical: bool = True) -> LogicalRegister:
    register = state if isinstance(state, LogicalRegister) else LogicalRegister(state)
    return register.apply(g, physical)


# encoding ---------------------------------------------------------------------------

def encoding_acceptance(outcomes: Dict[str, int], ft: bool, policy: str = "general") -> bool:
    """Heralding rule; m1 = m2 = +1 are fixed by the product-state preparation"""
    if policy not in POLICIES:
        raise ValueError(f"Unknown policy '{policy}'")
    m3, m4, m5 = outcomes["m3"], outcomes["m4"], outcomes["m5"]
    if ft:
        if outcomes["mT1"] != m4 * m5 or outcomes["mT2"] != m3 * m5:
            return False
        if outcomes.get("flag", 1) != 1:
            return False
    if policy == "herald_plus" and any(v != 1 for v in outcomes.values()):
        return False
    return True


def encoding_frame(outcomes: Dict[str, int], policy: str = "general") -> PauliString:
    if policy == "herald_plus":
        return PauliString.identity(N_DATA)
    return frame_correction(outcomes["m3"], outcomes["m4"], outcomes["m5"])


def encoding_record(state: State, outcomes: Dict[str, int], ft: bool, policy: str,
                    seed: Optional[int] = None, probability: Optional[float] = None) -> RunRecord:
    """Acceptance, frame and frame-corrected residual for one executed encoding branch"""
    accepted = encoding_acceptance(outcomes, ft, policy)
    frame = encoding_frame(outcomes, policy)
    corrected = state.copy()
    corrected.apply_pauli(embed(frame, state.n, DATA))
    residual = residual_error(corrected)
    metadata = {"ft": ft, "policy": policy}
    if probability is not None:
        metadata["probability"] = probability
    return RunRecord("encoding_ft" if ft else "encoding_nonft", list(outcomes.items()), accepted,
                     flag_raised=outcomes.get("flag", 1) == -1, pauli_frame=frame,
                     final_state=corrected, seed=seed, residual=residual,
                     logical_class=logical_class(residual).name, metadata=metadata)


def run_encoding(ft: bool = True, policy: str = "general", backend: str = "tableau", fault=None,
                 seed: Optional[int] = None, forced: Optional[Dict[str, int]] = None,
                 drop_flag: bool = False, faults: Sequence = (), noise=None,
                 rng: Optional[np.random.Generator] = None) -> RunRecord:
    """Prepare |-⟩_L by heralded measurements; the record's final state has the frame applied"""
    circuit = circuit_ir.encoding_circuit(ft, drop_flag=drop_flag)
    explicit = ([fault] if fault is not None else []) + list(faults)
    if noise is None:
        state, outcomes = run_on(backend, apply_faults(circuit, explicit), forced=forced, seed=seed)
    else:
        state, outcomes = run_noisy(backend, circuit, None, noise, rng or np.random.default_rng(seed), explicit)
    record = encoding_record(state, outcomes, ft, policy, seed)
    logger.debug(f"Encoding run: {record}")
    return record


def encoding_branches(ft: bool = True, policy: str = "general", faults: Sequence = (),
                      drop_flag: bool = False) -> List[RunRecord]:
    """Every outcome branch of the encoding circuit on the tableau, with probabilities in metadata"""
    circuit = apply_faults(circuit_ir.encoding_circuit(ft, drop_flag=drop_flag), faults)
    return [encoding_record(b.state, b.outcomes, ft, policy, probability=b.probability)
            for b in tableau_engine.enumerate_branches(circuit)]


# flagged stabilizer measurement ---------------------------------------------------

def _data_input(input_state: Optional[State], backend: str, seed: Optional[int]) -> State:
    if input_state is None:
        return logical_state(backend=backend, n=7, seed=seed)
    if input_state.n < 7:
        return input_state.extended(7)
    return input_state.copy()


def run_flagged_s1(input_state: Optional[State] = None, inject_y: bool = False, backend: str = "tableau",
                   seed: Optional[int] = None, pe: Optional[float] = None, k: int = 1,
                   faults: Sequence = (), noise=None, rng: Optional[np.random.Generator] = None) -> RunRecord:
    """Measure s_k with a flag on an encoded input; no recovery is applied

    With `pe` given, the ancilla Y is injected with that probability instead of by `inject_y`.
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    if pe is not None:
        inject_y = bool(rng.random() < pe)
    circuit = circuit_ir.stabilizer_circuit(k, flagged=True, inject_y=inject_y)
    state, outcomes = run_noisy(backend, circuit, _data_input(input_state, backend, seed), noise, rng, faults)
    flag_raised = outcomes[f"f{k}"] == -1
    residual = residual_error(state)
    syndrome = syndrome_of(residual)
    recovery_plain = decode(syndrome, False)
    recovery_flag = decode_for(k, syndrome, flag_raised)
    metadata = {
        "stabilizer": k,
        "inject_y": inject_y,
        "syndrome": list(syndrome),
        "recovery_no_flag": recovery_plain.to_compact(),
        "recovery_with_flag": recovery_flag.to_compact(),
        "class_no_flag": logical_class(recovery_plain * residual).name,
        "class_with_flag": logical_class(recovery_flag * residual).name,
    }
    return RunRecord(f"flagged_s{k}", list(outcomes.items()), True, flag_raised,
                     PauliString.identity(N_DATA), state, seed, residual,
                     logical_class(residual).name, metadata)


# flag error-correction cycle ---------------------------------------------------------

def run_qec_cycle(input_state: Optional[State] = None, noise=None, backend: str = "tableau",
                  seed: Optional[int] = None, cycle: Optional[QecCycle] = None,
                  faults: Optional[Dict[str, Sequence]] = None,
                  input_error: Optional[PauliString] = None,
                  rng: Optional[np.random.Generator] = None) -> RunRecord:
    """One flag error-correction cycle

    Flagged measurements of s1..s4 stop at the first -1 outcome or raised flag; an
    unflagged round of all four then gives the syndrome, decoded with the raised flag's
    E′_k table or with E, and the recovery is applied to the data.
    """
    cycle = cycle or circuit_ir.qec_cycle_circuits()
    faults = faults or {}
    rng = rng if rng is not None else np.random.default_rng(seed)
    state = _data_input(input_state, backend, seed)
    if input_error is not None:
        state.apply_pauli(embed(input_error, state.n, DATA))
    outcomes: List[Tuple[str, int]] = []
    executed: List[str] = []

    def run_stage(name: str) -> Dict[str, int]:
        nonlocal state
        if len(executed) >= MAX_CYCLE_STAGES:
            raise FlowchartError(f"Cycle exceeded {MAX_CYCLE_STAGES} stages at {name}")
        state, stage_outcomes = run_noisy(backend, cycle.stage(name), state, noise, rng, faults.get(name, ()))
        executed.append(name)
        outcomes.extend(stage_outcomes.items())
        return stage_outcomes

    raised_at = None
    triggered = False
    for k in range(1, 5):
        result = run_stage(f"flagged_s{k}")
        if result[f"f{k}"] == -1:
            raised_at, triggered = k, True
            break
        if result[f"s{k}"] == -1:
            triggered = True
            break

    recovery = PauliString.identity(N_DATA)
    syndrome = None
    if triggered:
        unflagged = {}
        for k in range(1, 5):
            unflagged.update(run_stage(f"unflagged_s{k}"))
        syndrome = tuple(unflagged[f"u{k}"] for k in range(1, 5))
        if raised_at is not None:
            recovery = decode_for(raised_at, syndrome, True)
        else:
            recovery = decode(syndrome, False)
        state.apply_pauli(embed(recovery, state.n, DATA))

    residual = residual_error(state)
    metadata = {"stages": executed, "raised_at": raised_at,
                "syndrome": list(syndrome) if syndrome else None,
                "recovery": recovery.to_compact()}
    return RunRecord("qec_cycle", outcomes, True, raised_at is not None, recovery, state, seed,
                     residual, logical_class(residual).name, metadata)


# GHZ -----------------------------------------------------------------------------------

def run_ghz(backend: str = "tableau", noise=None, seed: Optional[int] = None,
            forced: Optional[Dict[str, int]] = None, faults: Sequence = (),
            rng: Optional[np.random.Generator] = None) -> RunRecord:
    """Deterministic |Ψ+⟩ from an XXXX measurement and feedforward"""
    circuit = circuit_ir.ghz_circuit()
    if noise is None:
        state, outcomes = run_on(backend, apply_faults(circuit, faults), forced=forced, seed=seed)
    else:
        state, outcomes = run_noisy(backend, circuit, None, noise, rng or np.random.default_rng(seed), faults)
    return RunRecord("ghz", list(outcomes.items()), True, False, PauliString.identity(4), state, seed,
                     metadata={"corrected": outcomes["mXXXX"] == -1})
