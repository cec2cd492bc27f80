"""
Single-fault enumeration and exhaustive fault-tolerance checks.

A fault is one Pauli error inserted right after a circuit location (15 two-qubit
Paulis after a two-qubit gate, 3 single-qubit Paulis after a one-qubit gate,
preparation or idle step) or a flipped outcome of an ancilla measurement.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import config
import protocols
from circuit_ir import DATA, FLAG, ANCILLA, Circuit, Location, QecCycle
from circuit_ir import encoding_circuit, flagged_s1_circuit, qec_cycle_circuits, stabilizer_circuit
from code_tables import (
    CODE,
    ERROR_SET_E_PRIME,
    N_DATA,
    SINGLE_QUBIT_ERRORS,
    cyclic_shift,
    decode_for,
    in_stabilizer_group,
    logical_class,
    syndrome_of,
)
from pauli_algebra import GateSpec, PauliString, commutes, conjugate_by_gate, embed, multiply, restrict
from run_models import RunRecord, VerificationReport

logger = logging.getLogger(__name__)


class FaultError(ValueError):
    """Raised for a fault that does not fit its location"""


class FTViolation(RuntimeError):
    """Raised when a fault-tolerance check finds a counterexample"""


TWO_QUBIT_FAULTS = [a + b for a, b in itertools.product("IXYZ", repeat=2) if a + b != "II"]

# flagged s1 measurement: (gate tag, fault on (ancilla, target)) -> (data error, reduced form)
FLAG_FAULT_TABLE = {
    ("b", "XI"): ("Y3Y5", None), ("b", "YI"): ("Y3Y5", None),
    ("b", "XX"): ("X2Y3Y5", "X1"), ("b", "YX"): ("X2Y3Y5", "X1"),
    ("b", "XY"): ("Y2Y3Y5", "X1Z2"), ("b", "YY"): ("Y2Y3Y5", "X1Z2"),
    ("b", "XZ"): ("Z2Y3Y5", "X1Y2"), ("b", "YZ"): ("Z2Y3Y5", "X1Y2"),
    ("c", "XI"): ("Y5", None), ("c", "YI"): ("Y5", None),
    ("c", "XX"): ("X3Y5", None), ("c", "YX"): ("X3Y5", None),
    ("c", "XY"): ("Y3Y5", None), ("c", "YY"): ("Y3Y5", None),
    ("c", "XZ"): ("Z3Y5", None), ("c", "YZ"): ("Z3Y5", None),
    ("a", "XZ"): ("X2Y3Y5", "X1"), ("a", "YZ"): ("X2Y3Y5", "X1"),
    ("a", "XI"): ("X2Y3Y5", "X1"), ("a", "YI"): ("X2Y3Y5", "X1"),
    ("a", "IX"): ("I", None), ("a", "IY"): ("I", None),
    ("a", "ZX"): ("I", None), ("a", "ZY"): ("I", None),
    ("d", "XX"): ("Y5", None), ("d", "XY"): ("Y5", None),
    ("d", "YX"): ("Y5", None), ("d", "YY"): ("Y5", None),
    ("d", "IX"): ("I", None), ("d", "IY"): ("I", None),
    ("d", "ZX"): ("I", None), ("d", "ZY"): ("I", None),
}

# p1..p5 signs of the only single-error |+⟩_L states that pass both verification checks
CASE_B_SYNDROMES = {
    "X4": (1, 1, -1, -1, -1),
    "Z4": (-1, -1, -1, -1, 1),
}


class Fault:
    """A Pauli error after one location (local to its qubits), or a flipped measurement when error is None"""

    def __init__(self, location_index: int, error: Optional[PauliString], qubits: Sequence[int]):
        self.location_index = location_index
        self.qubits = tuple(qubits)
        if error is not None:
            if error.n != len(self.qubits):
                raise FaultError(f"Fault {error} does not match location qubits {self.qubits}")
            if error.is_identity():
                raise FaultError(f"Identity is not a fault (location {location_index})")
        self.error = error

    @property
    def is_flip(self) -> bool:
        return self.error is None

    def __repr__(self) -> str:
        what = "flip" if self.is_flip else self.error.letters
        return f"Fault({what} @ {self.location_index} on {self.qubits})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Fault):
            return NotImplemented
        return (self.location_index, self.qubits, self.error) == (other.location_index, other.qubits, other.error)

    def __hash__(self) -> int:
        return hash((self.location_index, self.qubits, self.error))

    def _location(self, circuit: Circuit) -> Location:
        if not 0 <= self.location_index < len(circuit):
            raise FaultError(f"Location {self.location_index} outside {circuit.name}")
        loc = circuit.locations[self.location_index]
        if loc.qubits != self.qubits:
            raise FaultError(f"{self} does not act on location {loc}")
        if self.is_flip != (loc.kind == "measure_reset"):
            raise FaultError(f"{self} does not fit a {loc.kind} location")
        return loc

    def apply(self, circuit: Circuit) -> Circuit:
        """The circuit with this fault inserted immediately after its location"""
        loc = self._location(circuit)
        locations = list(circuit.locations)
        if self.is_flip:
            locations[loc.index] = loc.replace(flip=not loc.flip)
            return circuit.with_locations(locations)
        inserted = [
            Location(0, "gate1q", [q], GateSpec(letter, [q]), tag="fault", block=loc.block)
            for q, letter in zip(self.qubits, self.error.letters) if letter != "I"
        ]
        return circuit.with_locations(locations[:loc.index + 1] + inserted + locations[loc.index + 1:])

    def describe(self, circuit: Circuit) -> str:
        loc = circuit.locations[self.location_index]
        gate = loc.gate.kind if loc.gate is not None else loc.kind
        roles = ",".join(circuit.role(q) for q in loc.qubits)
        what = "outcome flip" if self.is_flip else self.error.letters
        tag = f" ({loc.tag})" if loc.tag else ""
        return f"{what} after {gate}[{roles}]{tag} #{loc.index} in {loc.block or '-'}"

    def to_dict(self) -> Dict:
        return {"location": self.location_index, "qubits": list(self.qubits),
                "error": None if self.is_flip else self.error.letters}


def enumerate_faults(c: Circuit) -> List[Fault]:
    """Every single fault of c in location order"""
    faults = []
    for loc in c.locations:
        if loc.kind == "gate2q":
            faults.extend(Fault(loc.index, PauliString.from_letters(s), loc.qubits) for s in TWO_QUBIT_FAULTS)
        elif loc.kind == "measure_reset":
            faults.append(Fault(loc.index, None, loc.qubits))
        else:
            faults.extend(Fault(loc.index, PauliString.from_letters(s), loc.qubits) for s in "XYZ")
    return faults


def fault_counts(c: Circuit) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for fault in enumerate_faults(c):
        kind = c.locations[fault.location_index].kind
        counts[kind] = counts.get(kind, 0) + 1
    return counts


class FaultEffect:
    """Pauli frame a fault leaves at the end of a Clifford circuit, and the outcomes it flips"""

    def __init__(self, error: PauliString, flipped: FrozenSet[str]):
        self.error = error
        self.flipped = flipped

    def data_error(self, data_qubits: Sequence[int] = DATA) -> PauliString:
        return restrict(self.error, data_qubits)

    def __repr__(self) -> str:
        return f"FaultEffect({self.error.letters}, flipped={sorted(self.flipped)})"


def _clear(p: PauliString, q: int) -> PauliString:
    mask = ~(1 << q)
    return PauliString(p.n, p.x & mask, p.z & mask, p.k)


def propagate_fault(circuit: Circuit, fault: Fault) -> FaultEffect:
    """Push a fault through the rest of a Clifford circuit by Pauli conjugation

    Measurements report a flip when the frame anticommutes with Z on the measured
    qubit; measurement resets and preparations clear the frame on their qubit.
    Conditional Pauli gates toggle into the frame when their condition flipped.
    """
    loc = fault._location(circuit)
    flipped = set()
    frame = PauliString.identity(circuit.n)
    if fault.is_flip:
        flipped.add(loc.label)
    else:
        frame = embed(fault.error, circuit.n, fault.qubits)
    for later in circuit.locations[loc.index + 1:]:
        q = later.qubits[0]
        if later.kind in ("gate1q", "gate2q"):
            if later.condition is not None:
                if later.condition in flipped:
                    frame = multiply(frame, PauliString.single(circuit.n, q, later.gate.kind))
                continue
            frame = conjugate_by_gate(frame, later.gate)
        elif later.kind == "measure_reset":
            if not commutes(frame, PauliString.single(circuit.n, q, "Z")):
                flipped.symmetric_difference_update({later.label})
            frame = _clear(frame, q)
        elif later.kind == "prepare":
            frame = _clear(frame, q)
    return FaultEffect(frame.unsigned(), frozenset(flipped))


def _flag_labels(c: Circuit) -> List[str]:
    return [loc.label for loc in c.locations
            if loc.kind == "measure_reset" and c.role(loc.qubits[0]) == "flag"]


def inject_and_run(c: Circuit, f: Fault, hooks: Optional[Callable] = None, initial=None,
                   backend: str = "tableau", seed: Optional[int] = None) -> RunRecord:
    """Run c with one fault inserted after its location

    `hooks(state, outcomes)` turns the raw result into a protocol-specific record.
    """
    state, outcomes = protocols.run_on(backend, f.apply(c), initial, seed=seed)
    if hooks is not None:
        return hooks(state, outcomes)
    flag_raised = any(outcomes.get(label) == -1 for label in _flag_labels(c))
    return RunRecord(c.name, list(outcomes.items()), True, flag_raised, final_state=state, seed=seed,
                     metadata={"fault": f.to_dict(), "fault_description": f.describe(c)})


def parallel_map(fn: Callable, items: Sequence, threads: Optional[int] = None) -> List:
    """[fn(item) for item in items] on a thread pool, results in input order

    Results never depend on the thread count as long as fn draws its randomness from
    the item (as the per-shot seeds do). The simulators are pure Python and hold the
    GIL, so threads overlap only the numpy calls that release it; they buy ordering
    and determinism, not CPU scaling. With threads <= 1 everything runs in the caller.
    """
    threads = threads or config.THREADS
    if threads <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def equivalent_up_to_x_l(a: PauliString, b: PauliString) -> bool:
    """a ≡ b modulo the stabilizer group and X_L, which fixes |-⟩_L"""
    p = multiply(a, b)
    return in_stabilizer_group(p, signed=False) or in_stabilizer_group(multiply(p, CODE.x_l), signed=False)


def _finish(report: VerificationReport, raise_on_failure: bool) -> VerificationReport:
    if report.passed:
        logger.info(f"{report}")
    else:
        logger.error(f"{report}")
    if raise_on_failure:
        report.raise_on_failure(FTViolation)
    return report


# heralded encoding ---------------------------------------------------------------------

def verify_ft_encoding(ft: bool = True, drop_flag: bool = False, policy: str = "general",
                       threads: Optional[int] = None, raise_on_failure: bool = False) -> VerificationReport:
    """Every single fault, every outcome branch: accepted runs must leave a harmless residual class"""
    circuit = encoding_circuit(ft, drop_flag=drop_flag)
    faults = enumerate_faults(circuit)
    logger.info(f"Checking {len(faults)} faults of {circuit.name}")

    def check(fault: Fault) -> Tuple[Dict, List[Dict]]:
        accepted, rejected, classes, bad = 0, 0, set(), []
        for record in protocols.encoding_branches(ft, policy, faults=[fault], drop_flag=drop_flag):
            if not record.accepted:
                rejected += 1
                continue
            accepted += 1
            classes.add(record.logical_class)
            if record.logical_class not in protocols.HARMLESS_FOR_MINUS:
                bad.append({"fault": fault.describe(circuit), "outcomes": record.outcome_map,
                            "residual": record.residual.to_compact(), "class": record.logical_class})
        row = {"fault": fault.describe(circuit), "accepted": accepted, "rejected": rejected,
               "classes": sorted(classes)}
        return row, bad

    results = parallel_map(check, faults, threads)
    records = [row for row, _ in results]
    violations = [v for _, bad in results for v in bad]
    summary = {"circuit": circuit.name, "faults": len(faults),
               "branches": sum(r["accepted"] + r["rejected"] for r in records),
               "faulty_faults": len({v["fault"] for v in violations})}
    report = VerificationReport(circuit.name, not violations, violations, records, summary)
    return _finish(report, raise_on_failure)


# flagged stabilizer measurement ------------------------------------------------------

def flag_error_set(k: int) -> List[PauliString]:
    """E′ for a raised flag while measuring s_k"""
    return [cyclic_shift(e, k - 1) for e in ERROR_SET_E_PRIME]


def _check_fault_table(violations: List[Dict], records: List[Dict]):
    circuit = flagged_s1_circuit()
    for (tag, letters), (literal, reduced) in FLAG_FAULT_TABLE.items():
        locations = circuit.find(tag=tag)
        if len(locations) != 1:
            raise FTViolation(f"Expected one gate tagged '{tag}' in {circuit.name}, found {len(locations)}")
        loc = locations[0]
        effect = propagate_fault(circuit, Fault(loc.index, PauliString.from_letters(letters), loc.qubits))
        data = effect.data_error()
        row = {"gate": tag, "fault": letters, "data_error": data.to_compact(),
               "flag_raised": "f1" in effect.flipped}
        records.append(row)
        expected = PauliString.from_compact(literal, N_DATA)
        if not row["flag_raised"]:
            violations.append(dict(row, problem="flag not raised"))
        if not data.same_letters(expected):
            violations.append(dict(row, problem=f"expected data error {literal}"))
        if reduced is not None and not equivalent_up_to_x_l(data, PauliString.from_compact(reduced, N_DATA)):
            violations.append(dict(row, problem=f"{data.to_compact()} is not equivalent to {reduced}"))


def _check_flag_property(k: int, violations: List[Dict], records: List[Dict], threads: Optional[int]):
    circuit = stabilizer_circuit(k, flagged=True)
    allowed = flag_error_set(k)
    faults = enumerate_faults(circuit)

    def check(fault: Fault) -> Tuple[str, Optional[Dict]]:
        effect = propagate_fault(circuit, fault)
        data = effect.data_error()
        raised = f"f{k}" in effect.flipped
        base = {"stabilizer": k, "fault": fault.describe(circuit), "data_error": data.to_compact(),
                "flag_raised": raised}
        if not raised:
            if logical_class(data).name not in protocols.HARMLESS_FOR_MINUS:
                return "quiet", dict(base, problem="unflagged fault leaves more than a single-qubit error")
            return "quiet", None
        if not any(equivalent_up_to_x_l(data, e) for e in allowed):
            return "raised", dict(base, problem="flagged error outside E′")
        recovery = decode_for(k, syndrome_of(data), True)
        if logical_class(multiply(recovery, data)).name not in protocols.HARMLESS_FOR_MINUS:
            return "raised", dict(base, problem=f"E′ recovery {recovery.to_compact()} leaves a logical error")
        return "raised", None

    results = parallel_map(check, faults, threads)
    violations.extend(v for _, v in results if v is not None)
    records.append({"stabilizer": k, "faults": len(faults),
                    "flag_raised": sum(1 for kind, _ in results if kind == "raised")})


def verify_flagged_s1(stabilizers: Iterable[int] = (1, 2, 3, 4), threads: Optional[int] = None,
                      raise_on_failure: bool = False) -> VerificationReport:
    """Reproduce the flag fault table for s1 and check the flag property for each s_k

    Without a raised flag every single fault must leave at most a single-qubit data
    error; with it, the data error must lie in E′_k and be removed by its table.
    """
    violations: List[Dict] = []
    table_rows: List[Dict] = []
    _check_fault_table(violations, table_rows)
    per_stabilizer: List[Dict] = []
    for k in stabilizers:
        _check_flag_property(k, violations, per_stabilizer, threads)
    summary = {"table_rows": len(table_rows), "stabilizers": per_stabilizer}
    report = VerificationReport("flagged_s1", not violations, violations, table_rows, summary)
    return _finish(report, raise_on_failure)


# preparation-stage faults ----------------------------------------------------------------

def verify_case_b_tables(threads: Optional[int] = None, raise_on_failure: bool = False) -> VerificationReport:
    """X4|+⟩_L and Z4|+⟩_L are the only single-error |+⟩_L states passing verification,
    and no single fault in the preparation stage produces either of them"""
    violations: List[Dict] = []
    records: List[Dict] = []

    passing = []
    for e in SINGLE_QUBIT_ERRORS:
        flips_t1, flips_t2 = not commutes(e, CODE.t1), not commutes(e, CODE.t2)
        records.append({"error": e.to_compact(), "flips_T1": flips_t1, "flips_T2": flips_t2})
        if flips_t1 and flips_t2:
            passing.append(e.to_compact())
    if sorted(passing) != sorted(CASE_B_SYNDROMES):
        violations.append({"problem": f"errors passing verification on |+⟩_L: {passing}"})

    for name, expected in CASE_B_SYNDROMES.items():
        e = PauliString.from_compact(name, N_DATA)
        signs = tuple(-1 if commutes(e, p) else 1 for p in CODE.p)
        if signs != expected:
            violations.append({"error": name, "problem": f"p-syndrome {signs} differs from {expected}"})

    circuit = encoding_circuit(ft=False)
    faults = enumerate_faults(circuit)
    bad_states = {v: k for k, v in CASE_B_SYNDROMES.items()}

    def check(fault: Fault) -> List[Dict]:
        found = []
        for record in protocols.encoding_branches(False, faults=[fault]):
            state = record.final_state
            signs = tuple(int(round(protocols.expect(state, embed(p, state.n, DATA)))) for p in CODE.p)
            if signs in bad_states:
                found.append({"fault": fault.describe(circuit), "outcomes": record.outcome_map,
                              "state": f"{bad_states[signs]}|+>_L"})
        return found

    for found in parallel_map(check, faults, threads):
        violations.extend(found)
    summary = {"passing_errors": sorted(passing), "preparation_faults": len(faults)}
    report = VerificationReport("case_b", not violations, violations, records, summary)
    return _finish(report, raise_on_failure)


# flag error-correction cycle -----------------------------------------------------------

def _ancillas_clean(state) -> bool:
    return all(protocols.expect(state, PauliString.single(state.n, q, "Z")) > 0.5 for q in (ANCILLA, FLAG))


def verify_ft_criteria(cycle: Optional[QecCycle] = None, criteria: Sequence[int] = (1, 2, 3),
                       threads: Optional[int] = None, raise_on_failure: bool = False) -> VerificationReport:
    """The three distance-3 criteria for one flag error-correction cycle

    (1) a clean cycle removes any single-qubit input error; (2) one fault on a clean
    input leaves at most a single-qubit error; (3) one fault on any E|-⟩_L input leaves
    a single-qubit error on some encoded state with the ancillas reset.
    """
    cycle = cycle or qec_cycle_circuits()
    name = "ft_criteria" + ("_misordered" if cycle.misordered_s1 else "")
    violations: List[Dict] = []
    counts: Dict[str, int] = {}
    stage_faults = [(stage, fault, circuit) for stage, circuit in cycle.stages
                    for fault in enumerate_faults(circuit)]

    if 1 in criteria:
        for e in SINGLE_QUBIT_ERRORS:
            record = protocols.run_qec_cycle(cycle=cycle, input_error=e, seed=0)
            if not record.residual.is_identity():
                violations.append({"criterion": 1, "input_error": e.to_compact(),
                                   "residual": record.residual.to_compact(),
                                   "stages": record.metadata["stages"]})
        counts["criterion_1"] = len(SINGLE_QUBIT_ERRORS)

    if 2 in criteria:
        def check_clean(item) -> Optional[Dict]:
            stage, fault, circuit = item
            record = protocols.run_qec_cycle(cycle=cycle, faults={stage: [fault]}, seed=0)
            if record.logical_class not in protocols.HARMLESS_FOR_MINUS:
                return {"criterion": 2, "stage": stage, "fault": fault.describe(circuit),
                        "residual": record.residual.to_compact(), "class": record.logical_class,
                        "raised_at": record.metadata["raised_at"]}
            return None

        violations.extend(v for v in parallel_map(check_clean, stage_faults, threads) if v)
        counts["criterion_2"] = len(stage_faults)

    if 3 in criteria:
        items = [(e, item) for e in SINGLE_QUBIT_ERRORS for item in stage_faults]

        def check_noisy_input(entry) -> Optional[Dict]:
            e, (stage, fault, circuit) = entry
            try:
                record = protocols.run_qec_cycle(cycle=cycle, faults={stage: [fault]}, input_error=e, seed=0)
            except (ValueError, protocols.FlowchartError) as exc:
                return {"criterion": 3, "input_error": e.to_compact(), "stage": stage,
                        "fault": fault.describe(circuit), "problem": str(exc)}
            if not _ancillas_clean(record.final_state):
                return {"criterion": 3, "input_error": e.to_compact(), "stage": stage,
                        "fault": fault.describe(circuit), "problem": "ancilla or flag left excited"}
            return None

        violations.extend(v for v in parallel_map(check_noisy_input, items, threads) if v)
        counts["criterion_3"] = len(items)

    report = VerificationReport(name, not violations, violations, summary=dict(counts, stages=len(cycle.stages)))
    return _finish(report, raise_on_failure)
