"""
Circuit-level Pauli noise and the Monte Carlo experiment driver
"""
import itertools
import logging
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

import config
import dense_oracle
import metrics
import protocols
from circuit_ir import Circuit, Location, encoding_circuit
from fault_injection import TWO_QUBIT_FAULTS, Fault, parallel_map
from pauli_algebra import GateSpec, PauliString
from run_models import ConfigError, FidelityReport, RunConfig, RunRecord, SweepRow

logger = logging.getLogger(__name__)

# Pauli that flips a freshly prepared qubit out of its basis state
PREPARATION_FLIP = {"0": "X", "1": "X", "+": "Z", "-": "Z", "i": "X", "-i": "X"}


class ResetFlip:
    """An X on a just-reset ancilla (post-readout disturbance)"""

    def __init__(self, location_index: int, qubit: int):
        self.location_index = location_index
        self.qubit = qubit

    def __repr__(self) -> str:
        return f"ResetFlip(@ {self.location_index} on {self.qubit})"

    def apply(self, circuit: Circuit) -> Circuit:
        loc = circuit.locations[self.location_index]
        flip = Location(0, "gate1q", [self.qubit], GateSpec("X", [self.qubit]), tag="reset_flip", block=loc.block)
        locations = list(circuit.locations)
        return circuit.with_locations(locations[:loc.index + 1] + [flip] + locations[loc.index + 1:])


class NoiseModel:
    """Independent Pauli faults after each location plus asymmetric readout misassignment

    p1 and p_idle default to p2/10; eps0 (eps1) is the chance of reporting -1 (+1)
    when the ancilla was physically in |0⟩ (|1⟩).
    """

    RATES = ("p2", "p1", "p_idle", "p_prep", "p_meas", "eps0", "eps1")

    def __init__(self, p2: float = 0.0, p1: Optional[float] = None, p_idle: Optional[float] = None,
                 p_prep: float = 0.0, p_meas: float = 0.0, eps0: float = 0.0, eps1: float = 0.0,
                 reset_flip: bool = False, retention: float = config.RESET_RETENTION):
        self._derived = {name for name, value in (("p1", p1), ("p_idle", p_idle)) if value is None}
        self.p2 = p2
        self.p1 = p2 / 10 if p1 is None else p1
        self.p_idle = p2 / 10 if p_idle is None else p_idle
        self.p_prep = p_prep
        self.p_meas = p_meas
        self.eps0 = eps0
        self.eps1 = eps1
        self.reset_flip = reset_flip
        self.retention = retention
        for name in self.RATES + ("retention",):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")

    @classmethod
    def from_config(cls, run_config: RunConfig) -> "NoiseModel":
        return cls(run_config.p2, run_config.p1, run_config.p_idle, run_config.p_prep, run_config.p_meas,
                   run_config.eps0, run_config.eps1, run_config.reset_flip)

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls()

    @property
    def is_noiseless(self) -> bool:
        return all(getattr(self, name) == 0 for name in self.RATES) and not self.reset_flip

    def with_rate(self, name: str, value: float) -> "NoiseModel":
        """A copy with one rate replaced; p1/p_idle left at their defaults follow a new p2"""
        if name not in self.RATES:
            raise ConfigError(f"Unknown noise parameter '{name}'")
        values = self.to_dict()
        for derived in self._derived:
            values[derived] = None
        values[name] = value
        return NoiseModel(**values)

    def sample(self, circuit: Circuit, rng: np.random.Generator) -> List:
        return sample_faults(circuit, self, rng)

    def readout_faults(self, circuit: Circuit, outcomes: Dict[str, int], rng: np.random.Generator) -> List[Fault]:
        """Outcome flips from misassignment, drawn on each measurement's physical value"""
        flips = []
        for loc in circuit.locations:
            if loc.kind != "measure_reset":
                continue
            physical = -outcomes[loc.label] if loc.flip else outcomes[loc.label]
            eps = self.eps0 if physical == 1 else self.eps1
            if rng.random() < eps:
                flips.append(Fault(loc.index, None, loc.qubits))
        return flips

    def to_dict(self) -> Dict:
        return {"p2": self.p2, "p1": self.p1, "p_idle": self.p_idle, "p_prep": self.p_prep,
                "p_meas": self.p_meas, "eps0": self.eps0, "eps1": self.eps1,
                "reset_flip": self.reset_flip, "retention": self.retention}

    def __repr__(self) -> str:
        rates = ", ".join(f"{name}={getattr(self, name):g}" for name in self.RATES)
        return f"NoiseModel({rates}{', reset_flip' if self.reset_flip else ''})"


def sample_faults(c: Circuit, nm: NoiseModel, rng: np.random.Generator) -> List:
    """Independent Bernoulli draw per location, uniform Pauli on firing"""
    faults = []
    for loc in c.locations:
        u = rng.random()
        if loc.kind == "gate2q":
            if u < nm.p2:
                letters = TWO_QUBIT_FAULTS[rng.integers(len(TWO_QUBIT_FAULTS))]
                faults.append(Fault(loc.index, PauliString.from_letters(letters), loc.qubits))
        elif loc.kind in ("gate1q", "idle"):
            rate = nm.p1 if loc.kind == "gate1q" else nm.p_idle
            if u < rate:
                faults.append(Fault(loc.index, PauliString.from_letters("XYZ"[rng.integers(3)]), loc.qubits))
        elif loc.kind == "prepare":
            if u < nm.p_prep:
                faults.append(Fault(loc.index, PauliString.from_letters(PREPARATION_FLIP[loc.basis]), loc.qubits))
        elif loc.kind == "measure_reset":
            if u < nm.p_meas:
                faults.append(Fault(loc.index, None, loc.qubits))
            if nm.reset_flip and rng.random() > nm.retention:
                faults.append(ResetFlip(loc.index, loc.qubits[0]))
    return faults


# protocol registry -------------------------------------------------------------------

def _run_encoding(ft: bool) -> Callable:
    def run(nm: NoiseModel, rng: np.random.Generator, policy: str, pe: float) -> RunRecord:
        return protocols.run_encoding(ft, policy, noise=nm, rng=rng)
    return run


def _run_flagged_s1(nm: NoiseModel, rng: np.random.Generator, policy: str, pe: float) -> RunRecord:
    return protocols.run_flagged_s1(pe=pe, noise=nm, rng=rng)


def _run_ghz(nm: NoiseModel, rng: np.random.Generator, policy: str, pe: float) -> RunRecord:
    record = protocols.run_ghz(noise=nm, rng=rng)
    record.metadata["fidelity"] = metrics.ghz_fidelity(record.final_state)
    return record


PROTOCOLS = {
    "encoding_ft": _run_encoding(True),
    "encoding_nonft": _run_encoding(False),
    "flagged_s1": _run_flagged_s1,
    "ghz": _run_ghz,
}


def _check_protocol(protocol: str):
    if protocol not in PROTOCOLS:
        raise ConfigError(f"Unknown protocol '{protocol}', expected one of {sorted(PROTOCOLS)}")


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, shot]))


# exact (zero-shot) evaluation -----------------------------------------------------------

def _dense_encoding_branches(ft: bool, policy: str) -> List[RunRecord]:
    circuit = encoding_circuit(ft)
    records = []
    for values in itertools.product((1, -1), repeat=len(circuit.measurement_labels)):
        forced = dict(zip(circuit.measurement_labels, values))
        try:
            state, outcomes, probability = dense_oracle.run_circuit(circuit, forced)
        except dense_oracle.ImpossibleBranchError:
            continue
        if probability > 1e-12:
            records.append(protocols.encoding_record(state, outcomes, ft, policy, probability=probability))
    return records


def _exact_encoding(ft: bool, policy: str, backend: str) -> FidelityReport:
    if backend == "dense":
        records = _dense_encoding_branches(ft, policy)
    else:
        records = protocols.encoding_branches(ft, policy)
    accepted = [r for r in records if r.accepted]
    acceptance = sum(r.metadata["probability"] for r in accepted)
    if not accepted:
        raise ConfigError("No branch is accepted; fidelity is undefined")
    f_l = sum(r.metadata["probability"] * metrics.logical_fidelity(r.final_state) for r in accepted) / acceptance
    overlaps = np.zeros(4)
    for r in accepted:
        overlaps += r.metadata["probability"] * np.array(metrics.overlap_distribution(r.final_state))
    overlaps /= acceptance
    return FidelityReport(f_l, "exact_dense" if backend == "dense" else "tableau_exact",
                          f_l_not_raised=f_l, overlaps=tuple(float(v) for v in overlaps),
                          acceptance_rate=acceptance, protocol="encoding_ft" if ft else "encoding_nonft")


def _exact_flagged_s1(pe: float, backend: str) -> FidelityReport:
    weighted = []
    for inject, weight in ((False, 1 - pe), (True, pe)):
        record = protocols.run_flagged_s1(inject_y=inject, backend=backend, seed=0)
        state = record.final_state
        f = metrics.logical_fidelity_raised(state) if record.flag_raised else metrics.logical_fidelity(state)
        weighted.append((weight, record.flag_raised, f, metrics.overlap_distribution(state)))
    p_flag = sum(w for w, raised, _, _ in weighted if raised)
    raised = [f for w, r, f, _ in weighted if r and w > 0]
    quiet = [f for w, r, f, _ in weighted if not r and w > 0]
    f_l = sum(w * f for w, _, f, _ in weighted)
    overlaps = tuple(float(sum(w * o[i] for w, _, _, o in weighted)) for i in range(4))
    return FidelityReport(f_l, "exact_dense" if backend == "dense" else "tableau_exact",
                          f_l_raised=raised[0] if raised else None,
                          f_l_not_raised=quiet[0] if quiet else None, p_flag=p_flag,
                          overlaps=overlaps, protocol="flagged_s1")


def _exact_ghz(backend: str) -> FidelityReport:
    fidelities = []
    for value in (1, -1):
        record = protocols.run_ghz(backend=backend, forced={"mXXXX": value}, seed=0)
        fidelities.append(metrics.ghz_fidelity(record.final_state))
    return FidelityReport(float(np.mean(fidelities)), "exact_dense" if backend == "dense" else "tableau_exact",
                          protocol="ghz")


def run_exact(protocol: str, policy: str = "general", pe: float = 0.0, backend: str = "dense") -> FidelityReport:
    """Noise-free fidelity by enumerating every outcome branch"""
    _check_protocol(protocol)
    if protocol.startswith("encoding"):
        return _exact_encoding(protocol == "encoding_ft", policy, backend)
    if protocol == "flagged_s1":
        return _exact_flagged_s1(pe, backend)
    return _exact_ghz(backend)


# Monte Carlo -------------------------------------------------------------------------------

def _shot_score(protocol: str, record: RunRecord) -> float:
    if protocol == "ghz":
        return record.metadata["fidelity"]
    if protocol == "flagged_s1":
        return float(record.metadata["class_with_flag"] in protocols.HARMLESS_FOR_MINUS)
    return float(metrics.record_success(record))


def _mean_and_stderr(values: Sequence[float]):
    if not values:
        return None, 0.0
    arr = np.asarray(values, dtype=float)
    stderr = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return float(arr.mean()), stderr


def run_experiment(protocol: str, nm: Optional[NoiseModel] = None, shots: int = 0, seed: Optional[int] = None,
                   threads: Optional[int] = None, policy: str = "general", pe: float = 0.0,
                   backend: str = "tableau") -> FidelityReport:
    """Aggregate fidelity and acceptance over `shots` noisy runs; shots=0 selects exact noise-free evaluation"""
    _check_protocol(protocol)
    nm = nm or NoiseModel()
    if shots < 0:
        raise ConfigError(f"shots must be non-negative, got {shots}")
    if shots == 0:
        if not nm.is_noiseless:
            raise ConfigError("Exact mode (shots=0) needs a noiseless model")
        report = run_exact(protocol, policy, pe, backend="dense")
        report.seed = seed
        return report
    if seed is None:
        raise ConfigError("Monte Carlo runs need an explicit seed")
    runner = PROTOCOLS[protocol]

    def one_shot(shot: int):
        record = runner(nm, shot_rng(seed, shot), policy, pe)
        return record.accepted, record.flag_raised, _shot_score(protocol, record)

    logger.info(f"Running {shots} shot(s) of {protocol} with {nm}")
    results = parallel_map(one_shot, list(range(shots)), threads)
    accepted = [(raised, score) for ok, raised, score in results if ok]
    acceptance = len(accepted) / shots
    if not accepted:
        logger.warning(f"No accepted shots for {protocol}")
        return FidelityReport(float("nan"), "mc_estimate", acceptance_rate=0.0, shots=shots, seed=seed,
                              protocol=protocol)
    f_l, stderr = _mean_and_stderr([score for _, score in accepted])
    f_raised, _ = _mean_and_stderr([score for raised, score in accepted if raised])
    f_quiet, _ = _mean_and_stderr([score for raised, score in accepted if not raised])
    p_flag = sum(1 for raised, _ in accepted if raised) / len(accepted)
    report = FidelityReport(f_l, "mc_estimate", f_l_raised=f_raised, f_l_not_raised=f_quiet, p_flag=p_flag,
                            stderr=stderr, acceptance_rate=acceptance, shots=shots, seed=seed, protocol=protocol)
    logger.info(f"{protocol}: {report}")
    return report


def sweep(protocol: str, grid: Sequence[float], shots: int, seed: Optional[int] = None,
          parameter: str = "p2", base: Optional[NoiseModel] = None, threads: Optional[int] = None,
          policy: str = "general") -> List[SweepRow]:
    """run_experiment at each grid value of one noise rate (or of pe), with paired seeds"""
    _check_protocol(protocol)
    base = base or NoiseModel()
    rows = []
    for rate in grid:
        if parameter == "pe":
            nm, pe = base, rate
        else:
            nm, pe = base.with_rate(parameter, rate), 0.0
        report = run_experiment(protocol, nm, shots, seed, threads, policy, pe)
        rows.append(SweepRow(rate, report.f_l, report.stderr, report.acceptance_rate, shots))
    return rows
