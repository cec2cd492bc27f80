"""
Record and report models shared by the protocols, verifiers and the CLI
"""
import json
import os
from datetime import datetime
from typing import Dict, List, Optional, Sequence, Tuple

import jsonschema
import pytz

import config
from pauli_algebra import PauliString


class ConfigError(ValueError):
    """Raised for invalid run parameters"""


def timestamp() -> str:
    """Current time in the configured timezone, ISO-8601"""
    return datetime.now(pytz.timezone(config.TIMEZONE)).isoformat()


SCHEMA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "schemas")


def load_schema(name: str) -> Dict:
    with open(os.path.join(SCHEMA_DIR, f"{name}.schema.json")) as fh:
        return json.load(fh)


def validate_document(document: Dict, name: str) -> Dict:
    """Raise jsonschema.ValidationError unless the document matches schemas/<name>.schema.json"""
    jsonschema.validate(instance=document, schema=load_schema(name))
    return document


class RunRecord:
    """One execution of a protocol: outcomes, acceptance and the tracked Pauli frame"""

    def __init__(self, protocol: str, outcomes: Sequence[Tuple[str, int]], accepted: bool = True,
                 flag_raised: bool = False, pauli_frame: Optional[PauliString] = None,
                 final_state=None, seed: Optional[int] = None, residual: Optional[PauliString] = None,
                 logical_class: Optional[str] = None, metadata: Optional[Dict] = None):
        self.protocol = protocol
        self.outcomes = list(outcomes)
        self.accepted = accepted
        self.flag_raised = flag_raised
        self.pauli_frame = pauli_frame
        self.final_state = final_state
        self.seed = seed
        self.residual = residual
        self.logical_class = logical_class
        self.metadata = dict(metadata or {})

    def outcome(self, label: str) -> int:
        for name, value in self.outcomes:
            if name == label:
                return value
        raise KeyError(f"No outcome '{label}' in {self.protocol} record")

    @property
    def outcome_map(self) -> Dict[str, int]:
        return dict(self.outcomes)

    def __str__(self) -> str:
        signs = " ".join(f"{k}={v:+d}" for k, v in self.outcomes)
        status = "accepted" if self.accepted else "rejected"
        return f"RunRecord({self.protocol}, {status}, {signs})"

    def to_dict(self) -> Dict:
        return {
            "protocol": self.protocol,
            "outcomes": [[k, v] for k, v in self.outcomes],
            "accepted": self.accepted,
            "flag_raised": self.flag_raised,
            "pauli_frame": str(self.pauli_frame) if self.pauli_frame is not None else None,
            "residual": str(self.residual) if self.residual is not None else None,
            "logical_class": self.logical_class,
            "seed": self.seed,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "RunRecord":
        parse = lambda s: PauliString.parse(s) if s else None
        return cls(data["protocol"], [tuple(o) for o in data["outcomes"]], data["accepted"],
                   data.get("flag_raised", False), parse(data.get("pauli_frame")),
                   seed=data.get("seed"), residual=parse(data.get("residual")),
                   logical_class=data.get("logical_class"), metadata=data.get("metadata"))


class FidelityReport:
    """Logical fidelities, flag statistics and logical-overlap distribution for one configuration"""

    MODES = ("exact_dense", "tableau_exact", "mc_estimate")

    def __init__(self, f_l: float, mode: str, f_l_raised: Optional[float] = None,
                 f_l_not_raised: Optional[float] = None, p_flag: float = 0.0,
                 overlaps: Optional[Tuple[float, float, float, float]] = None,
                 stderr: float = 0.0, acceptance_rate: float = 1.0, shots: int = 0,
                 seed: Optional[int] = None, protocol: str = ""):
        if mode not in self.MODES:
            raise ConfigError(f"Unknown fidelity mode '{mode}'")
        self.f_l = f_l
        self.mode = mode
        self.f_l_raised = f_l_raised
        self.f_l_not_raised = f_l_not_raised
        self.p_flag = p_flag
        self.overlaps = overlaps
        self.stderr = stderr
        self.acceptance_rate = acceptance_rate
        self.shots = shots
        self.seed = seed
        self.protocol = protocol

    @property
    def p0_minus(self) -> Optional[float]:
        return self.overlaps[0] if self.overlaps else None

    @property
    def p1_minus(self) -> Optional[float]:
        return self.overlaps[1] if self.overlaps else None

    @property
    def p0_plus(self) -> Optional[float]:
        return self.overlaps[2] if self.overlaps else None

    @property
    def p1_plus(self) -> Optional[float]:
        return self.overlaps[3] if self.overlaps else None

    def consistent(self, tol: float = 1e-9) -> bool:
        """Overlaps sum to one and, in exact modes, F_L equals the |-⟩_L-coset weight"""
        if self.overlaps is None:
            return True
        if abs(sum(self.overlaps) - 1.0) > tol:
            return False
        if self.mode != "mc_estimate" and self.p_flag == 0 and abs(self.f_l - self.p0_minus - self.p1_minus) > tol:
            return False
        return True

    def __str__(self) -> str:
        err = f" ± {self.stderr:.4f}" if self.mode == "mc_estimate" else ""
        return f"F_L = {self.f_l:.6f}{err} ({self.mode}, acceptance {self.acceptance_rate:.4f})"

    def to_dict(self) -> Dict:
        return {
            "protocol": self.protocol,
            "mode": self.mode,
            "f_l": self.f_l,
            "stderr": self.stderr,
            "f_l_raised": self.f_l_raised,
            "f_l_not_raised": self.f_l_not_raised,
            "p_flag": self.p_flag,
            "p0_minus": self.p0_minus,
            "p1_minus": self.p1_minus,
            "p0_plus": self.p0_plus,
            "p1_plus": self.p1_plus,
            "acceptance_rate": self.acceptance_rate,
            "shots": self.shots,
            "seed": self.seed,
            "generated_at": timestamp(),
        }


class SweepRow:
    """One point of a parameter sweep"""

    COLUMNS = ("rate", "f_l", "stderr", "acceptance", "shots")

    def __init__(self, rate: float, f_l: float, stderr: float, acceptance: float, shots: int):
        self.rate = rate
        self.f_l = f_l
        self.stderr = stderr
        self.acceptance = acceptance
        self.shots = shots

    def to_dict(self) -> Dict:
        return {name: getattr(self, name) for name in self.COLUMNS}

    def to_row(self) -> List:
        return [getattr(self, name) for name in self.COLUMNS]


class VerificationReport:
    """Outcome of a verify_* check: pass flag, violations and per-item records"""

    def __init__(self, name: str, passed: bool, violations: Optional[List[Dict]] = None,
                 records: Optional[List[Dict]] = None, summary: Optional[Dict] = None,
                 seed: Optional[int] = None):
        self.name = name
        self.passed = passed
        self.violations = list(violations or [])
        self.records = list(records or [])
        self.summary = dict(summary or {})
        self.seed = seed

    def __str__(self) -> str:
        status = "PASS" if self.passed else f"FAIL ({len(self.violations)} violation(s))"
        extras = ", ".join(f"{k}={v}" for k, v in self.summary.items())
        return f"{self.name}: {status}" + (f" [{extras}]" if extras else "")

    def raise_on_failure(self, exc_class=RuntimeError):
        if not self.passed:
            first = self.violations[0] if self.violations else {}
            raise exc_class(f"{self.name} failed with {len(self.violations)} violation(s); first: {first}")
        return self

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "violations": self.violations,
            "records": self.records,
            "summary": self.summary,
            "seed": self.seed,
            "generated_at": timestamp(),
        }


class RunConfig:
    """Validated parameters of one CLI command"""

    FIELDS = {
        "command": None, "protocol": "encoding_ft", "ft": True, "policy": "general",
        "p2": None, "p1": None, "p_idle": None, "p_prep": 0.0, "p_meas": 0.0,
        "eps0": None, "eps1": None, "reset_flip": False, "pe": 0.0,
        "shots": 0, "seed": None, "threads": None, "out": None, "format": "json",
        "which": None, "mutate": None, "grid": None, "parameter": "p2",
        "input": None, "check": False, "noise": None,
    }
    RATE_FIELDS = ("p2", "p1", "p_idle", "p_prep", "p_meas", "eps0", "eps1", "pe", "noise")
    POLICIES = ("general", "herald_plus")
    FORMATS = ("json", "csv", "text")

    def __init__(self, **values):
        unknown = set(values) - set(self.FIELDS)
        if unknown:
            raise ConfigError(f"Unknown configuration key(s): {', '.join(sorted(unknown))}")
        for name, default in self.FIELDS.items():
            setattr(self, name, values.get(name, default))
        self._apply_defaults()
        self.validate()

    def _apply_defaults(self):
        if self.noise is not None and self.p2 is None:
            self.p2 = self.noise
        if self.p2 is None:
            self.p2 = config.DEFAULT_P2 if self.shots else 0.0
        if self.eps0 is None:
            self.eps0 = round(1 - config.READOUT_F0, 12)
        if self.eps1 is None:
            self.eps1 = round(1 - config.READOUT_F1, 12)
        if self.threads is None:
            self.threads = config.THREADS

    def validate(self):
        for name in self.RATE_FIELDS:
            value = getattr(self, name)
            if value is not None and not 0.0 <= float(value) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if self.shots < 0:
            raise ConfigError(f"shots must be non-negative, got {self.shots}")
        if self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        if self.policy not in self.POLICIES:
            raise ConfigError(f"policy must be one of {self.POLICIES}, got '{self.policy}'")
        if self.format not in self.FORMATS:
            raise ConfigError(f"format must be one of {self.FORMATS}, got '{self.format}'")

    def to_dict(self) -> Dict:
        return {name: getattr(self, name) for name in self.FIELDS}
