# Environment-driven defaults for the toolkit
import os
from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()


def _float(name: str, default: str) -> float:
    raw = os.getenv(name, default)
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got '{raw}'")


def _int(name: str, default: str) -> int:
    raw = os.getenv(name, default)
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got '{raw}'")


# Output and logging
OUTPUT_DIR = os.getenv("QEC_OUTPUT_DIR", "results")
LOG_LEVEL = os.getenv("QEC_LOG_LEVEL", "INFO").upper()
LOG_FILE = os.getenv("QEC_LOG_FILE", "qec_toolkit.log")  # empty disables the file handler
TIMEZONE = os.getenv("QEC_TIMEZONE", "UTC")

# Worker threads for fault enumeration and shot batches
THREADS = _int("QEC_THREADS", str(os.cpu_count() or 1))

# Readout assignment fidelities for |0> and |1>
READOUT_F0 = _float("QEC_READOUT_F0", "0.905")
READOUT_F1 = _float("QEC_READOUT_F1", "0.986")

# Probability that the ancilla stays in |0> after a readout; only used when reset flips are enabled
RESET_RETENTION = _float("QEC_RESET_RETENTION", "0.992")

# Circuit-level noise default; p1 and p_idle fall back to DEFAULT_P2 / 10
DEFAULT_P2 = _float("QEC_DEFAULT_P2", "1e-3")

MAX_DENSE_QUBITS = _int("QEC_MAX_DENSE_QUBITS", "8")

for _name, _value in (("QEC_READOUT_F0", READOUT_F0), ("QEC_READOUT_F1", READOUT_F1),
                      ("QEC_RESET_RETENTION", RESET_RETENTION), ("QEC_DEFAULT_P2", DEFAULT_P2)):
    if not 0.0 <= _value <= 1.0:
        raise ValueError(f"{_name} must lie in [0, 1], got {_value}")
if THREADS < 1:
    raise ValueError(f"QEC_THREADS must be at least 1, got {THREADS}")
