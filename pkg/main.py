"""
Command-line entry point for the flag fault-tolerance toolkit
"""
import argparse
import csv
import io
import json
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

import circuit_ir
import code_tables
import config
import dense_oracle
import fault_injection
import noise_mc
from code_tables import format_syndrome
from run_models import ConfigError, RunConfig, VerificationReport, validate_document

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

VERIFY_TARGETS = ("encoding", "s1", "case_b", "cycle", "tables")
MUTATIONS = ("drop-flag", "misorder-s1", "nonft")
PROTOCOL_ALIASES = {"encoding": None, "encoding_ft": "encoding_ft", "encoding_nonft": "encoding_nonft",
                    "flagged_s1": "flagged_s1", "ghz": "ghz"}
BUILTIN_CIRCUITS = {
    "encoding_ft": lambda: circuit_ir.encoding_circuit(True),
    "encoding_nonft": lambda: circuit_ir.encoding_circuit(False),
    "flagged_s1": lambda: circuit_ir.flagged_s1_circuit(),
    "ghz": circuit_ir.ghz_circuit,
}


def setup_logging():
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if config.LOG_FILE:
        handlers.insert(0, logging.FileHandler(config.LOG_FILE))
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
    )


def _rate(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"rate must lie in [0, 1], got {text}")
    return value


def _grid(text: str) -> List[float]:
    if not text.strip():
        return []
    return [_rate(part) for part in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Simulate and fault-inject flag fault-tolerant 5-qubit-code protocols")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="random seed (drawn and printed when omitted)")
    common.add_argument("--threads", type=int, help="worker threads (default QEC_THREADS)")
    common.add_argument("--out", help="output file; relative paths resolve under QEC_OUTPUT_DIR")
    common.add_argument("--format", choices=RunConfig.FORMATS, default="json")

    noise = argparse.ArgumentParser(add_help=False)
    noise.add_argument("--p2", type=_rate, help="two-qubit gate depolarizing rate")
    noise.add_argument("--p1", type=_rate, help="one-qubit gate rate (default p2/10)")
    noise.add_argument("--p-idle", dest="p_idle", type=_rate, help="idle rate (default p2/10)")
    noise.add_argument("--p-prep", dest="p_prep", type=_rate, default=0.0)
    noise.add_argument("--p-meas", dest="p_meas", type=_rate, default=0.0)
    noise.add_argument("--eps0", type=_rate, help="misassignment of |0> (default 1 - QEC_READOUT_F0)")
    noise.add_argument("--eps1", type=_rate, help="misassignment of |1> (default 1 - QEC_READOUT_F1)")
    noise.add_argument("--reset-flip", dest="reset_flip", action="store_true",
                       help="flip the ancilla after readout with probability 1 - QEC_RESET_RETENTION")
    noise.add_argument("--shots", type=int, default=0, help="Monte Carlo shots; 0 selects exact evaluation")
    noise.add_argument("--policy", choices=RunConfig.POLICIES, default="general")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("tables", parents=[common], help="export code definition and decoding tables")

    verify = sub.add_parser("verify", parents=[common], help="run an exhaustive fault-tolerance check")
    verify.add_argument("--which", choices=VERIFY_TARGETS, required=True)
    verify.add_argument("--mutate", choices=MUTATIONS, help="check a deliberately broken variant")

    simulate = sub.add_parser("simulate", parents=[common, noise], help="fidelity of one protocol")
    simulate.add_argument("--protocol", choices=sorted(PROTOCOL_ALIASES), default="encoding")
    simulate.add_argument("--ft", dest="ft", action="store_true", default=True)
    simulate.add_argument("--no-ft", dest="ft", action="store_false")
    simulate.add_argument("--pe", type=_rate, default=0.0, help="ancilla Y injection probability (flagged_s1)")

    sweep = sub.add_parser("sweep", parents=[common, noise], help="fidelity over a grid of one rate")
    sweep.add_argument("--protocol", choices=sorted(PROTOCOL_ALIASES), default="encoding")
    sweep.add_argument("--ft", dest="ft", action="store_true", default=True)
    sweep.add_argument("--no-ft", dest="ft", action="store_false")
    sweep.add_argument("--parameter", choices=noise_mc.NoiseModel.RATES + ("pe",), default="p2")
    sweep.add_argument("--grid", type=_grid, required=True, help="comma-separated values")

    ghz = sub.add_parser("ghz", parents=[common], help="GHZ preparation fidelity")
    ghz.add_argument("--noise", type=_rate, default=0.0, help="two-qubit depolarizing rate")
    ghz.add_argument("--shots", type=int, default=0)

    compile_cmd = sub.add_parser("compile", parents=[common], help="compile a circuit to native gates")
    compile_cmd.add_argument("--in", dest="input", required=True,
                             help=f"circuit file (.txt or .json) or one of {sorted(BUILTIN_CIRCUITS)}")
    compile_cmd.add_argument("--check", action="store_true", help="verify unitary equivalence per segment")
    return parser


def resolve_output(path: Optional[str]) -> Optional[str]:
    if path is None or os.path.isabs(path):
        return path
    return os.path.join(config.OUTPUT_DIR, path)


class QecToolkit:
    """Runs one CLI command and writes its output"""

    def __init__(self, run_config: RunConfig, stdout=None):
        self.config = run_config
        self.stdout = stdout or sys.stdout

    def _seed(self) -> int:
        if self.config.seed is None:
            self.config.seed = int(np.random.SeedSequence().entropy % (2 ** 32))
            logger.warning(f"No --seed given; using {self.config.seed}")
            print(f"seed: {self.config.seed}", file=sys.stderr)
        return self.config.seed

    def _protocol(self) -> str:
        name = PROTOCOL_ALIASES[self.config.protocol]
        if name is None:
            name = "encoding_ft" if self.config.ft else "encoding_nonft"
        return name

    def _noise(self) -> noise_mc.NoiseModel:
        return noise_mc.NoiseModel.from_config(self.config)

    def write(self, payload, schema: str, csv_rows: Union[str, Sequence[Sequence], None] = None,
              text: Optional[str] = None):
        fmt = self.config.format
        if fmt == "json":
            validate_document(payload, schema)
            content = json.dumps(payload, indent=2, default=str) + "\n"
        elif fmt == "csv":
            if csv_rows is None:
                raise ConfigError(f"CSV output is not available for '{self.config.command}'")
            if isinstance(csv_rows, str):
                content = csv_rows
            else:
                buffer = io.StringIO()
                csv.writer(buffer, lineterminator="\n").writerows(csv_rows)
                content = buffer.getvalue()
        else:
            content = (text if text is not None else str(payload)) + "\n"
        path = resolve_output(self.config.out)
        if path is None:
            self.stdout.write(content)
            return
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(content)
        logger.info(f"Wrote {fmt} output to {path}")

    # commands ------------------------------------------------------------------

    def cmd_tables(self) -> int:
        document = code_tables.tables_document()
        rows = []
        for table_name, table in (("noflag", code_tables.TABLES.no_flag), ("flag", code_tables.TABLES.with_flag),
                                  ("frame", code_tables.TABLES.frame)):
            for syndrome, recovery in table.items():
                rows.append((format_syndrome(syndrome), table_name, recovery.to_compact()))
        for name, forms in document["incarnations"].items():
            rows.extend((name, "incarnation", form) for form in forms)
        # bracketed sign vectors stay unquoted so rows diff against the printed tables
        csv_text = "".join(",".join(r) + "\n" for r in rows)
        text = "\n".join(f"{r[0]:<14} {r[1]:>11} {r[2]}" for r in rows)
        self.write(document, "tables", csv_text, text)
        return EXIT_OK

    def cmd_verify(self) -> int:
        which, mutate = self.config.which, self.config.mutate
        threads = self.config.threads
        if which == "encoding":
            report = fault_injection.verify_ft_encoding(ft=mutate != "nonft", drop_flag=mutate == "drop-flag",
                                                        threads=threads)
        elif which == "s1":
            report = fault_injection.verify_flagged_s1(threads=threads)
        elif which == "case_b":
            report = fault_injection.verify_case_b_tables(threads=threads)
        elif which == "cycle":
            cycle = circuit_ir.qec_cycle_circuits(misordered_s1=mutate == "misorder-s1")
            report = fault_injection.verify_ft_criteria(cycle, threads=threads)
        else:
            report = code_tables.verify_tables()
        if mutate and which not in ("encoding", "cycle"):
            logger.warning(f"--mutate {mutate} has no effect on --which {which}")
        report.seed = self.config.seed
        self.write(report.to_dict(), "verification_report", self._violation_rows(report), str(report))
        return EXIT_OK if report.passed else EXIT_VIOLATION

    @staticmethod
    def _violation_rows(report: VerificationReport) -> List[List]:
        keys = sorted({k for v in report.violations for k in v})
        return [keys] + [[v.get(k, "") for k in keys] for v in report.violations]

    def cmd_simulate(self) -> int:
        protocol = self._protocol()
        if self.config.shots == 0:
            logger.info("Zero shots: exact noise-free evaluation")
            report = noise_mc.run_exact(protocol, self.config.policy, self.config.pe)
        else:
            report = noise_mc.run_experiment(protocol, self._noise(), self.config.shots, self._seed(),
                                             self.config.threads, self.config.policy, self.config.pe)
        self.write(report.to_dict(), "fidelity_report", text=str(report))
        return EXIT_OK

    def cmd_sweep(self) -> int:
        protocol = self._protocol()
        seed = self._seed() if self.config.shots else self.config.seed
        rows = noise_mc.sweep(protocol, self.config.grid, self.config.shots, seed, self.config.parameter,
                              self._noise() if self.config.shots else noise_mc.NoiseModel(),
                              self.config.threads, self.config.policy)
        payload = {"protocol": protocol, "parameter": self.config.parameter, "seed": seed,
                   "rows": [r.to_dict() for r in rows]}
        csv_rows = [list(noise_mc.SweepRow.COLUMNS)] + [r.to_row() for r in rows]
        text = "\n".join(" ".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in r.to_row()) for r in rows)
        self.write(payload, "sweep", csv_rows, text)
        return EXIT_OK

    def cmd_ghz(self) -> int:
        if self.config.shots == 0:
            if self.config.noise:
                raise ConfigError("A noisy GHZ run needs --shots > 0")
            report = noise_mc.run_exact("ghz")
        else:
            # --noise is a pure two-qubit depolarizing rate; readout stays ideal
            nm = noise_mc.NoiseModel(p2=self.config.noise or 0.0, p1=0.0, p_idle=0.0)
            report = noise_mc.run_experiment("ghz", nm, self.config.shots, self._seed(), self.config.threads)
        self.write(report.to_dict(), "fidelity_report", text=str(report))
        return EXIT_OK

    def _load_circuit(self) -> circuit_ir.Circuit:
        source = self.config.input
        if not os.path.exists(source):
            if source in BUILTIN_CIRCUITS:
                return BUILTIN_CIRCUITS[source]()
            raise ConfigError(f"No circuit file or built-in circuit named '{source}'")
        with open(source) as fh:
            text = fh.read()
        return circuit_ir.Circuit.from_json(text) if source.endswith(".json") else circuit_ir.Circuit.from_text(text)

    def cmd_compile(self) -> int:
        source = self._load_circuit()
        compiled = circuit_ir.compile_to_native(source)
        payload: Dict = {"circuit": compiled.to_dict()}
        equivalent = None
        if self.config.check:
            equivalent = dense_oracle.compiled_equivalent(source, compiled)
            payload["equivalent"] = equivalent
            logger.info(f"{source.name}: compiled circuit {'is' if equivalent else 'is NOT'} equivalent")
        text = compiled.to_text()
        if equivalent is not None:
            text += f"\n# equivalent: {equivalent}"
        self.write(payload, "compiled_circuit", text=text)
        return EXIT_OK if equivalent is not False else EXIT_VIOLATION

    def run(self) -> int:
        handler = getattr(self, f"cmd_{self.config.command}")
        return handler()


def main(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    values = {k: v for k, v in vars(args).items() if k in RunConfig.FIELDS and v is not None}
    try:
        run_config = RunConfig(**values)
        return QecToolkit(run_config, stdout).run()
    except (ConfigError, ValueError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}")
        raise


if __name__ == "__main__":
    setup_logging()
    sys.exit(main())
