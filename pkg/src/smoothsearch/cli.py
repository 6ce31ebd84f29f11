"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 1 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .circuits.gates import dumps_circuit, gate_census
from .circuits.synthesis import SynthesisHint, synthesize
from .experiments import (
    ConfigError,
    ExperimentConfig,
    cmd_gate_count,
    cmd_search,
    cmd_sweep_noise,
)
from .numeric import read_matrix
from .report import FORMATS, emit_report, write_figures

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _experiment_flags(p: argparse.ArgumentParser, search: bool) -> None:
    p.add_argument("--config", help="flat key = value config file; flags override it")
    p.add_argument("--algo", help="algorithm" + ("" if search else "s, comma separated")
                   + ": qcpa, qusa, grover")
    p.add_argument("--qubits", help="qubit count" + ("" if search else "s, comma separated"))
    p.add_argument("--marked", help="marked position (1-based) or sweep-all")
    p.add_argument("--p1", help="depolarizing probability after 1-qubit gates")
    p.add_argument("--p2", help="depolarizing probability after CX gates")
    p.add_argument("--scope", choices=["first-n", "all"])
    p.add_argument("--noisy-gates", help="noisy-gate count(s) for scope first-n")
    p.add_argument("--shots")
    p.add_argument("--seed")
    p.add_argument("--convention", choices=["row-start", "paper"])
    p.add_argument("--grover-iterations", help="integer or auto")
    p.add_argument("--synth-u", choices=[h.value for h in SynthesisHint])
    p.add_argument("--synth-f", choices=[h.value for h in SynthesisHint])
    p.add_argument("--synth-ut", choices=[h.value for h in SynthesisHint])
    p.add_argument("--format", default="json-lines", choices=FORMATS)
    p.add_argument("--out", help="report file (stdout when omitted); figures are written beside it")
    p.add_argument("--no-figures", action="store_true", help="skip the figure files next to --out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smoothsearch", description="Smooth-operator quantum search laboratory")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("search", help="run one algorithm on one marked position")
    _experiment_flags(p, search=True)
    p = sub.add_parser("sweep-noise", help="accuracy table under depolarizing noise")
    _experiment_flags(p, search=False)
    p.add_argument("--jobs", type=int, default=1, help="cells evaluated concurrently")
    p = sub.add_parser("gate-count", help="gate census per algorithm and qubit count")
    _experiment_flags(p, search=False)

    p = sub.add_parser("synth", help="synthesize a matrix file into a circuit file")
    p.add_argument("matrix", help="input matrix in cmatrix text form")
    p.add_argument("--hint", default="generic", choices=[h.value for h in SynthesisHint])
    p.add_argument("--out", help="circuit file (stdout when omitted)")
    return parser


_FLAG_KEYS = {
    "algo": "algorithms", "qubits": "qubits", "marked": "marked", "p1": "p1", "p2": "p2",
    "scope": "scope", "noisy_gates": "noisy_gates", "shots": "shots", "seed": "seed",
    "convention": "convention", "grover_iterations": "grover_iterations",
    "synth_u": "synth_u", "synth_f": "synth_f", "synth_ut": "synth_ut",
}


# search starts from a noiseless single run rather than the sweep defaults
SEARCH_DEFAULTS = ExperimentConfig(
    algorithms=("qcpa",), qubits=(2,), marked=1, p1=0.0, p2=0.0,
    scope="all", noisy_gates=(),
)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base = SEARCH_DEFAULTS if args.command == "search" else ExperimentConfig()
    if args.config:
        base = ExperimentConfig.from_file(args.config, base)
    overrides = {key: getattr(args, flag) for flag, key in _FLAG_KEYS.items()
                 if getattr(args, flag, None) is not None}
    return ExperimentConfig.from_mapping(overrides, base)


def _write(data: bytes, out) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _run(args: argparse.Namespace) -> int:
    if args.command == "synth":
        try:
            with open(args.matrix) as fh:
                m = read_matrix(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.matrix}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{args.matrix}: {exc}") from None
        try:
            c = synthesize(m, args.hint)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        _write(dumps_circuit(c).encode(), args.out)
        for w in c.warnings:
            print(f"warning: {w}", file=sys.stderr)
        cen = gate_census(c)
        print(f"single={cen['single']} cx={cen['cx']} total={cen['total']}", file=sys.stderr)
        return EXIT_OK

    config = config_from_args(args)
    if args.command == "search":
        report = cmd_search(config)
    elif args.command == "sweep-noise":
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        report = cmd_sweep_noise(config, jobs=args.jobs)
    else:
        report = cmd_gate_count(config)
    _write(emit_report(report, args.format), args.out)
    if args.out and not args.no_figures and args.format != "svg-histogram":
        write_figures(report, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _run(args)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - reported as an internal error
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
