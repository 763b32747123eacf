"""Command-line pipeline driver.

Verbs: ``compile`` (OpenQASM to program/table files), ``run`` (execute a
compiled program on the float or fixed backend and dump the state),
``compare`` (fixed vs float figures of merit as CSV), ``sweep`` (figures of
merit and structural costs across bits / rounding / window values), and
``transcript`` (wire-protocol session bytes plus the loopback readback).

Exit codes: 0 success, 1 usage, 2 I/O, 3 compile/decode, 4 runtime.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import hwmodel, metrics
from .compiler import (
    CompileError,
    DecodeError,
    compile_circuit,
    load_program_files,
    write_program_files,
)
from .config import FLOAT_REFERENCE, ConfigError, ExecConfig, load_config
from .engine import EngineError, dump_state, run, sample_counts
from .hostlink import FramingError, ProtocolError, VirtualBoard, encode_session
from .qasm import QasmError, parse_file

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_COMPILE = 3
EXIT_RUNTIME = 4

SAMPLE_SHOTS = 4096

COMPARE_COLUMNS = (
    "circuit",
    "n_qubits",
    "n_gates",
    "data_bits",
    "rounding",
    "fidelity",
    "kld",
    "mcd",
    "acd",
    "prob_sum_model",
    "prob_sum_reference",
)

SWEEP_COLUMNS = (
    "circuit",
    "n_qubits",
    "n_gates",
    "axis",
    "value",
    "data_bits",
    "rounding",
    "window",
    "datapaths",
    "state_regfile_bits",
    "total_cycles",
    "fidelity",
    "kld",
    "mcd",
    "acd",
)


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


@dataclass(frozen=True)
class RunManifest:
    """Resolved inputs for one command: paths, configuration, seed, outputs."""

    inputs: tuple[Path, ...]
    config: ExecConfig
    backend: str
    seed: int | None
    out: Path | None
    file_format: str

    def __post_init__(self) -> None:
        for path in self.inputs:
            if not path.exists():
                raise FileNotFoundError(f"input not found: {path}")


def _resolve_config(args) -> ExecConfig:
    config = ExecConfig()
    if getattr(args, "config", None):
        config = load_config(args.config)
    overrides = {}
    if getattr(args, "bits", None) is not None:
        overrides["data_bits"] = args.bits
    if getattr(args, "rounding", None) is not None:
        overrides["rounding"] = args.rounding
    if getattr(args, "window", None) is not None:
        overrides["window"] = args.window
    if overrides:
        config = replace(config, **overrides)
    return config


def _manifest(args, *inputs) -> RunManifest:
    backend = getattr(args, "backend", None)
    config = _resolve_config(args)
    if backend is None:
        backend = "float" if config.is_float_reference else "fixed"
    return RunManifest(
        inputs=tuple(Path(p) for p in inputs),
        config=config,
        backend=backend,
        seed=getattr(args, "seed", None),
        out=Path(args.out) if getattr(args, "out", None) else None,
        file_format=getattr(args, "format", "integer_text"),
    )


def _backend_config(config: ExecConfig, backend: str) -> ExecConfig:
    if backend == "float":
        return replace(config, rounding=FLOAT_REFERENCE)
    if config.is_float_reference:
        return replace(config, rounding="nearest")
    return config


def _float_variant(config: ExecConfig) -> ExecConfig:
    return replace(config, rounding=FLOAT_REFERENCE)


def _write_text(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="ascii")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_compile(args) -> int:
    manifest = _manifest(args, args.qasm)
    circuit = parse_file(manifest.inputs[0])
    config = _backend_config(manifest.config, manifest.backend)
    program = compile_circuit(circuit, config)
    out_dir = manifest.out or Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = manifest.inputs[0].stem
    suffix = "txt" if manifest.file_format == "integer_text" else "bin"
    program_path = out_dir / f"{stem}.prog.{suffix}"
    table_path = out_dir / f"{stem}.table.{suffix}"
    write_program_files(program, config, program_path, table_path, manifest.file_format)
    print(
        f"compiled {len(program.instructions)} instructions, "
        f"{len(program.table)} angle pairs, {program.used_qubits} qubits"
    )
    print(f"program: {program_path}")
    print(f"table:   {table_path}")
    return EXIT_OK


def cmd_run(args) -> int:
    manifest = _manifest(args, args.program, args.table)
    config = _backend_config(manifest.config, manifest.backend)
    program = load_program_files(
        manifest.inputs[0], manifest.inputs[1], config, manifest.file_format
    )
    state = run(program, config)
    dump = dump_state(state)
    if manifest.seed is not None and manifest.out is None:
        raise UsageError("--seed needs --out so the dump and the counts do not interleave")
    _write_text(manifest.out, dump)
    if manifest.seed is not None:
        counts = sample_counts(state, SAMPLE_SHOTS, manifest.seed)
        width = state.n_qubits
        print(f"counts ({SAMPLE_SHOTS} shots, seed {manifest.seed}):")
        for index in sorted(counts):
            print(f"{index:0{width}b} {counts[index]}")
    return EXIT_OK


def _quality_row(circuit_path: Path, config: ExecConfig):
    circuit = parse_file(circuit_path)
    model_program = compile_circuit(circuit, config)
    model_state = run(model_program, config)
    ref_config = _float_variant(config)
    ref_program = compile_circuit(circuit, ref_config)
    ref_state = run(ref_program, ref_config)
    quality = metrics.report(model_state, ref_state)
    return circuit, quality


def cmd_compare(args) -> int:
    manifest = _manifest(args, args.qasm)
    config = _backend_config(manifest.config, manifest.backend)
    circuit, quality = _quality_row(manifest.inputs[0], config)
    lines = [",".join(COMPARE_COLUMNS)]
    lines.append(
        f"{manifest.inputs[0].stem},{circuit.qubit_count},{len(circuit.gates)},"
        f"{config.data_bits},{config.rounding},"
        f"{quality.fidelity!r},{quality.kld!r},{quality.mcd!r},{quality.acd!r},"
        f"{quality.prob_sum_model!r},{quality.prob_sum_reference!r}"
    )
    _write_text(manifest.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _sweep_values(axis: str, text: str) -> list:
    items = [v.strip() for v in text.split(",") if v.strip()]
    if not items:
        raise UsageError("empty sweep value list")
    if axis in ("bits", "window"):
        try:
            return [int(v) for v in items]
        except ValueError:
            raise UsageError(f"{axis} sweep expects integers, got {text!r}") from None
    return items


def _sweep_config(base: ExecConfig, axis: str, value) -> ExecConfig:
    if axis == "bits":
        return replace(base, data_bits=value)
    if axis == "window":
        return replace(base, window=value)
    return replace(base, rounding=value)


def cmd_sweep(args) -> int:
    qasm_path = Path(args.qasm)
    if qasm_path.is_dir():
        circuit_paths = sorted(qasm_path.glob("*.qasm"))
        if not circuit_paths:
            raise FileNotFoundError(f"no .qasm files in {qasm_path}")
    else:
        circuit_paths = [qasm_path]
    manifest = _manifest(args, *circuit_paths)
    base = _backend_config(manifest.config, "fixed")
    values = _sweep_values(args.axis, args.values)
    lines = [",".join(SWEEP_COLUMNS)]
    for path in circuit_paths:
        for value in values:
            config = _sweep_config(base, args.axis, value)
            circuit, quality = _quality_row(path, config)
            program = compile_circuit(circuit, config)
            resources = hwmodel.estimate_resources(config)
            latency = hwmodel.program_latency(program, config)
            lines.append(
                f"{path.stem},{circuit.qubit_count},{len(circuit.gates)},"
                f"{args.axis},{value},{config.data_bits},{config.rounding},{config.window},"
                f"{resources.datapaths},{resources.state_regfile_bits},{latency.total_cycles},"
                f"{quality.fidelity!r},{quality.kld!r},{quality.mcd!r},{quality.acd!r}"
            )
    _write_text(manifest.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_transcript(args) -> int:
    manifest = _manifest(args, args.program, args.table)
    config = _backend_config(manifest.config, "fixed")
    program = load_program_files(
        manifest.inputs[0], manifest.inputs[1], config, manifest.file_format
    )
    out_dir = manifest.out or Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    stream = encode_session(program, config)
    board = VirtualBoard(config)
    board.feed(stream)
    readback = board.readback()
    transcript_path = out_dir / "transcript.bin"
    readback_path = out_dir / "readback.txt"
    transcript_path.write_bytes(stream)
    readback_path.write_bytes(readback)
    print(f"transcript: {transcript_path} ({len(stream)} bytes)")
    print(f"readback:   {readback_path} ({len(readback)} bytes)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing and exit-code mapping
# ---------------------------------------------------------------------------


def _add_common(parser: _ArgumentParser) -> None:
    parser.add_argument("--config", help="architecture configuration file (key = value)")
    parser.add_argument("--bits", type=int, help="override data_bits")
    parser.add_argument(
        "--rounding",
        choices=("truncation", "nearest", "nearest_even", FLOAT_REFERENCE),
        help="override rounding mode",
    )
    parser.add_argument("--window", type=int, help="override windowing order W")
    parser.add_argument("--seed", type=int, help="seed for measurement sampling")
    parser.add_argument(
        "--format",
        choices=("integer_text", "binary"),
        default="integer_text",
        help="program/table file format",
    )
    parser.add_argument("--out", help="output file or directory")


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="qbemu", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile OpenQASM 2.0 to program/table files")
    p.add_argument("qasm")
    p.add_argument("--backend", choices=("float", "fixed"), help="number representation to compile for")
    _add_common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="execute a compiled program and dump the state")
    p.add_argument("program")
    p.add_argument("table")
    p.add_argument("--backend", choices=("float", "fixed"))
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="figures of merit for fixed vs float execution")
    p.add_argument("qasm")
    p.add_argument("--backend", choices=("float", "fixed"))
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="figures of merit across bits/rounding/window values")
    p.add_argument("qasm", help=".qasm file or a directory of them")
    p.add_argument("axis", choices=("bits", "rounding", "window"))
    p.add_argument("values", help="comma-separated sweep values")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("transcript", help="emit the wire-protocol session and readback")
    p.add_argument("program")
    p.add_argument("table")
    _add_common(p)
    p.set_defaults(func=cmd_transcript)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (QasmError, CompileError, DecodeError, ConfigError, FramingError, ProtocolError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPILE
    except (EngineError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
