"""Toolchain for a butterfly-based SIMD quantum-circuit emulator.

Compiles OpenQASM 2.0 into a RISC-like instruction stream, executes it on
bit-accurate fixed-point or double-precision backends, models the windowed
hardware's resource and cycle costs, quantifies emulation quality against
the float reference, and speaks the ASCII host protocol of the physical
board.
"""

from importlib import resources as _resources

from .compiler import (
    AngleTable,
    CompiledProgram,
    CompileError,
    DecodeError,
    Instruction,
    compile_circuit,
    decode_instruction,
    encode_instruction,
    load_program_files,
    write_program_files,
)
from .config import FLOAT_REFERENCE, ConfigError, ExecConfig, load_config, parse_config
from .engine import (
    CouplePlan,
    EngineError,
    FixedState,
    FloatState,
    apply_gate,
    dense_oracle,
    dense_unitary,
    dump_state,
    initial_state,
    load_dump,
    run,
    sample_counts,
    select_couples,
)
from .fixedpoint import (
    FixedPointFormat,
    FixedPointValue,
    Rounding,
    add,
    from_real,
    mul,
    negate,
    round_reduce,
    sub,
)
from .gates import GateApplication, GateKind, consumed_angle, gate_matrix
from .hostlink import (
    FramingError,
    HostMessage,
    MessageKind,
    ProtocolError,
    StreamDecoder,
    VirtualBoard,
    decode_readback,
    decode_stream,
    encode_message,
    encode_readback,
    encode_session,
    loopback_session,
)
from .hwmodel import (
    LatencyBreakdown,
    LatencyModel,
    ResourceEstimate,
    compare_report,
    estimate_resources,
    program_latency,
)
from .metrics import QualityReport, complex_distances, hellinger_fidelity, kld, report
from .qasm import GateDefinition, QasmError, SourceCircuit, emit, parse, parse_file

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path of a bundled benchmark circuit, e.g. ``fixture_path("bell.qasm")``."""
    return _resources.files(__name__) / "fixtures" / name


def fixture_names() -> list[str]:
    root = _resources.files(__name__) / "fixtures"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".qasm"))
