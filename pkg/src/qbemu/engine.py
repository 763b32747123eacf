"""State-vector execution engine over butterfly-selected amplitude couples.

A single-qubit gate on target ``t`` touches the ``2**(n-1)`` index pairs
``(i, i + 2**t)`` with bit ``t`` of ``i`` clear; a controlled gate skips the
pairs whose control bit is 0.  Couples are data-independent within one gate,
so kernels are applied to all selected pairs from a snapshot of the pre-gate
amplitudes and the result cannot depend on evaluation order.

Two interchangeable backends execute the same instruction streams:

* :class:`FloatState` -- double-precision reference,
* :class:`FixedState` -- bit-accurate two's-complement model whose kernels
  follow the three datapath classes (sign/exchange, one-multiplier,
  two-multiplier rotational) and round every multiplier output individually;
  no kernel performs a general 2x2 complex multiply.

A dense tensor-product oracle provides an independent check of the butterfly
path, and measurement statistics can be sampled from either backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .compiler import AngleTable, CompiledProgram, Instruction
from .config import ExecConfig
from .fixedpoint import FixedPointFormat, Rounding, from_real
from .gates import (
    INV_SQRT2,
    ROTATIONAL,
    GateApplication,
    GateKind,
    gate_matrix,
)

DENSE_ORACLE_MAX_QUBITS = 10


class EngineError(Exception):
    pass


# ---------------------------------------------------------------------------
# Couple selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CouplePlan:
    """Interacting amplitude pairs for one gate, ascending in the low index."""

    target: int
    control: int | None
    pairs: tuple[tuple[int, int], ...]


def couple_indices(n: int, target: int, control: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized couple selection: arrays of low and high pair indices."""
    if not 0 <= target < n:
        raise EngineError(f"target {target} out of range for {n} qubits")
    if control is not None:
        if not 0 <= control < n:
            raise EngineError(f"control {control} out of range for {n} qubits")
        if control == target:
            raise EngineError("control equals target")
    idx = np.arange(1 << n, dtype=np.int64)
    mask = (idx >> target) & 1 == 0
    if control is not None:
        mask &= ((idx >> control) & 1) == 1
    low = idx[mask]
    return low, low | (1 << target)


def select_couples(n: int, target: int, control: int | None = None) -> CouplePlan:
    low, high = couple_indices(n, target, control)
    return CouplePlan(target, control, tuple(zip(low.tolist(), high.tolist())))


# ---------------------------------------------------------------------------
# State representations
# ---------------------------------------------------------------------------


class FloatState:
    """Double-precision state vector."""

    __slots__ = ("n_qubits", "amp")

    def __init__(self, n_qubits: int, amp: np.ndarray | None = None):
        self.n_qubits = n_qubits
        if amp is None:
            amp = np.zeros(1 << n_qubits, dtype=complex)
            amp[0] = 1.0
        else:
            amp = np.asarray(amp, dtype=complex)
            if amp.shape != (1 << n_qubits,):
                raise ValueError("amplitude count does not match qubit count")
        self.amp = amp

    def copy(self) -> "FloatState":
        return FloatState(self.n_qubits, self.amp.copy())

    def to_complex(self) -> np.ndarray:
        return self.amp.copy()

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amp) ** 2

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amp) ** 2))


class FixedState:
    """Fixed-point state vector: raw integer real/imaginary parts.

    ``overflow`` is the sticky saturation flag aggregated over all kernel
    arithmetic applied to this state.
    """

    __slots__ = ("n_qubits", "fmt", "re", "im", "overflow")

    def __init__(
        self,
        n_qubits: int,
        fmt: FixedPointFormat,
        re: np.ndarray | None = None,
        im: np.ndarray | None = None,
        overflow: bool = False,
    ):
        self.n_qubits = n_qubits
        self.fmt = fmt
        size = 1 << n_qubits
        if re is None:
            re = np.zeros(size, dtype=np.int64)
            re[0] = 1 << fmt.fractional_bits
            im = np.zeros(size, dtype=np.int64)
        else:
            re = np.asarray(re, dtype=np.int64)
            im = np.asarray(im, dtype=np.int64)
            if re.shape != (size,) or im.shape != (size,):
                raise ValueError("amplitude count does not match qubit count")
        self.re = re
        self.im = im
        self.overflow = overflow

    def copy(self) -> "FixedState":
        return FixedState(self.n_qubits, self.fmt, self.re.copy(), self.im.copy(), self.overflow)

    def to_complex(self) -> np.ndarray:
        scale = self.fmt.lsb
        return self.re * scale + 1j * (self.im * scale)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.to_complex()) ** 2

    def norm_squared(self) -> float:
        return float(np.sum(self.probabilities()))


State = FloatState | FixedState


def initial_state(n_qubits: int, config: ExecConfig) -> State:
    if config.is_float_reference:
        return FloatState(n_qubits)
    return FixedState(n_qubits, config.fixed_format)


# ---------------------------------------------------------------------------
# Fixed-point vector arithmetic (same semantics as the scalar module)
# ---------------------------------------------------------------------------


def _vec_round(wide: np.ndarray, shift: int, mode: Rounding) -> np.ndarray:
    if shift == 0:
        return wide
    if mode is Rounding.TRUNCATION:
        return wide >> shift
    half = np.int64(1) << (shift - 1)
    if mode is Rounding.NEAREST:
        return np.where(wide >= 0, (wide + half) >> shift, -((-wide + half) >> shift))
    q = wide >> shift
    rem = wide - (q << shift)
    bump = (rem > half) | ((rem == half) & ((q & 1) == 1))
    return q + bump


class _FixedAlu:
    """Saturating kernel arithmetic over raw arrays, with a sticky flag."""

    def __init__(self, fmt: FixedPointFormat):
        self.fmt = fmt
        self.overflow = False

    def _saturate(self, raw: np.ndarray) -> np.ndarray:
        lo, hi = self.fmt.min_raw, self.fmt.max_raw
        if np.any(raw > hi) or np.any(raw < lo):
            self.overflow = True
            raw = np.clip(raw, lo, hi)
        return raw

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._saturate(a + b)

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._saturate(a - b)

    def neg(self, a: np.ndarray) -> np.ndarray:
        return self._saturate(-a)

    def mul(self, a: np.ndarray, b) -> np.ndarray:
        wide = a * np.int64(b) if np.isscalar(b) else a * b
        return self._saturate(_vec_round(wide, self.fmt.fractional_bits, self.fmt.rounding))


@lru_cache(maxsize=None)
def _inv_sqrt2_raw(fmt: FixedPointFormat) -> int:
    """The shared 1/sqrt(2) constant, quantized once per format."""
    return from_real(INV_SQRT2, fmt).raw


# ---------------------------------------------------------------------------
# Gate application
# ---------------------------------------------------------------------------


def _apply_float(state: FloatState, kind: GateKind, i: np.ndarray, j: np.ndarray, sincos) -> None:
    amp = state.amp
    a = amp[i].copy()
    b = amp[j].copy()
    k = INV_SQRT2
    if kind is GateKind.X:
        amp[i], amp[j] = b, a
    elif kind is GateKind.Y:
        amp[i], amp[j] = -1j * b, 1j * a
    elif kind is GateKind.Z:
        amp[j] = -b
    elif kind is GateKind.S:
        amp[j] = 1j * b
    elif kind is GateKind.SDG:
        amp[j] = -1j * b
    elif kind is GateKind.H:
        amp[i] = (a + b) * k
        amp[j] = (a - b) * k
    elif kind is GateKind.T:
        amp[j] = (b.real - b.imag) * k + 1j * ((b.real + b.imag) * k)
    elif kind is GateKind.TDG:
        amp[j] = (b.real + b.imag) * k + 1j * ((b.imag - b.real) * k)
    else:
        s, c = sincos
        if kind is GateKind.RX:
            amp[i] = c * a - 1j * (s * b)
            amp[j] = c * b - 1j * (s * a)
        elif kind is GateKind.RY:
            amp[i] = c * a - s * b
            amp[j] = c * b + s * a
        elif kind is GateKind.RZ:
            amp[i] = (c - 1j * s) * a
            amp[j] = (c + 1j * s) * b
        else:  # U1
            amp[j] = (c + 1j * s) * b


def _apply_fixed(state: FixedState, kind: GateKind, i: np.ndarray, j: np.ndarray, sincos) -> None:
    alu = _FixedAlu(state.fmt)
    re, im = state.re, state.im
    re_a, im_a = re[i].copy(), im[i].copy()
    re_b, im_b = re[j].copy(), im[j].copy()
    if kind is GateKind.X:
        re[i], im[i] = re_b, im_b
        re[j], im[j] = re_a, im_a
    elif kind is GateKind.Y:
        re[i], im[i] = im_b, alu.neg(re_b)
        re[j], im[j] = alu.neg(im_a), re_a
    elif kind is GateKind.Z:
        re[j], im[j] = alu.neg(re_b), alu.neg(im_b)
    elif kind is GateKind.S:
        re[j], im[j] = alu.neg(im_b), re_b
    elif kind is GateKind.SDG:
        re[j], im[j] = im_b, alu.neg(re_b)
    elif kind is GateKind.H:
        k = _inv_sqrt2_raw(state.fmt)
        re[i] = alu.mul(alu.add(re_a, re_b), k)
        im[i] = alu.mul(alu.add(im_a, im_b), k)
        re[j] = alu.mul(alu.sub(re_a, re_b), k)
        im[j] = alu.mul(alu.sub(im_a, im_b), k)
    elif kind is GateKind.T:
        k = _inv_sqrt2_raw(state.fmt)
        re[j] = alu.mul(alu.sub(re_b, im_b), k)
        im[j] = alu.mul(alu.add(re_b, im_b), k)
    elif kind is GateKind.TDG:
        k = _inv_sqrt2_raw(state.fmt)
        re[j] = alu.mul(alu.add(re_b, im_b), k)
        im[j] = alu.mul(alu.sub(im_b, re_b), k)
    else:
        s, c = sincos
        if kind is GateKind.RX:
            re[i] = alu.add(alu.mul(re_a, c), alu.mul(im_b, s))
            im[i] = alu.sub(alu.mul(im_a, c), alu.mul(re_b, s))
            re[j] = alu.add(alu.mul(re_b, c), alu.mul(im_a, s))
            im[j] = alu.sub(alu.mul(im_b, c), alu.mul(re_a, s))
        elif kind is GateKind.RY:
            re[i] = alu.sub(alu.mul(re_a, c), alu.mul(re_b, s))
            im[i] = alu.sub(alu.mul(im_a, c), alu.mul(im_b, s))
            re[j] = alu.add(alu.mul(re_b, c), alu.mul(re_a, s))
            im[j] = alu.add(alu.mul(im_b, c), alu.mul(im_a, s))
        elif kind is GateKind.RZ:
            re[i] = alu.add(alu.mul(re_a, c), alu.mul(im_a, s))
            im[i] = alu.sub(alu.mul(im_a, c), alu.mul(re_a, s))
            re[j] = alu.sub(alu.mul(re_b, c), alu.mul(im_b, s))
            im[j] = alu.add(alu.mul(im_b, c), alu.mul(re_b, s))
        else:  # U1
            re[j] = alu.sub(alu.mul(re_b, c), alu.mul(im_b, s))
            im[j] = alu.add(alu.mul(im_b, c), alu.mul(re_b, s))
    state.overflow = state.overflow or alu.overflow


def apply_gate(state: State, instr: Instruction, table: AngleTable | None = None) -> State:
    """Apply one decoded instruction in place and return the state."""
    n = state.n_qubits
    control = None if instr.control == instr.target else instr.control
    sincos = None
    if instr.opcode in ROTATIONAL:
        if table is None:
            raise EngineError(f"{instr.opcode.name} requires an angle table")
        if instr.imm >= len(table):
            raise EngineError(
                f"immediate {instr.imm} out of range for angle table of length {len(table)}"
            )
    i, j = couple_indices(n, instr.target, control)
    if isinstance(state, FloatState):
        if instr.opcode in ROTATIONAL:
            sincos = table.sin_cos(instr.imm)
        _apply_float(state, instr.opcode, i, j, sincos)
    else:
        if instr.opcode in ROTATIONAL:
            if table.fmt is None:
                raise EngineError("fixed backend requires a fixed-point angle table")
            if table.fmt != state.fmt:
                raise EngineError("angle table format does not match state format")
            sincos = table.raw_pair(instr.imm)
        _apply_fixed(state, instr.opcode, i, j, sincos)
    return state


def run(program: CompiledProgram, config: ExecConfig, initial: State | None = None) -> State:
    """Execute a compiled program, gate by gate, from |0...0> by default."""
    n = program.used_qubits
    if n > config.n_qubits:
        raise EngineError(
            f"program uses {n} qubits, architecture supports {config.n_qubits}"
        )
    if initial is None:
        state = initial_state(n, config)
    else:
        if initial.n_qubits != n:
            raise EngineError("initial state size does not match program")
        expect_float = config.is_float_reference
        if expect_float != isinstance(initial, FloatState):
            raise EngineError("initial state backend does not match configuration")
        if isinstance(initial, FixedState) and initial.fmt != config.fixed_format:
            raise EngineError("initial state format does not match configuration")
        state = initial.copy()
    if len(program.table):
        if config.is_float_reference and program.table.fmt is not None:
            raise EngineError("float backend requires a float-reference angle table")
        if not config.is_float_reference and program.table.fmt != config.fixed_format:
            raise EngineError("program table was compiled for a different number format")
    for instr in program.instructions:
        apply_gate(state, instr, program.table)
    return state


# ---------------------------------------------------------------------------
# Dense tensor-product oracle
# ---------------------------------------------------------------------------

_I2 = np.eye(2, dtype=complex)
_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def _embed(gate: GateApplication, n: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of one gate: tensor factors from MSQ down to LSQ."""
    u = gate_matrix(gate.kind, gate.angle)
    wires = range(n - 1, -1, -1)
    if gate.control is None:
        return reduce(np.kron, [u if w == gate.target else _I2 for w in wires])
    idle = reduce(
        np.kron, [_P0 if w == gate.control else _I2 for w in wires]
    )
    active = reduce(
        np.kron,
        [_P1 if w == gate.control else (u if w == gate.target else _I2) for w in wires],
    )
    return idle + active


def dense_unitary(gates, n: int) -> np.ndarray:
    """Dense circuit unitary: left-multiply each gate's embedded matrix."""
    if n > DENSE_ORACLE_MAX_QUBITS:
        raise EngineError(f"dense oracle limited to {DENSE_ORACLE_MAX_QUBITS} qubits, got {n}")
    u = np.eye(1 << n, dtype=complex)
    for gate in gates:
        if gate.target >= n or (gate.control is not None and gate.control >= n):
            raise EngineError("gate touches a qubit outside the circuit")
        u = _embed(gate, n) @ u
    return u


def dense_oracle(circuit) -> np.ndarray:
    """Brute-force unitary of a parsed circuit (independent of the couple path)."""
    return dense_unitary(circuit.gates, circuit.qubit_count)


# ---------------------------------------------------------------------------
# Measurement sampling and state dumps
# ---------------------------------------------------------------------------


def sample_counts(state: State, shots: int, seed: int | None = None) -> dict[int, int]:
    """Multinomial sample of basis indices from the state's |c|^2 distribution.

    The distribution is renormalized first, so fixed-point drift away from
    unit norm does not bias the sampler.
    """
    if shots <= 0:
        raise ValueError("shots must be positive")
    probs = state.probabilities()
    total = probs.sum()
    if total <= 0.0:
        raise EngineError("cannot sample from an all-zero state")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs / total)
    return {int(k): int(v) for k, v in enumerate(counts) if v}


def dump_state(state: State) -> str:
    """One line per amplitude, index-ascending: 're im' (floats or raw ints)."""
    if isinstance(state, FloatState):
        return "".join(f"{float(a.real)!r} {float(a.imag)!r}\n" for a in state.amp)
    return "".join(f"{r} {m}\n" for r, m in zip(state.re.tolist(), state.im.tolist()))


def load_dump(text: str, fmt: FixedPointFormat | None = None) -> State:
    """Parse a state dump; pass ``fmt`` to reconstruct a fixed-point state."""
    rows = [line.split() for line in text.splitlines() if line.strip()]
    size = len(rows)
    if size == 0 or size & (size - 1):
        raise ValueError(f"amplitude count {size} is not a power of two")
    n = size.bit_length() - 1
    if any(len(r) != 2 for r in rows):
        raise ValueError("each line must hold 're im'")
    if fmt is None:
        amp = np.array([float(r) + 1j * float(m) for r, m in rows])
        return FloatState(n, amp)
    re = np.array([int(r) for r, _ in rows], dtype=np.int64)
    im = np.array([int(m) for _, m in rows], dtype=np.int64)
    return FixedState(n, fmt, re, im)
