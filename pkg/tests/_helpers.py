"""Shared test utilities: independent oracles and random-circuit generation."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from qbemu.fixedpoint import FixedPointFormat, Rounding
from qbemu.gates import ROTATIONAL, GateApplication, GateKind


# ---------------------------------------------------------------------------
# Exact-rational fixed-point oracle (independent of qbemu.fixedpoint)
# ---------------------------------------------------------------------------


def oracle_round(x: Fraction, mode: Rounding) -> int:
    """Round an exact rational to an integer under the given tie rule."""
    floor = x.numerator // x.denominator
    if mode is Rounding.TRUNCATION:
        return floor
    rem = x - floor
    half = Fraction(1, 2)
    if mode is Rounding.NEAREST:
        if x >= 0:
            return floor + (1 if rem >= half else 0)
        return -oracle_round(-x, mode)
    if rem > half or (rem == half and floor % 2 == 1):
        return floor + 1
    return floor


def oracle_quantize(x: float, fmt: FixedPointFormat) -> int:
    """Expected raw for from_real, computed with exact rationals."""
    return oracle_round(Fraction(x) * (1 << fmt.fractional_bits), fmt.rounding)


def oracle_mul_raw(a_raw: int, b_raw: int, fmt: FixedPointFormat) -> int:
    """Expected raw product: exact rational product re-quantized."""
    exact = Fraction(a_raw * b_raw, 1 << fmt.fractional_bits)
    return oracle_round(exact, fmt.rounding)


def exact_product_value(a_raw: int, b_raw: int, fmt: FixedPointFormat) -> Fraction:
    return Fraction(a_raw, 1 << fmt.fractional_bits) * Fraction(b_raw, 1 << fmt.fractional_bits)


# ---------------------------------------------------------------------------
# Unitary comparison helpers
# ---------------------------------------------------------------------------


def max_dev_up_to_global_phase(u: np.ndarray, v: np.ndarray) -> float:
    """Max elementwise |u - phase*v| for the best single global phase."""
    flat_v = v.ravel()
    k = int(np.argmax(np.abs(flat_v)))
    if abs(flat_v[k]) == 0:
        return float(np.max(np.abs(u - v)))
    phase = u.ravel()[k] / flat_v[k]
    phase /= abs(phase)
    return float(np.max(np.abs(u - phase * v)))


# ---------------------------------------------------------------------------
# Random native circuits
# ---------------------------------------------------------------------------

_KINDS = list(GateKind)


def random_gates(rng: np.random.Generator, n_qubits: int, n_gates: int,
                 controlled_fraction: float = 0.35) -> list[GateApplication]:
    """Uniformly mixed native gate list, controls sprinkled over all opcodes."""
    gates = []
    for _ in range(n_gates):
        kind = _KINDS[rng.integers(len(_KINDS))]
        target = int(rng.integers(n_qubits))
        control = None
        if n_qubits > 1 and rng.random() < controlled_fraction:
            control = int(rng.integers(n_qubits - 1))
            if control >= target:
                control += 1
        angle = float(rng.uniform(-2 * math.pi, 2 * math.pi)) if kind in ROTATIONAL else None
        gates.append(GateApplication(kind, target, control=control, angle=angle))
    return gates


def gates_as_circuit(gates: list[GateApplication], n_qubits: int):
    """Wrap a raw gate list in a SourceCircuit shell for oracle/compile use."""
    from qbemu.qasm import SourceCircuit

    names = {("q", k): k for k in range(n_qubits)}
    return SourceCircuit(n_qubits, names, list(gates), {})
