"""Architecture configuration shared by compiler, engine, and hardware model.

A configuration is a flat ``key = value`` text file with the keys
``N`` (qubit capacity), ``W`` (windowing order), ``Q`` (immediate field
width), ``S`` (control-unit sharing factor, structural only), ``data_bits``
(number representation width) and ``rounding`` (``truncation``, ``nearest``,
``nearest_even`` or ``float_reference``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .fixedpoint import FixedPointFormat, Rounding

FLOAT_REFERENCE = "float_reference"

ROUNDING_CHOICES = ("truncation", "nearest", "nearest_even", FLOAT_REFERENCE)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExecConfig:
    n_qubits: int = 5
    window: int = 0
    imm_bits: int = 4
    cu_sharing: int = 0
    data_bits: int = 20
    rounding: str = "nearest"

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ConfigError("N must be at least 1")
        if not 0 <= self.window <= self.n_qubits - 1:
            raise ConfigError(f"W must be in [0, N-1], got W={self.window} with N={self.n_qubits}")
        if self.imm_bits < 1:
            raise ConfigError("Q must be at least 1")
        if self.cu_sharing < 0:
            raise ConfigError("S must be non-negative")
        if not 8 <= self.data_bits <= 32:
            raise ConfigError("data_bits must be in [8, 32]")
        if self.rounding not in ROUNDING_CHOICES:
            raise ConfigError(f"rounding must be one of {ROUNDING_CHOICES}, got {self.rounding!r}")

    @property
    def qubit_field_bits(self) -> int:
        """Width of the target/control instruction fields: ceil(log2 N)."""
        return (self.n_qubits - 1).bit_length()

    @property
    def instruction_bits(self) -> int:
        return 4 + 2 * self.qubit_field_bits + self.imm_bits

    @property
    def is_float_reference(self) -> bool:
        return self.rounding == FLOAT_REFERENCE

    @property
    def fixed_format(self) -> FixedPointFormat:
        if self.is_float_reference:
            raise ConfigError("float_reference mode has no fixed-point format")
        return FixedPointFormat(self.data_bits, Rounding(self.rounding))


_KEY_TO_FIELD = {
    "N": "n_qubits",
    "W": "window",
    "Q": "imm_bits",
    "S": "cu_sharing",
    "data_bits": "data_bits",
    "rounding": "rounding",
}
_INT_FIELDS = {"n_qubits", "window", "imm_bits", "cu_sharing", "data_bits"}


def parse_config(text: str, base: ExecConfig | None = None) -> ExecConfig:
    """Parse ``key = value`` configuration text on top of ``base`` (or defaults)."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        field_name = _KEY_TO_FIELD[key]
        if field_name in _INT_FIELDS:
            try:
                values[field_name] = int(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} expects an integer, got {value!r}") from None
        else:
            values[field_name] = value
    return replace(base or ExecConfig(), **values)


def load_config(path, base: ExecConfig | None = None) -> ExecConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base=base)


def format_config(config: ExecConfig) -> str:
    return (
        f"N = {config.n_qubits}\n"
        f"W = {config.window}\n"
        f"Q = {config.imm_bits}\n"
        f"S = {config.cu_sharing}\n"
        f"data_bits = {config.data_bits}\n"
        f"rounding = {config.rounding}\n"
    )
