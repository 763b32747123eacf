"""Framing round trips, chunking invariance, and loopback-vs-direct equality."""

from __future__ import annotations

import numpy as np
import pytest

from qbemu.compiler import compile_circuit
from qbemu.config import ExecConfig
from qbemu.engine import FixedState, run
from qbemu.fixedpoint import FixedPointFormat
from qbemu.hostlink import (
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
from qbemu.qasm import parse_file

import qbemu

from _helpers import gates_as_circuit, random_gates


def random_message(rng: np.random.Generator) -> HostMessage:
    kind = [
        MessageKind.ANGLE_COUNT,
        MessageKind.QUBIT_COUNT,
        MessageKind.ANGLE_VALUE,
        MessageKind.INSTRUCTION,
        MessageKind.END_OF_EMULATION,
    ][rng.integers(5)]
    if kind is MessageKind.END_OF_EMULATION:
        return HostMessage(kind)
    value = int(rng.integers(0, 1 << 20))
    if kind is MessageKind.ANGLE_VALUE and rng.random() < 0.5:
        value = -value
    return HostMessage(kind, value)


class TestFraming:
    def test_pinned_encodings(self):
        assert encode_message(HostMessage(MessageKind.QUBIT_COUNT, 3)) == b"*3#"
        assert encode_message(HostMessage(MessageKind.ANGLE_VALUE, -5)) == b"<5-#"
        assert encode_message(HostMessage(MessageKind.END_OF_EMULATION)) == b"!"
        assert encode_message(HostMessage(MessageKind.ANGLE_COUNT, 0)) == b"?0#"
        assert encode_message(HostMessage(MessageKind.INSTRUCTION, 0x3C)) == b">3C#"

    def test_hex_is_uppercase_without_leading_zeros(self):
        frame = encode_message(HostMessage(MessageKind.INSTRUCTION, 0x0A0))
        assert frame == b">A0#"

    def test_zero_and_negative_values_round_trip(self):
        for value in (0, -1, -0xFFFFF, 0xFFFFF):
            msg = HostMessage(MessageKind.ANGLE_VALUE, value)
            assert decode_stream(encode_message(msg)) == [msg]
        assert encode_message(HostMessage(MessageKind.ANGLE_VALUE, 0)) == b"<0#"

    def test_negative_only_for_angle_values(self):
        with pytest.raises(ValueError):
            HostMessage(MessageKind.INSTRUCTION, -1)

    def test_end_carries_no_payload(self):
        with pytest.raises(ValueError):
            HostMessage(MessageKind.END_OF_EMULATION, 1)

    def test_round_trip_random_messages(self):
        rng = np.random.default_rng(0)
        messages = [random_message(rng) for _ in range(10_000)]
        stream = b"".join(encode_message(m) for m in messages)
        assert decode_stream(stream) == messages

    def test_split_frame_across_feeds(self):
        decoder = StreamDecoder()
        assert decoder.feed(b"*") == []
        assert decoder.pending
        assert decoder.feed(b"3#") == [HostMessage(MessageKind.QUBIT_COUNT, 3)]
        assert not decoder.pending

    def test_chunking_invariance(self):
        rng = np.random.default_rng(1)
        messages = [random_message(rng) for _ in range(200)]
        stream = b"".join(encode_message(m) for m in messages)
        whole = decode_stream(stream)
        for _ in range(25):
            cuts = sorted(rng.integers(0, len(stream) + 1, size=rng.integers(1, 40)))
            decoder = StreamDecoder()
            got = []
            prev = 0
            for cut in list(cuts) + [len(stream)]:
                got.extend(decoder.feed(stream[prev:cut]))
                prev = cut
            assert got == whole

    def test_non_hex_digit_reports_offset(self):
        with pytest.raises(FramingError) as err:
            decode_stream(b"?ZZ#")
        assert err.value.offset == 1
        assert "non-hex" in str(err.value)

    def test_lowercase_hex_rejected(self):
        with pytest.raises(FramingError):
            decode_stream(b"?a#")

    def test_unknown_start_symbol(self):
        with pytest.raises(FramingError) as err:
            decode_stream(b"*3#x")
        assert err.value.offset == 3

    def test_empty_payload_rejected(self):
        with pytest.raises(FramingError):
            decode_stream(b"?#")

    def test_sign_rules(self):
        with pytest.raises(FramingError):
            decode_stream(b">5-#")  # sign outside a value frame
        with pytest.raises(FramingError):
            decode_stream(b"<-5#")  # sign before digits
        with pytest.raises(FramingError):
            decode_stream(b"<5-0#")  # digit after sign

    def test_truncated_stream_rejected(self):
        with pytest.raises(FramingError, match="truncated"):
            decode_stream(b"*3")


class TestReadback:
    def test_ground_state_single_qubit(self):
        fmt = FixedPointFormat(20, "nearest")
        state = FixedState(1, fmt)
        assert encode_readback(state) == b"262144\n0\n0\n0\n"

    def test_zero_state_lines(self):
        fmt = FixedPointFormat(12, "nearest")
        state = FixedState(2, fmt, np.zeros(4, dtype=np.int64), np.zeros(4, dtype=np.int64))
        assert encode_readback(state) == b"0\n" * 8

    def test_line_count(self):
        fmt = FixedPointFormat(16, "truncation")
        for n in range(1, 5):
            state = FixedState(n, fmt)
            lines = encode_readback(state).decode().splitlines()
            assert len(lines) == 2 * (1 << n)

    def test_round_trip(self):
        fmt = FixedPointFormat(20, "nearest")
        rng = np.random.default_rng(2)
        re = rng.integers(-2000, 2000, size=8).astype(np.int64)
        im = rng.integers(-2000, 2000, size=8).astype(np.int64)
        state = FixedState(3, fmt, re, im)
        again = decode_readback(encode_readback(state), fmt, 3)
        assert np.array_equal(again.re, re) and np.array_equal(again.im, im)

    def test_length_mismatch_rejected(self):
        fmt = FixedPointFormat(20, "nearest")
        with pytest.raises(ProtocolError):
            decode_readback(b"1\n2\n", fmt, 2)


class TestSession:
    def _bell(self, config):
        circuit = parse_file(qbemu.fixture_path("bell.qasm"))
        return compile_circuit(circuit, config)

    def test_session_frame_order(self):
        config = ExecConfig(n_qubits=3)
        program = self._bell(config)
        stream = encode_session(program, config)
        assert stream.startswith(b"?0#*3#>")
        assert stream.endswith(b"!")
        assert stream.count(b"!") == 1

    def test_loopback_equals_direct_run_bell(self):
        config = ExecConfig(n_qubits=3)
        program = self._bell(config)
        direct = run(program, config)
        looped = loopback_session(program, config)
        assert np.array_equal(looped.re, direct.re)
        assert np.array_equal(looped.im, direct.im)

    def test_loopback_equals_direct_run_random(self):
        rng = np.random.default_rng(3)
        config = ExecConfig(n_qubits=4, data_bits=14, rounding="nearest_even", imm_bits=6)
        gates = random_gates(rng, 4, 40)
        program = compile_circuit(gates_as_circuit(gates, 4), config)
        direct = run(program, config)
        looped = loopback_session(program, config)
        assert np.array_equal(looped.re, direct.re)
        assert np.array_equal(looped.im, direct.im)

    def test_empty_program_returns_initial_state(self):
        config = ExecConfig(n_qubits=2)
        program = compile_circuit(gates_as_circuit([], 2), config)
        state = loopback_session(program, config)
        assert state.re[0] == 1 << 18
        assert np.all(state.re[1:] == 0)

    def test_transcript_replays_deterministically(self):
        config = ExecConfig(n_qubits=3)
        program = self._bell(config)
        assert encode_session(program, config) == encode_session(program, config)

    def test_float_program_rejected(self):
        config = ExecConfig(n_qubits=3, rounding="float_reference")
        program = self._bell(config)
        with pytest.raises(ValueError):
            encode_session(program, config)
        with pytest.raises(ProtocolError):
            VirtualBoard(config)

    def test_board_enforces_order(self):
        config = ExecConfig(n_qubits=3)
        board = VirtualBoard(config)
        with pytest.raises(ProtocolError, match="before angle count"):
            board.feed(b"*3#")
        board = VirtualBoard(config)
        with pytest.raises(ProtocolError, match="before counts"):
            board.feed(b">0#")
        board = VirtualBoard(config)
        with pytest.raises(ProtocolError, match="before the session completed"):
            board.feed(b"?1#*2#!")

    def test_board_rejects_extra_angles(self):
        config = ExecConfig(n_qubits=3)
        board = VirtualBoard(config)
        with pytest.raises(ProtocolError, match="more angle values"):
            board.feed(b"?0#*2#<5#")

    def test_board_capacity_check(self):
        config = ExecConfig(n_qubits=2)
        board = VirtualBoard(config)
        with pytest.raises(ProtocolError, match="supports"):
            board.feed(b"?0#*5#")

    def test_readback_requires_finish(self):
        config = ExecConfig(n_qubits=2)
        board = VirtualBoard(config)
        board.feed(b"?0#*2#")
        with pytest.raises(ProtocolError, match="not finished"):
            board.readback()
