"""End-to-end command-line behavior and exit codes."""

from __future__ import annotations

import shutil

import numpy as np
import pytest

import qbemu
from qbemu.cli import main
from qbemu.config import ExecConfig
from qbemu.engine import load_dump
from qbemu.fixedpoint import FixedPointFormat

INV_SQRT2 = 2.0**-0.5


@pytest.fixture
def bell_qasm(tmp_path):
    dst = tmp_path / "bell.qasm"
    shutil.copy(qbemu.fixture_path("bell.qasm"), dst)
    return dst


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "arch.cfg"
    path.write_text("N = 4\nW = 0\nQ = 4\nS = 0\ndata_bits = 20\nrounding = nearest\n")
    return path


def compile_bell(tmp_path, bell_qasm, config_file, fmt="integer_text"):
    out = tmp_path / "out"
    rc = main(
        [
            "compile",
            str(bell_qasm),
            "--config",
            str(config_file),
            "--format",
            fmt,
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    suffix = "txt" if fmt == "integer_text" else "bin"
    return out / f"bell.prog.{suffix}", out / f"bell.table.{suffix}"


class TestCompile:
    def test_bell_program_file(self, tmp_path, bell_qasm, config_file, capsys):
        prog, table = compile_bell(tmp_path, bell_qasm, config_file)
        lines = prog.read_text().splitlines()
        assert lines[0] == "3"
        assert len(lines) == 4  # header + three instructions
        assert table.read_text().splitlines()[0] == "0"

    def test_missing_file_exit_2(self, tmp_path, config_file, capsys):
        rc = main(["compile", str(tmp_path / "absent.qasm"), "--config", str(config_file)])
        assert rc == 2

    def test_bad_qasm_exit_3(self, tmp_path, config_file):
        bad = tmp_path / "bad.qasm"
        bad.write_text("OPENQASM 2.0;\nqreg q[1];\nnonsense q[0];\n")
        rc = main(["compile", str(bad), "--config", str(config_file), "--out", str(tmp_path)])
        assert rc == 3

    def test_binary_and_text_decode_identically(self, tmp_path, bell_qasm, config_file):
        from qbemu.compiler import load_program_files
        from qbemu.config import load_config

        config = load_config(config_file)
        pt, tt = compile_bell(tmp_path, bell_qasm, config_file, "integer_text")
        pb, tb = compile_bell(tmp_path, bell_qasm, config_file, "binary")
        text = load_program_files(pt, tt, config)
        binary = load_program_files(pb, tb, config, "binary")
        assert text.instructions == binary.instructions

    def test_usage_error_exit_1(self):
        assert main(["compile"]) == 1


class TestRun:
    def test_bell_float_amplitudes(self, tmp_path, bell_qasm, config_file):
        prog, table = compile_bell(tmp_path, bell_qasm, config_file)
        dump = tmp_path / "state.txt"
        rc = main(
            [
                "run",
                str(prog),
                str(table),
                "--config",
                str(config_file),
                "--backend",
                "float",
                "--out",
                str(dump),
            ]
        )
        assert rc == 0
        state = load_dump(dump.read_text())
        assert abs(state.amp[0] - INV_SQRT2) < 1e-12
        assert abs(state.amp[7] - INV_SQRT2) < 1e-12

    def test_bell_fixed_close_to_float(self, tmp_path, bell_qasm, config_file):
        prog, table = compile_bell(tmp_path, bell_qasm, config_file)
        dump = tmp_path / "state.txt"
        rc = main(
            ["run", str(prog), str(table), "--config", str(config_file), "--out", str(dump)]
        )
        assert rc == 0
        state = load_dump(dump.read_text(), fmt=FixedPointFormat(20, "nearest"))
        amps = state.to_complex()
        assert abs(amps[0] - INV_SQRT2) < 1e-4
        assert abs(amps[7] - INV_SQRT2) < 1e-4

    def test_tampered_program_exit_3(self, tmp_path, bell_qasm, config_file):
        prog, table = compile_bell(tmp_path, bell_qasm, config_file)
        lines = prog.read_text().splitlines()
        # strongest corruption: an opcode outside the ISA (1111 in the top nibble)
        lines[1] = "F" + lines[1][1:]
        prog.write_text("\n".join(lines) + "\n")
        rc = main(["run", str(prog), str(table), "--config", str(config_file)])
        assert rc == 3

    def test_sampling_with_seed(self, tmp_path, bell_qasm, config_file, capsys):
        prog, table = compile_bell(tmp_path, bell_qasm, config_file)
        dump = tmp_path / "state.txt"
        rc = main(
            [
                "run",
                str(prog),
                str(table),
                "--config",
                str(config_file),
                "--seed",
                "9",
                "--out",
                str(dump),
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "counts" in out
        assert "000 " in out and "111 " in out

    def test_seed_without_out_is_usage_error(self, tmp_path, bell_qasm, config_file):
        prog, table = compile_bell(tmp_path, bell_qasm, config_file)
        rc = main(["run", str(prog), str(table), "--config", str(config_file), "--seed", "1"])
        assert rc == 1

    def test_capacity_violation_exit_4(self, tmp_path, bell_qasm, config_file):
        prog, table = compile_bell(tmp_path, bell_qasm, config_file)
        small = tmp_path / "small.cfg"
        # same field widths as N = 4 so the words still decode, but too few qubits
        small.write_text("N = 3\nW = 0\nQ = 4\ndata_bits = 20\nrounding = nearest\n")
        shrunk = tmp_path / "shrunk.prog.txt"
        lines = prog.read_text().splitlines()
        shrunk.write_text("9\n" + "\n".join(lines[1:]) + "\n")
        rc = main(["run", str(shrunk), str(table), "--config", str(config_file)])
        assert rc == 4

    def test_fixed_table_under_float_config_exit_3(self, tmp_path, bell_qasm, config_file):
        qasm = tmp_path / "rot.qasm"
        qasm.write_text('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\nrx(0.7) q[0];\n')
        out = tmp_path / "rot_out"
        assert main(["compile", str(qasm), "--config", str(config_file), "--out", str(out)]) == 0
        rc = main(
            [
                "run",
                str(out / "rot.prog.txt"),
                str(out / "rot.table.txt"),
                "--config",
                str(config_file),
                "--backend",
                "float",
            ]
        )
        assert rc == 3


class TestCompare:
    def test_identical_backends_perfect_row(self, tmp_path, bell_qasm, capsys):
        rc = main(["compare", str(bell_qasm), "--rounding", "float_reference"])
        assert rc == 0
        header, row = capsys.readouterr().out.strip().splitlines()
        cols = dict(zip(header.split(","), row.split(",")))
        assert float(cols["fidelity"]) == 1.0
        assert float(cols["kld"]) == 0.0
        assert float(cols["mcd"]) == 0.0
        assert float(cols["acd"]) == 0.0

    def test_compare_columns(self, tmp_path, bell_qasm, config_file, capsys):
        rc = main(["compare", str(bell_qasm), "--config", str(config_file)])
        assert rc == 0
        header, row = capsys.readouterr().out.strip().splitlines()
        assert header.split(",")[:3] == ["circuit", "n_qubits", "n_gates"]
        cols = dict(zip(header.split(","), row.split(",")))
        assert cols["n_gates"] == "3"
        assert float(cols["fidelity"]) >= 0.999


class TestSweep:
    def test_bits_sweep_rows(self, tmp_path, bell_qasm, config_file, capsys):
        rc = main(
            ["sweep", str(bell_qasm), "bits", "8,12,16", "--config", str(config_file)]
        )
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1 + 3
        assert [row.split(",")[4] for row in lines[1:]] == ["8", "12", "16"]

    def test_window_sweep_matches_hwmodel(self, tmp_path, bell_qasm, config_file, capsys):
        from qbemu.config import load_config
        from qbemu.hwmodel import estimate_resources

        rc = main(
            ["sweep", str(bell_qasm), "window", "0,1,2", "--config", str(config_file)]
        )
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        header = lines[0].split(",")
        col = header.index("datapaths")
        config = load_config(config_file)
        for row, w in zip(lines[1:], (0, 1, 2)):
            expected = estimate_resources(
                ExecConfig(
                    n_qubits=config.n_qubits,
                    window=w,
                    imm_bits=config.imm_bits,
                    data_bits=config.data_bits,
                    rounding=config.rounding,
                )
            )
            assert int(row.split(",")[col]) == expected.datapaths

    def test_directory_sweep(self, tmp_path, config_file, capsys):
        circuits = tmp_path / "circuits"
        circuits.mkdir()
        for name in ("bell.qasm", "ghz4.qasm"):
            shutil.copy(qbemu.fixture_path(name), circuits / name)
        rc = main(["sweep", str(circuits), "rounding", "truncation,nearest", "--config", str(config_file)])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1 + 2 * 2

    def test_bad_axis_usage_error(self, bell_qasm):
        assert main(["sweep", str(bell_qasm), "volume", "1,2"]) == 1


class TestTranscript:
    def test_transcript_and_readback(self, tmp_path, bell_qasm, config_file, capsys):
        prog, table = compile_bell(tmp_path, bell_qasm, config_file)
        out = tmp_path / "wire"
        rc = main(
            ["transcript", str(prog), str(table), "--config", str(config_file), "--out", str(out)]
        )
        assert rc == 0
        stream = (out / "transcript.bin").read_bytes()
        assert stream.startswith(b"?")
        assert stream.count(b"!") == 1
        readback = (out / "readback.txt").read_bytes()

        dump = tmp_path / "state.txt"
        assert (
            main(["run", str(prog), str(table), "--config", str(config_file), "--out", str(dump)])
            == 0
        )
        direct = load_dump(dump.read_text(), fmt=FixedPointFormat(20, "nearest"))
        from qbemu.hostlink import decode_readback

        looped = decode_readback(readback, FixedPointFormat(20, "nearest"), 3)
        assert np.array_equal(looped.re, direct.re)
        assert np.array_equal(looped.im, direct.im)
