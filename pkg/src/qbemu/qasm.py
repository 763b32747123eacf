"""OpenQASM 2.0 frontend for the native gate set.

Parses a supported subset of OpenQASM 2.0 into a flat list of native gate
applications.  User-defined gates are expanded by macro substitution, and
the usual qelib1 gates outside the native twelve are lowered through fixed
equivalences (cx/ch/cr*/cu1 become a native opcode with the control field
set; cz, cy, swap, ccx, u2, u3 expand to short native sequences).

``measure`` and ``barrier`` statements are accepted and dropped; ``creg``
declarations are recorded but otherwise ignored.  ``if``, ``reset`` and
``opaque`` are rejected, as is OpenQASM 3.

Qubits are flattened in register declaration order, with index 0 of the
first register as flat qubit 0 (the least significant bit of an amplitude
index).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .gates import ROTATIONAL, GateApplication, GateKind


class QasmError(Exception):
    """Parse or lowering failure, with source position."""

    def __init__(self, message: str, filename: str = "<input>", line: int = 0, col: int = 0):
        super().__init__(f"{filename}:{line}:{col}: {message}")
        self.message = message
        self.filename = filename
        self.line = line
        self.col = col


@dataclass
class SourceCircuit:
    """Parsed circuit: flat native gate list over the declared qubits."""

    qubit_count: int
    qubit_names: dict[tuple[str, int], int]
    gates: list[GateApplication]
    classical_registers: dict[str, int]


@dataclass(frozen=True)
class _BodyOp:
    name: str
    angle_exprs: tuple
    qubit_args: tuple[str, ...]
    line: int
    col: int


@dataclass(frozen=True)
class GateDefinition:
    """User-defined gate macro: formal angle/qubit parameters and a body."""

    name: str
    params: tuple[str, ...]
    qargs: tuple[str, ...]
    body: tuple[_BodyOp, ...]


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>//[^\n]*)
  | (?P<nl>\n)
  | (?P<real>(\d+\.\d*|\.\d+)([eE][+-]?\d+)?)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<eq>==)
  | (?P<punct>[;,(){}\[\]+\-*/^])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, filename: str) -> list[_Token]:
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QasmError(f"unexpected character {text[pos]!r}", filename, line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(tok)
        else:
            if kind == "punct" or kind in ("arrow", "eq"):
                kind = tok
            tokens.append(_Token(kind, tok, line, col))
            col += len(tok)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Supported gate surface
# ---------------------------------------------------------------------------

_NATIVE_1Q = {
    "x": GateKind.X,
    "y": GateKind.Y,
    "z": GateKind.Z,
    "h": GateKind.H,
    "s": GateKind.S,
    "sdg": GateKind.SDG,
    "t": GateKind.T,
    "tdg": GateKind.TDG,
    "rx": GateKind.RX,
    "ry": GateKind.RY,
    "rz": GateKind.RZ,
    "u1": GateKind.U1,
    "p": GateKind.U1,
}

# Controlled gates realised directly: the opcode with the control field set.
_CONTROLLED_NATIVE = {
    "cx": GateKind.X,
    "CX": GateKind.X,
    "ch": GateKind.H,
    "crx": GateKind.RX,
    "cry": GateKind.RY,
    "crz": GateKind.RZ,
    "cu1": GateKind.U1,
    "cp": GateKind.U1,
}

# name -> (n_angles, n_qubits) over the whole built-in surface
_BUILTIN_SIGNATURES = {
    **{name: (1 if kind in ROTATIONAL else 0, 1) for name, kind in _NATIVE_1Q.items()},
    **{name: (1 if kind in ROTATIONAL else 0, 2) for name, kind in _CONTROLLED_NATIVE.items()},
    "cz": (0, 2),
    "cy": (0, 2),
    "swap": (0, 2),
    "ccx": (0, 3),
    "u2": (2, 1),
    "u3": (3, 1),
    "u": (3, 1),
    "U": (3, 1),
    "id": (0, 1),
}


def _lower_builtin(name: str, angles: list[float], qubits: list[int], out: list[GateApplication]) -> None:
    ga = GateApplication
    if name in _NATIVE_1Q:
        kind = _NATIVE_1Q[name]
        out.append(ga(kind, qubits[0], angle=angles[0] if kind in ROTATIONAL else None))
        return
    if name in _CONTROLLED_NATIVE:
        kind = _CONTROLLED_NATIVE[name]
        c, t = qubits
        out.append(ga(kind, t, control=c, angle=angles[0] if kind in ROTATIONAL else None))
        return
    if name == "cz":
        c, t = qubits
        out += [ga(GateKind.H, t), ga(GateKind.X, t, control=c), ga(GateKind.H, t)]
        return
    if name == "cy":
        c, t = qubits
        out += [ga(GateKind.SDG, t), ga(GateKind.X, t, control=c), ga(GateKind.S, t)]
        return
    if name == "swap":
        a, b = qubits
        out += [
            ga(GateKind.X, b, control=a),
            ga(GateKind.X, a, control=b),
            ga(GateKind.X, b, control=a),
        ]
        return
    if name == "ccx":
        a, b, c = qubits
        cx = lambda ctl, tgt: ga(GateKind.X, tgt, control=ctl)
        out += [
            ga(GateKind.H, c),
            cx(b, c),
            ga(GateKind.TDG, c),
            cx(a, c),
            ga(GateKind.T, c),
            cx(b, c),
            ga(GateKind.TDG, c),
            cx(a, c),
            ga(GateKind.T, b),
            ga(GateKind.T, c),
            ga(GateKind.H, c),
            cx(a, b),
            ga(GateKind.T, a),
            ga(GateKind.TDG, b),
            cx(a, b),
        ]
        return
    if name in ("u3", "u", "U"):
        theta, phi, lam = angles
        t = qubits[0]
        out += [
            ga(GateKind.RZ, t, angle=lam),
            ga(GateKind.RY, t, angle=theta),
            ga(GateKind.RZ, t, angle=phi),
        ]
        return
    if name == "u2":
        phi, lam = angles
        _lower_builtin("u3", [math.pi / 2.0, phi, lam], qubits, out)
        return
    if name == "id":
        return
    raise AssertionError(f"no lowering rule for {name}")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_UNARY_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
}


class _Parser:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.tokens = _tokenize(text, filename)
        self.pos = 0
        self.qregs: dict[str, tuple[int, int]] = {}  # name -> (base, size)
        self.cregs: dict[str, int] = {}
        self.defs: dict[str, GateDefinition] = {}
        self.qubit_count = 0
        self.gates: list[GateApplication] = []

    # -- token helpers ----------------------------------------------------

    def _peek(self) -> _Token:
        return self.tokens[self.pos]

    def _next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def _error(self, message: str, tok: _Token | None = None):
        tok = tok or self._peek()
        raise QasmError(message, self.filename, tok.line, tok.col)

    def _expect(self, kind: str, what: str | None = None) -> _Token:
        tok = self._peek()
        if tok.kind != kind:
            self._error(f"expected {what or kind}, found {tok.text!r}" if tok.text else f"expected {what or kind}", tok)
        return self._next()

    # -- top level ---------------------------------------------------------

    def parse(self) -> SourceCircuit:
        self._parse_header()
        while self._peek().kind != "eof":
            self._parse_statement()
        names = {}
        for reg, (base, size) in self.qregs.items():
            for k in range(size):
                names[(reg, k)] = base + k
        return SourceCircuit(self.qubit_count, names, self.gates, dict(self.cregs))

    def _parse_header(self) -> None:
        tok = self._peek()
        if tok.kind != "id" or tok.text != "OPENQASM":
            self._error("expected 'OPENQASM 2.0;' header", tok)
        self._next()
        ver = self._expect("real", "version number")
        if ver.text != "2.0":
            self._error(f"unsupported OpenQASM version {ver.text}", ver)
        self._expect(";")

    def _parse_statement(self) -> None:
        tok = self._peek()
        if tok.kind != "id":
            self._error(f"expected a statement, found {tok.text!r}", tok)
        name = tok.text
        if name == "include":
            self._parse_include()
        elif name in ("qreg", "creg"):
            self._parse_register(name)
        elif name == "gate":
            self._parse_gate_definition()
        elif name == "opaque":
            self._error("opaque gates are not supported (no semantics to emulate)", tok)
        elif name == "if":
            self._error("unsupported: conditional execution", tok)
        elif name == "reset":
            self._error("unsupported: reset", tok)
        elif name == "measure":
            self._parse_measure()
        elif name == "barrier":
            self._parse_barrier()
        else:
            self._parse_gate_application()

    def _parse_include(self) -> None:
        self._next()
        tok = self._expect("string", "include file name")
        if tok.text.strip('"') != "qelib1.inc":
            self._error(f"unsupported include {tok.text}; only \"qelib1.inc\" is built in", tok)
        self._expect(";")

    def _parse_register(self, which: str) -> None:
        self._next()
        name_tok = self._expect("id", "register name")
        name = name_tok.text
        if name in self.qregs or name in self.cregs:
            self._error(f"register {name!r} already declared", name_tok)
        self._expect("[")
        size_tok = self._expect("int", "register size")
        size = int(size_tok.text)
        if size <= 0:
            self._error("register size must be positive", size_tok)
        self._expect("]")
        self._expect(";")
        if which == "qreg":
            self.qregs[name] = (self.qubit_count, size)
            self.qubit_count += size
        else:
            self.cregs[name] = size

    # -- gate definitions ----------------------------------------------------

    def _parse_gate_definition(self) -> None:
        self._next()
        name_tok = self._expect("id", "gate name")
        name = name_tok.text
        if name in _BUILTIN_SIGNATURES or name in self.defs:
            self._error(f"gate {name!r} already defined", name_tok)
        params: list[str] = []
        if self._peek().kind == "(":
            self._next()
            if self._peek().kind != ")":
                params.append(self._expect("id", "parameter name").text)
                while self._peek().kind == ",":
                    self._next()
                    params.append(self._expect("id", "parameter name").text)
            self._expect(")")
        qargs = [self._expect("id", "qubit argument").text]
        while self._peek().kind == ",":
            self._next()
            qargs.append(self._expect("id", "qubit argument").text)
        if len(set(params)) != len(params) or len(set(qargs)) != len(qargs):
            self._error(f"duplicate formal argument in gate {name!r}", name_tok)
        self._expect("{")
        body: list[_BodyOp] = []
        while self._peek().kind != "}":
            op_tok = self._peek()
            if op_tok.kind != "id":
                self._error("expected a gate name in gate body", op_tok)
            if op_tok.text == "barrier":
                self._next()
                while self._peek().kind not in (";", "eof"):
                    self._next()
                self._expect(";")
                continue
            op_name = self._next().text
            if op_name == name:
                self._error(f"recursive gate definition: {name!r} references itself", op_tok)
            if op_name not in _BUILTIN_SIGNATURES and op_name not in self.defs:
                self._error(f"unknown gate {op_name!r} in body of {name!r}", op_tok)
            angle_exprs: list = []
            if self._peek().kind == "(":
                self._next()
                if self._peek().kind != ")":
                    angle_exprs.append(self._parse_expr())
                    while self._peek().kind == ",":
                        self._next()
                        angle_exprs.append(self._parse_expr())
                self._expect(")")
            op_qargs = [self._expect("id", "qubit argument").text]
            while self._peek().kind == ",":
                self._next()
                op_qargs.append(self._expect("id", "qubit argument").text)
            self._expect(";")
            for q in op_qargs:
                if q not in qargs:
                    self._error(f"unknown qubit argument {q!r} in body of {name!r}", op_tok)
            self._check_arity(op_name, len(angle_exprs), len(op_qargs), op_tok)
            body.append(_BodyOp(op_name, tuple(angle_exprs), tuple(op_qargs), op_tok.line, op_tok.col))
        self._expect("}")
        self.defs[name] = GateDefinition(name, tuple(params), tuple(qargs), tuple(body))

    def _check_arity(self, name: str, n_angles: int, n_qubits: int, tok: _Token) -> None:
        if name in _BUILTIN_SIGNATURES:
            want_a, want_q = _BUILTIN_SIGNATURES[name]
        else:
            d = self.defs[name]
            want_a, want_q = len(d.params), len(d.qargs)
        if n_angles != want_a:
            self._error(f"gate {name!r} takes {want_a} parameter(s), got {n_angles}", tok)
        if n_qubits != want_q:
            self._error(f"gate {name!r} takes {want_q} qubit argument(s), got {n_qubits}", tok)

    # -- expressions -------------------------------------------------------

    def _parse_expr(self):
        node = self._parse_term()
        while self._peek().kind in ("+", "-"):
            op = self._next().kind
            node = ("bin", op, node, self._parse_term())
        return node

    def _parse_term(self):
        node = self._parse_factor()
        while self._peek().kind in ("*", "/"):
            op = self._next().kind
            node = ("bin", op, node, self._parse_factor())
        return node

    def _parse_factor(self):
        node = self._parse_atom()
        if self._peek().kind == "^":
            self._next()
            node = ("bin", "^", node, self._parse_factor())
        return node

    def _parse_atom(self):
        tok = self._peek()
        if tok.kind == "-":
            self._next()
            return ("neg", self._parse_factor())
        if tok.kind == "(":
            self._next()
            node = self._parse_expr()
            self._expect(")")
            return node
        if tok.kind in ("real", "int"):
            self._next()
            return ("num", float(tok.text))
        if tok.kind == "id":
            self._next()
            if tok.text == "pi":
                return ("num", math.pi)
            if tok.text in _UNARY_FUNCS:
                self._expect("(")
                node = self._parse_expr()
                self._expect(")")
                return ("fun", tok.text, node)
            return ("param", tok.text, tok.line, tok.col)
        self._error(f"expected an expression, found {tok.text!r}", tok)

    def _eval_angle(self, node, env: dict[str, float], tok: _Token) -> float:
        try:
            return self._eval_expr(node, env)
        except (ZeroDivisionError, OverflowError) as exc:
            self._error(f"cannot evaluate expression: {exc}", tok)

    def _eval_expr(self, node, env: dict[str, float]) -> float:
        tag = node[0]
        if tag == "num":
            return node[1]
        if tag == "neg":
            return -self._eval_expr(node[1], env)
        if tag == "fun":
            return _UNARY_FUNCS[node[1]](self._eval_expr(node[2], env))
        if tag == "param":
            _, name, line, col = node
            if name not in env:
                raise QasmError(f"undefined parameter {name!r}", self.filename, line, col)
            return env[name]
        _, op, lhs, rhs = node
        a, b = self._eval_expr(lhs, env), self._eval_expr(rhs, env)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b
        return a**b

    # -- arguments and broadcast --------------------------------------------

    def _parse_argument(self) -> tuple[str, int | None, _Token]:
        name_tok = self._expect("id", "register reference")
        idx = None
        if self._peek().kind == "[":
            self._next()
            idx = int(self._expect("int", "index").text)
            self._expect("]")
        return name_tok.text, idx, name_tok

    def _resolve_qubit_arg(self, name: str, idx: int | None, tok: _Token) -> list[int]:
        if name not in self.qregs:
            self._error(f"unknown quantum register {name!r}", tok)
        base, size = self.qregs[name]
        if idx is None:
            return [base + k for k in range(size)]
        if not 0 <= idx < size:
            self._error(f"qubit index {name}[{idx}] out of range (size {size})", tok)
        return [base + idx]

    def _broadcast(self, operands: list[list[int]], tok: _Token) -> list[list[int]]:
        lengths = {len(ops) for ops in operands if len(ops) > 1}
        if len(lengths) > 1:
            self._error("mismatched register sizes in broadcast", tok)
        n = lengths.pop() if lengths else 1
        rows = []
        for k in range(n):
            row = [ops[k] if len(ops) > 1 else ops[0] for ops in operands]
            if len(set(row)) != len(row):
                self._error("duplicate qubit in gate arguments", tok)
            rows.append(row)
        return rows

    # -- statements that emit or drop gates -----------------------------------

    def _parse_measure(self) -> None:
        self._next()
        qname, qidx, qtok = self._parse_argument()
        self._expect("->")
        cname, cidx, ctok = self._parse_argument()
        self._expect(";")
        qubits = self._resolve_qubit_arg(qname, qidx, qtok)
        if cname not in self.cregs:
            self._error(f"unknown classical register {cname!r}", ctok)
        csize = self.cregs[cname]
        if cidx is None:
            if qidx is None and len(qubits) != csize:
                self._error("measure register size mismatch", ctok)
        elif not 0 <= cidx < csize:
            self._error(f"bit index {cname}[{cidx}] out of range (size {csize})", ctok)
        # measurement happens off-device; nothing is emitted

    def _parse_barrier(self) -> None:
        self._next()
        name, idx, tok = self._parse_argument()
        self._resolve_qubit_arg(name, idx, tok)
        while self._peek().kind == ",":
            self._next()
            name, idx, tok = self._parse_argument()
            self._resolve_qubit_arg(name, idx, tok)
        self._expect(";")

    def _parse_gate_application(self) -> None:
        name_tok = self._next()
        name = name_tok.text
        if name not in _BUILTIN_SIGNATURES and name not in self.defs:
            self._error(f"unknown gate {name!r}", name_tok)
        angles: list[float] = []
        if self._peek().kind == "(":
            self._next()
            if self._peek().kind != ")":
                angles.append(self._eval_angle(self._parse_expr(), {}, name_tok))
                while self._peek().kind == ",":
                    self._next()
                    angles.append(self._eval_angle(self._parse_expr(), {}, name_tok))
            self._expect(")")
        operands: list[list[int]] = []
        qname, qidx, qtok = self._parse_argument()
        operands.append(self._resolve_qubit_arg(qname, qidx, qtok))
        while self._peek().kind == ",":
            self._next()
            qname, qidx, qtok = self._parse_argument()
            operands.append(self._resolve_qubit_arg(qname, qidx, qtok))
        self._expect(";")
        self._check_arity(name, len(angles), len(operands), name_tok)
        for row in self._broadcast(operands, name_tok):
            self._emit(name, angles, row, name_tok)

    def _emit(self, name: str, angles: list[float], qubits: list[int], tok: _Token) -> None:
        if name in _BUILTIN_SIGNATURES:
            try:
                _lower_builtin(name, angles, qubits, self.gates)
            except ValueError as exc:
                self._error(str(exc), tok)
            return
        d = self.defs[name]
        env = dict(zip(d.params, angles))
        qmap = dict(zip(d.qargs, qubits))
        for op in d.body:
            op_tok = _Token("id", op.name, op.line, op.col)
            sub_angles = [self._eval_angle(e, env, op_tok) for e in op.angle_exprs]
            sub_qubits = [qmap[q] for q in op.qubit_args]
            if len(set(sub_qubits)) != len(sub_qubits):
                raise QasmError(
                    f"duplicate qubit in expansion of {name!r}", self.filename, op.line, op.col
                )
            self._emit(op.name, sub_angles, sub_qubits, tok)


def parse(source_text: str, filename: str = "<input>") -> SourceCircuit:
    """Parse OpenQASM 2.0 text into a flat native-gate circuit."""
    return _Parser(source_text, filename).parse()


def parse_file(path) -> SourceCircuit:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse(text, filename=str(path))


# ---------------------------------------------------------------------------
# Source emission (normalized form over the supported subset)
# ---------------------------------------------------------------------------

_NATIVE_NAMES = {kind: name for name, kind in _NATIVE_1Q.items() if name != "p"}
_CONTROLLED_NAMES = {
    GateKind.X: "cx",
    GateKind.H: "ch",
    GateKind.RX: "crx",
    GateKind.RY: "cry",
    GateKind.RZ: "crz",
    GateKind.U1: "cu1",
}


def emit(circuit: SourceCircuit) -> str:
    """Write a circuit back as OpenQASM 2.0.

    Output re-parses to an identical circuit: gates are already native, so
    emission is a plain rendering with full-precision angles.
    """
    flat_to_name = {flat: (reg, k) for (reg, k), flat in circuit.qubit_names.items()}
    if len(flat_to_name) != circuit.qubit_count:
        raise ValueError("qubit name map does not cover the register")
    regs: list[tuple[str, int]] = []
    for flat in range(circuit.qubit_count):
        reg, k = flat_to_name[flat]
        if not regs or regs[-1][0] != reg:
            regs.append((reg, 0))
        regs[-1] = (reg, regs[-1][1] + 1)
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    for reg, size in regs:
        lines.append(f"qreg {reg}[{size}];")
    for creg, size in circuit.classical_registers.items():
        lines.append(f"creg {creg}[{size}];")

    def ref(flat: int) -> str:
        reg, k = flat_to_name[flat]
        return f"{reg}[{k}]"

    for g in circuit.gates:
        arg = f"({g.angle!r})" if g.angle is not None else ""
        if g.control is None:
            lines.append(f"{_NATIVE_NAMES[g.kind]}{arg} {ref(g.target)};")
        else:
            name = _CONTROLLED_NAMES.get(g.kind)
            if name is None:
                raise ValueError(f"no source form for controlled {g.kind.name}")
            lines.append(f"{name}{arg} {ref(g.control)},{ref(g.target)};")
    return "\n".join(lines) + "\n"
