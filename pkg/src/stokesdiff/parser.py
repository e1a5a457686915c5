"""The ``.dsys`` input language: systems, exponents and formal data.

A file is a sequence of statements, one per line (brackets may span lines)::

    variable t
    rank 2
    ramification 1
    truncation 16
    param alpha = 0.5
    A = [[1 + alpha*t, t], [0, 3]]
    formal = [(0, [[-0.5]]), (log(3)*s, [[0]])]

Expressions use ``+ - * / ^`` (``^`` binds tightest and is right associative),
parentheses, numbers with an optional imaginary suffix (``2i``, ``1.5e-3i``),
the names ``t``, ``s = 1/t``, ``u = exp(2 pi i s)`` (rejected: essential
singularity), ``pi``, parameters, and the functions ``exp``, ``log``, ``sqrt``.
A bare ``i`` is an error.  ``#`` starts a comment.
"""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .diffmod import DiffSystem, FormalBlock, FormalDatum
from .errors import ExpansionError, NonMildExponent, ParseError, RamificationCapExceeded
from .exponents import Exponent
from .series import (
    DEFAULT_TRUNCATION,
    MAX_RAMIFICATION,
    MatrixSeries,
    PuiseuxSeries,
    exp_series,
    format_complex,
    format_power,
    log_series,
    power,
    unified_ramification,
)

SLACK = 8  # extra orders carried while expanding
KEYWORDS = ("variable", "rank", "ramification", "truncation", "param", "A", "formal")
FUNCTIONS = ("exp", "log", "sqrt")


# ---------------------------------------------------------------------------
# tokens


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, NAME, OP, NL, EOF
    text: str
    line: int
    col: int
    value: complex | None = None


_NUM = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?(i(?![A-Za-z0-9_]))?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPS = "+-*/^()[],="


def _error(tok_or_pos, expected: str, found: str | None = None):
    if isinstance(tok_or_pos, Token):
        line, col = tok_or_pos.line, tok_or_pos.col
        found = tok_or_pos.text if found is None else found
    else:
        line, col = tok_or_pos
    found = found if found is not None else ""
    return ParseError(f"unexpected {found!r}" if found else "syntax error", line, col, expected, found)


def tokenize(text: str):
    toks = []
    line, col, depth = 1, 1, 0
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            if depth == 0:
                toks.append(Token("NL", "\\n", line, col))
            i += 1
            line, col = line + 1, 1
            continue
        if ch in " \t\r;":
            if ch == ";" and depth == 0:
                toks.append(Token("NL", ";", line, col))
            i += 1
            col += 1
            continue
        m = _NUM.match(text, i)
        if m and (ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit())):
            s = m.group(0)
            end = m.end()
            if end < n and (text[end].isalpha() or text[end] == "_" or text[end] == "."):
                raise _error((line, col + end - i), "a number", s + text[end])
            body = s[:-1] if s.endswith("i") else s
            v = float(body)
            toks.append(Token("NUM", s, line, col, complex(0, v) if s.endswith("i") else complex(v)))
            col += end - i
            i = end
            continue
        m = _NAME.match(text, i)
        if m:
            s = m.group(0)
            if s == "i":
                raise _error((line, col), "a number before the imaginary unit (write 1i)", "i")
            toks.append(Token("NAME", s, line, col))
            col += m.end() - i
            i = m.end()
            continue
        if ch in _OPS:
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth = max(0, depth - 1)
            toks.append(Token("OP", ch, line, col))
            i += 1
            col += 1
            continue
        raise _error((line, col), "a token", ch)
    toks.append(Token("NL", "\\n", line, col))
    toks.append(Token("EOF", "end of input", line, col))
    return toks


# ---------------------------------------------------------------------------
# values


@dataclass
class _Ctx:
    prec: int  # known powers of t (t-units) while expanding
    params: dict = field(default_factory=dict)

    def const(self, c) -> PuiseuxSeries:
        return PuiseuxSeries.constant(complex(c), self.prec, 1)

    def t_power(self, k: int) -> PuiseuxSeries:
        c = np.zeros(self.prec - k + 1 if self.prec >= k else 1, dtype=complex)
        c[0] = 1.0
        return PuiseuxSeries(c, k, 1)


def _as_constant(v: PuiseuxSeries):
    """The value when ``v`` is a constant series, else None."""
    g = v
    nz = np.nonzero(np.abs(g.coeffs) > 1e-300)[0]
    if nz.size == 0:
        return 0j
    if nz.size == 1 and g.low + nz[0] == 0:
        return complex(g.coeffs[nz[0]])
    return None


def _drop_small(v: PuiseuxSeries, tol=1e-14) -> PuiseuxSeries:
    c = np.array(v.coeffs)
    scale = max(float(np.max(np.abs(c))), 1e-300)
    c[np.abs(c) < tol * scale] = 0
    return PuiseuxSeries(c, v.low, v.m)


class _Parser:
    def __init__(self, text: str, ctx: _Ctx):
        self.toks = tokenize(text)
        self.k = 0
        self.ctx = ctx

    @property
    def tok(self) -> Token:
        return self.toks[self.k]

    def take(self) -> Token:
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            raise _error(t, what or repr(text) if text else kind)
        return self.take()

    def at(self, text: str) -> bool:
        return self.tok.kind == "OP" and self.tok.text == text

    def skip_newlines(self):
        while self.tok.kind == "NL":
            self.take()

    # expressions ------------------------------------------------------------
    def expr(self) -> PuiseuxSeries:
        v = self.term()
        while self.at("+") or self.at("-"):
            op = self.take().text
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self) -> PuiseuxSeries:
        v = self.unary()
        while self.at("*") or self.at("/"):
            op = self.take()
            w = self.unary()
            if op.text == "*":
                v = v * w
            else:
                try:
                    v = v / _drop_small(w)
                except ZeroDivisionError:
                    raise ExpansionError(f"line {op.line}, column {op.col}: division by zero") from None
        return v

    def unary(self) -> PuiseuxSeries:
        if self.at("-"):
            self.take()
            return -self.unary()
        if self.at("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> PuiseuxSeries:
        base = self.atom()
        if self.at("^"):
            op = self.take()
            e = self.unary()
            return self._pow(base, e, op)
        return base

    def _pow(self, base, e, op: Token):
        ec = _as_constant(e)
        if ec is None:
            raise ExpansionError(f"line {op.line}, column {op.col}: exponent must be a constant")
        bc = _as_constant(base)
        if bc is not None and (abs(ec.imag) > 0 or bc == 0 or (bc.real > 0 and bc.imag == 0)):
            if bc == 0:
                return self.ctx.const(0.0 if ec.real > 0 else float("nan"))
            return self.ctx.const(cmath.exp(ec * cmath.log(bc)))
        if ec.imag == 0 and float(ec.real).is_integer():
            n = int(ec.real)
            try:
                return base**n
            except ZeroDivisionError:
                raise ExpansionError(f"line {op.line}, column {op.col}: negative power of zero") from None
        if ec.imag != 0:
            raise ExpansionError(f"line {op.line}, column {op.col}: complex power of a non-constant")
        fr = Fraction(ec.real).limit_denominator(MAX_RAMIFICATION)
        if abs(float(fr) - ec.real) > 1e-12:
            raise ExpansionError(f"line {op.line}, column {op.col}: power must be rational with denominator <= {MAX_RAMIFICATION}")
        try:
            return power(_drop_small(base).strip(), float(fr))
        except RamificationCapExceeded:
            raise
        except (ValueError, ZeroDivisionError) as exc:
            raise ExpansionError(f"line {op.line}, column {op.col}: {exc}") from None

    def atom(self) -> PuiseuxSeries:
        t = self.tok
        if t.kind == "NUM":
            self.take()
            return self.ctx.const(t.value)
        if t.kind == "NAME":
            self.take()
            name = t.text
            if name in FUNCTIONS:
                self.expect("OP", "(", "'(' after a function name")
                arg = self.expr()
                self.expect("OP", ")", "')'")
                return self._call(name, arg, t)
            if name == "t":
                return self.ctx.t_power(1)
            if name == "s":
                return self.ctx.t_power(-1)
            if name == "u":
                raise ExpansionError(f"line {t.line}, column {t.col}: u = exp(2 pi i s) has an essential singularity at t = 0")
            if name == "pi":
                return self.ctx.const(math.pi)
            if name in self.ctx.params:
                return self.ctx.const(self.ctx.params[name])
            raise _error(t, "a variable, constant, parameter or function")
        if self.at("("):
            self.take()
            v = self.expr()
            self.expect("OP", ")", "')'")
            return v
        raise _error(t, "an expression")

    def _call(self, name: str, arg: PuiseuxSeries, t: Token) -> PuiseuxSeries:
        where = f"line {t.line}, column {t.col}"
        a = _drop_small(arg)
        v = a.valuation(tol=1e-14)
        if name == "exp":
            if v is not None and v < 0:
                raise ExpansionError(f"{where}: exp of a pole has an essential singularity at t = 0")
            return exp_series(a.window(0, a.trunc) if a.low != 0 else a)
        if name == "log":
            if v is None or v != 0:
                raise ExpansionError(f"{where}: log needs a nonzero constant term (branch point at t = 0)")
            return log_series(a)
        if v is None:
            return self.ctx.const(0.0)
        return power(a.strip(), 0.5)

    # statements -------------------------------------------------------------
    def integer(self, what: str) -> int:
        t = self.tok
        if t.kind != "NUM" or t.value.imag != 0 or not float(t.value.real).is_integer() or "." in t.text:
            raise _error(t, what)
        self.take()
        return int(t.value.real)

    def end_of_statement(self):
        if self.tok.kind != "NL":
            raise _error(self.tok, "end of line")
        self.take()

    def matrix(self):
        """``[[e, ...], ...]`` -> (list of rows of values, opening token)."""
        open_tok = self.expect("OP", "[", "'['")
        rows = []
        while True:
            rt = self.expect("OP", "[", "'[' starting a matrix row")
            row = [self.expr()]
            while self.at(","):
                self.take()
                row.append(self.expr())
            self.expect("OP", "]", "',' or ']'")
            if rows and len(row) != len(rows[0]):
                raise _error(rt, f"a row with {len(rows[0])} entries", f"{len(row)} entries")
            rows.append(row)
            if self.at(","):
                self.take()
                continue
            self.expect("OP", "]", "',' or ']'")
            return rows, open_tok

    def g_matrix(self):
        if self.at("[") and self.toks[self.k + 1].text != "[":
            # [x] shorthand for a 1x1 matrix
            ot = self.take()
            v = self.expr()
            self.expect("OP", "]", "']' (the [x] form is for rank one)")
            return [[v]], ot
        return self.matrix()

    def block(self):
        ot = self.expect("OP", "(", "'(' starting a formal block")
        a = self.expr()
        self.expect("OP", ",", "','")
        if self.tok.kind == "NAME" and self.tok.text == "G":
            self.take()
            self.expect("OP", "=", "'='")
        G, gt = self.g_matrix()
        self.expect("OP", ")", "')'")
        return a, ot, G, gt

    def block_list(self):
        blocks = []
        if self.at("[") and self.toks[self.k + 1].text == "(":
            self.take()
            blocks.append(self.block())
            while self.at(","):
                self.take()
                blocks.append(self.block())
            self.expect("OP", "]", "',' or ']'")
            return blocks
        blocks.append(self.block())
        while True:
            self.skip_newlines()
            if self.tok.kind == "EOF":
                return blocks
            blocks.append(self.block())


# ---------------------------------------------------------------------------
# conversions


def _exponent_from_value(v: PuiseuxSeries, tok: Token) -> Exponent:
    v = _drop_small(v, 1e-13)
    m = v.m
    terms = {}
    for k in range(v.low, min(v.trunc, -1) + 1):
        c = v.coeffs[k - v.low]
        if c != 0:
            terms[-k] = c
    if np.any(v.coeffs[max(0, -v.low):] != 0):
        raise _error(tok, "an exponent: a sum of c*s^(l/m) with 0 < l/m <= 1", "a constant or decaying term")
    if any(l > m for l in terms):
        top = max(terms)
        raise NonMildExponent(f"line {tok.line}, column {tok.col}: s-degree {Fraction(top, m)} > 1 is not mild")
    coeffs = np.zeros(m, dtype=complex)
    for l, c in terms.items():
        coeffs[l - 1] = c
    return Exponent(coeffs, m).minimal(1e-13)


def _const_matrix(rows, tok: Token) -> np.ndarray:
    out = np.zeros((len(rows), len(rows[0])), dtype=complex)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            c = _as_constant(_drop_small(v, 1e-15))
            if c is None:
                raise _error(tok, "a constant residue matrix", "a t-dependent entry")
            out[i, j] = c
    if out.shape[0] != out.shape[1]:
        raise _error(tok, "a square residue matrix", f"{out.shape[0]}x{out.shape[1]}")
    return out


def _series_matrix(rows, K: int, m: int | None, tok: Token) -> MatrixSeries:
    flat = [v for row in rows for v in row]
    mm = unified_ramification(*(f.m for f in flat)) if m is None else m
    out = []
    for f in flat:
        if mm % f.m:
            raise _error(tok, f"entries on the ramification grid 1/{mm}", f"t^(k/{f.m})")
        g = f.refine(mm)
        # pole terms below rounding level (e.g. from s*t) are dropped
        scale = max(float(np.max(np.abs(g.coeffs))), 1e-300)
        if g.low < 0 and np.any(np.abs(g.coeffs[: min(-g.low, g.coeffs.size)]) > 1e-14 * scale):
            raise ExpansionError(f"line {tok.line}, column {tok.col}: entry has a pole at t = 0")
        if g.low < 0:
            c = np.array(g.coeffs)
            c[: -g.low] = 0
            g = PuiseuxSeries(c, g.low, g.m)
        if g.trunc < K:
            raise ExpansionError(f"line {tok.line}, column {tok.col}: only {g.trunc} known terms, truncation {K} requested")
        out.append(g.window(0, K))
    r, c = len(rows), len(rows[0])
    coeffs = np.zeros((K + 1, r, c), dtype=complex)
    for idx, g in enumerate(out):
        coeffs[:, idx // c, idx % c] = g.coeffs
    return MatrixSeries(coeffs, 0, mm)


# ---------------------------------------------------------------------------
# files


@dataclass
class SystemFile:
    variable: str = "t"
    rank: int | None = None
    ramification: int | None = None  # as declared
    truncation: int = DEFAULT_TRUNCATION
    A: MatrixSeries | None = None
    formal: FormalDatum | None = None
    params: dict = field(default_factory=dict)
    name: str | None = None

    @property
    def m(self) -> int:
        return self.A.m if self.A is not None else (self.ramification or 1)

    def system(self) -> DiffSystem:
        return DiffSystem(self.A, name=self.name)

    def same_structure(self, other: SystemFile, rtol: float = 1e-12) -> bool:
        if (self.variable, self.rank, self.m, self.truncation) != (other.variable, other.rank, other.m, other.truncation):
            return False
        if set(self.params) != set(other.params):
            return False
        if any(abs(self.params[k] - other.params[k]) > rtol * (1 + abs(self.params[k])) for k in self.params):
            return False
        if self.A.coeffs.shape != other.A.coeffs.shape or not np.allclose(self.A.coeffs, other.A.coeffs, rtol=rtol, atol=1e-300):
            return False
        if (self.formal is None) != (other.formal is None):
            return False
        if self.formal is not None:
            if len(self.formal.blocks) != len(other.formal.blocks):
                return False
            for a, b in zip(self.formal.blocks, other.formal.blocks):
                if not a.a.allclose(b.a, rtol) or not np.allclose(a.G, b.G, rtol=rtol, atol=1e-300):
                    return False
        return True


def parse_system(text: str) -> SystemFile:
    """Parse a ``.dsys`` file; raises ParseError (syntax) or ExpansionError (entries)."""
    # header values must be known before expanding the matrix: scan them first
    K = DEFAULT_TRUNCATION
    for line in text.splitlines():
        w = line.split("#", 1)[0].split()
        if len(w) == 2 and w[0] == "truncation" and w[1].isdigit():
            K = int(w[1])
    ctx = _Ctx(K + SLACK)
    p = _Parser(text, ctx)
    out = SystemFile(truncation=K)
    seen = {}
    rows = None
    formal_raw = None
    while True:
        p.skip_newlines()
        t = p.tok
        if t.kind == "EOF":
            break
        if t.kind != "NAME" or t.text not in KEYWORDS:
            raise _error(t, "a statement (" + ", ".join(KEYWORDS) + ")")
        p.take()
        key = t.text
        if key != "param":
            if key in seen:
                raise _error(t, f"a single '{key}' statement", f"second '{key}'")
            seen[key] = t
        if key == "variable":
            v = p.expect("NAME", what="'t' or 's'")
            if v.text not in ("t", "s"):
                raise _error(v, "'t' or 's'")
            out.variable = v.text
        elif key == "rank":
            out.rank = p.integer("a positive integer rank")
            if out.rank < 1:
                raise _error(t, "a positive rank", str(out.rank))
        elif key == "ramification":
            mt = p.tok
            out.ramification = p.integer("a ramification index")
            if not 1 <= out.ramification <= MAX_RAMIFICATION:
                raise _error(mt, f"a ramification index in 1..{MAX_RAMIFICATION}", str(out.ramification))
        elif key == "truncation":
            kt = p.tok
            out.truncation = p.integer("a truncation order")
            if out.truncation < 1:
                raise _error(kt, "a positive truncation", str(out.truncation))
        elif key == "param":
            nt = p.expect("NAME", what="a parameter name")
            if nt.text in KEYWORDS or nt.text in FUNCTIONS or nt.text in ("t", "s", "u", "pi"):
                raise _error(nt, "a parameter name that is not reserved")
            p.expect("OP", "=", "'='")
            et = p.tok
            c = _as_constant(_drop_small(p.expr(), 1e-15))
            if c is None:
                raise _error(et, "a constant parameter value", "a t-dependent expression")
            out.params[nt.text] = c
            ctx.params[nt.text] = c
        elif key == "A":
            p.expect("OP", "=", "'='")
            rows, mtok = p.matrix()
        elif key == "formal":
            p.expect("OP", "=", "'='")
            formal_raw = p.block_list() if p.at("[") else [p.block()]
        p.end_of_statement()
    if rows is None:
        raise _error(p.tok, "an 'A = [[...]]' statement")
    n = len(rows)
    if len(rows[0]) != n:
        raise _error(mtok, "a square matrix", f"{n}x{len(rows[0])}")
    if out.rank is None:
        out.rank = n
    elif out.rank != n:
        raise _error(mtok, f"a {out.rank}x{out.rank} matrix (declared rank)", f"{n}x{n}")
    out.A = _series_matrix(rows, out.truncation, out.ramification, mtok)
    if formal_raw is not None:
        out.formal = _formal_from_raw(formal_raw)
        if out.formal.rank != out.rank:
            raise _error(formal_raw[0][1], f"formal blocks of total rank {out.rank}", str(out.formal.rank))
    return out


def _formal_from_raw(raw) -> FormalDatum:
    blocks = []
    for a, at, G, gt in raw:
        blocks.append(FormalBlock(_exponent_from_value(a, at), _const_matrix(G, gt)))
    return FormalDatum(blocks)


def parse_exponent(text: str) -> Exponent:
    """``'s + 2*s^(1/2)'`` -> Exponent with minimal ramification."""
    p = _Parser(text, _Ctx(SLACK))
    t = p.tok
    v = p.expr()
    p.skip_newlines()
    if p.tok.kind != "EOF":
        raise _error(p.tok, "end of input")
    return _exponent_from_value(v, t)


def parse_formal(text: str) -> FormalDatum:
    """``[(a, [[G]]), ...]`` or one ``(a, G=[[...]])`` per line (the printed form)."""
    p = _Parser(text, _Ctx(SLACK))
    p.skip_newlines()
    raw = p.block_list()
    p.skip_newlines()
    if p.tok.kind != "EOF":
        raise _error(p.tok, "end of input")
    return _formal_from_raw(raw)


# ---------------------------------------------------------------------------
# printing


def _series_text(f: PuiseuxSeries, var: str) -> str:
    terms = []
    for k in range(f.low, f.trunc + 1):
        c = f.coeffs[k - f.low]
        if c == 0:
            continue
        e = Fraction(k, f.m)
        p = format_power("t", e) if var == "t" else format_power("s", -e)
        cs = format_complex(c)
        terms.append(cs if not p else f"{cs}*{p}")
    return " + ".join(terms) if terms else "0.0"


def print_matrix(M) -> str:
    M = np.atleast_2d(M)
    return "[" + ", ".join("[" + ", ".join(format_complex(x) for x in row) + "]" for row in M) + "]"


def print_formal(fd: FormalDatum) -> str:
    return "[" + ", ".join(f"({b.a.to_text()}, {print_matrix(b.G)})" for b in fd.blocks) + "]"


def print_system(x, formal: FormalDatum | None = None, params: dict | None = None, variable: str = "t") -> str:
    """Canonical text; ``parse_system(print_system(x))`` has the same structure as ``x``."""
    if isinstance(x, SystemFile):
        A, formal, params, variable, K = x.A, x.formal, x.params, x.variable, x.truncation
    else:
        A = x.A if isinstance(x, DiffSystem) else x
        K = A.trunc
        params = params or {}
    lines = [f"variable {variable}", f"rank {A.rank}", f"ramification {A.m}", f"truncation {K}"]
    for k, v in (params or {}).items():
        lines.append(f"param {k} = {format_complex(v)}")
    rows = []
    for i in range(A.rank):
        rows.append("[" + ", ".join(_series_text(A.entry(i, j), variable) for j in range(A.rank)) + "]")
    lines.append("A = [" + ",\n     ".join(rows) + "]")
    if formal is not None:
        lines.append(f"formal = {print_formal(formal)}")
    return "\n".join(lines) + "\n"


def read_system(path) -> SystemFile:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    sf = parse_system(text)
    sf.name = str(path)
    return sf
