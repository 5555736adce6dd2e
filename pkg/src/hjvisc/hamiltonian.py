"""Parsing and evaluation of Hamiltonian expressions Phi(x, u, p).

The grammar accepts the three variables ``x``, ``u``, ``p``, decimal
constants, the binary operators ``+ - * / ^``, unary minus, and the
functions ``abs(e)``, ``min(e, e)``, ``max(e, e)``.  Precedence from
tightest to loosest: ``^``, unary minus, ``* /``, ``+ -``; ``^`` is
right-associative and its exponent must be a nonnegative integer literal,
which keeps powers real-valued.  There is no implicit multiplication.

Joint continuity of Phi in all arguments is the caller's obligation; it is
documented here but not checked (expressions with ``/`` can violate it, and
the CLI emits a warning when a division is present).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np


class ParseError(ValueError):
    """Syntax error with the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset
        self.reason = message


class EvalError(ArithmeticError):
    """Raised for division by zero or overflow during evaluation."""


# ---------------------------------------------------------------------------
# Expression tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Num:
    value: float


@dataclass(frozen=True, slots=True)
class Var:
    name: str  # one of "x", "u", "p"


@dataclass(frozen=True, slots=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str  # "+", "-", "*", "/", "^"
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True, slots=True)
class Call:
    func: str  # "abs", "min", "max"
    args: tuple["Expr", ...]


Expr = Union[Num, Var, Neg, BinOp, Call]

_VARS = ("x", "u", "p")
_FUNCS = {"abs": 1, "min": 2, "max": 2}
_BIN_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY_PREC = 3


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # "num", "name", "op", "lparen", "rparen", "comma", "end"
    text: str
    offset: int


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            text = src[i:j]
            try:
                float(text)
            except ValueError:
                raise ParseError(f"malformed number {text!r}", i) from None
            tokens.append(_Token("num", text, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(_Token("name", src[i:j], i))
            i = j
            continue
        if c in "+-*/^":
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        if c == "(":
            tokens.append(_Token("lparen", c, i))
            i += 1
            continue
        if c == ")":
            tokens.append(_Token("rparen", c, i))
            i += 1
            continue
        if c == ",":
            tokens.append(_Token("comma", c, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser (precedence climbing)
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {what}", tok.offset)
        return self.advance()

    def parse_expr(self, min_prec: int) -> Expr:
        lhs = self.parse_atom()
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in _BIN_PREC:
                break
            prec = _BIN_PREC[tok.text]
            if prec < min_prec:
                break
            self.advance()
            if tok.text == "^":
                lhs = BinOp("^", lhs, self.parse_exponent())
            else:
                # left-associative: right side climbs one level up
                rhs = self.parse_expr(prec + 1)
                lhs = BinOp(tok.text, lhs, rhs)
        return lhs

    def parse_exponent(self) -> Num:
        tok = self.peek()
        if tok.kind != "num":
            raise ParseError("expected nonnegative integer exponent", tok.offset)
        value = float(tok.text)
        if not value.is_integer() or value < 0:
            raise ParseError("expected nonnegative integer exponent", tok.offset)
        self.advance()
        return Num(value)

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            # unary minus binds looser than ^ but tighter than * and /
            return Neg(self.parse_expr(_UNARY_PREC + 1))
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if tok.text in _VARS:
                return Var(tok.text)
            if tok.text in _FUNCS:
                self.expect("lparen", f"'(' after {tok.text}")
                args = [self.parse_expr(0)]
                while self.peek().kind == "comma":
                    self.advance()
                    args.append(self.parse_expr(0))
                self.expect("rparen", "')'")
                arity = _FUNCS[tok.text]
                if len(args) != arity:
                    raise ParseError(
                        f"{tok.text} takes {arity} argument(s), got {len(args)}",
                        tok.offset,
                    )
                return Call(tok.text, tuple(args))
            raise ParseError(
                f"unknown name {tok.text!r} (variables are x, u, p)", tok.offset
            )
        if tok.kind == "lparen":
            self.advance()
            inner = self.parse_expr(0)
            self.expect("rparen", "')'")
            return inner
        raise ParseError("expected a value", tok.offset)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _print_expr(e: Expr, parent_prec: int) -> str:
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        body = f"-{_print_expr(e.operand, _UNARY_PREC + 1)}"
        return f"({body})" if parent_prec > _UNARY_PREC else body
    if isinstance(e, Call):
        args = ", ".join(_print_expr(a, 0) for a in e.args)
        return f"{e.func}({args})"
    if isinstance(e, BinOp):
        prec = _BIN_PREC[e.op]
        if e.op == "^":
            body = f"{_print_expr(e.left, prec + 1)}^{_fmt_num(e.right.value)}"
        else:
            body = (
                f"{_print_expr(e.left, prec)} {e.op} "
                f"{_print_expr(e.right, prec + 1)}"
            )
        return f"({body})" if parent_prec > prec else body
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _eval_scalar(e: Expr, x: float, u: float, p: float) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return {"x": x, "u": u, "p": p}[e.name]
    if isinstance(e, Neg):
        return -_eval_scalar(e.operand, x, u, p)
    if isinstance(e, Call):
        vals = [_eval_scalar(a, x, u, p) for a in e.args]
        if e.func == "abs":
            return abs(vals[0])
        if e.func == "min":
            return min(vals)
        return max(vals)
    left = _eval_scalar(e.left, x, u, p)
    right = _eval_scalar(e.right, x, u, p)
    op = e.op
    try:
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            return left / right
        return left ** int(right)
    except ZeroDivisionError:
        raise EvalError(f"division by zero in {op!r}") from None
    except OverflowError:
        raise EvalError("overflow in power") from None


def _eval_array(e: Expr, x, u, p):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return {"x": x, "u": u, "p": p}[e.name]
    if isinstance(e, Neg):
        return -_eval_array(e.operand, x, u, p)
    if isinstance(e, Call):
        vals = [_eval_array(a, x, u, p) for a in e.args]
        if e.func == "abs":
            return np.abs(vals[0])
        if e.func == "min":
            return np.minimum(vals[0], vals[1])
        return np.maximum(vals[0], vals[1])
    left = _eval_array(e.left, x, u, p)
    right = _eval_array(e.right, x, u, p)
    op = e.op
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        return left / right
    return np.power(left, int(right))


def _walk(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, Neg):
        yield from _walk(e.operand)
    elif isinstance(e, BinOp):
        yield from _walk(e.left)
        yield from _walk(e.right)
    elif isinstance(e, Call):
        for a in e.args:
            yield from _walk(a)


@dataclass(frozen=True, slots=True)
class Hamiltonian:
    """Parsed expression Phi(x, u, p); immutable and reentrant."""

    root: Expr

    def eval(self, x: float, u: float, p: float) -> float:
        """Value of Phi at scalar arguments."""
        return _eval_scalar(self.root, float(x), float(u), float(p))

    def eval_array(self, x, u, p):
        """Vectorized evaluation on numpy arrays (division yields inf/nan)."""
        with np.errstate(all="ignore"):
            out = _eval_array(self.root, np.asarray(x, dtype=float),
                              np.asarray(u, dtype=float),
                              np.asarray(p, dtype=float))
        return np.broadcast_to(np.asarray(out, dtype=float),
                               np.broadcast_shapes(np.shape(x), np.shape(u),
                                                   np.shape(p))).copy()

    def to_string(self) -> str:
        """Canonical form; reparsing it reproduces the same tree."""
        return _print_expr(self.root, 0)

    @property
    def has_division(self) -> bool:
        return any(isinstance(n, BinOp) and n.op == "/" for n in _walk(self.root))

    def __call__(self, x: float, u: float, p: float) -> float:
        return self.eval(x, u, p)

    def __str__(self) -> str:
        return self.to_string()


def parse(src: str) -> Hamiltonian:
    """Parse an expression over x, u, p into a Hamiltonian.

    Raises :class:`ParseError` with a byte offset on malformed input.
    """
    parser = _Parser(_tokenize(src))
    root = parser.parse_expr(0)
    trailing = parser.peek()
    if trailing.kind != "end":
        raise ParseError(f"unexpected trailing input {trailing.text!r}",
                         trailing.offset)
    return Hamiltonian(root)
