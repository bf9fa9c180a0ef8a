"""A tiny expression language for maps and control functions.

Grammar (``arith`` is ordinary arithmetic; ``piecewise`` only at top level)::

    expr      := piecewise | arith
    piecewise := "piecewise" "{" arm+ elsearm? "}"
    arm       := guard "=>" arith ";"
    elsearm   := "else" "=>" arith ";"
    guard     := cmp ( ("and"|"or") cmp )*
    cmp       := arith ("<="|"<"|">="|">"|"==") arith
    arith     := term ( ("+"|"-") term )*
    term      := factor ( ("*"|"/") factor )*
    factor    := number | ident | "(" arith ")"
               | fname "(" arith ("," arith)* ")" | "-" factor
    fname     := "min" | "max" | "abs"
    ident     := "x" | "y" | "t"
    number    := decimal literal | integer "/" integer

Rational literals like ``47/24`` (no interior whitespace) are stored exactly
as one :class:`Number`; ``47 / 24`` is ordinary division.  The final ``;``
before ``}`` may be omitted.  Piecewise arms are tested in declaration order
and the first matching guard wins.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from .errors import ExprEvalError, ExprSyntaxError

# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Number:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Comparison:
    left: "Expr"
    op: str
    right: "Expr"


@dataclass(frozen=True)
class BoolOp:
    op: str
    left: "Guard"
    right: "Guard"


@dataclass(frozen=True)
class Arm:
    guard: "Guard"
    body: "Expr"


@dataclass(frozen=True)
class Piecewise:
    arms: tuple[Arm, ...]
    otherwise: Union["Expr", None]


Expr = Union[Number, Var, Neg, BinOp, Call, Piecewise]
Guard = Union[Comparison, BoolOp]

IDENTS = ("x", "y", "t")
FNAMES = ("min", "max", "abs")
KEYWORDS = ("piecewise", "else", "and", "or")

# ---------------------------------------------------------------------------
# tokenizer

_RATIONAL = re.compile(r"(\d+)/(\d+)(?![\d.])")
_DECIMAL = re.compile(r"\d+\.\d+|\d+|\.\d+")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_TWO_CHAR = ("=>", "<=", ">=", "==")
_ONE_CHAR = "+-*/(){},;<>"


@dataclass(frozen=True)
class _Token:
    kind: str  # "number", "name", a punctuation literal, or "end"
    text: str
    line: int
    col: int
    value: Fraction | None = None


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch.isdigit() or ch == ".":
            m = _RATIONAL.match(text, i)
            if m:
                value = Fraction(int(m.group(1)), int(m.group(2)))
            else:
                m = _DECIMAL.match(text, i)
                if not m:
                    raise ExprSyntaxError(f"bad numeric literal near {text[i:i+8]!r}", line, col)
                value = Fraction(m.group(0))
            tokens.append(_Token("number", m.group(0), line, col, value))
            col += m.end() - i
            i = m.end()
            continue
        if ch.isalpha() or ch == "_":
            m = _NAME.match(text, i)
            tokens.append(_Token("name", m.group(0), line, col))
            col += m.end() - i
            i = m.end()
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR:
            tokens.append(_Token(two, two, line, col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR:
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("end", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# parser

_FACTOR_START = ("number", "identifier", "function call", "(", "-")


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._i = 0

    def _peek(self) -> _Token:
        return self._tokens[self._i]

    def _advance(self) -> _Token:
        tok = self._tokens[self._i]
        self._i += 1
        return tok

    def _fail(self, message: str, tok: _Token, expected: tuple[str, ...] = ()) -> None:
        raise ExprSyntaxError(message, tok.line, tok.col, expected)

    def _expect(self, kind: str) -> _Token:
        tok = self._peek()
        if tok.kind != kind:
            self._fail(f"unexpected {tok.text!r}" if tok.kind != "end" else "unexpected end of input",
                       tok, (kind,))
        return self._advance()

    # --- grammar rules ---

    def expr(self) -> Expr:
        tok = self._peek()
        if tok.kind == "name" and tok.text == "piecewise":
            return self.piecewise()
        return self.arith()

    def piecewise(self) -> Piecewise:
        kw = self._advance()
        self._expect("{")
        arms: list[Arm] = []
        otherwise: Expr | None = None
        while True:
            tok = self._peek()
            if tok.kind == "name" and tok.text == "else":
                self._advance()
                self._expect("=>")
                otherwise = self.arith()
                if self._peek().kind == ";":
                    self._advance()
                self._expect("}")
                break
            guard = self.guard()
            self._expect("=>")
            arms.append(Arm(guard, self.arith()))
            tok = self._peek()
            if tok.kind == ";":
                self._advance()
                if self._peek().kind == "}":
                    self._advance()
                    break
                continue
            if tok.kind == "}":
                self._advance()
                break
            self._fail(f"unexpected {tok.text!r} after piecewise arm", tok, (";", "}"))
        if not arms:
            self._fail("piecewise needs at least one guarded arm", kw)
        return Piecewise(tuple(arms), otherwise)

    def guard(self) -> Guard:
        node: Guard = self.cmp()
        while True:
            tok = self._peek()
            if tok.kind == "name" and tok.text in ("and", "or"):
                self._advance()
                node = BoolOp(tok.text, node, self.cmp())
            else:
                return node

    def cmp(self) -> Comparison:
        left = self.arith()
        tok = self._peek()
        if tok.kind not in ("<=", "<", ">=", ">", "=="):
            self._fail(f"expected comparison, got {tok.text!r}", tok, ("<=", "<", ">=", ">", "=="))
        self._advance()
        return Comparison(left, tok.kind, self.arith())

    def arith(self) -> Expr:
        node = self.term()
        while self._peek().kind in ("+", "-"):
            op = self._advance().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self._peek().kind in ("*", "/"):
            op = self._advance().kind
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        tok = self._peek()
        if tok.kind == "-":
            self._advance()
            return Neg(self.factor())
        if tok.kind == "(":
            self._advance()
            node = self.arith()
            self._expect(")")
            return node
        if tok.kind == "number":
            self._advance()
            return Number(tok.value)  # type: ignore[arg-type]
        if tok.kind == "name":
            if tok.text in IDENTS:
                self._advance()
                return Var(tok.text)
            if tok.text in FNAMES:
                return self.call()
            if tok.text == "piecewise":
                self._fail("piecewise is only allowed at the top level", tok)
            if tok.text in KEYWORDS:
                self._fail(f"unexpected keyword {tok.text!r}", tok, _FACTOR_START)
            self._fail(f"unknown identifier {tok.text!r}", tok, IDENTS + FNAMES)
        self._fail(
            f"unexpected {tok.text!r}" if tok.kind != "end" else "unexpected end of input",
            tok, _FACTOR_START,
        )
        raise AssertionError("unreachable")

    def call(self) -> Call:
        name_tok = self._advance()
        self._expect("(")
        args = [self.arith()]
        while True:
            tok = self._peek()
            if tok.kind == ",":
                self._advance()
                args.append(self.arith())
                continue
            if tok.kind == ")":
                self._advance()
                break
            self._fail(
                f"unexpected {tok.text!r} in call" if tok.kind != "end" else "unexpected end of input",
                tok, (")", ","),
            )
        if name_tok.text == "abs" and len(args) != 1:
            self._fail("abs takes exactly one argument", name_tok)
        if name_tok.text in ("min", "max") and len(args) < 2:
            self._fail(f"{name_tok.text} takes at least two arguments", name_tok)
        return Call(name_tok.text, tuple(args))


def parse_expression(text: str) -> Expr:
    """Parse expression text; raises :class:`ExprSyntaxError` with position."""
    tokens = _tokenize(text)
    if tokens[0].kind == "end":
        raise ExprSyntaxError("empty expression", 1, 1, ("expression",))
    parser = _Parser(tokens)
    node = parser.expr()
    tail = parser._peek()
    if tail.kind != "end":
        raise ExprSyntaxError(f"unexpected trailing input {tail.text!r}", tail.line, tail.col,
                              ("end of input",))
    return node


# ---------------------------------------------------------------------------
# evaluation

Numeric = Union[int, float, Fraction]


def _eval_guard(node: Guard, bindings: dict[str, Numeric]) -> bool:
    if isinstance(node, Comparison):
        a = _eval(node.left, bindings)
        b = _eval(node.right, bindings)
        if node.op == "<=":
            return a <= b
        if node.op == "<":
            return a < b
        if node.op == ">=":
            return a >= b
        if node.op == ">":
            return a > b
        return a == b
    if node.op == "and":
        return _eval_guard(node.left, bindings) and _eval_guard(node.right, bindings)
    return _eval_guard(node.left, bindings) or _eval_guard(node.right, bindings)


def _eval(node: Expr, bindings: dict[str, Numeric]) -> Numeric:
    match node:
        case Number(value):
            return value
        case Var(name):
            try:
                return bindings[name]
            except KeyError:
                raise ExprEvalError(f"unbound variable {name!r}") from None
        case Neg(operand):
            return -_eval(operand, bindings)
        case BinOp(op, left, right):
            a = _eval(left, bindings)
            b = _eval(right, bindings)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            try:
                return a / b
            except ZeroDivisionError:
                raise ExprEvalError("division by zero") from None
        case Call(func, args):
            vals = [_eval(a, bindings) for a in args]
            if func == "abs":
                return abs(vals[0])
            return min(vals) if func == "min" else max(vals)
        case Piecewise(arms, otherwise):
            for arm in arms:
                if _eval_guard(arm.guard, bindings):
                    return _eval(arm.body, bindings)
            if otherwise is not None:
                return _eval(otherwise, bindings)
            raise ExprEvalError("no piecewise arm matched and there is no else arm")
    raise ExprEvalError(f"cannot evaluate node {node!r}")


def eval_expression(ast: Expr, bindings: dict[str, float]) -> float:
    """Evaluate with the given variable bindings; always returns a float.

    Constants stay exact rationals internally, so guards like
    ``t <= 47/24`` compare without rounding.
    """
    result = float(_eval(ast, dict(bindings)))
    if math.isnan(result):
        raise ExprEvalError("expression evaluated to NaN")
    return result


def eval_numeric(ast: Expr, bindings: dict[str, Numeric]) -> Numeric:
    """Evaluate without the final float cast.

    With rational bindings the result stays an exact ``Fraction`` whenever
    the expression uses only rational arithmetic, which lets callers compare
    values against grid points without rounding artifacts.
    """
    return _eval(ast, dict(bindings))


def free_variables(ast: Expr | Guard | Arm) -> set[str]:
    match ast:
        case Number():
            return set()
        case Var(name):
            return {name}
        case Neg(operand):
            return free_variables(operand)
        case BinOp(_, left, right) | Comparison(left, _, right) | BoolOp(_, left, right):
            return free_variables(left) | free_variables(right)
        case Call(_, args):
            out: set[str] = set()
            for a in args:
                out |= free_variables(a)
            return out
        case Arm(guard, body):
            return free_variables(guard) | free_variables(body)
        case Piecewise(arms, otherwise):
            out = set()
            for arm in arms:
                out |= free_variables(arm)
            if otherwise is not None:
                out |= free_variables(otherwise)
            return out
    raise TypeError(f"not an AST node: {ast!r}")


def bind_function(ast: Expr, params: tuple[str, ...]) -> Callable[..., float]:
    """Compile an expression into a positional function of ``params``.

    Rejects expressions whose free variables do not fit the slot.
    """
    free = free_variables(ast)
    extra = free - set(params)
    if extra:
        raise ExprEvalError(
            f"expression uses {sorted(extra)} but this slot only provides {list(params)}"
        )

    def call(*args: float) -> float:
        return eval_expression(ast, dict(zip(params, args)))

    return call


# ---------------------------------------------------------------------------
# pretty-printing

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node: Expr) -> int:
    return _PRECEDENCE[node.op] if isinstance(node, BinOp) else 3


def _fmt_number(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    if f < 0:
        # the grammar has no negative literals; print as a negated factor
        return f"-({-f.numerator}/{f.denominator})"
    return f"{f.numerator}/{f.denominator}"


def _fmt_arith(node: Expr) -> str:
    match node:
        case Number(value):
            return _fmt_number(value)
        case Var(name):
            return name
        case Neg(operand):
            inner = _fmt_arith(operand)
            return f"-({inner})" if isinstance(operand, BinOp) else f"-{inner}"
        case BinOp(op, left, right):
            level = _PRECEDENCE[op]
            lhs = _fmt_arith(left)
            if _prec(left) < level:
                lhs = f"({lhs})"
            rhs = _fmt_arith(right)
            if _prec(right) <= level:
                rhs = f"({rhs})"
            return f"{lhs} {op} {rhs}"
        case Call(func, args):
            return f"{func}({', '.join(_fmt_arith(a) for a in args)})"
    raise ValueError(f"piecewise is only expressible at the top level: {node!r}")


def _fmt_guard(node: Guard) -> str:
    if isinstance(node, Comparison):
        return f"{_fmt_arith(node.left)} {node.op} {_fmt_arith(node.right)}"
    if isinstance(node.right, BoolOp):
        raise ValueError("guard chains must be left-associated to be expressible")
    return f"{_fmt_guard(node.left)} {node.op} {_fmt_guard(node.right)}"


def format_expression(ast: Expr) -> str:
    """Render an AST back to parseable text (see the round-trip property)."""
    if isinstance(ast, Piecewise):
        parts = [f"{_fmt_guard(arm.guard)} => {_fmt_arith(arm.body)} ;" for arm in ast.arms]
        if ast.otherwise is not None:
            parts.append(f"else => {_fmt_arith(ast.otherwise)} ;")
        return "piecewise { " + " ".join(parts) + " }"
    return _fmt_arith(ast)
