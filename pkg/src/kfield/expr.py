"""Immutable expression trees over named real variables.

Every other module builds on this one: Hamiltonians, Lagrangians, section
components and k-vector-field components are all Expr values.  The supported
surface is deliberately small: parse / evaluate / differentiate / substitute,
plus a simplifier restricted to constant folding and 0/1 identities.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    ExprSyntaxError,
    UnboundVariableError,
    UnknownFunctionError,
)

UNARY_FUNCTIONS = ("sin", "cos", "tan", "atan", "exp", "log", "sqrt", "tanh")
BINARY_KINDS = ("add", "sub", "mul", "div", "pow")

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# printing precedence; atoms and function calls never need parentheses
_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


@dataclass(frozen=True)
class Expr:
    """One node of an expression tree.

    kind is 'const', 'var', 'neg', one of UNARY_FUNCTIONS, or one of
    BINARY_KINDS.  Trees are finite, acyclic and immutable; all operations
    on them are pure.
    """

    kind: str
    value: float = 0.0
    name: str = ""
    args: tuple = ()

    def __str__(self):
        return to_string(self)

    def eval(self, assignment):
        return evaluate(self, assignment)

    def diff(self, var):
        return diff(self, var)

    def free_vars(self):
        return free_vars(self)

    def is_const(self, value=None):
        if self.kind != "const":
            return False
        return value is None or self.value == value


def const(value) -> Expr:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError("constants must be finite reals")
    return Expr("const", value=value)


def var(name) -> Expr:
    if not _NAME_RE.match(name):
        raise ValueError(f"invalid variable name {name!r}")
    return Expr("var", name=name)


def unary(kind, arg) -> Expr:
    if kind != "neg" and kind not in UNARY_FUNCTIONS:
        raise ValueError(f"unknown unary kind {kind!r}")
    return Expr(kind, args=(arg,))


def binary(kind, left, right) -> Expr:
    if kind not in BINARY_KINDS:
        raise ValueError(f"unknown binary kind {kind!r}")
    return Expr(kind, args=(left, right))


def neg(a):
    return unary("neg", a)


def add(a, b):
    return binary("add", a, b)


def sub(a, b):
    return binary("sub", a, b)


def mul(a, b):
    return binary("mul", a, b)


def div(a, b):
    return binary("div", a, b)


def pow_(a, b):
    return binary("pow", a, b)


ZERO = const(0.0)
ONE = const(1.0)


def add_all(terms):
    """Left-assoc sum of a sequence of Exprs (0 for the empty sequence)."""
    terms = list(terms)
    if not terms:
        return ZERO
    acc = terms[0]
    for t in terms[1:]:
        acc = add(acc, t)
    return acc


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\^|\*|/|\+|-|\(|\)))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            # skip over whitespace-only tail
            if text[pos:].strip() == "":
                break
            bad = len(text) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        start = m.end() - len(m.group(m.lastgroup))
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser.

    Grammar (pow binds tighter than unary minus and is right associative):
        expr   := term (('+'|'-') term)*
        term   := unary (('*'|'/') unary)*
        unary  := '-' unary | power
        power  := atom ('^' unary)?
        atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'
    """

    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, val, off = self.peek()
        if kind == "op" and val == op:
            return self.advance()
        raise ExprSyntaxError("unexpected token", off, expected=repr(op))

    def parse(self):
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"trailing input {val!r}", off, expected="end of input")
        return e

    def expr(self):
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                rhs = self.term()
                e = add(e, rhs) if val == "+" else sub(e, rhs)
            else:
                return e

    def term(self):
        e = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                rhs = self.unary()
                e = mul(e, rhs) if val == "*" else div(e, rhs)
            else:
                return e

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            return pow_(base, self.unary())
        return base

    def atom(self):
        kind, val, off = self.advance()
        if kind == "num":
            return const(float(val))
        if kind == "name":
            nxt_kind, nxt_val, _ = self.peek()
            if nxt_kind == "op" and nxt_val == "(":
                if val not in UNARY_FUNCTIONS:
                    raise UnknownFunctionError(val, off)
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return unary(val, arg)
            return var(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", off, expected="an operand")
        raise ExprSyntaxError(f"unexpected token {val!r}", off, expected="an operand")


def parse(text: str) -> Expr:
    """Parse expression text into an Expr.

    Raises ExprSyntaxError (with byte offset and expected-token hint) or
    UnknownFunctionError for a call to an unrecognized name.
    """
    if not text or text.strip() == "":
        raise ExprSyntaxError("empty expression", 0, expected="an operand")
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing (round-trippable: parse(to_string(e)) rebuilds the same tree)


def _fmt_const(v):
    if v == int(v) and abs(v) < 1e16:
        return repr(int(v))
    return repr(v)


def to_string(e: Expr) -> str:
    if e.kind == "const":
        if e.value < 0:
            # prints as unary minus applied to the positive literal
            return "-" + _fmt_const(-e.value)
        return _fmt_const(e.value)
    if e.kind == "var":
        return e.name
    if e.kind == "neg":
        inner = e.args[0]
        s = to_string(inner)
        if _PREC.get(inner.kind, 9) < _PREC["neg"]:
            s = f"({s})"
        return "-" + s
    if e.kind in UNARY_FUNCTIONS:
        return f"{e.kind}({to_string(e.args[0])})"
    left, right = e.args
    p = _PREC[e.kind]
    ls, rs = to_string(left), to_string(right)
    if e.kind == "pow":
        # left operand of ^ must be atomic (pow > unary minus, right-assoc)
        if left.kind not in ("var",) + UNARY_FUNCTIONS and not (
            left.kind == "const" and left.value >= 0
        ):
            ls = f"({ls})"
        if _PREC.get(right.kind, 9) < _PREC["neg"]:
            rs = f"({rs})"
    else:
        if _PREC.get(left.kind, 9) < p:
            ls = f"({ls})"
        # parenthesize equal precedence on the right to keep the exact tree
        if _PREC.get(right.kind, 9) <= p:
            rs = f"({rs})"
    op = {"add": " + ", "sub": " - ", "mul": "*", "div": "/", "pow": "^"}[e.kind]
    return f"{ls}{op}{rs}"


# ---------------------------------------------------------------------------
# evaluation


def _as_int_exponent(v):
    if isinstance(v, float) and v == int(v) and abs(v) <= 1e9:
        return int(v)
    return None


def _eval_pow(base, expo):
    n = _as_int_exponent(expo)
    if n is not None:
        if base == 0.0 and n < 0:
            raise DomainError("0 raised to a negative power")
        try:
            return float(base**n)
        except OverflowError:
            return math.inf if (base > 1 or n % 2 == 0) else -math.inf
    if base == 0.0 and expo < 0:
        raise DomainError("0 raised to a negative power")
    if base < 0.0:
        raise DomainError(f"negative base {base} with non-integer exponent {expo}")
    try:
        return math.pow(base, expo)
    except OverflowError:
        return math.inf


def evaluate(e: Expr, assignment) -> float:
    """IEEE-double evaluation of e at a variable assignment (name -> value)."""
    k = e.kind
    if k == "const":
        return e.value
    if k == "var":
        try:
            return float(assignment[e.name])
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if k == "neg":
        return -evaluate(e.args[0], assignment)
    if k in UNARY_FUNCTIONS:
        x = evaluate(e.args[0], assignment)
        if k == "log":
            if x <= 0.0:
                raise DomainError(f"log of nonpositive value {x}")
            return math.log(x)
        if k == "sqrt":
            if x < 0.0:
                raise DomainError(f"sqrt of negative value {x}")
            return math.sqrt(x)
        if k == "exp":
            try:
                return math.exp(x)
            except OverflowError:
                return math.inf
        return getattr(math, k)(x)
    a = evaluate(e.args[0], assignment)
    b = evaluate(e.args[1], assignment)
    if k == "add":
        return a + b
    if k == "sub":
        return a - b
    if k == "mul":
        return a * b
    if k == "div":
        if b == 0.0:
            raise DomainError("division by zero")
        return a / b
    return _eval_pow(a, b)


def eval_array(e: Expr, assignment):
    """Vectorized evaluation with numpy broadcasting.

    Domain violations are not raised here; they surface as nan/inf entries
    (grid residual code masks boundary layers the same way).
    """
    k = e.kind
    if k == "const":
        return e.value
    if k == "var":
        try:
            return assignment[e.name]
        except KeyError:
            raise UnboundVariableError(e.name) from None
    with np.errstate(all="ignore"):
        if k == "neg":
            return -eval_array(e.args[0], assignment)
        if k in UNARY_FUNCTIONS:
            x = eval_array(e.args[0], assignment)
            fn = {"atan": np.arctan}.get(k, getattr(np, k, None))
            return fn(x)
        a = eval_array(e.args[0], assignment)
        b = eval_array(e.args[1], assignment)
        if k == "add":
            return a + b
        if k == "sub":
            return a - b
        if k == "mul":
            return a * b
        if k == "div":
            return a / b
        if e.args[1].kind == "const":
            n = _as_int_exponent(e.args[1].value)
            if n is not None:
                return a**n
        return np.power(a, b)


def free_vars(e: Expr) -> frozenset:
    if e.kind == "var":
        return frozenset((e.name,))
    if e.kind == "const":
        return frozenset()
    out = frozenset()
    for a in e.args:
        out |= free_vars(a)
    return out


def substitute(e: Expr, mapping) -> Expr:
    """Replace variables by Exprs (mapping: name -> Expr)."""
    if e.kind == "var":
        return mapping.get(e.name, e)
    if e.kind == "const":
        return e
    return Expr(e.kind, args=tuple(substitute(a, mapping) for a in e.args))


# ---------------------------------------------------------------------------
# simplification: constant folding and 0/1 identities only


def simplify(e: Expr) -> Expr:
    if e.kind in ("const", "var"):
        return e
    args = tuple(simplify(a) for a in e.args)
    k = e.kind

    if all(a.kind == "const" for a in args):
        folded = _fold(k, args)
        if folded is not None:
            return folded

    if k == "neg":
        (a,) = args
        if a.kind == "neg":
            return a.args[0]
        return Expr("neg", args=args)

    if k in UNARY_FUNCTIONS:
        return Expr(k, args=args)

    a, b = args
    if k == "add":
        if a.is_const(0.0):
            return b
        if b.is_const(0.0):
            return a
    elif k == "sub":
        if b.is_const(0.0):
            return a
        if a.is_const(0.0):
            return simplify(neg(b))
    elif k == "mul":
        if a.is_const(0.0) or b.is_const(0.0):
            return ZERO
        if a.is_const(1.0):
            return b
        if b.is_const(1.0):
            return a
    elif k == "div":
        if b.is_const(1.0):
            return a
    elif k == "pow":
        if b.is_const(1.0):
            return a
        if b.is_const(0.0):
            return ONE
    return Expr(k, args=(a, b))


def _fold(kind, args):
    """Fold an all-constant node; None when folding would leave the domain."""
    try:
        vals = [a.value for a in args]
        if kind == "neg":
            out = -vals[0]
        elif kind in UNARY_FUNCTIONS:
            out = evaluate(Expr(kind, args=(const(vals[0]),)), {})
        else:
            out = evaluate(Expr(kind, args=(const(vals[0]), const(vals[1]))), {})
    except DomainError:
        return None
    if not math.isfinite(out):
        return None
    return const(out)


# ---------------------------------------------------------------------------
# differentiation


def diff(e: Expr, name: str) -> Expr:
    """Exact symbolic derivative of e with respect to the named variable.

    The raw derivative tree is passed through simplify (folding and 0/1
    identities); no factoring or trig rewriting happens.
    """
    return simplify(_diff(e, name))


def _diff(e, name):
    k = e.kind
    if k == "const":
        return ZERO
    if k == "var":
        return ONE if e.name == name else ZERO
    if k == "neg":
        return neg(_diff(e.args[0], name))
    if k in UNARY_FUNCTIONS:
        (u,) = e.args
        du = _diff(u, name)
        if k == "sin":
            return mul(unary("cos", u), du)
        if k == "cos":
            return neg(mul(unary("sin", u), du))
        if k == "tan":
            return div(du, pow_(unary("cos", u), const(2)))
        if k == "atan":
            return div(du, add(ONE, pow_(u, const(2))))
        if k == "exp":
            return mul(e, du)
        if k == "log":
            return div(du, u)
        if k == "sqrt":
            return div(du, mul(const(2), e))
        # tanh
        return mul(sub(ONE, pow_(unary("tanh", u), const(2))), du)
    a, b = e.args
    da, db = _diff(a, name), _diff(b, name)
    if k == "add":
        return add(da, db)
    if k == "sub":
        return sub(da, db)
    if k == "mul":
        return add(mul(da, b), mul(a, db))
    if k == "div":
        return div(sub(mul(da, b), mul(a, db)), pow_(b, const(2)))
    # pow
    if b.kind == "const" and _as_int_exponent(b.value) is not None:
        n = _as_int_exponent(b.value)
        return mul(mul(const(n), pow_(a, const(n - 1))), da)
    # general u^v = exp(v log u)
    return mul(e, add(mul(db, unary("log", a)), mul(b, div(da, a))))
