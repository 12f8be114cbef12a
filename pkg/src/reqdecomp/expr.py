"""Expression trees for block functions.

Grammar (plain strings in problem-spec files)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" INT)?
    atom   := NUMBER | IDENT | "(" expr ")"

Identifiers listed as parameters parse to :class:`Param` nodes, every other
identifier to :class:`Var`. Trees are evaluated forward with the natural
interval extension (:func:`eval_forward`) and contracted backward with
:func:`hc4_revise`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping

from .interval import EMPTY, INF, Interval, IntervalBox, extended_div, nth_root_bounds

__all__ = [
    "Add",
    "Const",
    "Div",
    "Expr",
    "ExprSyntaxError",
    "Mul",
    "Neg",
    "Param",
    "Pow",
    "Sub",
    "UnknownIdentifierError",
    "Var",
    "Hc4Result",
    "diff",
    "eval_forward",
    "eval_point",
    "evaluate",
    "hc4_revise",
    "identifiers",
    "parse",
    "square",
    "substitute_params",
    "unparse",
]


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position} in {text!r}")


class UnknownIdentifierError(KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"identifier {name!r} not in scope")

    def __str__(self) -> str:
        return self.args[0]


class Expr:
    """Base class of expression nodes (all immutable)."""

    __slots__ = ()

    def children(self) -> tuple["Expr", ...]:
        return ()

    def __str__(self) -> str:
        return unparse(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Param(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Pow(Expr):
    """``arg ** n`` for a non-negative integer ``n``; ``n == 2`` is the square."""

    arg: Expr
    n: int

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class _Binary(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


class Add(_Binary):
    pass


class Sub(_Binary):
    pass


class Mul(_Binary):
    pass


class Div(_Binary):
    pass


def square(e: Expr) -> Pow:
    return Pow(e, 2)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unknown character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, params: frozenset[str]):
        self.text = text
        self.params = params
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok=None):
        tok = tok or self.peek()
        raise ExprSyntaxError(msg, self.text, tok[2])

    def parse(self) -> Expr:
        if self.peek()[0] == "end":
            self.error("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "num" or not re.fullmatch(r"\d+", tok[1]):
                self.error("exponent must be a non-negative integer literal")
            self.take()
            return Pow(base, int(tok[1]))
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return Const(float(val))
        if kind == "id":
            self.take()
            return Param(val) if val in self.params else Var(val)
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            if self.peek()[1] != ")":
                self.error("expected ')'")
            self.take()
            return e
        if kind == "end":
            self.error("unexpected end of expression")
        self.error(f"unexpected token {val!r}")


def parse(text: str, params: Iterable[str] = ()) -> Expr:
    """Parse ``text``; identifiers in ``params`` become :class:`Param` nodes."""
    return _Parser(text, frozenset(params)).parse()


_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Const) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return 3
    return _PREC.get(type(e), 5)


def unparse(e: Expr) -> str:
    """Render ``e`` back to grammar text; ``parse(unparse(e)) == e``."""
    if isinstance(e, Const):
        v = e.value
        if not math.isfinite(v):
            raise ValueError("non-finite constant cannot be rendered")
        s = repr(v)
        return s
    if isinstance(e, (Var, Param)):
        return e.name
    if isinstance(e, Neg):
        inner = unparse(e.arg)
        if _prec(e.arg) < 3 or isinstance(e.arg, Neg) or (isinstance(e.arg, Const) and e.arg.value < 0):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        inner = unparse(e.arg)
        if _prec(e.arg) <= 4:
            inner = f"({inner})"
        return f"{inner}^{e.n}"
    if isinstance(e, _Binary):
        p = _PREC[type(e)]
        op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
        left = unparse(e.left)
        if _prec(e.left) < p:
            left = f"({left})"
        right = unparse(e.right)
        # right operand of a left-associative operator needs parens at equal precedence
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left}{op}{right}"
    raise TypeError(f"not an expression node: {e!r}")


def identifiers(e: Expr) -> tuple[set[str], set[str]]:
    """Return ``(variables, parameters)`` referenced by ``e``."""
    vs: set[str] = set()
    ps: set[str] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            vs.add(n.name)
        elif isinstance(n, Param):
            ps.add(n.name)
        stack.extend(n.children())
    return vs, ps


def substitute_params(e: Expr, params: Iterable[str]) -> Expr:
    """Re-tag ``Var`` nodes whose names are in ``params`` as ``Param`` nodes."""
    params = frozenset(params)

    def go(n: Expr) -> Expr:
        if isinstance(n, Var):
            return Param(n.name) if n.name in params else n
        if isinstance(n, Neg):
            return Neg(go(n.arg))
        if isinstance(n, Pow):
            return Pow(go(n.arg), n.n)
        if isinstance(n, _Binary):
            return type(n)(go(n.left), go(n.right))
        return n

    return go(e)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def evaluate(e: Expr, env: Mapping[str, Any], lift: Callable[[float], Any] = float) -> Any:
    """Evaluate ``e`` over any value type supporting ``+ - * /``, unary ``-`` and ``**n``.

    ``lift`` converts constants into that value type. Used with floats, numpy
    arrays, interval arrays and interval AD values alike.
    """
    if isinstance(e, Const):
        return lift(e.value)
    if isinstance(e, (Var, Param)):
        try:
            return env[e.name]
        except KeyError:
            raise UnknownIdentifierError(e.name) from None
    if isinstance(e, Neg):
        return -evaluate(e.arg, env, lift)
    if isinstance(e, Pow):
        return evaluate(e.arg, env, lift) ** e.n
    a = evaluate(e.left, env, lift)
    b = evaluate(e.right, env, lift)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    if isinstance(e, Div):
        return a / b
    raise TypeError(f"not an expression node: {e!r}")


def eval_forward(e: Expr, scope: Mapping[str, Interval]) -> Interval:
    """Natural interval extension of ``e`` over ``scope``.

    Raises :class:`UnknownIdentifierError` for a missing identifier and
    :class:`~reqdecomp.interval.UnboundedQuotientError` when a divisor spans zero.
    """
    return evaluate(e, scope, Interval.point)


def eval_point(e: Expr, env: Mapping[str, float]) -> float:
    return evaluate(e, env, float)


_ZERO = Const(0.0)
_ONE = Const(1.0)


def diff(e: Expr, name: str) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to identifier ``name``."""
    if isinstance(e, Const):
        return _ZERO
    if isinstance(e, (Var, Param)):
        return _ONE if e.name == name else _ZERO
    if isinstance(e, Neg):
        return Neg(diff(e.arg, name))
    if isinstance(e, Pow):
        if e.n == 0:
            return _ZERO
        inner = diff(e.arg, name)
        if e.n == 1:
            return inner
        return Mul(Mul(Const(float(e.n)), Pow(e.arg, e.n - 1)), inner)
    da = diff(e.left, name)
    db = diff(e.right, name)
    if isinstance(e, Add):
        return Add(da, db)
    if isinstance(e, Sub):
        return Sub(da, db)
    if isinstance(e, Mul):
        return Add(Mul(da, e.right), Mul(e.left, db))
    if isinstance(e, Div):
        return Div(Sub(Mul(da, e.right), Mul(e.left, db)), Pow(e.right, 2))
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# HC4-revise
# ---------------------------------------------------------------------------

_UNIVERSE = Interval.entire()


@dataclass(frozen=True)
class Hc4Result:
    scope: IntervalBox
    feasible: bool
    # first identifier whose domain became empty (None when feasible)
    empty_at: str | None = None


def _forward_annotate(e: Expr, scope: Mapping[str, Interval], vals: dict[int, Interval]) -> Interval:
    if isinstance(e, Const):
        v = Interval.point(e.value)
    elif isinstance(e, (Var, Param)):
        try:
            v = scope[e.name]
        except KeyError:
            raise UnknownIdentifierError(e.name) from None
    elif isinstance(e, Neg):
        v = -_forward_annotate(e.arg, scope, vals)
    elif isinstance(e, Pow):
        v = _forward_annotate(e.arg, scope, vals).pow_int(e.n)
    else:
        a = _forward_annotate(e.left, scope, vals)
        b = _forward_annotate(e.right, scope, vals)
        if isinstance(e, Add):
            v = a + b
        elif isinstance(e, Sub):
            v = a - b
        elif isinstance(e, Mul):
            v = a * b
        else:
            v = a.div(b, universe=_UNIVERSE)
    vals[id(e)] = v
    return v


def _hull_pieces(pieces: Iterable[Interval], prior: Interval) -> Interval:
    out = EMPTY
    for p in pieces:
        out = out.hull(p.intersect(prior))
    return out


class _Infeasible(Exception):
    def __init__(self, name: str | None):
        self.name = name


def _backward(e: Expr, target: Interval, vals: dict[int, Interval], dom: dict[str, Interval], params: set[str]) -> None:
    """Project ``target`` (already intersected with the node's forward value) onto the children."""
    if target.is_empty:
        raise _Infeasible(None)
    if isinstance(e, Const):
        return
    if isinstance(e, Var):
        new = dom[e.name].intersect(target)
        dom[e.name] = new
        if new.is_empty:
            raise _Infeasible(e.name)
        return
    if isinstance(e, Param):
        # parameters are never contracted, but an empty meet means no solution
        if dom[e.name].intersect(target).is_empty:
            raise _Infeasible(e.name)
        return
    if isinstance(e, Neg):
        a = vals[id(e.arg)].intersect(-target)
        _backward(e.arg, a, vals, dom, params)
        return
    if isinstance(e, Pow):
        prior = vals[id(e.arg)]
        if e.n == 0:
            return
        if e.n == 1:
            new = prior.intersect(target)
        elif e.n % 2 == 0:
            r = nth_root_bounds(target, e.n)
            if r.is_empty:
                new = EMPTY
            else:
                new = _hull_pieces([r, -r], prior)
        else:
            pos = nth_root_bounds(target, e.n)
            neg = nth_root_bounds(-target, e.n)
            pieces = []
            if not pos.is_empty:
                pieces.append(pos)
            if not neg.is_empty:
                pieces.append(-neg)
            new = _hull_pieces(pieces, prior)
        _backward(e.arg, new, vals, dom, params)
        return
    a = vals[id(e.left)]
    b = vals[id(e.right)]
    if isinstance(e, Add):
        a2 = a.intersect(target - b)
        b2 = b.intersect(target - a2)
    elif isinstance(e, Sub):
        a2 = a.intersect(target + b)
        b2 = b.intersect(a2 - target)
    elif isinstance(e, Mul):
        a2 = _hull_pieces(extended_div(target, b), a)
        b2 = _hull_pieces(extended_div(target, a2), b)
    elif isinstance(e, Div):
        # target = a / b  =>  a in target * b,  b in a / target
        a2 = a.intersect(target * b) if not (math.isinf(target.mag) or math.isinf(b.mag)) else a
        b2 = _hull_pieces(extended_div(a2, target), b)
    else:
        raise TypeError(f"not an expression node: {e!r}")
    _backward(e.left, a2, vals, dom, params)
    _backward(e.right, b2, vals, dom, params)


def hc4_revise(output: str, e: Expr, scope: Mapping[str, Interval]) -> Hc4Result:
    """Contract ``scope`` with the constraint ``output = e``.

    A forward sweep annotates every node with its interval; the root is met
    with the domain of ``output``; a backward sweep projects that interval
    down through inverse operations. Branches of even powers and of
    zero-straddling quotients are each met with the prior node value and then
    hulled. ``Param`` identifiers are read but never contracted.
    """
    dom: dict[str, Interval] = dict(scope)
    if output not in dom:
        raise UnknownIdentifierError(output)
    _, params = identifiers(e)
    for name, iv in dom.items():
        if iv.is_empty:
            return Hc4Result(IntervalBox(dom), False, name)
    vals: dict[int, Interval] = {}
    root = _forward_annotate(e, dom, vals)
    target = root.intersect(dom[output])
    dom[output] = target
    if target.is_empty:
        return Hc4Result(IntervalBox(dom), False, output)
    try:
        _backward(e, target, vals, dom, params)
    except _Infeasible as exc:
        name = exc.name
        if name is None:
            name = output
        if name in dom and name not in params:
            dom[name] = EMPTY
        return Hc4Result(IntervalBox(dom), False, name)
    return Hc4Result(IntervalBox(dom), True, None)
