"""算術組込み述語"""

from __future__ import annotations

from typing import Callable

from src.shared.errors import EvaluationError, InstantiationError, ZeroDivisor

from .terms import Atom, Compound, Int, Term, Var

COMPARISONS: dict[str, Callable[[int, int], bool]] = {
    "<": lambda a, b: a < b,
    "=<": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "=:=": lambda a, b: a == b,
    "=\\=": lambda a, b: a != b,
}

BUILTINS: frozenset[tuple[str, int]] = frozenset(
    {(op, 2) for op in COMPARISONS} | {("is", 2), ("=", 2), ("true", 0)}
)


def is_builtin(literal: Term) -> bool:
    if isinstance(literal, Compound):
        return (literal.name, len(literal.args)) in BUILTINS
    return isinstance(literal, Atom) and (literal.name, 0) in BUILTINS


def trunc_div(a: int, b: int) -> int:
    """0 方向への切り捨て除算"""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def trunc_rem(a: int, b: int) -> int:
    """被除数の符号をもつ剰余"""
    return a - b * trunc_div(a, b)


def _div(a: int, b: int, expr: Term) -> int:
    if b == 0:
        raise ZeroDivisor(expr)
    return trunc_div(a, b)


def _rem(a: int, b: int, expr: Term) -> int:
    if b == 0:
        raise ZeroDivisor(expr)
    return trunc_rem(a, b)


def _shl(a: int, b: int, expr: Term) -> int:
    if b < 0:
        raise EvaluationError(expr, "negative shift count")
    return a << b


def _shr(a: int, b: int, expr: Term) -> int:
    if b < 0:
        raise EvaluationError(expr, "negative shift count")
    return a >> b


_BINARY: dict[str, Callable[[int, int, Term], int]] = {
    "+": lambda a, b, _: a + b,
    "-": lambda a, b, _: a - b,
    "*": lambda a, b, _: a * b,
    "//": _div,
    "rem": _rem,
    "<<": _shl,
    ">>": _shr,
    "/\\": lambda a, b, _: a & b,
    "\\/": lambda a, b, _: a | b,
    "xor": lambda a, b, _: a ^ b,
    "max": lambda a, b, _: max(a, b),
    "min": lambda a, b, _: min(a, b),
}

_UNARY: dict[str, Callable[[int], int]] = {
    "-": lambda a: -a,
    "neg": lambda a: -a,
    "+": lambda a: a,
}

ARITH_FUNCTORS = frozenset({(op, 2) for op in _BINARY} | {(op, 1) for op in _UNARY})


def evaluate(expr: Term, walk: Callable[[Term], Term], literal: Term) -> int:
    """算術式を評価（未束縛変数があれば InstantiationError）"""
    expr = walk(expr)
    if isinstance(expr, Int):
        return expr.value
    if isinstance(expr, Var):
        raise InstantiationError(literal)
    if isinstance(expr, Compound):
        if len(expr.args) == 2 and expr.name in _BINARY:
            a = evaluate(expr.args[0], walk, literal)
            b = evaluate(expr.args[1], walk, literal)
            return _BINARY[expr.name](a, b, expr)
        if len(expr.args) == 1 and expr.name in _UNARY:
            return _UNARY[expr.name](evaluate(expr.args[0], walk, literal))
    raise InstantiationError(literal)
