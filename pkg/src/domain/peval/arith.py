"""残余算術の簡約と区間による比較の判定"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from src.shared.errors import EvaluationError, InstantiationError

from ..logic.builtins import COMPARISONS, evaluate
from ..logic.terms import Compound, Int, Term, Var


def _identity(t: Term) -> Term:
    return t


def try_evaluate(expr: Term) -> Optional[int]:
    """基底式なら値を返す（0 除算や非算術項なら None）"""
    try:
        return evaluate(expr, _identity, expr)
    except (InstantiationError, EvaluationError):
        return None


def simplify(expr: Term) -> Term:
    """算術式を簡約する（基底部分式の評価と単位元の除去）"""
    if not isinstance(expr, Compound):
        return expr
    args = [simplify(a) for a in expr.args]
    term = Compound(expr.name, args)
    if all(isinstance(a, Int) for a in args):
        value = try_evaluate(term)
        if value is not None:
            return Int(value)
        return term
    if len(args) != 2:
        return term
    left, right = args
    op = expr.name
    if op == "*":
        if left == Int(1):
            return right
        if right == Int(1):
            return left
    elif op == "+":
        if right == Int(0):
            return left
        if left == Int(0):
            return right
        if isinstance(right, Int) and right.value < 0:
            return Compound("-", (left, Int(-right.value)))
    elif op == "-":
        if right == Int(0):
            return left
        if isinstance(right, Int) and right.value < 0:
            return Compound("+", (left, Int(-right.value)))
    return term


_FLIP = {"<": ">", "=<": ">=", ">": "<", ">=": "=<", "=:=": "=:=", "=\\=": "=\\="}


@dataclass(frozen=True)
class Bound:
    """変数に対する比較 var op k"""

    var: Var
    op: str
    k: int

    @classmethod
    def of(cls, op: str, left: Term, right: Term) -> Optional["Bound"]:
        if isinstance(left, Var) and isinstance(right, Int):
            return cls(left, op, right.value)
        if isinstance(left, Int) and isinstance(right, Var):
            return cls(right, _FLIP[op], left.value)
        return None

    def holds(self, value: int) -> bool:
        return COMPARISONS[self.op](value, self.k)


@dataclass(frozen=True)
class Interval:
    lo: Optional[int] = None
    hi: Optional[int] = None

    @property
    def empty(self) -> bool:
        return self.lo is not None and self.hi is not None and self.lo > self.hi

    def meet(self, other: "Interval") -> "Interval":
        lo = max((x for x in (self.lo, other.lo) if x is not None), default=None)
        hi = min((x for x in (self.hi, other.hi) if x is not None), default=None)
        return Interval(lo, hi)

    def within(self, other: "Interval") -> bool:
        if other.lo is not None and (self.lo is None or self.lo < other.lo):
            return False
        if other.hi is not None and (self.hi is None or self.hi > other.hi):
            return False
        return True

    def contains(self, k: int) -> bool:
        return (self.lo is None or self.lo <= k) and (self.hi is None or k <= self.hi)


def interval_of(bound: Bound) -> Optional[Interval]:
    """比較が表す区間（=\\= は区間にならないので None）"""
    op, k = bound.op, bound.k
    if op == "<":
        return Interval(hi=k - 1)
    if op == "=<":
        return Interval(hi=k)
    if op == ">":
        return Interval(lo=k + 1)
    if op == ">=":
        return Interval(lo=k)
    if op == "=:=":
        return Interval(k, k)
    return None


def decide(known: list[Bound], new: Bound) -> Optional[bool]:
    """既知の比較のもとで new が恒真なら True、充足不能なら False、未定なら None"""
    current = Interval()
    excluded: set[int] = set()
    for b in known:
        iv = interval_of(b)
        if iv is None:
            excluded.add(b.k)
        else:
            current = current.meet(iv)
    if current.empty:
        return False
    point = current.lo if current.lo is not None and current.lo == current.hi else None
    if new.op == "=\\=":
        if not current.contains(new.k) or new.k in excluded:
            return True
        if point is not None:
            return False
        return None
    target = interval_of(new)
    assert target is not None
    if current.meet(target).empty:
        return False
    if point is not None and point in excluded:
        return False
    if current.within(target):
        return True
    return None
