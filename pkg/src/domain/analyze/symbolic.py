"""節本体の算術を頭部引数の式として読む"""

from __future__ import annotations

from typing import Optional

from ..logic.builtins import COMPARISONS
from ..logic.store import Clause
from ..logic.terms import Compound, Int, Term, Var

Linear = tuple[dict[Var, int], int]

INT_MIN = -(2**31)
_HALF = Int(2**31)
_MASK = Int(2**32 - 1)


class Opaque(Exception):
    """頭部引数の算術式で表せない項（呼び出しの出力など）"""

    def __init__(self, term: Term) -> None:
        self.term = term
        super().__init__(f"{term!r} is not an arithmetic function of the clause head")


class ClauseView:
    """節 - 頭部の引数位置ごとのプレースホルダで本体の値を表す"""

    def __init__(self, clause: Clause, placeholders: tuple[Var, ...]) -> None:
        self.clause = clause
        self.placeholders = placeholders
        self.params: dict[Var, int] = {}
        head = clause.head
        if isinstance(head, Compound):
            for i, arg in enumerate(head.args):
                if isinstance(arg, Var) and arg not in self.params:
                    self.params[arg] = i
        self.defs: dict[Var, Term] = {}
        for lit in clause.body:
            if isinstance(lit, Compound) and lit.name in ("is", "=") and len(lit.args) == 2:
                lhs, rhs = lit.args
                if isinstance(lhs, Var) and lhs not in self.params and lhs not in self.defs:
                    self.defs[lhs] = rhs

    def expr(self, term: Term, _seen: frozenset[int] = frozenset()) -> Term:
        if isinstance(term, Int):
            return term
        if isinstance(term, Var):
            if term in self.params:
                return self.placeholders[self.params[term]]
            if term in self.defs and term.id not in _seen:
                return self.expr(self.defs[term], _seen | {term.id})
            raise Opaque(term)
        inner = _unwrapped(term)
        if inner is not None:
            return Compound("wrap", (self.expr(inner, _seen),))
        if isinstance(term, Compound) and term.name == "rem" and len(term.args) == 2:
            return Compound("rem", [self.expr(a, _seen) for a in term.args])
        if isinstance(term, Compound) and term.name in ("+", "-", "*", "//", "max", "min"):
            return Compound(term.name, [self.expr(a, _seen) for a in term.args])
        raise Opaque(term)

    def try_expr(self, term: Term) -> Optional[Term]:
        try:
            return self.expr(term)
        except Opaque:
            return None

    def guards(self, before: int) -> list[tuple[str, Term, Term]]:
        """before 番目の本体リテラルより前の比較（頭部の式に直したもの）"""
        out: list[tuple[str, Term, Term]] = []
        for lit in self.clause.body[:before]:
            if isinstance(lit, Compound) and lit.name in COMPARISONS and len(lit.args) == 2:
                lhs, rhs = (self.try_expr(a) for a in lit.args)
                if lhs is not None and rhs is not None:
                    out.append((lit.name, lhs, rhs))
        return out

    def lower_bound(self, var: Var, before: int) -> Optional[int]:
        """比較から導かれる var の下界（最も強いもの）"""
        best: Optional[int] = None
        for op, lhs, rhs in self.guards(before):
            form = linear(Compound("-", (lhs, rhs)))
            if form is None:
                continue
            coeffs, c = form
            if set(coeffs) != {var} or abs(coeffs[var]) != 1:
                continue
            bound = _lower(op, coeffs[var], c)
            if bound is not None and (best is None or bound > best):
                best = bound
        return best

    def decrement(self, expr: Term, var: Var, before: int) -> Optional[int]:
        """expr = var + c（c < 0）で var に下界があれば c

        32 ビットの折り返し wrap(var + c) は、下界から c を引いても int の範囲に
        収まるときだけ var + c と見なす。
        """
        lb = self.lower_bound(var, before)
        if lb is None:
            return None
        if isinstance(expr, Compound) and expr.name == "wrap":
            step = offset(expr.args[0], var)
            if step is None or lb + step < INT_MIN:
                return None
        else:
            step = offset(expr, var)
        if step is None or step >= 0:
            return None
        return step

    def nonzero(self, var: Var, before: int) -> bool:
        """before より前の比較から var =\\= 0 が言えるか"""
        for op, lhs, rhs in self.guards(before):
            if op not in ("=\\=", ">", "<"):
                continue
            if (lhs == var and rhs == Int(0)) or (lhs == Int(0) and rhs == var):
                return True
        lb = self.lower_bound(var, before)
        return lb is not None and lb > 0


def _unwrapped(term: Term) -> Optional[Term]:
    """((E + 2^31) /\\ (2^32 - 1)) - 2^31 の E"""
    if not (
        isinstance(term, Compound)
        and term.name == "-"
        and len(term.args) == 2
        and term.args[1] == _HALF
    ):
        return None
    masked = term.args[0]
    if not (
        isinstance(masked, Compound)
        and masked.name == "/\\"
        and len(masked.args) == 2
        and masked.args[1] == _MASK
    ):
        return None
    shifted = masked.args[0]
    if (
        isinstance(shifted, Compound)
        and shifted.name == "+"
        and len(shifted.args) == 2
        and shifted.args[1] == _HALF
    ):
        return shifted.args[0]
    return Compound("-", (shifted, _HALF))


def _lower(op: str, a: int, c: int) -> Optional[int]:
    # a*X + c op 0
    if a == 1:
        return {">": -c + 1, ">=": -c, "=:=": -c}.get(op)
    return {"<": c + 1, "=<": c, "=:=": c}.get(op)


def linear(expr: Term) -> Optional[Linear]:
    """線形式なら (係数, 定数項)"""
    if isinstance(expr, Int):
        return {}, expr.value
    if isinstance(expr, Var):
        return {expr: 1}, 0
    if not isinstance(expr, Compound):
        return None
    if len(expr.args) == 1 and expr.name == "-":
        inner = linear(expr.args[0])
        return None if inner is None else _scale(inner, -1)
    if len(expr.args) != 2:
        return None
    left, right = (linear(a) for a in expr.args)
    if left is None or right is None:
        return None
    if expr.name == "+":
        return _add(left, right)
    if expr.name == "-":
        return _add(left, _scale(right, -1))
    if expr.name == "*":
        if not left[0]:
            return _scale(right, left[1])
        if not right[0]:
            return _scale(left, right[1])
    return None


def _add(a: Linear, b: Linear) -> Linear:
    coeffs = dict(a[0])
    for v, k in b[0].items():
        coeffs[v] = coeffs.get(v, 0) + k
    return {v: k for v, k in coeffs.items() if k}, a[1] + b[1]


def _scale(a: Linear, k: int) -> Linear:
    if k == 0:
        return {}, 0
    return {v: c * k for v, c in a[0].items()}, a[1] * k


def offset(expr: Term, var: Var) -> Optional[int]:
    """expr = var + c の形なら c"""
    form = linear(expr)
    if form is None or form[0] != {var: 1}:
        return None
    return form[1]


def substitute(expr: Term, mapping: dict[Var, Term]) -> Term:
    if isinstance(expr, Var):
        return mapping.get(expr, expr)
    if isinstance(expr, Compound):
        return Compound(expr.name, [substitute(a, mapping) for a in expr.args])
    return expr


def placeholders(arity: int) -> tuple[Var, ...]:
    return tuple(Var(f"P{i}") for i in range(arity))
