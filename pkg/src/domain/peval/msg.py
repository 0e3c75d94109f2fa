"""最汎でない共通一般化（msg）とインスタンス判定"""

from __future__ import annotations

from ..logic.terms import Compound, Term, Var
from ..logic.unify import Subst


def msg(a: Term, b: Term) -> tuple[Term, Subst, Subst]:
    """反単一化 - 一般化 g と θa(g)=a, θb(g)=b を満たす置換を返す"""
    table: dict[tuple[Term, Term], Var] = {}
    theta_a: dict[Var, Term] = {}
    theta_b: dict[Var, Term] = {}

    def go(x: Term, y: Term) -> Term:
        if x is y or (not isinstance(x, Var) and x == y and _is_ground(x)):
            return x
        if (
            isinstance(x, Compound)
            and isinstance(y, Compound)
            and x.name == y.name
            and len(x.args) == len(y.args)
        ):
            return Compound(x.name, [go(s, t) for s, t in zip(x.args, y.args)])
        # 同じ不一致の組には同じ変数を割り当てる
        key = (_key(x), _key(y))
        var = table.get(key)
        if var is None:
            var = Var()
            table[key] = var
            theta_a[var] = x
            theta_b[var] = y
        return var

    g = go(a, b)
    return g, Subst(theta_a), Subst(theta_b)


def generalize(a: Term, b: Term) -> Term:
    return msg(a, b)[0]


def match(general: Term, specific: Term) -> dict[Var, Term] | None:
    """general の変数だけを束縛して specific に一致させる置換（なければ None）"""
    binding: dict[Var, Term] = {}
    stack: list[tuple[Term, Term]] = [(general, specific)]
    while stack:
        g, s = stack.pop()
        if isinstance(g, Var):
            bound = binding.get(g)
            if bound is None:
                binding[g] = s
            elif not _same(bound, s):
                return None
            continue
        if isinstance(g, Compound):
            if (
                not isinstance(s, Compound)
                or g.name != s.name
                or len(g.args) != len(s.args)
            ):
                return None
            if g.ground:
                if g != s:
                    return None
                continue
            stack.extend(zip(g.args, s.args))
        elif g != s:
            return None
    return binding


def is_instance(specific: Term, general: Term) -> bool:
    return match(general, specific) is not None


def is_variant(a: Term, b: Term) -> bool:
    forward = match(a, b)
    if forward is None or match(b, a) is None:
        return False
    return all(isinstance(t, Var) for t in forward.values()) and len(
        {id(t) for t in forward.values()}
    ) == len(forward)


def _is_ground(t: Term) -> bool:
    return not isinstance(t, Var) and (not isinstance(t, Compound) or t.ground)


def _key(t: Term) -> object:
    # 変数は同一性で、それ以外は構造で比較する
    return ("#v", t.id) if isinstance(t, Var) else t


def _same(x: Term, y: Term) -> bool:
    if isinstance(x, Var) or isinstance(y, Var):
        return x is y
    return x == y
