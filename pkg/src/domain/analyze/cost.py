"""ステップ数上界 - 利用者述語の呼び出し 1 回を 1 ステップと数える"""

from __future__ import annotations

from typing import Optional, Union

from loguru import logger

from src.shared.errors import AccumulatorLimitation

from ..logic.store import Clause
from ..logic.terms import Compound, Int, Term, Var, functor, term_vars
from ..peval.arith import simplify
from ..peval.residual import ResidualProgram
from ..value_objects import CostBound, EntrySpec, Verdict
from .callgraph import CallGraph, PredKey, calls_of, check_entry
from .symbolic import ClauseView, Opaque, linear, placeholders, substitute
from .termination import find_ranking


class _Unsolved(Exception):
    pass


def _normal(expr: Term) -> Term:
    """線形部分を sum(k*V)+c の形に揃える"""
    form = linear(expr)
    if form is None:
        if isinstance(expr, Compound):
            return simplify(Compound(expr.name, [_normal(a) for a in expr.args]))
        return expr
    coeffs, const = form
    out: Optional[Term] = None
    for v, k in coeffs.items():
        term: Term = v if abs(k) == 1 else Compound("*", (Int(abs(k)), v))
        if out is None:
            out = term if k > 0 else Compound("-", (Int(0), term))
        else:
            out = Compound("+" if k > 0 else "-", (out, term))
    if out is None:
        return Int(const)
    if const:
        out = Compound("+" if const > 0 else "-", (out, Int(abs(const))))
    return out


def _wraps(expr: Term) -> bool:
    if isinstance(expr, Compound):
        return expr.name == "wrap" or any(_wraps(a) for a in expr.args)
    return False


def _plus(a: Term, b: Term) -> Term:
    return _normal(Compound("+", (a, b)))


def _max(a: Term, b: Term) -> Term:
    if isinstance(a, Int) and isinstance(b, Int):
        return Int(max(a.value, b.value))
    if a == b:
        return a
    return Compound("max", (a, b))


class CostAnalysis:
    """述語ごとの上界を、呼ばれる側から順に求める"""

    def __init__(self, program: ResidualProgram) -> None:
        self.program = program
        self.graph = CallGraph(program.clauses)
        self.bounds: dict[PredKey, Term] = {}
        self.params: dict[PredKey, tuple[Var, ...]] = {}

    def run(self) -> dict[PredKey, Term]:
        for component in self.graph.components(self.program.entry.key):
            for key in component:
                self.params[key] = placeholders(key[1])
            if not self.graph.recursive(component):
                (key,) = component
                self.bounds[key] = self._non_recursive(key)
            elif len(component) > 1:
                names = ", ".join(f"{n}/{a}" for n, a in component)
                raise _Unsolved(f"mutual recursion between {names}")
            else:
                self.bounds[component[0]] = self._recursive(component)
        return self.bounds

    def _call_cost(self, view: ClauseView, lit: Term) -> Term:
        key = functor(lit)
        bound = self.bounds[key]
        mapping: dict[Var, Term] = {}
        for v in term_vars(bound):
            position = self.params[key].index(v)
            assert isinstance(lit, Compound)
            try:
                mapping[v] = view.expr(lit.args[position])
                if _wraps(mapping[v]):
                    raise _Unsolved(
                        f"argument {position + 1} of a {key[0]} call wraps to 32 bits"
                    )
            except Opaque:
                raise AccumulatorLimitation(
                    key[0], f"argument {position + 1} of the call is produced by another call"
                ) from None
        return _normal(substitute(bound, mapping))

    def _clause_cost(self, clause: Clause, skip: Optional[PredKey] = None) -> Term:
        view = ClauseView(clause, self.params[clause.key])
        total: Term = Int(1)
        for lit in calls_of(clause):
            if functor(lit) != skip:
                total = _plus(total, self._call_cost(view, lit))
        return total

    def _non_recursive(self, key: PredKey) -> Term:
        bound: Optional[Term] = None
        for clause in self.graph.clauses[key]:
            cost = self._clause_cost(clause)
            bound = cost if bound is None else _max(bound, cost)
        return bound if bound is not None else Int(0)

    def _recursive(self, component: list[PredKey]) -> Term:
        (key,) = component
        ranking = find_ranking(self.graph, component)
        if ranking is None:
            raise _Unsolved(f"no ranking argument for {key[0]}/{key[1]}")
        position = ranking[key]
        x = self.params[key][position]
        base: Term = Int(0)
        per_step: Term = Int(0)
        lowest: Optional[int] = None
        for clause in self.graph.clauses[key]:
            own = [lit for lit in calls_of(clause) if functor(lit) == key]
            cost = self._clause_cost(clause, skip=key)
            if not isinstance(cost, Int):
                raise _Unsolved(f"cost of a {key[0]} clause depends on its arguments")
            if not own:
                base = _max(base, cost)
                continue
            if len(own) > 1:
                raise _Unsolved(f"{key[0]}/{key[1]} recurses more than once per clause")
            view = ClauseView(clause, self.params[key])
            index = clause.body.index(own[0])
            lb = view.lower_bound(x, index)
            assert isinstance(own[0], Compound)
            step = view.decrement(view.expr(own[0].args[position]), x, index)
            assert lb is not None and step is not None and step < 0
            lowest = lb if lowest is None else min(lowest, lb)
            per_step = _max(per_step, cost)
        assert lowest is not None
        # 反復回数は x - lowest + 1 以下
        iterations = simplify(Compound("+", (x, Int(1 - lowest))))
        assert isinstance(per_step, Int)
        unrolled = _plus(simplify(Compound("*", (per_step, iterations))), base)
        return _max(base, unrolled)


def predicate_costs(program: ResidualProgram) -> dict[str, CostBound]:
    """到達可能な各残余述語の上界（引数名は X1, X2, ...）"""
    analysis = CostAnalysis(program)
    out: dict[str, CostBound] = {}
    for key, bound in analysis.run().items():
        names = {v: f"X{i + 1}" for i, v in enumerate(analysis.params[key])}
        out[key[0]] = CostBound(expression=bound, names=names)
    return out


def infer_cost(
    program: ResidualProgram, entry: Optional[EntrySpec] = None
) -> Union[CostBound, Verdict]:
    """入口述語の上界を入口引数の式で返す（解けなければ unknown の判定）"""
    check_entry(program.entry.key, entry)
    analysis = CostAnalysis(program)
    try:
        bounds = analysis.run()
    except _Unsolved as exc:
        logger.info("cost analysis gave up: {}", exc)
        return Verdict.unknown(str(exc))
    key = program.entry.key
    arg_names = entry.arg_names if entry is not None else ()
    names = {
        v: arg_names[i] if i < len(arg_names) else f"X{i + 1}"
        for i, v in enumerate(analysis.params[key])
    }
    bound = CostBound(expression=bounds[key], names=names)
    logger.info("steps upper bound for {}: {}", key[0], bound)
    return bound
