"""停止性 - 整数引数による順位付け

順位付けの尺度は 2 つ。linear は引数そのもの（下界つきで真に減る）、
abs は引数の絶対値（x から a rem x へ移る、x =\= 0 のとき）。
"""

from __future__ import annotations

import itertools
from typing import Literal, Optional

from loguru import logger

from ..logic.store import Clause
from ..logic.terms import Compound, Term, Var, functor
from ..peval.residual import ResidualProgram
from ..value_objects import EntrySpec, Verdict
from .callgraph import CallGraph, PredKey, calls_of, check_entry
from .symbolic import ClauseView, placeholders

Measure = Literal["linear", "abs"]

_MEASURES: tuple[Measure, ...] = ("linear", "abs")
_MAX_ASSIGNMENTS = 4096


def _shrinks(view: ClauseView, arg: Term, x: Var, before: int) -> bool:
    if isinstance(arg, Compound) and arg.name == "wrap":
        # |a rem x| < |x| =< 2^31 なので折り返しは起きない
        arg = arg.args[0]
    return (
        isinstance(arg, Compound)
        and arg.name == "rem"
        and arg.args[1] == x
        and view.nonzero(x, before)
    )


def _decreases(
    clause: Clause, position: int, targets: dict[PredKey, int], measure: Measure = "linear"
) -> bool:
    """clause の成分内の呼び出しがすべて position の引数を尺度 measure で真に減らすか"""
    head = clause.head
    if not isinstance(head, Compound) or not isinstance(head.args[position], Var):
        return False
    view = ClauseView(clause, placeholders(len(head.args)))
    if view.params.get(head.args[position]) != position:  # type: ignore[arg-type]
        return False
    x = view.placeholders[position]
    for j, lit in enumerate(clause.body):
        key = functor(lit)
        if key not in targets or not isinstance(lit, Compound):
            continue
        arg = view.try_expr(lit.args[targets[key]])
        if arg is None:
            return False
        if measure == "abs":
            if not _shrinks(view, arg, x, j):
                return False
        elif view.decrement(arg, x, j) is None:
            return False
    return True


def find_ranking(
    graph: CallGraph, component: list[PredKey], measure: Measure = "linear"
) -> Optional[dict[PredKey, int]]:
    """成分の各述語について順位付けに使える引数位置を探す"""
    choices = [range(arity) for _, arity in component]
    for n, assignment in enumerate(itertools.product(*choices)):
        if n >= _MAX_ASSIGNMENTS:
            logger.debug("ranking search cut off for {}", component)
            return None
        targets = dict(zip(component, assignment))
        if all(
            _decreases(c, targets[p], targets, measure)
            for p in component
            for c in graph.clauses[p]
            if any(functor(lit) in targets for lit in calls_of(c))
        ):
            return targets
    return None


def prove_termination(
    program: ResidualProgram, entry: Optional[EntrySpec] = None
) -> Verdict:
    """入口から到達するすべての再帰成分に順位付け引数があれば checked

    成功しない呼び出しとして除いた節も戻して調べる。解のない無限ループは
    除去で消えるが、停止するとは言えない。
    """
    check_entry(program.entry.key, entry)
    name = program.entry.name
    if not program.clauses_for(name):
        logger.info("termination unknown: {} has no clauses left", name)
        return Verdict.unknown(f"{name} has no clause that can succeed")
    graph = CallGraph([*program.clauses, *program.dropped])
    for component in graph.components(program.entry.key):
        if not graph.recursive(component):
            continue
        if all(find_ranking(graph, component, m) is None for m in _MEASURES):
            names = ", ".join(f"{n}/{a}" for n, a in component)
            logger.info("termination unknown: no ranking argument for {}", names)
            return Verdict.unknown(f"no decreasing integer argument for {names}")
    return Verdict.checked()
