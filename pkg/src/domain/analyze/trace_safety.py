"""トレース安全性 - トレース位置に現れ得るステップ名の集合"""

from __future__ import annotations

from typing import Optional

from loguru import logger

from src.shared.errors import NotTraced

from ..logic.builtins import is_builtin
from ..logic.store import Clause
from ..logic.syntax import format_clause
from ..logic.terms import Atom, Compound, Var, functor, list_items
from ..peval.residual import ResidualProgram
from ..value_objects import EntrySpec, Verdict
from .callgraph import CallGraph, check_entry


class UnknownStep(Exception):
    """トレース要素が定数でない"""


def _steps_in(clause: Clause, program: ResidualProgram) -> list[str]:
    names: list[str] = []
    for lit in (clause.head, *clause.body):
        if is_builtin(lit) or not isinstance(lit, Compound):
            continue
        pred = program.predicates.get(lit.name)
        if pred is None or pred.arity != len(lit.args):
            continue
        for pos in pred.trace_args:
            for element in list_items(lit.args[pos])[0]:
                if isinstance(element, Atom):
                    names.append(element.name)
                elif isinstance(element, Var):
                    raise UnknownStep(format_clause(clause))
                else:
                    raise UnknownStep(repr(element))
    return names


def reachable_steps(program: ResidualProgram) -> dict[str, Clause]:
    """入口から到達可能な節のトレース位置にあるステップ名と、最初に現れる節"""
    if not program.traced:
        raise NotTraced(program.entry.name)
    graph = CallGraph(program.clauses)
    found: dict[str, Clause] = {}
    for key in graph.reachable(program.entry.key):
        for clause in graph.clauses.get(key, []):
            for name in _steps_in(clause, program):
                found.setdefault(name, clause)
    return found


def check_trace_safety(
    program: ResidualProgram, entry: Optional[EntrySpec], allowed: frozenset[str]
) -> Verdict:
    """到達可能なステップ名がすべて allowed に含まれれば checked"""
    check_entry(program.entry.key, entry)
    try:
        steps = reachable_steps(program)
    except UnknownStep as exc:
        return Verdict.unknown(f"non-constant trace element in {exc}")
    logger.info("{} distinct steps reachable from {}", len(steps), program.entry.name)
    for name in sorted(steps):
        if name not in allowed:
            clause = steps[name]
            where = "{}/{}".format(*functor(clause.head))
            return Verdict.false(name, reason=f"reachable in a clause of {where}")
    return Verdict.checked()
