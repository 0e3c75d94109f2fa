"""残余プログラムの呼び出しグラフと強連結成分"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Optional

from ..logic.builtins import is_builtin
from ..logic.store import Clause
from ..logic.terms import Term, functor
from ..value_objects import EntrySpec

PredKey = tuple[str, int]


def calls_of(clause: Clause) -> list[Term]:
    """本体中の利用者述語の呼び出し"""
    return [lit for lit in clause.body if not is_builtin(lit)]


class CallGraph:
    def __init__(self, clauses: Iterable[Clause]) -> None:
        self.clauses: dict[PredKey, list[Clause]] = defaultdict(list)
        self.edges: dict[PredKey, set[PredKey]] = defaultdict(set)
        for c in clauses:
            self.clauses[c.key].append(c)
            self.edges[c.key].update(functor(lit) for lit in calls_of(c))

    def reachable(self, entry: PredKey) -> list[PredKey]:
        seen = [entry]
        stack = [entry]
        while stack:
            for callee in sorted(self.edges.get(stack.pop(), ())):
                if callee not in seen:
                    seen.append(callee)
                    stack.append(callee)
        return seen

    def components(self, entry: PredKey) -> list[list[PredKey]]:
        """到達可能な述語の強連結成分（呼ばれる側が先）"""
        nodes = self.reachable(entry)
        index: dict[PredKey, int] = {}
        low: dict[PredKey, int] = {}
        on_stack: set[PredKey] = set()
        stack: list[PredKey] = []
        out: list[list[PredKey]] = []

        def visit(v: PredKey) -> None:
            index[v] = low[v] = len(index)
            stack.append(v)
            on_stack.add(v)
            for w in sorted(self.edges.get(v, ())):
                if w not in index:
                    visit(w)
                    low[v] = min(low[v], low[w])
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
            if low[v] == index[v]:
                comp: list[PredKey] = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)

        for v in nodes:
            if v not in index:
                visit(v)
        return out

    def recursive(self, component: list[PredKey]) -> bool:
        if len(component) > 1:
            return True
        v = component[0]
        return v in self.edges.get(v, ())


def check_entry(entry_key: PredKey, spec: Optional[EntrySpec]) -> None:
    """入口の指定が残余プログラムの入口と合っているか"""
    if spec is None:
        return
    if (spec.predicate, spec.arity) != entry_key:
        raise ValueError(
            f"entry {spec.predicate}/{spec.arity} does not match residual entry "
            f"{entry_key[0]}/{entry_key[1]}"
        )
