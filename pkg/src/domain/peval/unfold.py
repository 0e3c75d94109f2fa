"""局所制御 - 埋め込みによる停止判定つきの SLD 木の展開"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from loguru import logger

from ..logic.builtins import COMPARISONS, is_builtin
from ..logic.store import Clause, ClauseStore
from ..logic.terms import Atom, Compound, Int, Term, functor
from ..logic.unify import Bindings
from ..value_objects import PEConfig
from .arith import Bound, decide, simplify, try_evaluate
from .embedding import _Embedding


@dataclass(frozen=True)
class Resultant:
    """展開木の一枝 - head :- body"""

    head: Term
    body: tuple[Term, ...]

    def as_clause(self) -> Clause:
        assert isinstance(self.head, (Compound, Atom))
        return Clause(self.head, self.body)


class _Ancestor:
    __slots__ = ("key", "literal", "parent")

    def __init__(self, key: tuple[str, int], literal: Term, parent: Optional[_Ancestor]) -> None:
        self.key = key
        self.literal = literal
        self.parent = parent


class _Goal:
    __slots__ = ("literal", "ancestors", "frozen")

    def __init__(
        self, literal: Term, ancestors: Optional[_Ancestor], frozen: bool = False
    ) -> None:
        self.literal = literal
        self.ancestors = ancestors
        self.frozen = frozen

    def freeze(self, literal: Optional[Term] = None) -> _Goal:
        return _Goal(self.literal if literal is None else literal, self.ancestors, True)


Goals = tuple[_Goal, ...]


class _Choice:
    __slots__ = ("mark", "goals", "index", "literal", "ancestors", "clauses", "depth")

    def __init__(
        self,
        mark: int,
        goals: Goals,
        index: int,
        ancestors: Optional[_Ancestor],
        clauses: Iterator[Clause],
        depth: int,
    ) -> None:
        self.mark = mark
        self.goals = goals
        self.index = index
        self.literal = goals[index].literal
        self.ancestors = ancestors
        self.clauses = clauses
        self.depth = depth


def _always(_: Term) -> bool:
    return True


class Unfolder:
    """1 つのアトムを展開して Resultant の列を作る"""

    def __init__(self, store: ClauseStore, config: PEConfig) -> None:
        self.store = store
        self.config = config
        self.watch: Callable[[Term], bool] = config.watch or _always
        self.steps = 0
        self.step_limit_hits = 0
        self.whistles = 0

    def unfold(self, atom: Term) -> list[Resultant]:
        b = Bindings()
        results: list[Resultant] = []
        choices: list[_Choice] = []
        state: Optional[tuple[Goals, int]] = ((_Goal(atom, None),), 0)
        root = True
        while True:
            if state is None:
                state = self._backtrack(choices, b)
                if state is None:
                    break
            goals, depth = state
            i = self._select(goals, b)
            if i is None:
                r = self._resultant(atom, goals, b)
                if r is not None:
                    results.append(r)
                state = None
                continue
            goal = goals[i]
            literal = b.walk(goal.literal)
            if is_builtin(literal):
                state = self._builtin(goals, i, literal, b, depth)
                continue
            key = functor(literal)
            if key not in self.store:
                logger.debug("no clauses for {}/{}; branch fails", *key)
                state = None
                continue
            resolved = b.resolve(literal)
            watched = self.watch(resolved)
            if not root and self._stop(goal, resolved, key, depth, watched, b):
                state = (_replace(goals, i, (goal.freeze(),)), depth)
                continue
            root = False
            clauses = self._candidates(literal, b)
            if not clauses:
                state = None
                continue
            self.steps += 1
            ancestors = goal.ancestors
            if watched:
                ancestors = _Ancestor(key, goal.literal, ancestors)
            choices.append(_Choice(b.mark(), goals, i, ancestors, iter(clauses), depth + 1))
            state = None
        return results

    def _candidates(self, literal: Term, b: Bindings) -> tuple[Clause, ...]:
        first = b.walk(literal.args[0]) if isinstance(literal, Compound) else None
        return self.store.candidates(literal, first)

    def _backtrack(self, choices: list[_Choice], b: Bindings) -> Optional[tuple[Goals, int]]:
        while choices:
            choice = choices[-1]
            b.undo_to(choice.mark)
            for clause in choice.clauses:
                head, body = clause.rename()
                if b.unify(head, choice.literal):
                    new = tuple(_Goal(lit, choice.ancestors) for lit in body)
                    return _replace(choice.goals, choice.index, new), choice.depth
            choices.pop()
        return None

    # --- 選択規則 ---------------------------------------------------------

    def _select(self, goals: Goals, b: Bindings) -> Optional[int]:
        first = next((i for i, g in enumerate(goals) if not g.frozen), None)
        if first is None or not self.config.determinate_first:
            return first
        # 左端から続く利用者述語の並びの中でだけ決定的なアトムを先に選ぶ
        for i in range(first, len(goals)):
            g = goals[i]
            if g.frozen:
                continue
            literal = b.walk(g.literal)
            if is_builtin(literal):
                break
            if self._determinate(literal, b):
                return i
        return first

    def _determinate(self, literal: Term, b: Bindings) -> bool:
        if functor(literal) not in self.store:
            return False
        matches = 0
        for clause in self._candidates(literal, b):
            mark = b.mark()
            head, _ = clause.rename()
            if b.unify(head, literal):
                matches += 1
            b.undo_to(mark)
            if matches > 1:
                return False
        return True

    # --- 停止判定 ---------------------------------------------------------

    def _stop(
        self,
        goal: _Goal,
        resolved: Term,
        key: tuple[str, int],
        depth: int,
        watched: bool,
        b: Bindings,
    ) -> bool:
        if depth >= self.config.max_unfold:
            self.step_limit_hits += 1
            logger.debug("unfold limit {} reached at {}/{}", self.config.max_unfold, *key)
            return True
        if not watched:
            return False
        embedding = _Embedding(self.config.widen)
        anc = goal.ancestors
        while anc is not None:
            if anc.key == key and embedding.embeds(b.resolve(anc.literal), resolved):
                self.whistles += 1
                logger.debug("whistle on {}/{} at depth {}", key[0], key[1], depth)
                return True
            anc = anc.parent
        return False

    # --- 組込み述語 -------------------------------------------------------

    def _builtin(
        self, goals: Goals, i: int, literal: Term, b: Bindings, depth: int
    ) -> Optional[tuple[Goals, int]]:
        goal = goals[i]
        if isinstance(literal, Atom):  # true
            return _replace(goals, i, ()), depth
        assert isinstance(literal, Compound)
        name = literal.name
        left, right = literal.args
        if name == "=":
            if not b.unify(left, right):
                return None
            return self._recheck(_replace(goals, i, ()), b, depth)
        if name == "is":
            expr = simplify(b.resolve(right))
            if isinstance(expr, Compound):
                value = try_evaluate(expr)
                if value is None:
                    return _replace(goals, i, (goal.freeze(Compound("is", (left, expr))),)), depth
                expr = Int(value)
            if not b.unify(left, expr):
                return None
            return self._recheck(_replace(goals, i, ()), b, depth)
        return self._compare(goals, i, name, left, right, b, depth)

    def _compare(
        self,
        goals: Goals,
        i: int,
        op: str,
        left: Term,
        right: Term,
        b: Bindings,
        depth: int,
    ) -> Optional[tuple[Goals, int]]:
        lhs = simplify(b.resolve(left))
        rhs = simplify(b.resolve(right))
        if isinstance(lhs, Int) and isinstance(rhs, Int):
            if not COMPARISONS[op](lhs.value, rhs.value):
                return None
            return _replace(goals, i, ()), depth
        residual = Compound(op, (lhs, rhs))
        bound = Bound.of(op, lhs, rhs)
        if bound is not None:
            verdict = decide(self._bounds(goals, bound, b), bound)
            if verdict is False:
                return None
            if verdict is True:
                return _replace(goals, i, ()), depth
        return _replace(goals, i, (goals[i].freeze(residual),)), depth

    def _bounds(self, goals: Goals, on: Bound, b: Bindings) -> list[Bound]:
        known: list[Bound] = []
        for g in goals:
            if not g.frozen:
                continue
            lit = b.walk(g.literal)
            if isinstance(lit, Compound) and lit.name in COMPARISONS and len(lit.args) == 2:
                bound = Bound.of(lit.name, b.walk(lit.args[0]), b.walk(lit.args[1]))
                if bound is not None and bound.var is b.walk(on.var):
                    known.append(bound)
        return known

    def _recheck(
        self, goals: Goals, b: Bindings, depth: int
    ) -> Optional[tuple[Goals, int]]:
        """凍結した組込みのうち基底になったものを評価し直す"""
        kept: list[_Goal] = []
        changed = False
        for g in goals:
            if not g.frozen or not is_builtin(g.literal):
                kept.append(g)
                continue
            lit = b.resolve(g.literal)
            assert isinstance(lit, Compound)
            if lit.name in COMPARISONS:
                lhs, rhs = (simplify(a) for a in lit.args)
                if isinstance(lhs, Int) and isinstance(rhs, Int):
                    if not COMPARISONS[lit.name](lhs.value, rhs.value):
                        return None
                    changed = True
                    continue
            elif lit.name == "is":
                value = try_evaluate(simplify(lit.args[1]))
                if value is not None:
                    if not b.unify(lit.args[0], Int(value)):
                        return None
                    changed = True
                    continue
            kept.append(g)
        if changed:
            # 束縛が増えたので残りも評価し直す
            return self._recheck(tuple(kept), b, depth)
        return tuple(kept), depth

    # --- 葉 ---------------------------------------------------------------

    def _resultant(self, atom: Term, goals: Goals, b: Bindings) -> Optional[Resultant]:
        final = self._recheck(goals, b, 0)
        if final is None:
            return None
        body = tuple(b.resolve(g.literal) for g in final[0])
        return Resultant(b.resolve(atom), body)


def _replace(goals: Goals, i: int, new: tuple[_Goal, ...]) -> Goals:
    return goals[:i] + new + goals[i + 1 :]
