"""SLD 導出エンジン（左端選択・節順・深さ優先・明示スタック）"""

from __future__ import annotations

from typing import Iterator, Sequence

from loguru import logger

from src.shared.errors import BudgetExhausted, InstantiationError, LogicError

from .builtins import COMPARISONS, evaluate, is_builtin
from .store import Clause, ClauseStore
from .terms import Atom, Compound, Int, Term, Var, term_vars
from .unify import Bindings, Subst

# 継続はコンスセル (literal, rest) の連結リスト
Goals = tuple[Term, "Goals"] | None


class _Choice:
    __slots__ = ("literal", "rest", "candidates", "index", "mark")

    def __init__(
        self,
        literal: Term,
        rest: Goals,
        candidates: Sequence[Clause],
        index: int,
        mark: int,
    ) -> None:
        self.literal = literal
        self.rest = rest
        self.candidates = candidates
        self.index = index
        self.mark = mark


class Solver:
    """節ストアに対する解の列挙器。steps はユーザ述語呼び出し回数"""

    def __init__(self, store: ClauseStore, budget: int = 1_000_000) -> None:
        if budget <= 0:
            raise ValueError("budget must be positive")
        self.store = store
        self.budget = budget
        self.steps = 0

    def solve(self, goal: Term | Sequence[Term]) -> Iterator[Subst]:
        literals = [goal] if isinstance(goal, (Var, Int, Atom, Compound)) else list(goal)
        query_vars = term_vars(literals)
        bindings = Bindings()
        goals: Goals = None
        for lit in reversed(literals):
            goals = (lit, goals)
        choices: list[_Choice] = []
        self.steps = 0

        while True:
            if goals is None:
                yield Subst({v: bindings.resolve(v) for v in query_vars})
                goals = self._backtrack(choices, bindings)
                if goals is False:
                    return
                continue

            literal, rest = goals
            literal = bindings.walk(literal)
            if isinstance(literal, (Var, Int)):
                raise InstantiationError(literal)

            if is_builtin(literal):
                if self._builtin(literal, bindings):
                    goals = rest
                    continue
                goals = self._backtrack(choices, bindings)
                if goals is False:
                    return
                continue

            self.steps += 1
            if self.steps > self.budget:
                logger.debug("solve budget {} exhausted", self.budget)
                raise BudgetExhausted(self.budget)
            if isinstance(literal, Compound):
                first = bindings.walk(literal.args[0])
            else:
                first = None
            if literal_key(literal) not in self.store:
                raise LogicError(f"unknown procedure {literal_key(literal)}")
            candidates = self.store.candidates(literal, first)
            nxt = self._resolve(literal, rest, candidates, 0, bindings, choices)
            if nxt is False:
                nxt = self._backtrack(choices, bindings)
                if nxt is False:
                    return
            goals = nxt

    def _resolve(
        self,
        literal: Term,
        rest: Goals,
        candidates: Sequence[Clause],
        start: int,
        bindings: Bindings,
        choices: list[_Choice],
    ) -> Goals | bool:
        for j in range(start, len(candidates)):
            mark = bindings.mark()
            head, body = candidates[j].rename()
            if bindings.unify(head, literal):
                if j + 1 < len(candidates):
                    choices.append(_Choice(literal, rest, candidates, j + 1, mark))
                goals = rest
                for lit in reversed(body):
                    goals = (lit, goals)
                return goals
        return False

    def _backtrack(self, choices: list[_Choice], bindings: Bindings) -> Goals | bool:
        while choices:
            cp = choices.pop()
            bindings.undo_to(cp.mark)
            nxt = self._resolve(
                cp.literal, cp.rest, cp.candidates, cp.index, bindings, choices
            )
            if nxt is not False:
                return nxt
        return False

    @staticmethod
    def _builtin(literal: Term, bindings: Bindings) -> bool:
        if isinstance(literal, Atom):
            return True  # true/0
        name = literal.name  # type: ignore[union-attr]
        left, right = literal.args  # type: ignore[union-attr]
        if name == "=":
            return bindings.unify(left, right)
        if name == "is":
            value = evaluate(right, bindings.walk, literal)
            return bindings.unify(left, Int(value))
        a = evaluate(left, bindings.walk, literal)
        b = evaluate(right, bindings.walk, literal)
        return COMPARISONS[name](a, b)


def literal_key(literal: Term) -> tuple[str, int]:
    if isinstance(literal, Compound):
        return literal.name, len(literal.args)
    return literal.name, 0  # type: ignore[union-attr]


def solve(
    store: ClauseStore, goal: Term | Sequence[Term], budget: int = 1_000_000
) -> Iterator[Subst]:
    """goal の解を順に生成する"""
    return Solver(store, budget).solve(goal)


def solve_once(
    store: ClauseStore, goal: Term | Sequence[Term], budget: int = 1_000_000
) -> Subst | None:
    return next(iter(solve(store, goal, budget)), None)
