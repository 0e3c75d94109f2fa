"""節と第一引数索引つき節ストア"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .builtins import is_builtin
from .terms import Atom, Compound, Int, Term, Var, functor
from .unify import copy_term

PredKey = tuple[str, int]


@dataclass(frozen=True)
class Clause:
    """Horn 節 head :- body"""

    head: Compound | Atom
    body: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if is_builtin(self.head):
            raise ValueError(f"clause head {self.head!r} is a builtin")

    @property
    def key(self) -> PredKey:
        return functor(self.head)

    def rename(self) -> tuple[Term, tuple[Term, ...]]:
        """新しい変数で複製した (head, body)"""
        table: dict[Var, Var] = {}
        head = copy_term(self.head, table)
        return head, tuple(copy_term(b, table) for b in self.body)

    def __repr__(self) -> str:
        from .syntax import format_clause

        return format_clause(self)


@dataclass
class _Index:
    clauses: list[Clause] = field(default_factory=list)
    exact: dict[Term, list[int]] = field(default_factory=dict)
    by_functor: dict[PredKey, list[int]] = field(default_factory=dict)
    open_: dict[PredKey, list[int]] = field(default_factory=dict)
    var_first: list[int] = field(default_factory=list)
    cache: dict[object, tuple[Clause, ...]] = field(default_factory=dict)

    def add(self, clause: Clause) -> None:
        seq = len(self.clauses)
        self.clauses.append(clause)
        self.cache.clear()
        if not isinstance(clause.head, Compound):
            self.var_first.append(seq)
            return
        first = clause.head.args[0]
        if isinstance(first, Var):
            self.var_first.append(seq)
            return
        fkey = _first_key(first)
        self.by_functor.setdefault(fkey, []).append(seq)
        if isinstance(first, Compound) and not first.ground:
            self.open_.setdefault(fkey, []).append(seq)
        else:
            self.exact.setdefault(first, []).append(seq)

    def lookup(self, first: Term | None) -> tuple[Clause, ...]:
        if first is None or isinstance(first, Var):
            return tuple(self.clauses)
        if isinstance(first, Compound) and not first.ground:
            ckey: object = ("#functor", _first_key(first))
        else:
            ckey = first
        hit = self.cache.get(ckey)
        if hit is not None:
            return hit
        fkey = _first_key(first)
        if isinstance(first, Compound) and not first.ground:
            seqs = set(self.by_functor.get(fkey, ()))
        else:
            seqs = set(self.exact.get(first, ())) | set(self.open_.get(fkey, ()))
        seqs.update(self.var_first)
        result = tuple(self.clauses[i] for i in sorted(seqs))
        self.cache[ckey] = result
        return result


def _first_key(term: Term) -> PredKey:
    if isinstance(term, Int):
        return ("#int", term.value)
    return functor(term)


class ClauseStore:
    """述語ごとに節をまとめた不変ストア（挿入順を保持）"""

    def __init__(self, clauses: Iterable[Clause] = ()) -> None:
        self._preds: dict[PredKey, _Index] = {}
        for clause in clauses:
            self._preds.setdefault(clause.key, _Index()).add(clause)

    def __len__(self) -> int:
        return sum(len(ix.clauses) for ix in self._preds.values())

    def __iter__(self):
        for ix in self._preds.values():
            yield from ix.clauses

    def __contains__(self, key: PredKey) -> bool:
        return key in self._preds

    @property
    def predicates(self) -> list[PredKey]:
        return list(self._preds)

    def clauses_for(self, key: PredKey) -> Sequence[Clause]:
        ix = self._preds.get(key)
        return tuple(ix.clauses) if ix else ()

    def candidates(self, goal: Term, first: Term | None) -> tuple[Clause, ...]:
        """goal の候補節。first は walk 済みの第一引数"""
        ix = self._preds.get(functor(goal))
        if ix is None:
            return ()
        return ix.lookup(first)

    def extended(self, clauses: Iterable[Clause]) -> ClauseStore:
        return ClauseStore([*self, *clauses])
