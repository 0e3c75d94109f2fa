"""残余プログラム - 改名・引数フィルタと成功パターンによる刈り込み"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Sequence

from loguru import logger

from ..logic.builtins import COMPARISONS, is_builtin
from ..logic.solver import Solver
from ..logic.store import Clause, ClauseStore
from ..logic.syntax import format_clause, format_term, parse_clauses
from ..logic.terms import Compound, Int, Term, Var, functor, mk, subterms, term_vars
from ..logic.unify import Bindings, copy_term
from .arith import simplify, try_evaluate
from .msg import match

if TYPE_CHECKING:
    from .specializer import GlobalAtom, RawResidual

PredKey = tuple[str, int]


@dataclass(frozen=True)
class ResidualPredicate:
    """残余述語と、それが表すインタプリタ側の一般化アトム"""

    name: str
    origin: Term
    variables: tuple[Var, ...]
    trace_args: tuple[int, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.variables)

    @property
    def key(self) -> PredKey:
        return self.name, self.arity

    def describe(self) -> str:
        names = {v: f"X{i + 1}" for i, v in enumerate(self.variables)}
        return f"{self.name}/{self.arity} <- {format_term(self.origin, names)}"


@dataclass
class ResidualProgram:
    entry: ResidualPredicate
    predicates: dict[str, ResidualPredicate]
    clauses: list[Clause]
    steps: int = 0
    generalizations: int = 0
    pruned: int = field(default=0)
    # 成功しない呼び出しのために除いた節（停止性の判定では戻して見る）
    dropped: list[Clause] = field(default_factory=list)

    @property
    def traced(self) -> bool:
        return bool(self.entry.trace_args)

    def clauses_for(self, name: str) -> list[Clause]:
        return [c for c in self.clauses if functor(c.head)[0] == name]

    def store(self) -> ClauseStore:
        return ClauseStore(self.clauses)

    def entry_goal(self, inputs: Sequence[Term]) -> Term:
        """先頭の引数に inputs を、残りに新しい変数を置いた入口呼び出し"""
        if len(inputs) > self.entry.arity:
            raise ValueError(
                f"{self.entry.name}/{self.entry.arity} takes at most {self.entry.arity} inputs"
            )
        rest = [Var(f"Out{i}") for i in range(self.entry.arity - len(inputs))]
        return mk(self.entry.name, *inputs, *rest)

    def solve(
        self, inputs: Sequence[Term], budget: int = 1_000_000
    ) -> Optional[tuple[tuple[Term, ...], int]]:
        """最初の解の出力引数と、そこまでの解決ステップ数（解がなければ None）"""
        goal = self.entry_goal(inputs)
        solver = Solver(self.store(), budget)
        for answer in solver.solve(goal):
            outputs = goal.args[len(inputs):] if isinstance(goal, Compound) else ()
            return tuple(answer.apply(t) for t in outputs), solver.steps
        return None

    def name_map(self) -> dict[str, str]:
        return {name: p.describe() for name, p in self.predicates.items()}

    def text(self, header: bool = True) -> str:
        """述語ごと（入口が先頭）に節を書き出す。header では入口・トレース引数・名前表を注釈で残す"""
        order = [self.entry.name] + [n for n in self.predicates if n != self.entry.name]
        chunks = []
        if header:
            lines = [f"%! entry {self.entry.name}/{self.entry.arity}"]
            for name in order:
                p = self.predicates[name]
                if p.trace_args:
                    positions = ",".join(str(i) for i in p.trace_args)
                    lines.append(f"%! trace {p.name}/{p.arity} {positions}")
            lines.extend(f"% {self.predicates[name].describe()}" for name in order)
            chunks.append("".join(line + "\n" for line in lines))
        for name in order:
            clauses = self.clauses_for(name)
            if clauses:
                chunks.append("".join(format_clause(c) + "\n" for c in clauses))
        if header and self.dropped:
            lines = ["%! pruned"]
            for c in self.dropped:
                lines.extend(_PRUNED + part for part in format_clause(c).split("\n"))
            chunks.append("".join(line + "\n" for line in lines))
        return "\n".join(chunks)

    @property
    def size(self) -> int:
        return len(self.text(header=False).encode("utf-8"))


def _method_index(atom: Term) -> int:
    for t in subterms(atom):
        if isinstance(t, Compound) and t.name == "methodId" and len(t.args) == 2:
            if isinstance(t.args[1], Int):
                return t.args[1].value
    return 0


def _trace_args(
    atom: Term, variables: tuple[Var, ...], positions: Mapping[PredKey, tuple[int, ...]]
) -> tuple[int, ...]:
    if not isinstance(atom, Compound):
        return ()
    found: list[int] = []
    for pos in positions.get(functor(atom), ()):
        arg = atom.args[pos]
        if isinstance(arg, Var):
            found.extend(i for i, v in enumerate(variables) if v is arg)
    return tuple(found)


def rename_filter(
    raw: RawResidual,
    entry_name: str,
    trace_positions: Mapping[PredKey, tuple[int, ...]] | None = None,
    prune: bool = True,
) -> ResidualProgram:
    """大域アトムごとに新しい述語名を与え、変数だけを引数に残す"""
    positions = trace_positions or {}
    counters: dict[tuple[str, int], int] = defaultdict(int)
    names: dict[int, ResidualPredicate] = {}
    for g in raw.atoms:
        if g.entry:
            name = entry_name
        else:
            pred = functor(g.atom)[0]
            k = _method_index(g.atom)
            counters[(pred, k)] += 1
            name = f"{pred}_{k}_{counters[(pred, k)]}"
        variables = tuple(term_vars(g.atom))
        names[id(g)] = ResidualPredicate(
            name, g.atom, variables, _trace_args(g.atom, variables, positions)
        )

    def renamed(g: GlobalAtom, instance: Term) -> Term:
        pred = names[id(g)]
        binding = match(g.atom, instance)
        assert binding is not None, "residual call escaped the global set"
        return mk(pred.name, *(binding[v] for v in pred.variables))

    clauses: list[Clause] = []
    for g in raw.atoms:
        assert g.resultants is not None
        for r in g.resultants:
            head = renamed(g, r.head)
            body = []
            for lit in r.body:
                cover = _covering(raw.atoms, lit) if not is_builtin(lit) else None
                body.append(renamed(cover, lit) if cover is not None else lit)
            clause = Clause(head, tuple(body))  # type: ignore[arg-type]
            clauses.append(_fresh(clause))

    entry = next(names[id(g)] for g in raw.atoms if g.entry)
    program = ResidualProgram(
        entry=entry,
        predicates={p.name: p for p in names.values()},
        clauses=clauses,
        steps=raw.steps,
        generalizations=raw.generalizations,
    )
    if prune:
        program = prune_by_success(program)
    logger.info(
        "residual program: {} predicates, {} clauses",
        len(program.predicates),
        len(program.clauses),
    )
    return program


def _covering(atoms: Iterable[GlobalAtom], literal: Term) -> Optional[GlobalAtom]:
    key = functor(literal)
    for g in atoms:
        if functor(g.atom) == key and match(g.atom, literal) is not None:
            return g
    return None


def _fresh(clause: Clause) -> Clause:
    head, body = clause.rename()
    return Clause(head, body)  # type: ignore[arg-type]


# --- 成功パターンによる刈り込み ------------------------------------------

_DEPTH = 4
_MAX_PATTERNS = 12
_MAX_BRANCHES = 256


def _abstract(term: Term, depth: int) -> Term:
    """深さ depth より下を新しい変数で置き換える"""
    if isinstance(term, Compound):
        if depth <= 0:
            return Var()
        return Compound(term.name, [_abstract(a, depth - 1) for a in term.args])
    return term


def _most_general(key: PredKey) -> Term:
    name, arity = key
    return mk(name, *(Var() for _ in range(arity)))


class _SuccessPatterns:
    """残余述語の成功パターンを下から上へ不動点まで集める"""

    def __init__(self, clauses: list[Clause]) -> None:
        self.clauses = clauses
        self.patterns: dict[PredKey, list[Term]] = defaultdict(list)

    def compute(self) -> dict[PredKey, list[Term]]:
        changed = True
        while changed:
            changed = False
            for clause in self.clauses:
                for head in self._heads(clause):
                    changed |= self._record(clause.key, head)
        return self.patterns

    def _record(self, key: PredKey, head: Term) -> bool:
        known = self.patterns[key]
        if any(match(p, head) is not None for p in known):
            return False
        if len(known) >= _MAX_PATTERNS:
            self.patterns[key] = [_most_general(key)]
            return True
        known.append(head)
        return True

    def _heads(self, clause: Clause) -> list[Term]:
        head, body = clause.rename()
        b = Bindings()
        out: list[Term] = []
        budget = _MAX_BRANCHES

        def solve(i: int) -> None:
            nonlocal budget
            if budget <= 0:
                return
            if i == len(body):
                budget -= 1
                out.append(_abstract(b.resolve(head), _DEPTH))
                return
            lit = b.walk(body[i])
            if is_builtin(lit):
                mark = b.mark()
                if self._builtin(lit, b):
                    solve(i + 1)
                b.undo_to(mark)
                return
            for pattern in self.patterns.get(functor(lit), []):
                mark = b.mark()
                if b.unify(copy_term(pattern), lit):
                    solve(i + 1)
                b.undo_to(mark)

        solve(0)
        if budget <= 0:
            return [_most_general(clause.key)]
        return out

    @staticmethod
    def _builtin(lit: Term, b: Bindings) -> bool:
        if not isinstance(lit, Compound):
            return True
        if lit.name == "=":
            return b.unify(lit.args[0], lit.args[1])
        if lit.name == "is":
            value = try_evaluate(simplify(b.resolve(lit.args[1])))
            return value is None or b.unify(lit.args[0], Int(value))
        if lit.name in COMPARISONS:
            lhs, rhs = (simplify(b.resolve(a)) for a in lit.args)
            if isinstance(lhs, Int) and isinstance(rhs, Int):
                return COMPARISONS[lit.name](lhs.value, rhs.value)
        return True


def prune_by_success(program: ResidualProgram) -> ResidualProgram:
    """成功し得ない呼び出しを含む節と、入口から到達しない述語を除く"""
    patterns = _SuccessPatterns(program.clauses).compute()

    def callable_(lit: Term) -> bool:
        if is_builtin(lit):
            return True
        return any(
            Bindings().unify(copy_term(p), lit) for p in patterns.get(functor(lit), [])
        )

    kept = [c for c in program.clauses if all(callable_(lit) for lit in c.body)]
    reachable = _reachable(program.entry.key, kept)
    kept = [c for c in kept if c.key in reachable]
    predicates = {n: p for n, p in program.predicates.items() if p.key in reachable}
    removed = len(program.clauses) - len(kept)
    kept_ids = {id(c) for c in kept}
    if removed:
        logger.debug("success-pattern pruning removed {} clauses", removed)
    return ResidualProgram(
        entry=program.entry,
        predicates=predicates,
        clauses=kept,
        steps=program.steps,
        generalizations=program.generalizations,
        pruned=program.pruned + removed,
        dropped=program.dropped + [c for c in program.clauses if id(c) not in kept_ids],
    )


def _reachable(entry: PredKey, clauses: list[Clause]) -> set[PredKey]:
    calls: dict[PredKey, set[PredKey]] = defaultdict(set)
    for c in clauses:
        calls[c.key].update(functor(l) for l in c.body if not is_builtin(l))
    seen = {entry}
    stack = [entry]
    while stack:
        for callee in calls[stack.pop()]:
            if callee not in seen:
                seen.add(callee)
                stack.append(callee)
    return seen


_DIRECTIVE = re.compile(r"^%!\s+(entry|trace)\s+([^/\s]+)/(\d+)(?:\s+([\d,]+))?\s*$")
_PRUNED = "%  "


def parse_residual(text: str, entry: Optional[str] = None) -> ResidualProgram:
    """残余プログラムのテキストを読み戻す（注釈がなければ最初の述語を入口とする）"""
    clauses = parse_clauses(text)
    dropped = parse_clauses("\n".join(_pruned_lines(text)))
    if not clauses and not dropped:
        raise ValueError("residual program has no clauses")
    entry_key: Optional[PredKey] = None
    traces: dict[PredKey, tuple[int, ...]] = {}
    for line in text.splitlines():
        m = _DIRECTIVE.match(line.strip())
        if m is None:
            continue
        key = (m.group(2), int(m.group(3)))
        if m.group(1) == "entry":
            entry_key = key
        elif m.group(4):
            traces[key] = tuple(int(i) for i in m.group(4).split(","))
    keys = list(dict.fromkeys(c.key for c in [*clauses, *dropped]))
    if entry is not None:
        matching = [k for k in keys if k[0] == entry]
        if not matching:
            raise ValueError(f"no clauses for entry {entry}")
        entry_key = matching[0]
    elif entry_key is None:
        entry_key = keys[0]
    predicates: dict[str, ResidualPredicate] = {}
    for name, arity in keys:
        variables = tuple(Var(f"X{i + 1}") for i in range(arity))
        predicates[name] = ResidualPredicate(
            name, mk(name, *variables), variables, traces.get((name, arity), ())
        )
    if entry_key[0] not in predicates:
        raise ValueError(f"no clauses for entry {entry_key[0]}/{entry_key[1]}")
    return ResidualProgram(
        entry=predicates[entry_key[0]],
        predicates=predicates,
        clauses=clauses,
        dropped=dropped,
    )


def _pruned_lines(text: str) -> list[str]:
    """`%! pruned` 以降の注釈に書かれた除去済みの節"""
    out: list[str] = []
    inside = False
    for line in text.splitlines():
        if line.strip() == "%! pruned":
            inside = True
        elif inside and line.startswith(_PRUNED):
            out.append(line[len(_PRUNED):])
        elif inside and line.strip():
            inside = False
    return out
