"""置換と単一化（出現検査つき）"""

from __future__ import annotations

from typing import Iterator, Mapping

from .terms import Compound, Term, Var, is_cons


class Bindings:
    """三角置換とトレイル。ソルバと部分評価器が破壊的に使う"""

    __slots__ = ("_map", "_trail")

    def __init__(self, initial: Mapping[Var, Term] | None = None) -> None:
        self._map: dict[Var, Term] = dict(initial or {})
        self._trail: list[Var] = []

    def __len__(self) -> int:
        return len(self._map)

    def mark(self) -> int:
        return len(self._trail)

    def undo_to(self, mark: int) -> None:
        trail = self._trail
        while len(trail) > mark:
            del self._map[trail.pop()]

    def walk(self, term: Term) -> Term:
        m = self._map
        while isinstance(term, Var):
            nxt = m.get(term)
            if nxt is None:
                return term
            term = nxt
        return term

    def bind(self, var: Var, term: Term) -> None:
        self._map[var] = term
        self._trail.append(var)

    def occurs(self, var: Var, term: Term) -> bool:
        stack = [term]
        while stack:
            t = self.walk(stack.pop())
            if t is var:
                return True
            if isinstance(t, Compound) and not t.ground:
                stack.extend(t.args)
        return False

    def unify(self, a: Term, b: Term) -> bool:
        """a と b を単一化。失敗時は束縛を元に戻して False"""
        mark = self.mark()
        stack: list[tuple[Term, Term]] = [(a, b)]
        while stack:
            x, y = stack.pop()
            x = self.walk(x)
            y = self.walk(y)
            if x is y:
                continue
            if isinstance(x, Var):
                if isinstance(y, Var):
                    # younger variable points at the older one
                    if x.id < y.id:
                        x, y = y, x
                    self.bind(x, y)
                    continue
                if self.occurs(x, y):
                    self.undo_to(mark)
                    return False
                self.bind(x, y)
            elif isinstance(y, Var):
                if self.occurs(y, x):
                    self.undo_to(mark)
                    return False
                self.bind(y, x)
            elif isinstance(x, Compound):
                if (
                    not isinstance(y, Compound)
                    or x.name != y.name
                    or len(x.args) != len(y.args)
                ):
                    self.undo_to(mark)
                    return False
                if x.ground and y.ground:
                    if x != y:
                        self.undo_to(mark)
                        return False
                    continue
                stack.extend(zip(x.args, y.args))
            elif x != y:
                self.undo_to(mark)
                return False
        return True

    def resolve(self, term: Term) -> Term:
        """束縛を完全に適用した項を返す"""
        return _rebuild(term, self.walk, None)

    def snapshot(self) -> Subst:
        return Subst({v: self.resolve(v) for v in self._map})


class Subst(Mapping[Var, Term]):
    """冪等な置換 Var -> Term（不変）"""

    __slots__ = ("_map",)

    def __init__(self, mapping: Mapping[Var, Term] | None = None) -> None:
        self._map: dict[Var, Term] = dict(mapping or {})

    def __getitem__(self, key: Var) -> Term:
        return self._map[key]

    def __iter__(self) -> Iterator[Var]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k!r} -> {v!r}" for k, v in self._map.items())
        return "{" + inner + "}"

    def apply(self, term: Term) -> Term:
        m = self._map

        def lookup(t: Term) -> Term:
            while isinstance(t, Var) and t in m:
                t = m[t]
            return t

        return _rebuild(term, lookup, None)

    def restrict(self, variables: list[Var]) -> Subst:
        return Subst({v: self.apply(v) for v in variables if v in self._map})


def unify(a: Term, b: Term, s: Subst | None = None) -> Subst | None:
    """s を拡張する最汎単一化子を返す（無ければ None）"""
    bindings = Bindings(s._map if s is not None else None)
    if not bindings.unify(a, b):
        return None
    return bindings.snapshot()


def apply(s: Subst, term: Term) -> Term:
    return s.apply(term)


def copy_term(term: Term, mapping: dict[Var, Var] | None = None) -> Term:
    """変数を新しい変数に置き換えた複製"""
    table = {} if mapping is None else mapping

    def fresh(t: Term) -> Term:
        if isinstance(t, Var):
            nv = table.get(t)
            if nv is None:
                nv = Var(t.name)
                table[t] = nv
            return nv
        return t

    return _rebuild(term, lambda t: t, fresh)


def _rebuild(term: Term, walk, on_var) -> Term:
    """項を後順に再構築する。リストの背骨は反復で辿る"""
    term = walk(term)
    if isinstance(term, Var):
        return on_var(term) if on_var is not None else term
    if not isinstance(term, Compound) or term.ground:
        return term
    if is_cons(term):
        heads: list[Term] = []
        t: Term = term
        while True:
            t = walk(t)
            if is_cons(t) and not t.ground:  # type: ignore[union-attr]
                heads.append(_rebuild(t.args[0], walk, on_var))  # type: ignore[union-attr]
                t = t.args[1]  # type: ignore[union-attr]
                continue
            break
        tail = _rebuild(t, walk, on_var)
        for h in reversed(heads):
            tail = Compound(".", (h, tail))
        return tail
    args = tuple(_rebuild(a, walk, on_var) for a in term.args)
    if all(x is y for x, y in zip(args, term.args)):
        return term
    return Compound(term.name, args)


