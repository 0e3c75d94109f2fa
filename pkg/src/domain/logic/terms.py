"""一階項 - 変数・整数・アトム・複合項"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence, Union

_ids = itertools.count(1)


class Var:
    """論理変数（同一性で比較される）"""

    __slots__ = ("id", "name")

    def __init__(self, name: str | None = None) -> None:
        self.id = next(_ids)
        self.name = name

    def __repr__(self) -> str:
        return f"_{self.name or ''}{self.id}"


class Int:
    __slots__ = ("value",)

    def __init__(self, value: int) -> None:
        self.value = value

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Int) and other.value == self.value

    def __hash__(self) -> int:
        return hash(("#int", self.value))

    def __repr__(self) -> str:
        return str(self.value)


class Atom:
    __slots__ = ("name",)

    def __init__(self, name: str) -> None:
        self.name = name

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Atom) and other.name == self.name

    def __hash__(self) -> int:
        return hash(("#atom", self.name))

    def __repr__(self) -> str:
        return self.name


class Compound:
    """複合項 name(args...)。ハッシュと基底性をキャッシュする"""

    __slots__ = ("name", "args", "_hash", "_ground")

    def __init__(self, name: str, args: Sequence[Term]) -> None:
        if not args:
            raise ValueError(f"compound {name!r} needs at least one argument")
        self.name = name
        self.args: tuple[Term, ...] = tuple(args)
        self._hash: int | None = None
        self._ground: bool | None = None

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def ground(self) -> bool:
        if self._ground is None:
            self._ground = is_ground(self)
        return self._ground

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Compound):
            return False
        if self.name != other.name or len(self.args) != len(other.args):
            return False
        if hash(self) != hash(other):
            return False
        return _structurally_equal(self, other)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = _structural_hash(self)
        return self._hash

    def __repr__(self) -> str:
        from .syntax import format_term

        return format_term(self)


Term = Union[Var, Int, Atom, Compound]

NIL = Atom("[]")
LIST_FUNCTOR = "."


def mk(name: str, *args: Term) -> Term:
    """引数が無ければアトム、あれば複合項を作る"""
    if not args:
        return Atom(name)
    return Compound(name, args)


def atom(name: str) -> Atom:
    return Atom(name)


def num(value: int) -> Int:
    return Int(value)


def cons(head: Term, tail: Term) -> Compound:
    return Compound(LIST_FUNCTOR, (head, tail))


def make_list(items: Iterable[Term], tail: Term = NIL) -> Term:
    result = tail
    for item in reversed(list(items)):
        result = Compound(LIST_FUNCTOR, (item, result))
    return result


def is_cons(term: Term) -> bool:
    return (
        isinstance(term, Compound) and term.name == LIST_FUNCTOR and len(term.args) == 2
    )


def list_items(term: Term) -> tuple[list[Term], Term]:
    """リストを要素と末尾に分解（末尾は [] か変数か非リスト項）"""
    items: list[Term] = []
    while is_cons(term):
        items.append(term.args[0])  # type: ignore[union-attr]
        term = term.args[1]  # type: ignore[union-attr]
    return items, term


def functor(term: Term) -> tuple[str, int]:
    if isinstance(term, Compound):
        return term.name, len(term.args)
    if isinstance(term, Atom):
        return term.name, 0
    raise TypeError(f"{term!r} has no functor")


def subterms(term: Term) -> Iterator[Term]:
    """前順で全部分項を列挙（再帰なし）"""
    stack = [term]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, Compound):
            stack.extend(reversed(t.args))


def is_ground(term: Term) -> bool:
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            return False
        if isinstance(t, Compound):
            if t._ground is True:
                continue
            stack.extend(t.args)
    return True


def term_vars(term: Term | Iterable[Term]) -> list[Var]:
    """出現順に重複なく変数を集める"""
    roots = [term] if isinstance(term, (Var, Int, Atom, Compound)) else list(term)
    seen: set[int] = set()
    out: list[Var] = []
    for root in roots:
        for t in subterms(root):
            if isinstance(t, Var) and t.id not in seen:
                seen.add(t.id)
                out.append(t)
    return out


def _structural_hash(term: Compound) -> int:
    # post-order over an explicit stack so long lists do not hit the recursion limit
    acc: dict[int, int] = {}
    stack: list[tuple[Compound, bool]] = [(term, False)]
    while stack:
        node, done = stack.pop()
        if done:
            parts = [node.name, len(node.args)]
            for a in node.args:
                if isinstance(a, Compound):
                    parts.append(a._hash if a._hash is not None else acc[id(a)])
                elif isinstance(a, Var):
                    parts.append(("#var", a.id))
                else:
                    parts.append(hash(a))
            h = hash(tuple(parts))
            node._hash = h
            acc[id(node)] = h
            continue
        if node._hash is not None:
            continue
        stack.append((node, True))
        for a in node.args:
            if isinstance(a, Compound) and a._hash is None:
                stack.append((a, False))
    return term._hash  # type: ignore[return-value]


def _structurally_equal(a: Compound, b: Compound) -> bool:
    stack: list[tuple[Term, Term]] = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        if isinstance(x, Compound):
            if not isinstance(y, Compound):
                return False
            if x.name != y.name or len(x.args) != len(y.args):
                return False
            if x._hash is not None and y._hash is not None and x._hash != y._hash:
                return False
            stack.extend(zip(x.args, y.args))
        elif isinstance(x, Var):
            if x is not y:
                return False
        elif x != y:
            return False
    return True
