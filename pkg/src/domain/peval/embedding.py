"""同相埋め込み（homeomorphic embedding）"""

from __future__ import annotations

from typing import Literal

from ..logic.terms import Atom, Compound, Int, Term, Var

Widen = Literal["all", "int", "none"]


class _Embedding:
    def __init__(self, widen: Widen) -> None:
        self.widen = widen
        self.memo: dict[tuple[int, int, bool], bool] = {}

    def embeds(self, small: Term, large: Term, under_int: bool = False) -> bool:
        if isinstance(small, Var):
            return isinstance(large, Var)
        if isinstance(small, Int) and isinstance(large, Int):
            if small.value == large.value or self.widen == "all":
                return True
            return self.widen == "int" and under_int
        if not isinstance(large, Compound):
            return isinstance(small, Atom) and small == large
        key = (id(small), id(large), under_int)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.memo[key] = False
        result = self._couple(small, large) or any(
            self.embeds(small, arg) for arg in large.args
        )
        self.memo[key] = result
        return result

    def _couple(self, small: Term, large: Compound) -> bool:
        if not isinstance(small, Compound):
            return False
        if small.name != large.name or len(small.args) != len(large.args):
            return False
        if small.ground and large.ground and small == large:
            return True
        nested = small.name == "int" and len(small.args) == 1
        return all(self.embeds(s, t, nested) for s, t in zip(small.args, large.args))


def embeds(small: Term, large: Term, widen: Widen = "all") -> bool:
    """small が large に埋め込まれるか

    変数は変数に、整数は widen に従って整数に埋め込まれる。
    widen="int" では int/1 の直下の整数だけを互いに同一視する。
    """
    return _Embedding(widen).embeds(small, large)
