"""実行状態 - 値・ヒープ・フレームと、その論理項表現"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict

from src.shared.errors import Stuck

from ..jvml import is_reference_type
from ..logic.terms import NIL, Atom, Compound, Int, Term, list_items, make_list, mk
from ..program import MethodId, Program


@dataclass(frozen=True, slots=True)
class Ref:
    """ヒープ上の位置（1 始まり）"""

    loc: int


class _Undef:
    _instance: Optional["_Undef"] = None

    def __new__(cls) -> "_Undef":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "undef"


UNDEF = _Undef()

# int は 32 ビット整数、None は null
Value = Union[int, Ref, None, _Undef]


@dataclass(slots=True)
class Obj:
    class_name: str
    fields: list[Value]


@dataclass(slots=True)
class Arr:
    elem_type: Term
    cells: list[Value]


@dataclass(slots=True)
class Heap:
    objects: list[Union[Obj, Arr]] = field(default_factory=list)
    statics: list[Value] = field(default_factory=list)

    def alloc(self, cell: Union[Obj, Arr]) -> Ref:
        self.objects.append(cell)
        return Ref(len(self.objects))

    def get(self, ref: Ref) -> Union[Obj, Arr]:
        if not 1 <= ref.loc <= len(self.objects):
            raise Stuck(f"dangling reference loc({ref.loc})")
        return self.objects[ref.loc - 1]


@dataclass(slots=True)
class Frame:
    """オペランドスタックは末尾が先頭（項表現では逆順）"""

    method: MethodId
    pc: int
    stack: list[Value]
    locals: list[Value]


@dataclass(slots=True)
class State:
    heap: Heap
    frame: Frame
    call_stack: list[Frame] = field(default_factory=list)
    mode: Literal["normal", "abrupt"] = "normal"
    final: Literal[None, "void", "ret", "exc"] = None
    result: Value = None
    thrown: Optional[Ref] = None

    @property
    def done(self) -> bool:
        return self.final is not None


class MIS(BaseModel):
    """メソッド起動仕様 - メソッド・引数・初期ヒープ（None ならプログラムの初期ヒープ）"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    method: MethodId
    args: tuple[Term, ...] = ()
    heap: Optional[Term] = None


# --- 値 <-> 項 ---------------------------------------------------------------


def value_to_term(value: Value) -> Term:
    if isinstance(value, _Undef):
        return Atom("undef")
    if value is None:
        return Atom("null")
    if isinstance(value, Ref):
        return mk("ref", mk("loc", Int(value.loc)))
    return mk("num", mk("int", Int(value)))


def term_to_value(term: Term) -> Value:
    if term == Atom("null"):
        return None
    if term == Atom("undef"):
        return UNDEF
    if isinstance(term, Compound) and len(term.args) == 1:
        inner = term.args[0]
        if term.name == "num" and isinstance(inner, Compound) and inner.name == "int":
            n = inner.args[0]
            if isinstance(n, Int):
                return n.value
        if term.name == "ref" and isinstance(inner, Compound) and inner.name == "loc":
            k = inner.args[0]
            if isinstance(k, Int):
                return Ref(k.value)
    raise ValueError(f"not a ground value: {term!r}")


def _values(term: Term) -> list[Value]:
    items, tail = list_items(term)
    if tail != NIL:
        raise ValueError(f"not a proper list: {term!r}")
    return [term_to_value(t) for t in items]


def heap_to_term(heap: Heap) -> Term:
    cells: list[Term] = []
    for cell in heap.objects:
        if isinstance(cell, Obj):
            cells.append(
                mk("obj", Atom(cell.class_name), make_list(value_to_term(v) for v in cell.fields))
            )
        else:
            cells.append(
                mk(
                    "array",
                    cell.elem_type,
                    Int(len(cell.cells)),
                    make_list(value_to_term(v) for v in cell.cells),
                )
            )
    return mk("heap", make_list(cells), make_list(value_to_term(v) for v in heap.statics))


def term_to_heap(term: Term) -> Heap:
    if not (isinstance(term, Compound) and term.name == "heap" and len(term.args) == 2):
        raise ValueError(f"not a heap: {term!r}")
    objects, tail = list_items(term.args[0])
    if tail != NIL:
        raise ValueError("heap object list is not proper")
    heap = Heap(statics=_values(term.args[1]))
    for cell in objects:
        if isinstance(cell, Compound) and cell.name == "obj" and isinstance(cell.args[0], Atom):
            heap.objects.append(Obj(cell.args[0].name, _values(cell.args[1])))
        elif isinstance(cell, Compound) and cell.name == "array":
            heap.objects.append(Arr(cell.args[0], _values(cell.args[2])))
        else:
            raise ValueError(f"not a heap cell: {cell!r}")
    return heap


def default_value(jtype: Term) -> Value:
    return None if is_reference_type(jtype) else 0


def initial_heap(program: Program) -> Heap:
    """静的フィールドを定数値（なければ既定値）で初期化した空ヒープ"""
    statics: list[Value] = []
    for decl in program.static_fields():
        init = decl.initial_value
        if isinstance(init, Compound) and init.name == "int" and isinstance(init.args[0], Int):
            statics.append(init.args[0].value)
        else:
            statics.append(default_value(decl.type))
    return Heap(statics=statics)


def initial_heap_term(program: Program) -> Term:
    return heap_to_term(initial_heap(program))
