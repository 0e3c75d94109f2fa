"""メモリ上のプログラム - 解決済み宣言と命令索引"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

from loguru import logger

from src.shared.errors import DuplicatePc, NoSuchInstruction, NoSuchMethod

from .jvml import (
    OBJECT_CLASS,
    BytecodeBody,
    ClassDecl,
    FieldDecl,
    InstructionFact,
    MethodDecl,
    instruction,
    is_reference_type,
    type_class_name,
)
from .logic.terms import Compound, Term

MethodId = tuple[str, int]

BUILTIN_EXCEPTIONS: tuple[tuple[str, str], ...] = (
    ("java/lang/Throwable", OBJECT_CLASS),
    ("java/lang/Exception", "java/lang/Throwable"),
    ("java/lang/RuntimeException", "java/lang/Exception"),
    ("java/lang/ArithmeticException", "java/lang/RuntimeException"),
    ("java/lang/NullPointerException", "java/lang/RuntimeException"),
    ("java/lang/IndexOutOfBoundsException", "java/lang/RuntimeException"),
    (
        "java/lang/ArrayIndexOutOfBoundsException",
        "java/lang/IndexOutOfBoundsException",
    ),
    ("java/lang/NegativeArraySizeException", "java/lang/RuntimeException"),
    ("java/lang/ClassCastException", "java/lang/RuntimeException"),
)

ARRAY_SUPERTYPES = frozenset({OBJECT_CLASS, "java/lang/Cloneable", "java/io/Serializable"})

RUNTIME_EXCEPTIONS = {
    "ArithmeticException": "java/lang/ArithmeticException",
    "NullPointerException": "java/lang/NullPointerException",
    "ArrayIndexOutOfBoundsException": "java/lang/ArrayIndexOutOfBoundsException",
    "NegativeArraySizeException": "java/lang/NegativeArraySizeException",
    "ClassCastException": "java/lang/ClassCastException",
}


def _stub_class(name: str, super_name: str | None) -> ClassDecl:
    """<init>()V が return だけのクラス"""
    body = BytecodeBody(
        max_stack=0,
        max_locals=1,
        module=name,
        index=1,
        instructions=(InstructionFact(pc=0, instruction=instruction("return"), size=1),),
    )
    init = MethodDecl(owner=name, name="<init>", body=body, visibility="public")
    return ClassDecl(name=name, super_name=super_name, public=True, methods=(init,))


class Program:
    """解決済みクラス群と (メソッド, pc) -> 命令の索引"""

    def __init__(self, classes: Sequence[ClassDecl], add_builtins: bool = True) -> None:
        declared = list(classes)
        names = {c.name for c in declared}
        builtins: list[ClassDecl] = []
        if add_builtins:
            if OBJECT_CLASS not in names:
                builtins.append(_stub_class(OBJECT_CLASS, None))
            for exc, sup in BUILTIN_EXCEPTIONS:
                if exc not in names:
                    builtins.append(_stub_class(exc, sup))
        self.declared: tuple[ClassDecl, ...] = tuple(declared)
        self.builtin_classes: tuple[str, ...] = tuple(c.name for c in builtins)
        self.classes: dict[str, ClassDecl] = {}
        for decl in [*declared, *builtins]:
            self.classes[decl.name] = decl

        self._methods: dict[MethodId, MethodDecl] = {}
        self._code: dict[MethodId, dict[int, InstructionFact]] = {}
        for decl in self.classes.values():
            for method in decl.methods:
                if method.body is None:
                    continue
                mid = method.body.method_id
                self._methods[mid] = method
                table: dict[int, InstructionFact] = {}
                for fact in method.body.instructions:
                    if fact.pc in table:
                        raise DuplicatePc(mid, fact.pc)
                    table[fact.pc] = fact
                self._code[mid] = table
        logger.debug(
            "program: {} classes ({} builtin), {} method bodies",
            len(self.classes),
            len(builtins),
            len(self._methods),
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Program) and other.declared == self.declared

    __hash__ = None  # type: ignore[assignment]

    # --- 命令 --------------------------------------------------------------------

    def instruction_at(self, method_id: MethodId, pc: int) -> Term:
        return self.fact_at(method_id, pc).instruction

    def fact_at(self, method_id: MethodId, pc: int) -> InstructionFact:
        try:
            return self._code[method_id][pc]
        except KeyError:
            raise NoSuchInstruction(method_id, pc) from None

    def facts(self, method_id: MethodId) -> list[InstructionFact]:
        return [self._code[method_id][pc] for pc in sorted(self._code[method_id])]

    def method_ids(self) -> list[MethodId]:
        return list(self._methods)

    def method(self, method_id: MethodId) -> MethodDecl:
        try:
            return self._methods[method_id]
        except KeyError:
            raise NoSuchMethod(method_id) from None

    def methods(self) -> Iterator[MethodDecl]:
        return iter(self._methods.values())

    # --- 検索 --------------------------------------------------------------------

    def find_method(self, spec: str) -> MethodDecl:
        """'expMain' / 'Rational.expMain' 形式でメソッドを探す"""
        owner, _, name = spec.rpartition(".")
        matches = [
            m
            for decl in self.declared
            for m in decl.methods
            if m.name == name and (not owner or m.owner == owner)
        ]
        if len(matches) != 1:
            raise NoSuchMethod(spec)
        if matches[0].body is None:
            raise NoSuchMethod(spec)
        return matches[0]

    def superclasses(self, name: str) -> list[str]:
        """name 自身から始まる祖先の列（未知のクラスで止まる）"""
        chain: list[str] = []
        current: str | None = name
        while current is not None and current not in chain:
            chain.append(current)
            decl = self.classes.get(current)
            current = decl.super_name if decl is not None else None
        return chain

    def is_subclass(self, sub: str, sup: str) -> bool:
        if sup in self.superclasses(sub):
            return True
        return any(sup in self._interfaces_of(c) for c in self.superclasses(sub))

    def _interfaces_of(self, name: str) -> set[str]:
        decl = self.classes.get(name)
        if decl is None:
            return set()
        out: set[str] = set()
        pending = list(decl.interfaces)
        while pending:
            iname = pending.pop()
            if iname in out:
                continue
            out.add(iname)
            idecl = self.classes.get(iname)
            if idecl is not None:
                pending.extend(idecl.interfaces)
        return out

    def resolve_method(
        self, owner: str, name: str, params: tuple[Term, ...]
    ) -> MethodDecl | None:
        """owner から上位クラスへ向けてメソッドを解決（本体があるもの）"""
        for cname in self.superclasses(owner):
            decl = self.classes.get(cname)
            if decl is None:
                continue
            for m in decl.methods:
                if m.name == name and m.params == params and m.body is not None:
                    return m
        return None

    def assignable(self, source: str | Term, target: Term) -> bool:
        """実行時の型（クラス名または配列型の項）が target 型へ代入可能か"""
        if isinstance(source, str):
            name = type_class_name(target)
            return name is not None and self.is_subclass(source, name)
        if type_class_name(target) in ARRAY_SUPERTYPES:
            return True
        src, dst = _element_type(source), _element_type(target)
        if src is None or dst is None:
            return False
        if is_reference_type(src) and is_reference_type(dst):
            key = type_class_name(src)
            return self.assignable(key if key is not None else src, dst)
        return src == dst

    def instance_fields(self, class_name: str) -> list[FieldDecl]:
        """祖先のフィールドを先に、宣言順で"""
        fields: list[FieldDecl] = []
        for cname in reversed(self.superclasses(class_name)):
            decl = self.classes.get(cname)
            if decl is not None:
                fields.extend(f for f in decl.fields if not f.static)
        return fields

    def static_fields(self) -> list[FieldDecl]:
        return [f for decl in self.classes.values() for f in decl.fields if f.static]

    def max_stack(self, method_id: MethodId) -> int:
        body = self.method(method_id).body
        return body.max_stack if body is not None else 0

    def bodies(self) -> Iterable[BytecodeBody]:
        for m in self._methods.values():
            assert m.body is not None
            yield m.body


def _element_type(jtype: Term) -> Term | None:
    if (
        isinstance(jtype, Compound)
        and jtype.name == "refType"
        and isinstance(jtype.args[0], Compound)
        and jtype.args[0].name == "arrayType"
    ):
        return jtype.args[0].args[0]
    return None
