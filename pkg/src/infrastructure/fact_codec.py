"""ファクトファイルの書き出しと読み込み"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

from loguru import logger

from src.domain.jvml import (
    BytecodeBody,
    ClassDecl,
    FieldDecl,
    Handler,
    InstructionFact,
    MethodDecl,
    class_name_of,
    is_instruction,
    parse_field_signature,
    parse_method_signature,
)
from src.domain.logic.syntax import format_term, read_terms
from src.domain.logic.terms import (
    NIL,
    Atom,
    Compound,
    Int,
    Term,
    list_items,
    make_list,
    mk,
)
from src.domain.program import Program
from src.shared.errors import DuplicatePc, FactParseError, SyntaxError_


def bytecode_fact(module: str, index: int, fact: InstructionFact) -> Term:
    """bytecode(PC, MethodIndex, Module, Inst, Size)"""
    return mk(
        "bytecode",
        Int(fact.pc),
        Int(index),
        Atom(module),
        fact.instruction,
        Int(fact.size),
    )


def program_fact(decls: Sequence[ClassDecl]) -> Term:
    classes = make_list(d.to_term() for d in decls if not d.is_interface)
    interfaces = make_list(d.to_term() for d in decls if d.is_interface)
    return mk("program", classes, interfaces)


def emit_facts(decls: Iterable[ClassDecl]) -> str:
    """宣言列をファクトファイルのテキストにする（1 行 1 ファクト）"""
    decls = list(decls)
    lines = [format_term(program_fact(decls)) + "."]
    for decl in decls:
        for body in decl.bodies():
            for fact in body.instructions:
                lines.append(format_term(bytecode_fact(body.module, body.index, fact)) + ".")
    logger.info("emitted facts for {} classes ({} lines)", len(decls), len(lines))
    return "\n".join(lines) + "\n"


# --- reading -----------------------------------------------------------------


class _Decoder:
    def __init__(self, line: int) -> None:
        self.line = line

    def fail(self, reason: str) -> FactParseError:
        return FactParseError(self.line, reason)

    def compound(self, term: Term, name: str, arity: int) -> tuple[Term, ...]:
        if arity == 0:
            if term != Atom(name):
                raise self.fail(f"expected {name}, found {format_term(term)}")
            return ()
        if not (isinstance(term, Compound) and term.name == name and len(term.args) == arity):
            raise self.fail(f"expected {name}/{arity}, found {format_term(term)}")
        return term.args

    def items(self, term: Term) -> list[Term]:
        items, tail = list_items(term)
        if tail != NIL:
            raise self.fail(f"expected a proper list, found {format_term(term)}")
        return items

    def integer(self, term: Term) -> int:
        if not isinstance(term, Int):
            raise self.fail(f"expected an integer, found {format_term(term)}")
        return term.value

    def atom(self, term: Term) -> str:
        if not isinstance(term, Atom):
            raise self.fail(f"expected an atom, found {format_term(term)}")
        return term.name

    def flag(self, term: Term, name: str) -> bool:
        (value,) = self.compound(term, name, 1)
        text = self.atom(value)
        if text not in ("true", "false"):
            raise self.fail(f"{name} must be true or false")
        return text == "true"

    def class_name(self, term: Term) -> str:
        try:
            return class_name_of(term)
        except ValueError as e:
            raise self.fail(str(e)) from e

    def option_class(self, term: Term) -> str | None:
        return None if term == Atom("none") else self.class_name(term)

    def field(self, term: Term) -> FieldDecl:
        sig, final, static, vis, init = self.compound(term, "field", 5)
        try:
            owner, name, jtype = parse_field_signature(sig)
        except (ValueError, AssertionError) as e:
            raise self.fail(f"bad field signature: {e}") from e
        (initial,) = self.compound(init, "initialValue", 1)
        return FieldDecl(
            owner=owner,
            name=name,
            type=jtype,
            final=self.flag(final, "final"),
            static=self.flag(static, "static"),
            visibility=self.atom(vis),
            initial_value=initial,
        )

    def method(
        self, term: Term, code: dict[tuple[str, int], list[InstructionFact]]
    ) -> MethodDecl:
        sig, option_bm, final, static, vis = self.compound(term, "method", 5)
        try:
            owner, name, params, returns = parse_method_signature(sig)
        except (ValueError, AssertionError) as e:
            raise self.fail(f"bad method signature: {e}") from e
        body = None
        if option_bm != Atom("none"):
            max_stack, max_locals, first, mid, handlers = self.compound(
                option_bm, "bytecodeMethod", 5
            )
            module, index = self.compound(mid, "methodId", 2)
            key = (self.atom(module), self.integer(index))
            body = BytecodeBody(
                max_stack=self.integer(max_stack),
                max_locals=self.integer(max_locals),
                first_pc=self.integer(first),
                module=key[0],
                index=key[1],
                handlers=tuple(self.handler(h) for h in self.items(handlers)),
                instructions=tuple(sorted(code.pop(key, []), key=lambda f: f.pc)),
            )
            body.ensure_coherent()
        return MethodDecl(
            owner=owner,
            name=name,
            params=params,
            returns=returns,
            body=body,
            final=self.flag(final, "final"),
            static=self.flag(static, "static"),
            visibility=self.atom(vis),
        )

    def handler(self, term: Term) -> Handler:
        cn, start, end, target = self.compound(term, "exceptionHandler", 4)
        return Handler(
            class_name=self.option_class(cn),
            start_pc=self.integer(start),
            end_pc=self.integer(end),
            handler_pc=self.integer(target),
        )

    def class_decl(
        self, term: Term, code: dict[tuple[str, int], list[InstructionFact]]
    ) -> ClassDecl:
        cn, final, public, abstract, sup, ifaces, fields, methods = self.compound(
            term, "class", 8
        )
        return ClassDecl(
            name=self.class_name(cn),
            super_name=self.option_class(sup),
            interfaces=tuple(self.class_name(i) for i in self.items(ifaces)),
            final=self.flag(final, "final"),
            public=self.flag(public, "public"),
            abstract=self.flag(abstract, "abstract"),
            fields=tuple(self.field(f) for f in self.items(fields)),
            methods=tuple(self.method(m, code) for m in self.items(methods)),
        )

    def interface_decl(
        self, term: Term, code: dict[tuple[str, int], list[InstructionFact]]
    ) -> ClassDecl:
        name, supers, fields, methods, final, public, abstract = self.compound(
            term, "interface", 7
        )
        return ClassDecl(
            name=self.class_name(name),
            interfaces=tuple(self.class_name(i) for i in self.items(supers)),
            is_interface=True,
            final=self.flag(final, "final"),
            public=self.flag(public, "public"),
            abstract=self.flag(abstract, "abstract"),
            fields=tuple(self.field(f) for f in self.items(fields)),
            methods=tuple(self.method(m, code) for m in self.items(methods)),
        )


def _bytecode_parts(args: tuple[Term, ...], dec: _Decoder) -> tuple[str, int, int, Term, int]:
    """両方の引数順を受け付ける: (PC,Idx,Module,..) と (Module,PC,Idx,..)"""
    first, second, third, inst, size = args
    if isinstance(first, Atom):
        module, pc, index = dec.atom(first), dec.integer(second), dec.integer(third)
    else:
        pc, index, module = dec.integer(first), dec.integer(second), dec.atom(third)
    if not is_instruction(inst):
        raise dec.fail(f"unknown instruction {format_term(inst)}")
    return module, pc, index, inst, dec.integer(size)


def load_decls(text: str) -> list[ClassDecl]:
    """ファクトテキストから ClassDecl の列を復元する"""
    program_term: tuple[Term, int] | None = None
    code: dict[tuple[str, int], list[InstructionFact]] = defaultdict(list)
    seen: set[tuple[str, int, int]] = set()
    try:
        for term, _, line in read_terms(text):
            dec = _Decoder(line)
            if isinstance(term, Compound) and term.name == "program" and len(term.args) == 2:
                if program_term is not None:
                    raise dec.fail("more than one program/2 fact")
                program_term = (term, line)
            elif isinstance(term, Compound) and term.name == "bytecode" and len(term.args) == 5:
                module, pc, index, inst, size = _bytecode_parts(term.args, dec)
                if (module, index, pc) in seen:
                    raise DuplicatePc((module, index), pc)
                seen.add((module, index, pc))
                code[(module, index)].append(InstructionFact(pc=pc, instruction=inst, size=size))
            else:
                raise dec.fail(f"unexpected fact {format_term(term)}")
    except SyntaxError_ as e:
        raise FactParseError(e.line, e.reason) from e

    if program_term is None:
        raise FactParseError(1, "missing program/2 fact")
    term, line = program_term
    dec = _Decoder(line)
    classes, interfaces = term.args  # type: ignore[union-attr]
    decls = [dec.class_decl(c, code) for c in dec.items(classes)]
    decls += [dec.interface_decl(i, code) for i in dec.items(interfaces)]
    if code:
        orphan = next(iter(code))
        raise FactParseError(line, f"bytecode facts for unknown method {orphan}")
    return decls


def load_program(text: str) -> Program:
    decls = load_decls(text)
    program = Program(decls)
    logger.info(
        "loaded program: {} classes, {} method bodies",
        len(decls),
        len(program.method_ids()),
    )
    return program


class PrologFactCodec:
    """FactCodec の実装 - 節の構文でファクトを書く"""

    def emit(self, decls: Iterable[ClassDecl]) -> str:
        return emit_facts(decls)

    def load(self, text: str) -> Program:
        return load_program(text)
