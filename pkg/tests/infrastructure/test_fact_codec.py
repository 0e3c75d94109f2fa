from __future__ import annotations

import pytest

from src.infrastructure import PrologFactCodec, emit_facts, read_class
from src.infrastructure.fact_codec import load_decls
from src.shared.errors import DuplicatePc, FactParseError, IncoherentCode

from ..support.fixtures import arith_bytes, rational_bytes


@pytest.fixture(scope="module")
def decls():
    return [read_class(rational_bytes()), read_class(arith_bytes())]


def test_one_fact_per_line(decls):
    text = emit_facts(decls)
    lines = text.splitlines()
    head = "program([class(className(packageName(''),shortClassName('Rational'))"
    assert lines[0].startswith(head)
    assert "bytecode(0,2,'Rational',const(primitiveType(int),1),1)." in lines
    assert all(line.endswith(".") for line in lines)


def test_emitted_facts_load_back(decls):
    assert load_decls(emit_facts(decls)) == decls


def test_codec_builds_a_program(decls):
    codec = PrologFactCodec()
    program = codec.load(codec.emit(decls))
    assert program.find_method("expMain").static
    assert program.find_method("Arith.fact").body is not None


def test_missing_program_fact():
    with pytest.raises(FactParseError):
        load_decls("bytecode(0,1,'A',nop,1).\n")


def test_unexpected_fact():
    with pytest.raises(FactParseError):
        load_decls("foo(1).\n")


def test_syntax_error_becomes_fact_error():
    with pytest.raises(FactParseError):
        load_decls("program([],[]")


def test_duplicate_pc(decls):
    text = emit_facts(decls)
    line = next(l for l in text.splitlines() if l.startswith("bytecode("))
    with pytest.raises(DuplicatePc):
        load_decls(text + line + "\n")


def test_orphan_bytecode():
    with pytest.raises(FactParseError):
        load_decls("program([],[]).\nbytecode(0,1,'Ghost',nop,1).\n")


def test_missing_instruction_breaks_the_pc_chain(decls):
    lines = emit_facts(decls).splitlines()
    second = [i for i, l in enumerate(lines) if l.startswith("bytecode(")][1]
    with pytest.raises(IncoherentCode) as info:
        load_decls("\n".join(lines[:second] + lines[second + 1 :]) + "\n")
    assert "does not follow" in info.value.problems[0]


_RATIONAL = "className(packageName(''),shortClassName('Rational'))"
_FIELD = "fieldSignature(fieldName(" + _RATIONAL + ",shortFieldName({})),primitiveType(int))"
_INIT = (
    "methodSignature(methodName(" + _RATIONAL + ",shortMethodName('<init>')),"
    "[primitiveType(int),primitiveType(int)],none)"
)
EXP_FACTS = [
    (0, "const(primitiveType(int),1)", 1),
    (1, "istore(2)", 1),
    (2, "const(primitiveType(int),1)", 1),
    (3, "istore(3)", 1),
    (4, "iload(1)", 1),
    (5, "if0(leInt,23)", 3),
    (8, "iload(2)", 1),
    (9, "aload(0)", 1),
    (10, "getfield(" + _FIELD.format("num") + ")", 3),
    (13, "ibinop(mulInt)", 1),
    (14, "istore(2)", 1),
    (15, "iload(3)", 1),
    (16, "aload(0)", 1),
    (17, "getfield(" + _FIELD.format("den") + ")", 3),
    (20, "ibinop(mulInt)", 1),
    (21, "istore(3)", 1),
    (22, "iinc(1,-1)", 3),
    (25, "goto(-21)", 3),
    (28, "new(" + _RATIONAL + ")", 3),
    (31, "dup", 1),
    (32, "iload(2)", 1),
    (33, "iload(3)", 1),
    (34, "invokespecial(" + _INIT + ")", 3),
    (37, "areturn", 1),
]


def test_exp_fact_stream_is_exact(decls):
    lines = emit_facts(decls).splitlines()
    exp = [l for l in lines if l.startswith("bytecode(") and ",2,'Rational'," in l]
    assert exp == [f"bytecode({pc},2,'Rational',{inst},{size})." for pc, inst, size in EXP_FACTS]
