from __future__ import annotations

import pytest

from src.domain.jvml import INT_TYPE, class_type, instruction
from src.domain.logic import Int
from src.infrastructure import JvmClassReader, read_class
from src.infrastructure.class_reader import factorize, parse_method_descriptor
from src.shared.errors import (
    BadMagic,
    IncoherentCode,
    TruncatedFile,
    UnsupportedOpcode,
    UnsupportedVersion,
)

from ..support.classgen import ClassSpec, MethodSpec, build_class
from ..support.fixtures import arith_bytes, rational_bytes


def test_rational_declares_fields_and_methods():
    decl = read_class(rational_bytes())
    assert decl.name == "Rational"
    assert decl.super_name == "java/lang/Object"
    assert [f.name for f in decl.fields] == ["num", "den"]
    assert [m.name for m in decl.methods] == ["<init>", "exp", "expMain"]
    exp_main = decl.methods[2]
    assert exp_main.static
    assert exp_main.params == (INT_TYPE, INT_TYPE, INT_TYPE)


def test_exp_body_pcs():
    exp = read_class(rational_bytes()).methods[1]
    assert exp.body is not None
    by_pc = {f.pc: f for f in exp.body.instructions}
    assert by_pc[0].instruction == instruction("const", INT_TYPE, Int(1))
    assert by_pc[5].instruction.name == "if0"  # type: ignore[union-attr]
    assert by_pc[5].pc + by_pc[5].instruction.args[1].value == 28  # type: ignore[union-attr]
    assert by_pc[25].instruction == instruction("goto", Int(-21))


def test_handlers_are_resolved():
    decl = read_class(arith_bytes())
    safe = next(m for m in decl.methods if m.name == "safeDiv")
    assert safe.body is not None
    (handler,) = safe.body.handlers
    assert handler.class_name == "java/lang/ArithmeticException"


def test_method_descriptor():
    params, result = parse_method_descriptor("(II)LRational;")
    assert params == (INT_TYPE, INT_TYPE)
    assert result == class_type("Rational")
    assert parse_method_descriptor("()V") == ((), None)


def test_factorize_short_local_forms():
    code = bytes([0x1A, 0x1B, 0x60, 0xAC])  # iload_0 iload_1 iadd ireturn
    names = [inst.name for _, inst, _ in factorize(code)]  # type: ignore[union-attr]
    assert names == ["iload", "iload", "ibinop", "ireturn"]


def test_bad_magic():
    with pytest.raises(BadMagic):
        read_class(b"\x00" * 16)


def test_truncated_file():
    with pytest.raises(TruncatedFile):
        JvmClassReader().read(rational_bytes()[:40])


def test_unsupported_version():
    with pytest.raises(UnsupportedVersion):
        read_class(build_class(ClassSpec("Later", major=70)))


def test_monitors_are_rejected():
    spec = ClassSpec(
        "Locked",
        methods=[
            MethodSpec(
                "lock",
                "(Ljava/lang/Object;)V",
                [("aload", 0), ("monitorenter",), ("return",)],
            )
        ],
    )
    with pytest.raises(UnsupportedOpcode):
        read_class(build_class(spec))


def test_branch_past_the_last_instruction_is_rejected():
    spec = ClassSpec(
        "Jumpy",
        methods=[
            MethodSpec(
                "leap",
                "(I)V",
                [("iload", 0), ("ifeq", "end"), ("return",), "end:"],
            )
        ],
    )
    with pytest.raises(IncoherentCode) as info:
        read_class(build_class(spec))
    assert info.value.problems == ["branch at pc 1 targets 5"]
