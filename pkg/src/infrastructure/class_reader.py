"""クラスファイルリーダ - .class を読み、定数プールを解決し、JVML_r へ因子化する"""

from __future__ import annotations

import struct
from typing import Optional, Sequence

from loguru import logger
from pydantic import BaseModel, ConfigDict

from src.domain.jvml import (
    BytecodeBody,
    ClassDecl,
    FieldDecl,
    Handler,
    InstructionFact,
    MethodDecl,
    array_depth,
    array_type,
    class_name_term,
    class_type,
    field_signature,
    instruction,
    method_signature,
    prim_type,
)
from src.domain.logic.terms import Atom, Int, Term, mk
from src.shared.errors import (
    BadMagic,
    BadPoolEntry,
    DanglingPoolRef,
    MalformedDescriptor,
    TruncatedFile,
    UnsupportedOpcode,
    UnsupportedVersion,
)

MAGIC = 0xCAFEBABE
MIN_MAJOR, MAX_MAJOR = 45, 69

ACC_PUBLIC = 0x0001
ACC_PRIVATE = 0x0002
ACC_PROTECTED = 0x0004
ACC_STATIC = 0x0008
ACC_FINAL = 0x0010
ACC_INTERFACE = 0x0200
ACC_ABSTRACT = 0x0400

# constant pool tags
UTF8, INTEGER, FLOAT, LONG, DOUBLE = 1, 3, 4, 5, 6
CLASS, STRING, FIELDREF, METHODREF, IMETHODREF, NAME_AND_TYPE = 7, 8, 9, 10, 11, 12
METHOD_HANDLE, METHOD_TYPE, DYNAMIC, INVOKE_DYNAMIC = 15, 16, 17, 18
MODULE, PACKAGE = 19, 20

TAG_NAMES = {
    UTF8: "Utf8",
    INTEGER: "Integer",
    FLOAT: "Float",
    LONG: "Long",
    DOUBLE: "Double",
    CLASS: "Class",
    STRING: "String",
    FIELDREF: "Fieldref",
    METHODREF: "Methodref",
    IMETHODREF: "InterfaceMethodref",
    NAME_AND_TYPE: "NameAndType",
    METHOD_HANDLE: "MethodHandle",
    METHOD_TYPE: "MethodType",
    DYNAMIC: "Dynamic",
    INVOKE_DYNAMIC: "InvokeDynamic",
    MODULE: "Module",
    PACKAGE: "Package",
}

# 各タグの参照先の期待種別
_REF_KINDS: dict[int, tuple[tuple[int, ...], ...]] = {
    CLASS: ((UTF8,),),
    STRING: ((UTF8,),),
    FIELDREF: ((CLASS,), (NAME_AND_TYPE,)),
    METHODREF: ((CLASS,), (NAME_AND_TYPE,)),
    IMETHODREF: ((CLASS,), (NAME_AND_TYPE,)),
    NAME_AND_TYPE: ((UTF8,), (UTF8,)),
    METHOD_TYPE: ((UTF8,),),
    MODULE: ((UTF8,),),
    PACKAGE: ((UTF8,),),
}


class RawModel(BaseModel):
    model_config = ConfigDict(frozen=True)


class PoolEntry(RawModel):
    tag: int
    value: int | float | str | None = None
    refs: tuple[int, ...] = ()
    offset: int = 0


class RawCode(RawModel):
    max_stack: int
    max_locals: int
    code: bytes
    # (start_pc, end_pc, handler_pc, catch_type)
    exception_table: tuple[tuple[int, int, int, int], ...] = ()
    offset: int = 0


class RawMember(RawModel):
    access_flags: int
    name_index: int
    descriptor_index: int
    code: Optional[RawCode] = None
    constant_value: Optional[int] = None


class RawClassFile(RawModel):
    magic: int
    minor: int
    major: int
    constant_pool: tuple[Optional[PoolEntry], ...]
    access_flags: int
    this_class: int
    super_class: int
    interfaces: tuple[int, ...] = ()
    fields: tuple[RawMember, ...] = ()
    methods: tuple[RawMember, ...] = ()

    def entry(self, index: int, expected: int) -> PoolEntry:
        pool = self.constant_pool
        entry = pool[index] if 0 < index < len(pool) else None
        if entry is None or entry.tag != expected:
            raise DanglingPoolRef(index, TAG_NAMES.get(expected, str(expected)))
        return entry

    def utf8(self, index: int) -> str:
        value = self.entry(index, UTF8).value
        assert isinstance(value, str)
        return value

    def class_name(self, index: int) -> str:
        return self.utf8(self.entry(index, CLASS).refs[0])


class _Reader:
    """ビッグエンディアンのバイト列リーダ（オフセットつき）"""

    def __init__(self, data: bytes, base: int = 0) -> None:
        self.data = data
        self.pos = 0
        self.base = base

    @property
    def offset(self) -> int:
        return self.base + self.pos

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFile(self.pos + n - len(self.data), self.offset)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u1(self) -> int:
        return self.take(1)[0]

    def u2(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def s1(self) -> int:
        return struct.unpack(">b", self.take(1))[0]

    def s2(self) -> int:
        return struct.unpack(">h", self.take(2))[0]

    def u4(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def s4(self) -> int:
        return struct.unpack(">i", self.take(4))[0]


def _decode_utf8(raw: bytes) -> str:
    # modified UTF-8 encodes NUL as C0 80
    return raw.replace(b"\xc0\x80", b"\x00").decode("utf-8", errors="surrogatepass")


def parse_class(data: bytes) -> RawClassFile:
    """クラスファイルのバイト列を RawClassFile に構文解析する"""
    r = _Reader(data)
    magic = r.u4()
    if magic != MAGIC:
        raise BadMagic(magic, 0)
    minor = r.u2()
    major = r.u2()
    if not MIN_MAJOR <= major <= MAX_MAJOR:
        raise UnsupportedVersion(major, minor, 6)

    count = r.u2()
    pool: list[Optional[PoolEntry]] = [None] * max(count, 1)
    index = 1
    while index < count:
        at = r.offset
        tag = r.u1()
        if tag == UTF8:
            length = r.u2()
            try:
                text = _decode_utf8(r.take(length))
            except UnicodeDecodeError as e:
                raise BadPoolEntry(index, f"invalid UTF-8 ({e.reason})", at) from e
            pool[index] = PoolEntry(tag=tag, value=text, offset=at)
        elif tag == INTEGER:
            pool[index] = PoolEntry(tag=tag, value=r.s4(), offset=at)
        elif tag == FLOAT:
            pool[index] = PoolEntry(tag=tag, value=struct.unpack(">f", r.take(4))[0], offset=at)
        elif tag == LONG:
            pool[index] = PoolEntry(tag=tag, value=struct.unpack(">q", r.take(8))[0], offset=at)
        elif tag == DOUBLE:
            pool[index] = PoolEntry(tag=tag, value=struct.unpack(">d", r.take(8))[0], offset=at)
        elif tag in (CLASS, STRING, METHOD_TYPE, MODULE, PACKAGE):
            pool[index] = PoolEntry(tag=tag, refs=(r.u2(),), offset=at)
        elif tag in (FIELDREF, METHODREF, IMETHODREF, NAME_AND_TYPE, DYNAMIC, INVOKE_DYNAMIC):
            pool[index] = PoolEntry(tag=tag, refs=(r.u2(), r.u2()), offset=at)
        elif tag == METHOD_HANDLE:
            kind = r.u1()
            pool[index] = PoolEntry(tag=tag, value=kind, refs=(r.u2(),), offset=at)
        else:
            raise BadPoolEntry(index, f"unknown tag {tag}", at)
        # long and double occupy two slots
        index += 2 if tag in (LONG, DOUBLE) else 1
    _check_pool(pool)

    access = r.u2()
    this_class = r.u2()
    super_class = r.u2()
    interfaces = tuple(r.u2() for _ in range(r.u2()))
    fields = tuple(_member(r, pool) for _ in range(r.u2()))
    methods = tuple(_member(r, pool) for _ in range(r.u2()))
    for _ in range(r.u2()):
        r.u2()
        r.take(r.u4())

    _expect(pool, this_class, CLASS, r.offset)
    if super_class:
        _expect(pool, super_class, CLASS, r.offset)
    for i in interfaces:
        _expect(pool, i, CLASS, r.offset)
    for member in (*fields, *methods):
        _expect(pool, member.name_index, UTF8, r.offset)
        _expect(pool, member.descriptor_index, UTF8, r.offset)

    raw = RawClassFile(
        magic=magic,
        minor=minor,
        major=major,
        constant_pool=tuple(pool),
        access_flags=access,
        this_class=this_class,
        super_class=super_class,
        interfaces=interfaces,
        fields=fields,
        methods=methods,
    )
    logger.debug(
        "parsed class file: {} pool entries, {} fields, {} methods",
        count,
        len(fields),
        len(methods),
    )
    return raw


def _expect(pool: Sequence[Optional[PoolEntry]], index: int, tag: int, offset: int) -> None:
    entry = pool[index] if 0 < index < len(pool) else None
    if entry is None or entry.tag != tag:
        raise BadPoolEntry(index, f"expected {TAG_NAMES[tag]}", offset)


def _check_pool(pool: Sequence[Optional[PoolEntry]]) -> None:
    for i, entry in enumerate(pool):
        if entry is None:
            continue
        kinds = _REF_KINDS.get(entry.tag)
        if kinds is None:
            continue
        for ref, allowed in zip(entry.refs, kinds):
            target = pool[ref] if 0 < ref < len(pool) else None
            if target is None or target.tag not in allowed:
                raise BadPoolEntry(i, f"reference #{ref} has the wrong kind", entry.offset)


def _member(r: _Reader, pool: Sequence[Optional[PoolEntry]]) -> RawMember:
    access = r.u2()
    name_index = r.u2()
    descriptor_index = r.u2()
    code: Optional[RawCode] = None
    constant_value: Optional[int] = None
    for _ in range(r.u2()):
        name_at = r.offset
        attr_name = r.u2()
        length = r.u4()
        body_at = r.offset
        body = r.take(length)
        entry = pool[attr_name] if 0 < attr_name < len(pool) else None
        if entry is None or entry.tag != UTF8:
            raise BadPoolEntry(attr_name, "attribute name is not Utf8", name_at)
        if entry.value == "Code":
            code = _code_attribute(body, body_at)
        elif entry.value == "ConstantValue":
            constant_value = struct.unpack(">H", body[:2])[0] if len(body) >= 2 else None
            if constant_value is None:
                raise TruncatedFile(2 - len(body), body_at)
    return RawMember(
        access_flags=access,
        name_index=name_index,
        descriptor_index=descriptor_index,
        code=code,
        constant_value=constant_value,
    )


def _code_attribute(body: bytes, base: int) -> RawCode:
    r = _Reader(body, base)
    max_stack = r.u2()
    max_locals = r.u2()
    code_at = r.offset
    code = r.take(r.u4())
    table = tuple((r.u2(), r.u2(), r.u2(), r.u2()) for _ in range(r.u2()))
    # nested attributes (LineNumberTable and friends) are skipped
    return RawCode(
        max_stack=max_stack,
        max_locals=max_locals,
        code=code,
        exception_table=table,
        offset=code_at + 4,
    )


# --- descriptors -------------------------------------------------------------

_PRIMS = {"Z": "boolean", "B": "byte", "S": "short", "I": "int"}


def _parse_type(text: str, i: int, whole: str) -> tuple[Term, int]:
    if i >= len(text):
        raise MalformedDescriptor(whole)
    ch = text[i]
    if ch in _PRIMS:
        return prim_type(_PRIMS[ch]), i + 1
    if ch == "L":
        end = text.find(";", i)
        if end < 0 or end == i + 1:
            raise MalformedDescriptor(whole)
        return class_type(text[i + 1 : end]), end + 1
    if ch == "[":
        element, j = _parse_type(text, i + 1, whole)
        return array_type(element), j
    # char, long, float and double lie outside the subset
    raise MalformedDescriptor(whole)


def parse_field_descriptor(text: str) -> Term:
    jtype, end = _parse_type(text, 0, text)
    if end != len(text):
        raise MalformedDescriptor(text)
    return jtype


def parse_method_descriptor(text: str) -> tuple[tuple[Term, ...], Optional[Term]]:
    """'(II)LRational;' -> ((int, int), Rational)"""
    if not text.startswith("("):
        raise MalformedDescriptor(text)
    params: list[Term] = []
    i = 1
    while i < len(text) and text[i] != ")":
        jtype, i = _parse_type(text, i, text)
        params.append(jtype)
    if i >= len(text):
        raise MalformedDescriptor(text)
    rest = text[i + 1 :]
    if rest == "V":
        return tuple(params), None
    if not rest:
        raise MalformedDescriptor(text)
    return tuple(params), parse_field_descriptor(rest)


def class_ref_type(name: str) -> Term:
    """Class 定数の名前を参照型に（配列なら記述子として解釈）"""
    if name.startswith("["):
        return parse_field_descriptor(name)
    return class_type(name)


# --- factorization -----------------------------------------------------------

_IF0 = {0x99: "eqInt", 0x9A: "neInt", 0x9B: "ltInt", 0x9C: "geInt", 0x9D: "gtInt", 0x9E: "leInt"}
_IF_ICMP = {
    0x9F: "eqInt",
    0xA0: "neInt",
    0xA1: "ltInt",
    0xA2: "geInt",
    0xA3: "gtInt",
    0xA4: "leInt",
}
_BINOP = {
    0x60: "addInt",
    0x64: "subInt",
    0x68: "mulInt",
    0x6C: "divInt",
    0x70: "remInt",
    0x78: "shlInt",
    0x7A: "shrInt",
    0x7E: "andInt",
    0x80: "orInt",
    0x82: "xorInt",
}
_SIMPLE = {
    0x00: "nop",
    0x01: "aconst_null",
    0x2E: "iaload",
    0x32: "aaload",
    0x33: "baload",
    0x35: "saload",
    0x4F: "iastore",
    0x53: "aastore",
    0x54: "bastore",
    0x56: "sastore",
    0x57: "pop",
    0x58: "pop2",
    0x59: "dup",
    0x5A: "dup_x1",
    0x5B: "dup_x2",
    0x5F: "swap",
    0x74: "ineg",
    0x91: "i2b",
    0x93: "i2s",
    0xAC: "ireturn",
    0xB0: "areturn",
    0xB1: "return",
    0xBE: "arraylength",
    0xBF: "athrow",
}
_LOCAL_OPS = {0x15: "iload", 0x19: "aload", 0x36: "istore", 0x3A: "astore"}
# *_0 .. *_3 short forms: first opcode of each run
_LOCAL_SHORT = {0x1A: "iload", 0x2A: "aload", 0x3B: "istore", 0x4B: "astore"}
_NEWARRAY_TYPES = {4: "boolean", 8: "byte", 9: "short", 10: "int"}
_FIELD_OPS = {0xB2: "getstatic", 0xB3: "putstatic", 0xB4: "getfield", 0xB5: "putfield"}
_INVOKE_OPS = {0xB6: "invokevirtual", 0xB7: "invokespecial", 0xB8: "invokestatic"}
_REJECTED = {
    0xB9: "invokeinterface",
    0xC2: "monitorenter",
    0xC3: "monitorexit",
}


def _int_const(n: int) -> Term:
    return instruction("const", prim_type("int"), Int(n))


def _field_ref(raw: RawClassFile, index: int) -> Term:
    entry = raw.entry(index, FIELDREF)
    owner = raw.class_name(entry.refs[0])
    nat = raw.entry(entry.refs[1], NAME_AND_TYPE)
    name, desc = raw.utf8(nat.refs[0]), raw.utf8(nat.refs[1])
    return field_signature(owner, name, parse_field_descriptor(desc))


def _method_ref(raw: RawClassFile, index: int) -> Term:
    pool = raw.constant_pool
    entry = pool[index] if 0 < index < len(pool) else None
    if entry is None or entry.tag not in (METHODREF, IMETHODREF):
        raise DanglingPoolRef(index, "Methodref")
    owner = raw.class_name(entry.refs[0])
    nat = raw.entry(entry.refs[1], NAME_AND_TYPE)
    name, desc = raw.utf8(nat.refs[0]), raw.utf8(nat.refs[1])
    params, returns = parse_method_descriptor(desc)
    return method_signature(owner, name, params, returns)


def factorize(
    code: bytes, raw: RawClassFile | None = None, base: int = 0
) -> list[tuple[int, Term, int]]:
    """コードバイト列を (pc, 命令, サイズ) の列に因子化する"""
    r = _Reader(code, base)
    out: list[tuple[int, Term, int]] = []

    def pool() -> RawClassFile:
        if raw is None:
            raise DanglingPoolRef(0, "constant pool")
        return raw

    while r.pos < len(code):
        pc = r.pos
        op = r.u1()
        inst: Term
        if op in _SIMPLE:
            inst = instruction(_SIMPLE[op])
        elif 0x02 <= op <= 0x08:
            inst = _int_const(op - 0x03)
        elif op == 0x10:
            inst = _int_const(r.s1())
        elif op == 0x11:
            inst = _int_const(r.s2())
        elif op in (0x12, 0x13):
            index = r.u1() if op == 0x12 else r.u2()
            p = pool()
            entry = p.constant_pool[index] if 0 < index < len(p.constant_pool) else None
            if entry is None:
                raise DanglingPoolRef(index, "loadable constant")
            if entry.tag != INTEGER:
                raise UnsupportedOpcode(op, pc, f"ldc of {TAG_NAMES.get(entry.tag)}")
            assert isinstance(entry.value, int)
            inst = _int_const(entry.value)
        elif op in _LOCAL_OPS:
            inst = instruction(_LOCAL_OPS[op], Int(r.u1()))
        elif any(start <= op <= start + 3 for start in _LOCAL_SHORT):
            start = max(s for s in _LOCAL_SHORT if s <= op)
            inst = instruction(_LOCAL_SHORT[start], Int(op - start))
        elif op in _BINOP:
            inst = instruction("ibinop", Atom(_BINOP[op]))
        elif op == 0x84:
            index = r.u1()
            inst = instruction("iinc", Int(index), Int(r.s1()))
        elif op in _IF0:
            inst = instruction("if0", Atom(_IF0[op]), Int(r.s2()))
        elif op in _IF_ICMP:
            inst = instruction("if_icmp", Atom(_IF_ICMP[op]), Int(r.s2()))
        elif op == 0xA5:
            inst = instruction("if_acmpeq", Int(r.s2()))
        elif op == 0xA6:
            inst = instruction("if_acmpne", Int(r.s2()))
        elif op == 0xA7:
            inst = instruction("goto", Int(r.s2()))
        elif op == 0xC8:
            inst = instruction("goto", Int(r.s4()))
        elif op == 0xC6:
            inst = instruction("ifnull", Int(r.s2()))
        elif op == 0xC7:
            inst = instruction("ifnonnull", Int(r.s2()))
        elif op in _FIELD_OPS:
            inst = instruction(_FIELD_OPS[op], _field_ref(pool(), r.u2()))
        elif op in _INVOKE_OPS:
            inst = instruction(_INVOKE_OPS[op], _method_ref(pool(), r.u2()))
        elif op == 0xBB:
            name = pool().class_name(r.u2())
            if name.startswith("["):
                raise UnsupportedOpcode(op, pc, "new of an array class")
            inst = instruction("new", class_name_term(name))
        elif op == 0xBC:
            atype = r.u1()
            if atype not in _NEWARRAY_TYPES:
                raise UnsupportedOpcode(op, pc, f"newarray type {atype}")
            inst = instruction("newarray", prim_type(_NEWARRAY_TYPES[atype]))
        elif op == 0xBD:
            inst = instruction("anewarray", class_ref_type(pool().class_name(r.u2())))
        elif op in (0xC0, 0xC1):
            name = "checkcast" if op == 0xC0 else "instanceof"
            inst = instruction(name, class_ref_type(pool().class_name(r.u2())))
        elif op == 0xC5:
            jtype = class_ref_type(pool().class_name(r.u2()))
            dims = r.u1()
            if dims != array_depth(jtype):
                raise UnsupportedOpcode(op, pc, "multianewarray with partial dimensions")
            inst = instruction("multianewarray", jtype)
        elif op == 0xC4:
            inst = _wide(r, pc)
        elif op in _REJECTED:
            raise UnsupportedOpcode(op, pc, _REJECTED[op])
        else:
            raise UnsupportedOpcode(op, pc)
        out.append((pc, inst, r.pos - pc))
    return out


def _wide(r: _Reader, pc: int) -> Term:
    op = r.u1()
    if op == 0x84:
        index = r.u2()
        return instruction("iinc", Int(index), Int(r.s2()))
    if op in _LOCAL_OPS:
        return instruction(_LOCAL_OPS[op], Int(r.u2()))
    raise UnsupportedOpcode(0xC4, pc, f"wide form of 0x{op:02X}")


# --- resolution --------------------------------------------------------------


def _visibility(flags: int) -> str:
    if flags & ACC_PUBLIC:
        return "public"
    if flags & ACC_PRIVATE:
        return "private"
    if flags & ACC_PROTECTED:
        return "protected"
    return "package"


def resolve(raw: RawClassFile) -> ClassDecl:
    """定数プール参照をすべてインライン化した ClassDecl を作る"""
    name = raw.class_name(raw.this_class)
    is_interface = bool(raw.access_flags & ACC_INTERFACE)
    super_name = None
    if raw.super_class and not is_interface:
        super_name = raw.class_name(raw.super_class)
    interfaces = tuple(raw.class_name(i) for i in raw.interfaces)

    fields: list[FieldDecl] = []
    for f in raw.fields:
        jtype = parse_field_descriptor(raw.utf8(f.descriptor_index))
        initial: Term = Atom("undef")
        if f.constant_value is not None and f.access_flags & ACC_STATIC:
            entry = raw.entry(f.constant_value, INTEGER)
            assert isinstance(entry.value, int)
            initial = mk("int", Int(entry.value))
        fields.append(
            FieldDecl(
                owner=name,
                name=raw.utf8(f.name_index),
                type=jtype,
                final=bool(f.access_flags & ACC_FINAL),
                static=bool(f.access_flags & ACC_STATIC),
                visibility=_visibility(f.access_flags),
                initial_value=initial,
            )
        )

    methods: list[MethodDecl] = []
    for index, m in enumerate(raw.methods, start=1):
        params, returns = parse_method_descriptor(raw.utf8(m.descriptor_index))
        body: Optional[BytecodeBody] = None
        if m.code is not None:
            facts = factorize(m.code.code, raw, m.code.offset)
            handlers = tuple(
                Handler(
                    class_name=raw.class_name(catch) if catch else None,
                    start_pc=start,
                    end_pc=end,
                    handler_pc=target,
                )
                for start, end, target, catch in m.code.exception_table
            )
            body = BytecodeBody(
                max_stack=m.code.max_stack,
                max_locals=m.code.max_locals,
                first_pc=0,
                module=name,
                index=index,
                handlers=handlers,
                instructions=tuple(
                    InstructionFact(pc=pc, instruction=inst, size=size)
                    for pc, inst, size in facts
                ),
            )
            body.ensure_coherent()
        methods.append(
            MethodDecl(
                owner=name,
                name=raw.utf8(m.name_index),
                params=params,
                returns=returns,
                body=body,
                final=bool(m.access_flags & ACC_FINAL),
                static=bool(m.access_flags & ACC_STATIC),
                visibility=_visibility(m.access_flags),
            )
        )

    decl = ClassDecl(
        name=name,
        super_name=super_name,
        interfaces=interfaces,
        is_interface=is_interface,
        final=bool(raw.access_flags & ACC_FINAL),
        public=bool(raw.access_flags & ACC_PUBLIC),
        abstract=bool(raw.access_flags & ACC_ABSTRACT),
        fields=tuple(fields),
        methods=tuple(methods),
    )
    logger.debug("resolved {}: {} fields, {} methods", name, len(fields), len(methods))
    return decl


def read_class(data: bytes) -> ClassDecl:
    return resolve(parse_class(data))


class JvmClassReader:
    """ClassFileReader の実装"""

    def read(self, data: bytes) -> ClassDecl:
        return read_class(data)
