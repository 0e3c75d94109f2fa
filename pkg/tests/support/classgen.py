"""テスト用のクラスファイル組み立て - javap の一覧から .class のバイト列を作る

JDK なしでフィクスチャを用意するための最小限のアセンブラ。命令はタプル
（ニーモニック, オペランド...）で、"loop:" のような文字列はラベル。
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

ACC_PUBLIC = 0x0001
ACC_STATIC = 0x0008
ACC_FINAL = 0x0010
ACC_SUPER = 0x0020

Op = Union[str, tuple]

_SIMPLE = {
    "nop": 0x00,
    "aconst_null": 0x01,
    "iconst_m1": 0x02,
    "iconst_0": 0x03,
    "iconst_1": 0x04,
    "iconst_2": 0x05,
    "iconst_3": 0x06,
    "iconst_4": 0x07,
    "iconst_5": 0x08,
    "iaload": 0x2E,
    "aaload": 0x32,
    "baload": 0x33,
    "saload": 0x35,
    "iastore": 0x4F,
    "aastore": 0x53,
    "bastore": 0x54,
    "sastore": 0x56,
    "pop": 0x57,
    "pop2": 0x58,
    "dup": 0x59,
    "dup_x1": 0x5A,
    "dup_x2": 0x5B,
    "swap": 0x5F,
    "iadd": 0x60,
    "isub": 0x64,
    "imul": 0x68,
    "idiv": 0x6C,
    "irem": 0x70,
    "ineg": 0x74,
    "ishl": 0x78,
    "ishr": 0x7A,
    "iand": 0x7E,
    "ior": 0x80,
    "ixor": 0x82,
    "i2b": 0x91,
    "i2s": 0x93,
    "ireturn": 0xAC,
    "areturn": 0xB0,
    "return": 0xB1,
    "arraylength": 0xBE,
    "athrow": 0xBF,
    "monitorenter": 0xC2,
    "monitorexit": 0xC3,
}
_SHORT_LOCALS = {"iload": 0x1A, "aload": 0x2A, "istore": 0x3B, "astore": 0x4B}
_LOCALS = {"iload": 0x15, "aload": 0x19, "istore": 0x36, "astore": 0x3A}
_BRANCHES = {
    "ifeq": 0x99,
    "ifne": 0x9A,
    "iflt": 0x9B,
    "ifge": 0x9C,
    "ifgt": 0x9D,
    "ifle": 0x9E,
    "if_icmpeq": 0x9F,
    "if_icmpne": 0xA0,
    "if_icmplt": 0xA1,
    "if_icmpge": 0xA2,
    "if_icmpgt": 0xA3,
    "if_icmple": 0xA4,
    "if_acmpeq": 0xA5,
    "if_acmpne": 0xA6,
    "goto": 0xA7,
    "ifnull": 0xC6,
    "ifnonnull": 0xC7,
}
_MEMBER_REFS = {
    "getstatic": 0xB2,
    "putstatic": 0xB3,
    "getfield": 0xB4,
    "putfield": 0xB5,
    "invokevirtual": 0xB6,
    "invokespecial": 0xB7,
    "invokestatic": 0xB8,
}
_CLASS_REFS = {"new": 0xBB, "anewarray": 0xBD, "checkcast": 0xC0, "instanceof": 0xC1}
_NEWARRAY = {"boolean": 4, "byte": 8, "short": 9, "int": 10}


class ConstantPool:
    def __init__(self) -> None:
        self.entries: list[bytes] = []
        self._index: dict[tuple, int] = {}

    def _add(self, key: tuple, data: bytes) -> int:
        if key not in self._index:
            self.entries.append(data)
            self._index[key] = len(self.entries)
        return self._index[key]

    def utf8(self, text: str) -> int:
        raw = text.encode("utf-8")
        return self._add(("utf8", text), struct.pack(">BH", 1, len(raw)) + raw)

    def integer(self, value: int) -> int:
        return self._add(("int", value), struct.pack(">Bi", 3, value))

    def cls(self, name: str) -> int:
        ref = self.utf8(name)
        return self._add(("class", name), struct.pack(">BH", 7, ref))

    def name_and_type(self, name: str, desc: str) -> int:
        n, d = self.utf8(name), self.utf8(desc)
        return self._add(("nat", name, desc), struct.pack(">BHH", 12, n, d))

    def member(self, kind: str, owner: str, name: str, desc: str) -> int:
        tag = 9 if kind in ("getstatic", "putstatic", "getfield", "putfield") else 10
        c, nat = self.cls(owner), self.name_and_type(name, desc)
        return self._add((tag, owner, name, desc), struct.pack(">BHH", tag, c, nat))

    def encode(self) -> bytes:
        return struct.pack(">H", len(self.entries) + 1) + b"".join(self.entries)


def _size(op: tuple) -> int:
    name = op[0]
    if name in _SIMPLE:
        return 1
    if name in _SHORT_LOCALS:
        return 1 if op[1] <= 3 else 2
    if name in ("bipush", "ldc", "newarray"):
        return 2
    if name == "multianewarray":
        return 4
    return 3  # sipush, iinc, 分岐, メンバ参照, クラス参照


def assemble(code: Sequence[Op], pool: ConstantPool) -> tuple[bytes, dict[str, int]]:
    """命令列をバイト列にする（ラベル -> pc の表も返す）"""
    labels: dict[str, int] = {}
    pc = 0
    for op in code:
        if isinstance(op, str):
            labels[op.rstrip(":")] = pc
        else:
            pc += _size(op)
    out = bytearray()
    for op in code:
        if isinstance(op, str):
            continue
        here = len(out)
        name, args = op[0], op[1:]
        if name in _SIMPLE:
            out.append(_SIMPLE[name])
        elif name in _SHORT_LOCALS:
            if args[0] <= 3:
                out.append(_SHORT_LOCALS[name] + args[0])
            else:
                out += bytes([_LOCALS[name], args[0]])
        elif name == "bipush":
            out += struct.pack(">Bb", 0x10, args[0])
        elif name == "sipush":
            out += struct.pack(">Bh", 0x11, args[0])
        elif name == "ldc":
            out += struct.pack(">BB", 0x12, pool.integer(args[0]))
        elif name == "iinc":
            out += struct.pack(">BBb", 0x84, args[0], args[1])
        elif name in _BRANCHES:
            out += struct.pack(">Bh", _BRANCHES[name], labels[args[0]] - here)
        elif name in _MEMBER_REFS:
            out += struct.pack(">BH", _MEMBER_REFS[name], pool.member(name, *args))
        elif name in _CLASS_REFS:
            out += struct.pack(">BH", _CLASS_REFS[name], pool.cls(args[0]))
        elif name == "newarray":
            out += bytes([0xBC, _NEWARRAY[args[0]]])
        elif name == "multianewarray":
            out += struct.pack(">BHB", 0xC5, pool.cls(args[0]), args[1])
        else:
            raise ValueError(f"unknown mnemonic {name}")
        assert len(out) - here == _size(op), name
    return bytes(out), labels


@dataclass
class MethodSpec:
    name: str
    descriptor: str
    code: Optional[Sequence[Op]]
    max_stack: int = 4
    max_locals: int = 4
    access: int = ACC_PUBLIC
    # (開始ラベル, 終了ラベル, ハンドララベル, 捕捉クラスまたは None)
    handlers: Sequence[tuple[str, str, str, Optional[str]]] = ()


@dataclass
class FieldSpec:
    name: str
    descriptor: str
    access: int = ACC_PUBLIC
    constant: Optional[int] = None


@dataclass
class ClassSpec:
    name: str
    super_name: Optional[str] = "java/lang/Object"
    access: int = ACC_PUBLIC | ACC_SUPER
    fields: list[FieldSpec] = field(default_factory=list)
    methods: list[MethodSpec] = field(default_factory=list)
    major: int = 52


def _method_bytes(m: MethodSpec, pool: ConstantPool) -> bytes:
    head = struct.pack(">HHH", m.access, pool.utf8(m.name), pool.utf8(m.descriptor))
    if m.code is None:
        return head + struct.pack(">H", 0)
    code, labels = assemble(m.code, pool)
    table = b"".join(
        struct.pack(
            ">HHHH",
            labels[start],
            labels[end],
            labels[target],
            pool.cls(catch) if catch else 0,
        )
        for start, end, target, catch in m.handlers
    )
    body = (
        struct.pack(">HHI", m.max_stack, m.max_locals, len(code))
        + code
        + struct.pack(">H", len(m.handlers))
        + table
        + struct.pack(">H", 0)
    )
    attr = struct.pack(">HI", pool.utf8("Code"), len(body)) + body
    return head + struct.pack(">H", 1) + attr


def _field_bytes(f: FieldSpec, pool: ConstantPool) -> bytes:
    head = struct.pack(">HHH", f.access, pool.utf8(f.name), pool.utf8(f.descriptor))
    if f.constant is None:
        return head + struct.pack(">H", 0)
    attr = struct.pack(">HIH", pool.utf8("ConstantValue"), 2, pool.integer(f.constant))
    return head + struct.pack(">H", 1) + attr


def build_class(spec: ClassSpec) -> bytes:
    """ClassSpec から .class のバイト列を作る"""
    pool = ConstantPool()
    this = pool.cls(spec.name)
    sup = pool.cls(spec.super_name) if spec.super_name else 0
    fields = b"".join(_field_bytes(f, pool) for f in spec.fields)
    methods = b"".join(_method_bytes(m, pool) for m in spec.methods)
    return (
        struct.pack(">IHH", 0xCAFEBABE, 0, spec.major)
        + pool.encode()
        + struct.pack(">HHHH", spec.access, this, sup, 0)
        + struct.pack(">H", len(spec.fields))
        + fields
        + struct.pack(">H", len(spec.methods))
        + methods
        + struct.pack(">H", 0)
    )
