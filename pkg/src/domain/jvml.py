"""JVML_r の宣言 - クラス・フィールド・メソッド・命令

命令と型は論理項としてそのまま保持する。解決後の宣言は定数プール
インデックスを一切含まない。
"""

from __future__ import annotations

from typing import Iterator, Optional

from pydantic import BaseModel, ConfigDict, Field

from src.shared.errors import IncoherentCode

from .logic.terms import NIL, Atom, Compound, Int, Term, list_items, make_list, mk

# 構成子名 -> アリティ（54 個）
INSTRUCTION_ARITY: dict[str, int] = {
    "aaload": 0,
    "aastore": 0,
    "aconst_null": 0,
    "aload": 1,
    "areturn": 0,
    "arraylength": 0,
    "anewarray": 1,
    "astore": 1,
    "athrow": 0,
    "baload": 0,
    "bastore": 0,
    "checkcast": 1,
    "const": 2,
    "dup": 0,
    "dup_x1": 0,
    "dup_x2": 0,
    "getfield": 1,
    "getstatic": 1,
    "goto": 1,
    "i2b": 0,
    "i2s": 0,
    "ibinop": 1,
    "iaload": 0,
    "iastore": 0,
    "if_acmpeq": 1,
    "if_acmpne": 1,
    "if_icmp": 2,
    "if0": 2,
    "ifnonnull": 1,
    "ifnull": 1,
    "iinc": 2,
    "iload": 1,
    "ineg": 0,
    "instanceof": 1,
    "invokeinterface": 1,
    "invokespecial": 1,
    "invokestatic": 1,
    "invokevirtual": 1,
    "ireturn": 0,
    "istore": 1,
    "monitorenter": 0,
    "monitorexit": 0,
    "multianewarray": 1,
    "new": 1,
    "newarray": 1,
    "nop": 0,
    "pop": 0,
    "pop2": 0,
    "putfield": 1,
    "putstatic": 1,
    "return": 0,
    "saload": 0,
    "sastore": 0,
    "swap": 0,
}

# 表現はできるがインタプリタが扱わない命令
REJECTED_INSTRUCTIONS = frozenset({"invokeinterface", "monitorenter", "monitorexit"})

BINOPS = (
    "addInt",
    "andInt",
    "divInt",
    "mulInt",
    "orInt",
    "remInt",
    "shlInt",
    "shrInt",
    "subInt",
    "xorInt",
)
COMPARISONS = ("eqInt", "neInt", "ltInt", "leInt", "geInt", "gtInt")
PRIM_TYPES = ("boolean", "byte", "short", "int")
VISIBILITIES = ("package", "protected", "private", "public")

OBJECT_CLASS = "java/lang/Object"

BRANCH_INSTRUCTIONS = frozenset(
    {"goto", "if_acmpeq", "if_acmpne", "if_icmp", "if0", "ifnonnull", "ifnull"}
)


def instruction(name: str, *args: Term) -> Term:
    """命令項を作る（構成子とアリティを検査）"""
    arity = INSTRUCTION_ARITY.get(name)
    if arity is None or arity != len(args):
        raise ValueError(f"not a JVML_r instruction: {name}/{len(args)}")
    return mk(name, *args)


def instruction_name(inst: Term) -> str:
    if isinstance(inst, Compound):
        return inst.name
    if isinstance(inst, Atom):
        return inst.name
    raise ValueError(f"not an instruction: {inst!r}")


def is_instruction(term: Term) -> bool:
    if isinstance(term, Atom):
        return INSTRUCTION_ARITY.get(term.name) == 0
    if isinstance(term, Compound):
        return INSTRUCTION_ARITY.get(term.name) == len(term.args)
    return False


def branch_offset(inst: Term) -> int | None:
    """分岐命令のオフセット（分岐でなければ None）"""
    if not isinstance(inst, Compound) or inst.name not in BRANCH_INSTRUCTIONS:
        return None
    off = inst.args[-1]
    assert isinstance(off, Int)
    return off.value


# --- 名前と型 ------------------------------------------------------------------


def split_class_name(qualified: str) -> tuple[str, str]:
    """'java/lang/Object' -> ('java/lang/', 'Object')"""
    cut = qualified.rfind("/") + 1
    return qualified[:cut], qualified[cut:]


def class_name_term(qualified: str, functor: str = "className") -> Term:
    package, short = split_class_name(qualified)
    return mk(functor, mk("packageName", Atom(package)), mk("shortClassName", Atom(short)))


def class_name_of(term: Term) -> str:
    """className(packageName(P),shortClassName(S)) -> 'P/S'"""
    if not (
        isinstance(term, Compound)
        and term.name in ("className", "interfaceName")
        and len(term.args) == 2
    ):
        raise ValueError(f"not a class name term: {term!r}")
    package, short = (_unwrap_atom(a) for a in term.args)
    return package + short


def _unwrap_atom(term: Term) -> str:
    if isinstance(term, Compound) and len(term.args) == 1 and isinstance(term.args[0], Atom):
        return term.args[0].name
    raise ValueError(f"expected name wrapper, found {term!r}")


def prim_type(name: str) -> Term:
    if name not in PRIM_TYPES:
        raise ValueError(f"unknown primitive type {name!r}")
    return mk("primitiveType", Atom(name))


INT_TYPE = mk("primitiveType", Atom("int"))


def class_type(qualified: str) -> Term:
    return mk("refType", mk("classType", class_name_term(qualified)))


def array_type(element: Term) -> Term:
    return mk("refType", mk("arrayType", element))


def is_reference_type(jtype: Term) -> bool:
    return isinstance(jtype, Compound) and jtype.name == "refType"


def array_depth(jtype: Term) -> int:
    depth = 0
    while (
        isinstance(jtype, Compound)
        and jtype.name == "refType"
        and isinstance(jtype.args[0], Compound)
        and jtype.args[0].name == "arrayType"
    ):
        depth += 1
        jtype = jtype.args[0].args[0]
    return depth


def type_class_name(jtype: Term) -> str | None:
    """refType(classType(CN)) のクラス名"""
    if (
        isinstance(jtype, Compound)
        and jtype.name == "refType"
        and isinstance(jtype.args[0], Compound)
        and jtype.args[0].name in ("classType", "interfaceType")
    ):
        return class_name_of(jtype.args[0].args[0])
    return None


# --- 宣言 --------------------------------------------------------------------


class BaseDecl(BaseModel):
    """不変の宣言モデル"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class FieldDecl(BaseDecl):
    owner: str
    name: str
    type: Term
    final: bool = False
    static: bool = False
    visibility: str = Field(default="package", pattern="^(package|protected|private|public)$")
    initial_value: Term = Atom("undef")

    @property
    def signature(self) -> Term:
        return field_signature(self.owner, self.name, self.type)

    def to_term(self) -> Term:
        return mk(
            "field",
            self.signature,
            mk("final", _bool(self.final)),
            mk("static", _bool(self.static)),
            Atom(self.visibility),
            mk("initialValue", self.initial_value),
        )


class Handler(BaseDecl):
    class_name: Optional[str] = None
    start_pc: int = Field(ge=0)
    end_pc: int = Field(ge=0)
    handler_pc: int = Field(ge=0)

    def to_term(self) -> Term:
        cn = class_name_term(self.class_name) if self.class_name else Atom("none")
        return mk(
            "exceptionHandler",
            cn,
            Int(self.start_pc),
            Int(self.end_pc),
            Int(self.handler_pc),
        )


class InstructionFact(BaseDecl):
    pc: int = Field(ge=0)
    instruction: Term
    size: int = Field(gt=0)


class BytecodeBody(BaseDecl):
    max_stack: int = Field(ge=0)
    max_locals: int = Field(ge=0)
    first_pc: int = 0
    module: str
    index: int = Field(ge=1)
    handlers: tuple[Handler, ...] = ()
    instructions: tuple[InstructionFact, ...] = ()

    @property
    def method_id(self) -> tuple[str, int]:
        return self.module, self.index

    def method_id_term(self) -> Term:
        return mk("methodId", Atom(self.module), Int(self.index))

    def to_term(self) -> Term:
        return mk(
            "bytecodeMethod",
            Int(self.max_stack),
            Int(self.max_locals),
            Int(self.first_pc),
            self.method_id_term(),
            make_list(h.to_term() for h in self.handlers),
        )

    def check_coherence(self) -> list[str]:
        """pc の連続性と分岐先の存在を検査し、違反を列挙する"""
        problems: list[str] = []
        pcs = {f.pc for f in self.instructions}
        expected = self.first_pc
        for fact in self.instructions:
            if fact.pc != expected:
                problems.append(f"pc {fact.pc} does not follow previous instruction")
            expected = fact.pc + fact.size
            off = branch_offset(fact.instruction)
            if off is not None and fact.pc + off not in pcs:
                problems.append(f"branch at pc {fact.pc} targets {fact.pc + off}")
        return problems

    def ensure_coherent(self) -> None:
        problems = self.check_coherence()
        if problems:
            raise IncoherentCode(f"{self.module}#{self.index}", problems)


class MethodDecl(BaseDecl):
    owner: str
    name: str
    params: tuple[Term, ...] = ()
    returns: Optional[Term] = None
    body: Optional[BytecodeBody] = None
    final: bool = False
    static: bool = False
    visibility: str = Field(default="package", pattern="^(package|protected|private|public)$")

    @property
    def signature(self) -> Term:
        return method_signature(self.owner, self.name, self.params, self.returns)

    @property
    def qualified_name(self) -> str:
        return f"{self.owner}.{self.name}"

    @property
    def arg_count(self) -> int:
        return len(self.params) + (0 if self.static else 1)

    def to_term(self) -> Term:
        return mk(
            "method",
            self.signature,
            self.body.to_term() if self.body is not None else Atom("none"),
            mk("final", _bool(self.final)),
            mk("static", _bool(self.static)),
            Atom(self.visibility),
        )


class ClassDecl(BaseDecl):
    name: str
    super_name: Optional[str] = None
    interfaces: tuple[str, ...] = ()
    is_interface: bool = False
    final: bool = False
    public: bool = False
    abstract: bool = False
    fields: tuple[FieldDecl, ...] = ()
    methods: tuple[MethodDecl, ...] = ()

    def to_term(self) -> Term:
        interfaces = make_list(class_name_term(i, "interfaceName") for i in self.interfaces)
        fields = make_list(f.to_term() for f in self.fields)
        methods = make_list(m.to_term() for m in self.methods)
        if self.is_interface:
            return mk(
                "interface",
                class_name_term(self.name, "interfaceName"),
                interfaces,
                fields,
                methods,
                mk("final", _bool(self.final)),
                mk("public", _bool(self.public)),
                mk("abstract", _bool(self.abstract)),
            )
        return mk(
            "class",
            class_name_term(self.name),
            mk("final", _bool(self.final)),
            mk("public", _bool(self.public)),
            mk("abstract", _bool(self.abstract)),
            class_name_term(self.super_name) if self.super_name else Atom("none"),
            interfaces,
            fields,
            methods,
        )

    def bodies(self) -> Iterator[BytecodeBody]:
        for m in self.methods:
            if m.body is not None:
                yield m.body


def field_signature(owner: str, name: str, jtype: Term) -> Term:
    return mk(
        "fieldSignature",
        mk("fieldName", class_name_term(owner), mk("shortFieldName", Atom(name))),
        jtype,
    )


def method_signature(
    owner: str, name: str, params: tuple[Term, ...] | list[Term], returns: Term | None
) -> Term:
    return mk(
        "methodSignature",
        mk("methodName", class_name_term(owner), mk("shortMethodName", Atom(name))),
        make_list(params),
        returns if returns is not None else Atom("none"),
    )


def parse_field_signature(sig: Term) -> tuple[str, str, Term]:
    """fieldSignature 項を (所有クラス, 名前, 型) に分解"""
    if not (isinstance(sig, Compound) and sig.name == "fieldSignature"):
        raise ValueError(f"not a field signature: {sig!r}")
    fname, jtype = sig.args
    assert isinstance(fname, Compound)
    return class_name_of(fname.args[0]), _unwrap_atom(fname.args[1]), jtype


def parse_method_signature(sig: Term) -> tuple[str, str, tuple[Term, ...], Term | None]:
    if not (isinstance(sig, Compound) and sig.name == "methodSignature"):
        raise ValueError(f"not a method signature: {sig!r}")
    mname, params, ret = sig.args
    assert isinstance(mname, Compound)
    items, tail = list_items(params)
    if tail != NIL:
        raise ValueError(f"parameter list is not proper: {params!r}")
    returns = None if ret == Atom("none") else ret
    return class_name_of(mname.args[0]), _unwrap_atom(mname.args[1]), tuple(items), returns


def _bool(flag: bool) -> Atom:
    return Atom("true" if flag else "false")
