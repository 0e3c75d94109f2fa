"""ネイティブ参照インタプリタ - 明示的な呼び出しスタックを持つスモールステップ意味論

各ステップは状態を更新し、発火した規則のステップ名を返す。
"""

from __future__ import annotations

from typing import Callable, Optional, Union

from loguru import logger

from src.shared.errors import (
    ArgumentKindMismatch,
    ArityMismatch,
    BudgetExhausted,
    Stuck,
    UncaughtException,
)

from ..jvml import (
    Handler,
    array_depth,
    class_name_of,
    field_signature,
    instruction_name,
    is_reference_type,
    parse_field_signature,
    parse_method_signature,
    prim_type,
)
from ..logic.builtins import trunc_div, trunc_rem
from ..logic.terms import Atom, Compound, Int, Term
from ..program import RUNTIME_EXCEPTIONS, MethodId, Program
from . import steps
from .state import (
    MIS,
    UNDEF,
    Arr,
    Frame,
    Heap,
    Obj,
    Ref,
    State,
    Value,
    default_value,
    heap_to_term,
    initial_heap,
    term_to_heap,
    term_to_value,
    value_to_term,
)

_MASK = 0xFFFFFFFF


def wrap32(n: int) -> int:
    return ((n + 0x80000000) & _MASK) - 0x80000000


def truncate(elem_type: Term, n: int) -> int:
    if isinstance(elem_type, Compound):
        kind = elem_type.args[0].name  # type: ignore[union-attr]
    else:
        kind = "int"
    if kind == "boolean":
        return n & 1
    if kind == "byte":
        return ((n + 0x80) & 0xFF) - 0x80
    if kind == "short":
        return ((n + 0x8000) & 0xFFFF) - 0x8000
    return n


_COMPARE: dict[str, Callable[[int, int], bool]] = {
    "eqInt": lambda a, b: a == b,
    "neInt": lambda a, b: a != b,
    "ltInt": lambda a, b: a < b,
    "leInt": lambda a, b: a <= b,
    "geInt": lambda a, b: a >= b,
    "gtInt": lambda a, b: a > b,
}


class _Throw(Exception):
    """ステップ内部で例外クラス名を運ぶ"""

    def __init__(self, class_name: str) -> None:
        self.class_name = class_name


class Run:
    """interpret の結果 - 戻り値（void なら none）・最終ヒープ・トレース"""

    __slots__ = ("result", "heap", "trace", "state")

    def __init__(self, result: Term, heap: Term, trace: list[str], state: State) -> None:
        self.result = result
        self.heap = heap
        self.trace = trace
        self.state = state

    def __repr__(self) -> str:
        return f"Run(result={self.result!r}, steps={len(self.trace)})"


class Machine:
    """プログラムごとの静的情報（フィールド配置・静的領域・分岐先）"""

    def __init__(self, program: Program) -> None:
        self.program = program
        self._field_slots: dict[Term, int] = {}
        for cname in program.classes:
            for i, decl in enumerate(program.instance_fields(cname)):
                self._field_slots.setdefault(decl.signature, i)
                owner_sig = _reowned(decl.signature, cname)
                self._field_slots.setdefault(owner_sig, i)
        self._static_slots = {d.signature: i for i, d in enumerate(program.static_fields())}

    # --- 起動 ---------------------------------------------------------------------

    def initial_state(self, mis: MIS) -> State:
        method = self.program.method(mis.method)
        assert method.body is not None
        if len(mis.args) != method.arg_count:
            raise ArityMismatch(mis.method, method.arg_count, len(mis.args))
        kinds = ([] if method.static else [None]) + list(method.params)
        args: list[Value] = []
        for i, (kind, arg) in enumerate(zip(kinds, mis.args)):
            value = term_to_value(arg)
            wants_ref = kind is None or is_reference_type(kind)
            if wants_ref != (value is None or isinstance(value, Ref)):
                reason = "must be a reference" if wants_ref else "must be an int"
                raise ArgumentKindMismatch(mis.method, str(i + 1), reason)
            args.append(value)
        heap = term_to_heap(mis.heap) if mis.heap is not None else initial_heap(self.program)
        return State(heap=heap, frame=self._frame(mis.method, args))

    def _frame(self, method_id: MethodId, args: list[Value]) -> Frame:
        body = self.program.method(method_id).body
        assert body is not None
        pad = max(body.max_locals - len(args), 0)
        return Frame(method_id, body.first_pc, [], args + [UNDEF] * pad)

    # --- 1 ステップ -----------------------------------------------------------

    def step(self, state: State) -> str:
        if state.done:
            raise Stuck("step on a final state")
        frame = state.frame
        fact = self.program.fact_at(frame.method, frame.pc)
        inst = fact.instruction
        name = instruction_name(inst)
        handler = getattr(self, f"_op_{name}", None)
        if handler is None:
            raise Stuck(f"unsupported instruction {name}")
        try:
            step_name = handler(state, inst, fact.pc + fact.size)
        except _Throw as thrown:
            step_name = self._failure_name(inst, thrown.class_name)
            ref = state.heap.alloc(self._template(thrown.class_name))
            self._throw(state, ref)
        if not state.done and len(state.frame.stack) > self.program.max_stack(state.frame.method):
            raise Stuck(f"operand stack overflow at {state.frame.method}:{state.frame.pc}")
        return step_name

    @staticmethod
    def _failure_name(inst: Term, class_name: str) -> str:
        short = class_name.rpartition("/")[2]
        return steps.failed(instruction_name(inst), short)

    # --- 値の取り出し -------------------------------------------------------

    @staticmethod
    def _pop(frame: Frame) -> Value:
        if not frame.stack:
            raise Stuck(f"operand stack underflow at {frame.method}:{frame.pc}")
        return frame.stack.pop()

    @staticmethod
    def _peek(frame: Frame, depth: int = 1) -> Value:
        if len(frame.stack) < depth:
            raise Stuck(f"operand stack underflow at {frame.method}:{frame.pc}")
        return frame.stack[-depth]

    @staticmethod
    def _int(frame: Frame) -> int:
        value = Machine._pop(frame)
        if isinstance(value, bool) or not isinstance(value, int):
            raise Stuck(f"expected int on stack, found {value!r}")
        return value

    @staticmethod
    def _ref(frame: Frame) -> Optional[Ref]:
        value = Machine._pop(frame)
        if value is not None and not isinstance(value, Ref):
            raise Stuck(f"expected reference on stack, found {value!r}")
        return value

    @staticmethod
    def _local(frame: Frame, index: int) -> Value:
        if not 0 <= index < len(frame.locals):
            raise Stuck(f"no local {index} in {frame.method}")
        value = frame.locals[index]
        if value is UNDEF:
            raise Stuck(f"read of uninitialised local {index}")
        return value

    @staticmethod
    def _set_local(frame: Frame, index: int, value: Value) -> None:
        if not 0 <= index < len(frame.locals):
            raise Stuck(f"no local {index} in {frame.method}")
        frame.locals[index] = value

    def _template(self, class_name: str) -> Obj:
        fields = [default_value(d.type) for d in self.program.instance_fields(class_name)]
        return Obj(class_name, fields)

    def _object(self, heap: Heap, ref: Ref) -> Obj:
        cell = heap.get(ref)
        if not isinstance(cell, Obj):
            raise Stuck(f"{ref} is not an object")
        return cell

    def _array(self, heap: Heap, ref: Ref) -> Arr:
        cell = heap.get(ref)
        if not isinstance(cell, Arr):
            raise Stuck(f"{ref} is not an array")
        return cell

    @staticmethod
    def _arg(inst: Term, i: int = 0) -> Term:
        assert isinstance(inst, Compound)
        return inst.args[i]

    @staticmethod
    def _num(term: Term) -> int:
        assert isinstance(term, Int)
        return term.value

    # --- 定数・局所変数 -----------------------------------------------------

    def _op_nop(self, s: State, inst: Term, nxt: int) -> str:
        s.frame.pc = nxt
        return steps.ok("nop")

    def _op_aconst_null(self, s: State, inst: Term, nxt: int) -> str:
        s.frame.stack.append(None)
        s.frame.pc = nxt
        return steps.ok("aconst_null")

    def _op_const(self, s: State, inst: Term, nxt: int) -> str:
        s.frame.stack.append(self._num(self._arg(inst, 1)))
        s.frame.pc = nxt
        return steps.ok("const")

    def _op_iload(self, s: State, inst: Term, nxt: int) -> str:
        value = self._local(s.frame, self._num(self._arg(inst)))
        if not isinstance(value, int):
            raise Stuck(f"iload of non-int {value!r}")
        s.frame.stack.append(value)
        s.frame.pc = nxt
        return "iload_step"

    def _op_aload(self, s: State, inst: Term, nxt: int) -> str:
        value = self._local(s.frame, self._num(self._arg(inst)))
        if value is not None and not isinstance(value, Ref):
            raise Stuck(f"aload of non-reference {value!r}")
        s.frame.stack.append(value)
        s.frame.pc = nxt
        return steps.ok("aload")

    def _op_istore(self, s: State, inst: Term, nxt: int) -> str:
        self._set_local(s.frame, self._num(self._arg(inst)), self._int(s.frame))
        s.frame.pc = nxt
        return steps.ok("istore")

    def _op_astore(self, s: State, inst: Term, nxt: int) -> str:
        self._set_local(s.frame, self._num(self._arg(inst)), self._ref(s.frame))
        s.frame.pc = nxt
        return steps.ok("astore")

    def _op_iinc(self, s: State, inst: Term, nxt: int) -> str:
        index = self._num(self._arg(inst, 0))
        value = self._local(s.frame, index)
        if not isinstance(value, int):
            raise Stuck(f"iinc of non-int {value!r}")
        s.frame.locals[index] = wrap32(value + self._num(self._arg(inst, 1)))
        s.frame.pc = nxt
        return "iinc_step"

    # --- 分岐 ---------------------------------------------------------------------

    def _branch(self, s: State, taken: bool, family: str, offset: int, nxt: int) -> str:
        if taken:
            s.frame.pc += offset
            return steps.jump(family)
        s.frame.pc = nxt
        return steps.fallthrough(family)

    def _op_goto(self, s: State, inst: Term, nxt: int) -> str:
        s.frame.pc += self._num(self._arg(inst))
        return steps.ok("goto")

    def _op_if0(self, s: State, inst: Term, nxt: int) -> str:
        cmp = self._arg(inst, 0)
        assert isinstance(cmp, Atom)
        value = self._int(s.frame)
        target = self._num(self._arg(inst, 1))
        return self._branch(s, _COMPARE[cmp.name](value, 0), "if0", target, nxt)

    def _op_if_icmp(self, s: State, inst: Term, nxt: int) -> str:
        cmp = self._arg(inst, 0)
        assert isinstance(cmp, Atom)
        b = self._int(s.frame)
        a = self._int(s.frame)
        target = self._num(self._arg(inst, 1))
        return self._branch(s, _COMPARE[cmp.name](a, b), "if_icmp", target, nxt)

    def _op_ifnull(self, s: State, inst: Term, nxt: int) -> str:
        target = self._num(self._arg(inst))
        return self._branch(s, self._ref(s.frame) is None, "ifnull", target, nxt)

    def _op_ifnonnull(self, s: State, inst: Term, nxt: int) -> str:
        taken = self._ref(s.frame) is not None
        return self._branch(s, taken, "ifnonnull", self._num(self._arg(inst)), nxt)

    def _op_if_acmpeq(self, s: State, inst: Term, nxt: int) -> str:
        b, a = self._ref(s.frame), self._ref(s.frame)
        return self._branch(s, a == b, "if_acmpeq", self._num(self._arg(inst)), nxt)

    def _op_if_acmpne(self, s: State, inst: Term, nxt: int) -> str:
        b, a = self._ref(s.frame), self._ref(s.frame)
        return self._branch(s, a != b, "if_acmpne", self._num(self._arg(inst)), nxt)

    # --- 算術 ---------------------------------------------------------------------

    def _op_ibinop(self, s: State, inst: Term, nxt: int) -> str:
        op = self._arg(inst)
        assert isinstance(op, Atom)
        b = self._int(s.frame)
        a = self._int(s.frame)
        if op.name in ("divInt", "remInt") and b == 0:
            raise _Throw(RUNTIME_EXCEPTIONS[steps.ARITH])
        match op.name:
            case "addInt":
                r = wrap32(a + b)
            case "subInt":
                r = wrap32(a - b)
            case "mulInt":
                r = wrap32(a * b)
            case "divInt":
                r = wrap32(trunc_div(a, b))
            case "remInt":
                r = trunc_rem(a, b)
            case "andInt":
                r = a & b
            case "orInt":
                r = a | b
            case "xorInt":
                r = a ^ b
            case "shlInt":
                r = wrap32(a << (b & 31))
            case "shrInt":
                r = a >> (b & 31)
            case _:
                raise Stuck(f"unknown binary operator {op.name}")
        s.frame.stack.append(r)
        s.frame.pc = nxt
        return steps.ok("ibinop")

    def _op_ineg(self, s: State, inst: Term, nxt: int) -> str:
        s.frame.stack.append(wrap32(-self._int(s.frame)))
        s.frame.pc = nxt
        return steps.ok("ineg")

    def _op_i2b(self, s: State, inst: Term, nxt: int) -> str:
        s.frame.stack.append(truncate(prim_type("byte"), self._int(s.frame)))
        s.frame.pc = nxt
        return steps.ok("i2b")

    def _op_i2s(self, s: State, inst: Term, nxt: int) -> str:
        s.frame.stack.append(truncate(prim_type("short"), self._int(s.frame)))
        s.frame.pc = nxt
        return steps.ok("i2s")

    # --- フィールド・オブジェクト -------------------------------------------

    def _field_slot(self, sig: Term) -> int:
        try:
            return self._field_slots[sig]
        except KeyError:
            raise Stuck(f"unknown field {sig!r}") from None

    def _static_slot(self, sig: Term) -> int:
        try:
            return self._static_slots[sig]
        except KeyError:
            raise Stuck(f"unknown static field {sig!r}") from None

    def _op_getfield(self, s: State, inst: Term, nxt: int) -> str:
        ref = self._ref(s.frame)
        if ref is None:
            raise _Throw(RUNTIME_EXCEPTIONS[steps.NPE])
        obj = self._object(s.heap, ref)
        s.frame.stack.append(obj.fields[self._field_slot(self._arg(inst))])
        s.frame.pc = nxt
        return steps.ok("getfield")

    def _op_putfield(self, s: State, inst: Term, nxt: int) -> str:
        value = self._pop(s.frame)
        ref = self._ref(s.frame)
        if ref is None:
            raise _Throw(RUNTIME_EXCEPTIONS[steps.NPE])
        obj = self._object(s.heap, ref)
        obj.fields[self._field_slot(self._arg(inst))] = value
        s.frame.pc = nxt
        return steps.ok("putfield")

    def _op_getstatic(self, s: State, inst: Term, nxt: int) -> str:
        s.frame.stack.append(s.heap.statics[self._static_slot(self._arg(inst))])
        s.frame.pc = nxt
        return steps.ok("getstatic")

    def _op_putstatic(self, s: State, inst: Term, nxt: int) -> str:
        s.heap.statics[self._static_slot(self._arg(inst))] = self._pop(s.frame)
        s.frame.pc = nxt
        return steps.ok("putstatic")

    def _op_new(self, s: State, inst: Term, nxt: int) -> str:
        ref = s.heap.alloc(self._template(class_name_of(self._arg(inst))))
        s.frame.stack.append(ref)
        s.frame.pc = nxt
        return steps.ok("new")

    def _runtime_key(self, heap: Heap, ref: Ref) -> Union[str, Term]:
        cell = heap.get(ref)
        if isinstance(cell, Obj):
            return cell.class_name
        return Compound("refType", (Compound("arrayType", (cell.elem_type,)),))

    def _op_checkcast(self, s: State, inst: Term, nxt: int) -> str:
        top = self._peek(s.frame)
        if isinstance(top, Ref) and not self.program.assignable(
            self._runtime_key(s.heap, top), self._arg(inst)
        ):
            raise _Throw(RUNTIME_EXCEPTIONS[steps.CCE])
        s.frame.pc = nxt
        return steps.ok("checkcast")

    def _op_instanceof(self, s: State, inst: Term, nxt: int) -> str:
        ref = self._ref(s.frame)
        hit = ref is not None and self.program.assignable(
            self._runtime_key(s.heap, ref), self._arg(inst)
        )
        s.frame.stack.append(1 if hit else 0)
        s.frame.pc = nxt
        return steps.ok("instanceof")

    # --- 配列 ---------------------------------------------------------------------

    def _new_array(self, heap: Heap, elem_type: Term, length: int) -> Ref:
        return heap.alloc(Arr(elem_type, [default_value(elem_type)] * length))

    def _op_newarray(self, s: State, inst: Term, nxt: int) -> str:
        n = self._int(s.frame)
        if n < 0:
            raise _Throw(RUNTIME_EXCEPTIONS[steps.NASE])
        s.frame.stack.append(self._new_array(s.heap, self._arg(inst), n))
        s.frame.pc = nxt
        return steps.ok(instruction_name(inst))

    _op_anewarray = _op_newarray

    def _new_multi(self, heap: Heap, jtype: Term, counts: list[int]) -> Ref:
        elem = jtype.args[0].args[0]  # type: ignore[union-attr]
        if len(counts) == 1:
            return self._new_array(heap, elem, counts[0])
        inner = [self._new_multi(heap, elem, counts[1:]) for _ in range(counts[0])]
        return heap.alloc(Arr(elem, list(inner)))

    def _op_multianewarray(self, s: State, inst: Term, nxt: int) -> str:
        jtype = self._arg(inst)
        counts = [self._int(s.frame) for _ in range(array_depth(jtype))]
        counts.reverse()
        if any(n < 0 for n in counts):
            raise _Throw(RUNTIME_EXCEPTIONS[steps.NASE])
        s.frame.stack.append(self._new_multi(s.heap, jtype, counts))
        s.frame.pc = nxt
        return steps.ok("multianewarray")

    def _op_arraylength(self, s: State, inst: Term, nxt: int) -> str:
        ref = self._ref(s.frame)
        if ref is None:
            raise _Throw(RUNTIME_EXCEPTIONS[steps.NPE])
        s.frame.stack.append(len(self._array(s.heap, ref).cells))
        s.frame.pc = nxt
        return steps.ok("arraylength")

    def _array_load(self, s: State, inst: Term, nxt: int) -> str:
        index = self._int(s.frame)
        ref = self._ref(s.frame)
        if ref is None:
            raise _Throw(RUNTIME_EXCEPTIONS[steps.NPE])
        arr = self._array(s.heap, ref)
        if not 0 <= index < len(arr.cells):
            raise _Throw(RUNTIME_EXCEPTIONS[steps.AIOOBE])
        s.frame.stack.append(arr.cells[index])
        s.frame.pc = nxt
        return steps.ok(instruction_name(inst))

    _op_iaload = _op_baload = _op_saload = _op_aaload = _array_load

    def _array_store(self, s: State, inst: Term, nxt: int) -> str:
        value = self._pop(s.frame)
        index = self._int(s.frame)
        ref = self._ref(s.frame)
        if ref is None:
            raise _Throw(RUNTIME_EXCEPTIONS[steps.NPE])
        arr = self._array(s.heap, ref)
        if not 0 <= index < len(arr.cells):
            raise _Throw(RUNTIME_EXCEPTIONS[steps.AIOOBE])
        if is_reference_type(arr.elem_type):
            if value is not None and not isinstance(value, Ref):
                raise Stuck(f"storing {value!r} into a reference array")
        else:
            if not isinstance(value, int):
                raise Stuck(f"storing {value!r} into a primitive array")
            value = truncate(arr.elem_type, value)
        arr.cells[index] = value
        s.frame.pc = nxt
        return steps.ok(instruction_name(inst))

    _op_iastore = _op_bastore = _op_sastore = _op_aastore = _array_store

    # --- スタック操作 -------------------------------------------------------

    def _op_dup(self, s: State, inst: Term, nxt: int) -> str:
        s.frame.stack.append(self._peek(s.frame))
        s.frame.pc = nxt
        return steps.ok("dup")

    def _op_dup_x1(self, s: State, inst: Term, nxt: int) -> str:
        v1, v2 = self._pop(s.frame), self._pop(s.frame)
        s.frame.stack.extend((v1, v2, v1))
        s.frame.pc = nxt
        return steps.ok("dup_x1")

    def _op_dup_x2(self, s: State, inst: Term, nxt: int) -> str:
        v1, v2, v3 = self._pop(s.frame), self._pop(s.frame), self._pop(s.frame)
        s.frame.stack.extend((v1, v3, v2, v1))
        s.frame.pc = nxt
        return steps.ok("dup_x2")

    def _op_pop(self, s: State, inst: Term, nxt: int) -> str:
        self._pop(s.frame)
        s.frame.pc = nxt
        return steps.ok("pop")

    def _op_pop2(self, s: State, inst: Term, nxt: int) -> str:
        self._pop(s.frame)
        self._pop(s.frame)
        s.frame.pc = nxt
        return steps.ok("pop2")

    def _op_swap(self, s: State, inst: Term, nxt: int) -> str:
        v1, v2 = self._pop(s.frame), self._pop(s.frame)
        s.frame.stack.extend((v1, v2))
        s.frame.pc = nxt
        return steps.ok("swap")

    # --- 呼び出しと復帰 -----------------------------------------------------

    def _invoke(self, s: State, target: MethodId, count: int) -> None:
        caller = s.frame
        if count > len(caller.stack):
            raise Stuck(f"operand stack underflow at {caller.method}:{caller.pc}")
        args = caller.stack[len(caller.stack) - count :] if count else []
        del caller.stack[len(caller.stack) - count :]
        s.call_stack.append(caller)
        s.frame = self._frame(target, list(args))

    def _resolve(self, owner: str, sig: Term) -> MethodId:
        _, name, params, _ = parse_method_signature(sig)
        method = self.program.resolve_method(owner, name, params)
        if method is None or method.body is None:
            raise Stuck(f"no method {name} from {owner}")
        return method.body.method_id

    def _op_invokestatic(self, s: State, inst: Term, nxt: int) -> str:
        sig = self._arg(inst)
        owner, _, params, _ = parse_method_signature(sig)
        self._invoke(s, self._resolve(owner, sig), len(params))
        return steps.ok("invokestatic")

    def _receiver(self, s: State, params: tuple[Term, ...]) -> Value:
        return self._peek(s.frame, len(params) + 1)

    def _op_invokespecial(self, s: State, inst: Term, nxt: int) -> str:
        sig = self._arg(inst)
        owner, _, params, _ = parse_method_signature(sig)
        if self._receiver(s, params) is None:
            raise _Throw(RUNTIME_EXCEPTIONS[steps.NPE])
        self._invoke(s, self._resolve(owner, sig), len(params) + 1)
        return "invokespecial_step_here_ok"

    def _op_invokevirtual(self, s: State, inst: Term, nxt: int) -> str:
        sig = self._arg(inst)
        _, _, params, _ = parse_method_signature(sig)
        receiver = self._receiver(s, params)
        if receiver is None:
            raise _Throw(RUNTIME_EXCEPTIONS[steps.NPE])
        if not isinstance(receiver, Ref):
            raise Stuck(f"invokevirtual on non-reference {receiver!r}")
        key = self._runtime_key(s.heap, receiver)
        if not isinstance(key, str):
            raise Stuck("invokevirtual on an array")
        self._invoke(s, self._resolve(key, sig), len(params) + 1)
        return steps.ok("invokevirtual")

    def _finish(self, s: State, kind: str, value: Value = None) -> None:
        if not s.call_stack:
            s.final = kind  # type: ignore[assignment]
            s.result = value
            return
        caller = s.call_stack.pop()
        fact = self.program.fact_at(caller.method, caller.pc)
        caller.pc += fact.size
        if kind == "ret":
            caller.stack.append(value)
        s.frame = caller

    def _op_return(self, s: State, inst: Term, nxt: int) -> str:
        self._finish(s, "void")
        return steps.ok("return")

    def _op_ireturn(self, s: State, inst: Term, nxt: int) -> str:
        self._finish(s, "ret", self._int(s.frame))
        return steps.ok("ireturn")

    def _op_areturn(self, s: State, inst: Term, nxt: int) -> str:
        self._finish(s, "ret", self._ref(s.frame))
        return steps.ok("areturn")

    # --- 例外 ---------------------------------------------------------------------

    def _op_athrow(self, s: State, inst: Term, nxt: int) -> str:
        ref = self._ref(s.frame)
        if ref is None:
            raise _Throw(RUNTIME_EXCEPTIONS[steps.NPE])
        self._object(s.heap, ref)
        self._throw(s, ref)
        return steps.ok("athrow")

    def _catches(self, handler: Handler, class_name: str) -> bool:
        if handler.class_name is None:
            return True
        return self.program.is_subclass(class_name, handler.class_name)

    def _throw(self, s: State, ref: Ref) -> None:
        """ハンドラを探して制御を移す。見つからなければフレームを捨てて呼び出し元へ"""
        class_name = self._object(s.heap, ref).class_name
        s.mode = "abrupt"
        while True:
            frame = s.frame
            body = self.program.method(frame.method).body
            assert body is not None
            for h in body.handlers:
                if h.start_pc <= frame.pc < h.end_pc and self._catches(h, class_name):
                    frame.stack = [ref]
                    frame.pc = h.handler_pc
                    s.mode = "normal"
                    return
            if not s.call_stack:
                s.final = "exc"
                s.thrown = ref
                return
            s.frame = s.call_stack.pop()


def _reowned(sig: Term, owner: str) -> Term:
    """fieldSignature の所有クラスを owner に置き換える"""
    _, name, jtype = parse_field_signature(sig)
    return field_signature(owner, name, jtype)


# --- 公開操作 -------------------------------------------------------------------


def initial_state(program: Program, mis: MIS) -> State:
    return Machine(program).initial_state(mis)


def step(program: Program, state: State) -> tuple[State, str]:
    """状態を 1 ステップ進め、更新した状態とステップ名を返す"""
    name = Machine(program).step(state)
    return state, name


def _run(machine: Machine, state: State, budget: int | None) -> list[str]:
    trace: list[str] = []
    while not state.done:
        if budget is not None and len(trace) >= budget:
            raise BudgetExhausted(len(trace), tuple(trace))
        try:
            trace.append(machine.step(state))
        except Stuck as exc:
            raise Stuck(exc.reason, trace) from None
    return trace


def execute(program: Program, state: State, budget: int | None = None) -> tuple[State, list[str]]:
    trace = _run(Machine(program), state, budget)
    return state, trace


def interpret(
    program: Program,
    mis: MIS,
    budget: int | None = None,
    raise_uncaught: bool = True,
) -> Run:
    """MIS からメソッドを実行し、戻り値と最終ヒープとトレースを返す

    捕捉されない例外は UncaughtException になる。raise_uncaught=False のときは
    節表現と同じく結果 exc(Ref) として返す。
    """
    machine = Machine(program)
    state = machine.initial_state(mis)
    trace = _run(machine, state, budget)
    heap = heap_to_term(state.heap)
    if state.final == "exc":
        assert state.thrown is not None
        class_name = machine._object(state.heap, state.thrown).class_name
        if raise_uncaught:
            logger.debug("uncaught {} after {} steps", class_name, len(trace))
            raise UncaughtException(class_name, trace, state.frame.pc, state=state)
        return Run(Compound("exc", (value_to_term(state.thrown),)), heap, trace, state)
    if state.final == "void":
        return Run(Atom("none"), heap, [*trace, "normal_end"], state)
    return Run(value_to_term(state.result), heap, trace, state)
