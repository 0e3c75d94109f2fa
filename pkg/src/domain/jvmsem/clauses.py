"""インタプリタの節表現 - 汎用部（interpreter.pl）とプログラム固有の事実

traced=False のときはトレース引数を取り除いた版を作る。wrap=True のときは
算術結果を 32 ビットに折り返す。
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable, Iterator, Optional

from loguru import logger

from src.shared.errors import ArityMismatch

from ..jvml import (
    COMPARISONS,
    MethodDecl,
    array_depth,
    class_name_term,
    field_signature,
    instruction_name,
    is_reference_type,
    parse_field_signature,
    parse_method_signature,
)
from ..logic.solver import Solver
from ..logic.store import Clause, ClauseStore
from ..logic.syntax import parse_clauses
from ..logic.terms import (
    NIL,
    Atom,
    Compound,
    Int,
    Term,
    Var,
    atom,
    cons,
    make_list,
    mk,
    subterms,
)
from ..logic.unify import Subst
from ..program import Program
from .state import MIS, initial_heap_term

# 述語 -> 取り除くトレース引数の位置
TRACE_POSITIONS: dict[tuple[str, int], tuple[int, ...]] = {
    ("step", 5): (3, 4),
    ("execute", 4): (2, 3),
    ("interpret", 6): (5,),
    ("final", 4): (3,),
}

# インタプリタの制御述語（ループ点以外では展開の停止判定をしない）
CONTROL_PREDICATES = frozenset(
    {"interpret", "execute", "step", "resume", "handle", "handled", "raise", "final"}
)

_OPS = {
    "eqInt": ("=:=", "=\\="),
    "neInt": ("=\\=", "=:="),
    "ltInt": ("<", ">="),
    "leInt": ("=<", ">"),
    "geInt": (">=", "<"),
    "gtInt": (">", "=<"),
}

_WRAP = "wrap(X, Y) :- Y is ((X+2147483648)/\\4294967295)-2147483648."
_NO_WRAP = "wrap(X, X)."


@lru_cache(maxsize=1)
def _generic_clauses() -> tuple[Clause, ...]:
    text = resources.files(__package__).joinpath("interpreter.pl").read_text(encoding="utf-8")
    return tuple(parse_clauses(text))


def _branch_clauses() -> list[Clause]:
    lines: list[str] = []
    for cmp in COMPARISONS:
        yes, no = _OPS[cmp]
        lines.append(
            f"step(if0({cmp}, Off), st(H, fr(M, PC, [num(int(V))|S], L)), "
            f"st(H, fr(M, PC2, S, L)), [if0_step_jump|T], T) :- V{yes}0, PC2 is PC+Off."
        )
        lines.append(
            f"step(if0({cmp}, _), st(H, fr(M, PC, [num(int(V))|S], L)), "
            f"st(H, fr(M, PC2, S, L)), [if0_step_continue|T], T) :- "
            f"V{no}0, next_pc(M, PC, PC2)."
        )
        lines.append(
            f"step(if_icmp({cmp}, Off), st(H, fr(M, PC, [num(int(B)), num(int(A))|S], L)), "
            f"st(H, fr(M, PC2, S, L)), [if_icmp_step_jump|T], T) :- A{yes}B, PC2 is PC+Off."
        )
        lines.append(
            f"step(if_icmp({cmp}, _), st(H, fr(M, PC, [num(int(B)), num(int(A))|S], L)), "
            f"st(H, fr(M, PC2, S, L)), [if_icmp_step_continue|T], T) :- "
            f"A{no}B, next_pc(M, PC, PC2)."
        )
    return parse_clauses("\n".join(lines))


# --- プログラム固有の事実 ---------------------------------------------------


def _fact(name: str, *args: Term) -> Clause:
    return Clause(mk(name, *args), ())


def _stack(values: Iterable[Term], rest: Term) -> Term:
    out = rest
    for v in values:
        out = cons(v, out)
    return out


def _method_id(decl: MethodDecl) -> Term:
    assert decl.body is not None
    return decl.body.method_id_term()


def _instructions(program: Program) -> Iterator[Term]:
    for mid in program.method_ids():
        for fact in program.facts(mid):
            yield fact.instruction


def _operands(program: Program, name: str) -> list[Term]:
    seen: dict[Term, None] = {}
    for inst in _instructions(program):
        if isinstance(inst, Compound) and inst.name == name:
            seen.setdefault(inst.args[0], None)
    return list(seen)


class _FactBuilder:
    def __init__(self, program: Program) -> None:
        self.program = program
        self.clauses: list[Clause] = []
        self._calls: set[tuple[str, Term]] = set()

    def add(self, name: str, *args: Term) -> None:
        self.clauses.append(_fact(name, *args))

    def code(self) -> None:
        for mid in self.program.method_ids():
            method = self.program.method(mid)
            body = method.body
            assert body is not None
            mterm = body.method_id_term()
            for fact in self.program.facts(mid):
                self.add("instruction_at", mterm, Int(fact.pc), fact.instruction)
                self.add("next_pc", mterm, Int(fact.pc), Int(fact.pc + fact.size))
            args = [Var(f"A{i}") for i in range(method.arg_count)]
            pad = [Atom("undef")] * max(body.max_locals - len(args), 0)
            frame = mk("fr", mterm, Int(body.first_pc), NIL, make_list([*args, *pad]))
            self.add("method_frame", mterm, make_list(args), frame)
            handlers = [
                mk(
                    "h",
                    Int(h.start_pc),
                    Int(h.end_pc),
                    Atom(h.class_name) if h.class_name else Atom("any"),
                    Int(h.handler_pc),
                )
                for h in body.handlers
            ]
            self.add("handlers", mterm, make_list(handlers))

    def fields(self) -> None:
        seen: set[Term] = set()
        for cname in self.program.classes:
            for i, decl in enumerate(self.program.instance_fields(cname)):
                _, name, jtype = parse_field_signature(decl.signature)
                for sig in (decl.signature, field_signature(cname, name, jtype)):
                    if sig not in seen:
                        seen.add(sig)
                        self.add("field_slot", sig, Int(i))
        for i, decl in enumerate(self.program.static_fields()):
            self.add("static_slot", decl.signature, Int(i))
        for cname, decl in self.program.classes.items():
            if decl.is_interface:
                continue
            defaults = [
                mk("num", mk("int", Int(0))) if not is_reference_type(f.type) else Atom("null")
                for f in self.program.instance_fields(cname)
            ]
            template = mk("obj", Atom(cname), make_list(defaults))
            self.add("object_template", class_name_term(cname), template)

    def calls(self) -> None:
        for sig in _operands(self.program, "invokestatic"):
            owner, name, params, _ = parse_method_signature(sig)
            target = self.program.resolve_method(owner, name, params)
            if target is not None:
                self.add("static_target", sig, _method_id(target))
            self._call_args("static", sig, len(params))
        for sig in _operands(self.program, "invokespecial"):
            owner, name, params, _ = parse_method_signature(sig)
            target = self.program.resolve_method(owner, name, params)
            if target is not None:
                self.add("special_target", sig, _method_id(target))
            self._call_args("instance", sig, len(params))
        for sig in _operands(self.program, "invokevirtual"):
            _, name, params, _ = parse_method_signature(sig)
            for cname, decl in self.program.classes.items():
                if decl.is_interface:
                    continue
                target = self.program.resolve_method(cname, name, params)
                if target is not None:
                    self.add("dispatch", Atom(cname), sig, _method_id(target))
            self._call_args("instance", sig, len(params))

    def _call_args(self, kind: str, sig: Term, count: int) -> None:
        if (kind, sig) in self._calls:
            return
        self._calls.add((kind, sig))
        rest = Var("S")
        args = [Var(f"A{i}") for i in range(count)]
        if kind == "static":
            self.add("call_args", Atom(kind), sig, _stack(args, rest), make_list(args), rest)
            return
        recv = Var("R")
        popped = _stack([recv, *args], rest)
        self.add("call_args", Atom(kind), sig, popped, make_list([recv, *args]), rest)
        self.add("receiver", sig, _stack([recv, *args], Var("_")), recv)

    def types(self) -> None:
        handler_classes = {
            h.class_name for body in self.program.bodies() for h in body.handlers if h.class_name
        }
        concrete = [c for c, d in self.program.classes.items() if not d.is_interface]
        for hcls in sorted(handler_classes):
            for cname in concrete:
                caught = self.program.is_subclass(cname, hcls)
                self.add("catches", Atom(hcls), Atom(cname), atom(str(caught).lower()))
        self.clauses.append(Clause(mk("catches", Atom("any"), Var("_"), Atom("true")), ()))

        targets = _operands(self.program, "checkcast") + _operands(self.program, "instanceof")
        keys: list[Term] = [Atom(c) for c in concrete] + _array_types(self.program)
        for ty in dict.fromkeys(targets):
            for key in keys:
                source = key.name if isinstance(key, Atom) else key
                ok = self.program.assignable(source, ty)
                self.add("type_test", key, ty, Atom("true" if ok else "false"))

        for ty in _operands(self.program, "multianewarray"):
            counts = [Var(f"N{i}") for i in range(array_depth(ty))]
            nums = [mk("num", mk("int", n)) for n in counts]
            self.add("pop_dims", ty, _stack(nums, Var("S")), make_list(counts), Var("S"))


def _array_types(program: Program) -> list[Term]:
    """プログラム中に現れる配列型（入れ子の要素型を含む）"""
    roots: list[Term] = list(_instructions(program))
    for method in program.methods():
        roots.extend(method.params)
        if method.returns is not None:
            roots.append(method.returns)
    for decl in program.classes.values():
        roots.extend(f.type for f in decl.fields)
    found: dict[Term, None] = {}
    for root in roots:
        for sub in subterms(root):
            if (
                isinstance(sub, Compound)
                and sub.name == "refType"
                and isinstance(sub.args[0], Compound)
                and sub.args[0].name == "arrayType"
            ):
                found.setdefault(sub, None)
    return list(found)


def program_facts(program: Program) -> list[Clause]:
    builder = _FactBuilder(program)
    builder.code()
    builder.fields()
    builder.calls()
    builder.types()
    return builder.clauses


# --- トレース引数の除去 -----------------------------------------------------


def _strip(term: Term) -> Term:
    if not isinstance(term, Compound):
        return term
    drop = TRACE_POSITIONS.get((term.name, len(term.args)))
    if drop is None:
        return term
    return Compound(term.name, tuple(a for i, a in enumerate(term.args) if i not in drop))


def untraced(clause: Clause) -> Clause:
    return Clause(_strip(clause.head), tuple(_strip(lit) for lit in clause.body))


# --- 公開操作 -------------------------------------------------------------------


def as_clauses(program: Program, traced: bool = True, wrap: bool = True) -> ClauseStore:
    """プログラムに対するインタプリタの節表現を作る"""
    clauses = [*_generic_clauses(), *_branch_clauses()]
    clauses.extend(parse_clauses(_WRAP if wrap else _NO_WRAP))
    clauses.extend(program_facts(program))
    if not traced:
        clauses = [untraced(c) for c in clauses]
    logger.debug("clause encoding: {} clauses (traced={}, wrap={})", len(clauses), traced, wrap)
    return ClauseStore(clauses)


def _arg_pattern(jtype: Term, name: str) -> Term:
    if is_reference_type(jtype):
        return Var(name)
    return mk("num", mk("int", Var(name)))


def entry_atom(
    program: Program,
    method: MethodDecl,
    traced: bool = True,
    args: Optional[tuple[Term, ...]] = None,
    heap: Optional[Term] = None,
) -> Term:
    """interpret/6（または /5）の呼び出し - 引数を省くと型に応じた変数を置く"""
    assert method.body is not None
    if args is None:
        kinds = ([] if method.static else [None]) + list(method.params)
        letters = [chr(ord("A") + i) for i in range(len(kinds))]
        args = tuple(
            Var(n) if kind is None else _arg_pattern(kind, n) for kind, n in zip(kinds, letters)
        )
    elif len(args) != method.arg_count:
        raise ArityMismatch(method.qualified_name, method.arg_count, len(args))
    parts = [
        method.body.method_id_term(),
        make_list(args),
        heap if heap is not None else initial_heap_term(program),
        Var("Result"),
        Var("Heap"),
    ]
    if traced:
        parts.append(Var("Trace"))
    return mk("interpret", *parts)


def solve_interpret(
    store: ClauseStore,
    program: Program,
    mis: MIS,
    traced: bool = True,
    budget: Optional[int] = None,
) -> Optional[tuple[Term, Term, Optional[list[str]]]]:
    """節表現で MIS を解き (結果, ヒープ, トレース) を返す（解がなければ None）"""
    method = program.method(mis.method)
    goal = entry_atom(program, method, traced, mis.args, mis.heap)
    solver = Solver(store, budget) if budget is not None else Solver(store)
    for answer in solver.solve(goal):
        return _outcome(answer, goal, traced)
    return None


def _outcome(
    answer: Subst, goal: Term, traced: bool
) -> tuple[Term, Term, Optional[list[str]]]:
    assert isinstance(goal, Compound)
    result = answer.apply(goal.args[3])
    heap = answer.apply(goal.args[4])
    if not traced:
        return result, heap, None
    trace_term = answer.apply(goal.args[5])
    names: list[str] = []
    while isinstance(trace_term, Compound) and trace_term.name == "." and len(trace_term.args) == 2:
        head = trace_term.args[0]
        assert isinstance(head, Atom)
        names.append(head.name)
        trace_term = trace_term.args[1]
    return result, heap, names


# --- 部分評価の制御情報 -----------------------------------------------------


def loop_points(program: Program) -> frozenset[tuple[Term, int]]:
    """後方分岐・メソッド入口・ハンドラ入口の (methodId, pc)"""
    points: set[tuple[Term, int]] = set()
    for mid in program.method_ids():
        body = program.method(mid).body
        assert body is not None
        mterm = body.method_id_term()
        points.add((mterm, body.first_pc))
        points.update((mterm, h.handler_pc) for h in body.handlers)
        for fact in program.facts(mid):
            inst = fact.instruction
            if isinstance(inst, Compound) and instruction_name(inst) in (
                "goto",
                "if0",
                "if_icmp",
                "ifnull",
                "ifnonnull",
                "if_acmpeq",
                "if_acmpne",
            ):
                offset = inst.args[-1]
                if isinstance(offset, Int) and offset.value <= 0:
                    points.add((mterm, fact.pc))
    return frozenset(points)


def whistle_filter(program: Program) -> Callable[[Term], bool]:
    """展開停止判定の対象となるアトムか

    インタプリタの制御述語はループ点の execute だけを対象にし、
    補助述語（リスト操作など）は常に対象にする。
    """
    points = loop_points(program)

    def watched(goal: Term) -> bool:
        if not isinstance(goal, Compound) or goal.name not in CONTROL_PREDICATES:
            return True
        if goal.name != "execute":
            return False
        state = goal.args[0]
        if not (isinstance(state, Compound) and state.name == "st"):
            return False
        frame = state.args[1]
        if not (isinstance(frame, Compound) and frame.name == "fr"):
            return False
        pc = frame.args[1]
        return isinstance(pc, Int) and (frame.args[0], pc.value) in points

    return watched


def method_label(method: MethodDecl) -> str:
    """残余プログラムの入口述語名"""
    return method.name.strip("<>")
