from __future__ import annotations

import random

import pytest

from src.domain.jvmsem import (
    GOOD_STEPS,
    MIS,
    STEP_NAMES,
    as_clauses,
    interpret,
    solve_interpret,
)
from src.domain.jvmsem.clauses import loop_points, method_label, whistle_filter
from src.domain.logic import Atom, Int, Term, mk, parse_term
from src.domain.program import Program
from src.infrastructure import read_class
from src.shared.errors import (
    ArgumentKindMismatch,
    ArityMismatch,
    BudgetExhausted,
    Stuck,
    UncaughtException,
)

from ..support.classgen import ClassSpec, MethodSpec, build_class
from ..support.fixtures import STATIC
from ..support.specialize import encoding

INVOKES = {"invokespecial_step_here_ok", "invokevirtual_step_ok", "invokestatic_step_ok"}
RETURNS = {"return_step_ok", "ireturn_step_ok", "areturn_step_ok"}


def num(n: int) -> Term:
    return mk("num", mk("int", Int(n)))


def mis(program: Program, name: str, *args: int | None) -> MIS:
    method = program.find_method(name)
    assert method.body is not None
    terms = tuple(Atom("null") if a is None else num(a) for a in args)
    return MIS(method=method.body.method_id, args=terms)


def rational_heap(*pairs: tuple[int, int]) -> Term:
    objects = ",".join(f"obj('Rational',[num(int({a})),num(int({b}))])" for a, b in pairs)
    return parse_term(f"heap([{objects}],[])")


def test_exp_main_builds_the_power(rational_program: Program):
    run = interpret(rational_program, mis(rational_program, "expMain", 2, 3, 2))
    assert run.result == parse_term("ref(loc(2))")
    assert run.heap == rational_heap((2, 3), (4, 9))


def test_exp_main_with_zero_exponent(rational_program: Program):
    run = interpret(rational_program, mis(rational_program, "expMain", 2, 3, 0))
    assert run.heap == rational_heap((2, 3), (1, 1))
    assert run.trace[-2:] == ["areturn_step_ok", "areturn_step_ok"]
    assert "if0_step_jump" in run.trace
    assert "if0_step_continue" not in run.trace


def test_exp_main_trace_stays_within_good_steps(rational_program: Program):
    run = interpret(rational_program, mis(rational_program, "expMain", 5, 7, 3))
    assert set(run.trace) <= GOOD_STEPS
    assert run.trace.count("if0_step_continue") == 3
    assert run.trace.count("iinc_step") == 3


@pytest.mark.parametrize(
    ("name", "args", "expected"),
    [
        ("straight", (3, 4), 14),
        ("mod", (17, 5), 2),
        ("mod", (-17, 5), -2),
        ("fact", (5,), 120),
        ("fact", (0,), 1),
        ("gcd", (12, 18), 6),
        ("lcm", (4, 6), 12),
        ("search", (9,), 3),
        ("search", (4,), -1),
        ("bsearch", (21,), 7),
        ("bsearch", (0,), 0),
        ("bsearch", (10,), -1),
        ("safeDiv", (7, 2), 3),
        ("safeDiv", (7, 0), 0),
    ],
)
def test_int_methods(program: Program, name: str, args: tuple[int, ...], expected: int):
    run = interpret(program, mis(program, name, *args))
    assert run.result == num(expected)


def test_arithmetic_wraps_to_32_bits(program: Program):
    run = interpret(program, mis(program, "straight", 2_147_483_647, 1))
    assert run.result == num(0)


def test_uncaught_exception_raises_by_default(program: Program):
    with pytest.raises(UncaughtException):
        interpret(program, mis(program, "divide", 7, 0))


def test_uncaught_exception_as_result(program: Program):
    run = interpret(program, mis(program, "divide", 7, 0), raise_uncaught=False)
    assert run.result == parse_term("exc(ref(loc(1)))")
    assert run.trace[-1] == "ibinop_step_ArithmeticException"


def test_null_dereference(program: Program):
    run = interpret(program, mis(program, "peek", None), raise_uncaught=False)
    assert run.trace == ["aload_step_ok", "getfield_step_NullPointerException"]


def test_void_method_ends_with_normal_end(program: Program):
    method = program.find_method("Rational.<init>")
    assert method.body is not None
    heap = rational_heap((0, 0))
    run = interpret(
        program,
        MIS(
            method=method.body.method_id,
            args=(parse_term("ref(loc(1))"), num(2), num(3)),
            heap=heap,
        ),
    )
    assert run.result == Atom("none")
    assert run.heap == rational_heap((2, 3))
    assert run.trace[-1] == "normal_end"


def test_infinite_loop_exhausts_budget(program: Program):
    with pytest.raises(BudgetExhausted):
        interpret(program, mis(program, "spin"), budget=100)


def test_wrong_arity(rational_program: Program):
    with pytest.raises(ArityMismatch):
        interpret(rational_program, mis(rational_program, "expMain", 1, 2))


def test_wrong_argument_kind(program: Program):
    with pytest.raises(ArgumentKindMismatch):
        interpret(program, mis(program, "peek", 3))
    with pytest.raises(ArgumentKindMismatch) as info:
        interpret(program, mis(program, "fact", None))
    assert info.value.name == "1"


def _broken(code: list) -> Program:
    spec = ClassSpec("Broken", methods=[MethodSpec("m", "()I", code, access=STATIC)])
    return Program([read_class(build_class(spec))])


@pytest.mark.parametrize(
    ("code", "reason"),
    [
        ([("pop",), ("iconst_0",), ("ireturn",)], "operand stack underflow"),
        ([("swap",), ("ireturn",)], "operand stack underflow"),
        ([("iload", 9), ("ireturn",)], "no local 9"),
    ],
)
def test_broken_code_gets_stuck_with_the_cause(code: list, reason: str):
    broken = _broken(code)
    with pytest.raises(Stuck) as info:
        interpret(broken, mis(broken, "m"))
    assert reason in str(info.value)


def test_frames_balance_on_normal_exit(rational_program: Program):
    rng = random.Random(7)
    for _ in range(20):
        a, b, c = rng.randint(-9, 9), rng.randint(-9, 9), rng.randint(0, 6)
        run = interpret(rational_program, mis(rational_program, "expMain", a, b, c))
        invokes = sum(1 for s in run.trace if s in INVOKES)
        returns = sum(1 for s in run.trace if s in RETURNS)
        assert returns == invokes + 1
        assert set(run.trace) <= STEP_NAMES


def _random_args(rng: random.Random, name: str) -> tuple[int, ...]:
    if name == "expMain":
        return rng.randint(-5, 5), rng.randint(-5, 5), rng.randint(-1, 4)
    if name == "fact":
        return (rng.randint(-2, 6),)
    if name == "search":
        return (rng.randint(-1, 13),)
    if name == "bsearch":
        return (rng.randint(-2, 24),)
    return rng.randint(-20, 20), rng.randint(-4, 4)


@pytest.mark.parametrize(
    "name",
    ["expMain", "straight", "mod", "fact", "gcd", "lcm", "divide", "safeDiv", "search", "bsearch"],
)
def test_clause_encoding_agrees_with_native(program: Program, name: str):
    store = encoding(program, traced=True, wrap=True)
    rng = random.Random(f"agree-{name}")
    for _ in range(50):
        spec = mis(program, name, *_random_args(rng, name))
        run = interpret(program, spec, raise_uncaught=False)
        answer = solve_interpret(store, program, spec)
        assert answer == (run.result, run.heap, run.trace), spec.args


def test_untraced_encoding_drops_the_trace(rational_program: Program):
    store = as_clauses(rational_program, traced=False)
    spec = mis(rational_program, "expMain", 2, 3, 2)
    answer = solve_interpret(store, rational_program, spec, traced=False)
    assert answer is not None
    result, heap, trace = answer
    assert trace is None
    assert result == parse_term("ref(loc(2))")
    assert heap == rational_heap((2, 3), (4, 9))


def test_loop_points_mark_the_backward_branch(rational_program: Program):
    exp = rational_program.find_method("exp")
    assert exp.body is not None
    points = {(m, pc) for m, pc in loop_points(rational_program) if m == exp.body.method_id_term()}
    assert points == {(exp.body.method_id_term(), 0), (exp.body.method_id_term(), 25)}


def test_whistle_filter_ignores_straight_line_execute(rational_program: Program):
    watched = whistle_filter(rational_program)
    exp = rational_program.find_method("exp")
    assert exp.body is not None
    mid = exp.body.method_id_term()
    frame = mk("fr", mid, Int(8), Atom("[]"), Atom("[]"))
    at_loop = mk("fr", mid, Int(25), Atom("[]"), Atom("[]"))
    heap = parse_term("heap([],[])")
    assert not watched(mk("execute", mk("st", heap, frame), Atom("x"), Atom("y"), Atom("z")))
    assert watched(mk("execute", mk("st", heap, at_loop), Atom("x"), Atom("y"), Atom("z")))


def test_method_label_strips_brackets(rational_program: Program):
    assert method_label(rational_program.find_method("Rational.<init>")) == "init"
    assert method_label(rational_program.find_method("expMain")) == "expMain"
