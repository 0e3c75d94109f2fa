from __future__ import annotations

import random
import re

import pytest

from src.domain.logic import Atom, ClauseStore, Int, Term, Var, mk, parse_clauses, parse_term
from src.domain.logic.terms import functor, list_items, term_vars
from src.domain.peval import (
    Unfolder,
    embeds,
    generalize,
    is_instance,
    is_variant,
    msg,
    parse_residual,
    partial_evaluate,
)
from src.domain.peval.arith import Bound, decide, simplify
from src.domain.program import Program
from src.domain.value_objects import PEConfig
from src.shared.errors import GlobalLimitHit

from ..support.specialize import native, specialize


def trace_names(term: Term) -> list[str]:
    items, tail = list_items(term)
    assert tail == Atom("[]")
    return [i.name for i in items]


# --- 埋め込み・msg --------------------------------------------------------


def test_embedding_by_diving_and_coupling():
    assert embeds(parse_term("f(a)"), parse_term("g(f(a),b)"))
    assert embeds(parse_term("f(a,b)"), parse_term("f(g(a),h(b))"))
    assert not embeds(parse_term("f(a,b)"), parse_term("f(b,a)"))


def test_variables_embed_only_variables():
    assert embeds(Var("X"), Var("Y"))
    assert not embeds(Var("X"), Atom("a"))


def test_integer_widening_modes():
    small, large = parse_term("pc(int(1))"), parse_term("pc(int(5))")
    assert embeds(small, large, widen="all")
    assert embeds(small, large, widen="int")
    assert not embeds(small, large, widen="none")
    assert not embeds(parse_term("pc(1)"), parse_term("pc(5)"), widen="int")


def test_msg_shares_a_variable_per_disagreement():
    a, b = parse_term("f(1,1,x)"), parse_term("f(2,2,x)")
    g, theta_a, theta_b = msg(a, b)
    assert g.args[0] is g.args[1]
    assert g.args[2] == Atom("x")
    assert theta_a.apply(g) == a
    assert theta_b.apply(g) == b


def test_generalization_is_more_general():
    a, b = parse_term("p(s(0),[1])"), parse_term("p(s(s(0)),[1])")
    g = generalize(a, b)
    assert is_instance(a, g) and is_instance(b, g)
    assert not is_instance(g, a)
    assert is_variant(g, generalize(b, a))


_POOL = [Var("X"), Var("Y"), Var("Z")]


def random_term(rng: random.Random, depth: int = 3) -> Term:
    roll = rng.random()
    if depth == 0 or roll < 0.3:
        leaf = rng.randrange(3)
        if leaf == 0:
            return rng.choice(_POOL)
        if leaf == 1:
            return Int(rng.randint(-2, 3))
        return Atom(rng.choice("ab"))
    name, arity = rng.choice([("f", 2), ("g", 1), ("int", 1), ("h", 3)])
    return mk(name, *(random_term(rng, depth - 1) for _ in range(arity)))


def test_random_pairs_obey_embedding_and_msg_laws():
    rng = random.Random("msg-laws")
    for _ in range(1000):
        a, b = random_term(rng), random_term(rng)
        for widen in ("none", "int", "all"):
            assert embeds(a, a, widen=widen), a
        g, theta_a, theta_b = msg(a, b)
        assert theta_a.apply(g) == a, (a, b)
        assert theta_b.apply(g) == b, (a, b)
        assert is_instance(a, g) and is_instance(b, g)
        assert is_variant(msg(a, a)[0], a)


# --- 残余算術 ---------------------------------------------------------------


def test_simplify_drops_identities():
    term = parse_term("1*X+0")
    (x,) = term_vars(term)
    assert simplify(term) == x
    assert simplify(mk("+", x, Int(-3))) == mk("-", x, Int(3))
    assert simplify(parse_term("2*3+1")) == Int(7)


def test_decide_with_known_bounds():
    x = Var("X")
    positive = [Bound(x, ">", 0)]
    assert decide(positive, Bound(x, ">=", 1)) is True
    assert decide(positive, Bound(x, "=<", 0)) is False
    assert decide(positive, Bound(x, ">", 3)) is None
    assert decide([Bound(x, ">=", 2), Bound(x, "=<", 2)], Bound(x, "=\\=", 2)) is False
    assert decide([], Bound(x, "=:=", 5)) is None


def test_bound_flips_when_constant_is_on_the_left():
    x = Var("X")
    assert Bound.of("<", Int(3), x) == Bound(x, ">", 3)


# --- 局所制御 ---------------------------------------------------------------

APPEND = "app([], L, L).\napp([H|T], L, [H|R]) :- app(T, L, R)."
LENGTH = "len([], 0).\nlen([_|T], N) :- len(T, M), N is M+1."


def test_unfolding_known_list_yields_a_fact():
    store = ClauseStore(parse_clauses(APPEND))
    goal = parse_term("app([1,2], L, R)")
    (resultant,) = Unfolder(store, PEConfig()).unfold(goal)
    assert resultant.body == ()
    _, tail, whole = resultant.head.args
    items, rest = list_items(whole)
    assert items == [Int(1), Int(2)]
    assert rest is tail


def test_whistle_residualizes_the_recursive_call():
    store = ClauseStore(parse_clauses(LENGTH))
    unfolder = Unfolder(store, PEConfig())
    resultants = unfolder.unfold(parse_term("len(L, N)"))
    assert len(resultants) == 2
    assert resultants[0].body == ()
    body = resultants[1].body
    assert [functor(lit) for lit in body] == [("len", 2), ("is", 2)]
    assert unfolder.whistles >= 1


def test_covered_call_reuses_the_entry_predicate():
    store = ClauseStore(parse_clauses(LENGTH))
    residual = partial_evaluate(store, parse_term("len(L, N)"), PEConfig(), "length")
    assert list(residual.predicates) == ["length"]
    assert len(residual.clauses) == 2
    outputs, _ = residual.solve([parse_term("[a,b,c]")])
    assert outputs == (Int(3),)


# --- インタプリタの特化 -------------------------------------------------------


def test_exp_main_residual_shape(rational_program: Program):
    residual = specialize(rational_program, "expMain")
    assert residual.entry.name == "expMain"
    assert residual.entry.arity == 5
    assert len(residual.predicates) == 2
    assert len(residual.clauses_for("expMain")) == 3
    (aux,) = [n for n in residual.predicates if n != "expMain"]
    assert re.fullmatch(r"[a-z_]+_\d+_1", aux)
    aux_clauses = residual.clauses_for(aux)
    assert len(aux_clauses) == 2
    # ループは補助述語の自己再帰として残り、入口からは 1 節だけが呼ぶ
    assert sum(1 for c in aux_clauses if any(functor(l)[0] == aux for l in c.body)) == 1
    callers = [c for c in residual.clauses_for("expMain") if c.body]
    assert sum(1 for c in callers if any(functor(l)[0] == aux for l in c.body)) == 1
    text = residual.text(header=False)
    assert "obj('Rational',[num(int(1)),num(int(1))])" in text
    assert "interpret(" not in text
    assert not re.search(r"\b(step|execute|instruction_at)\(", text)


def test_straight_line_method_gives_one_clause(program: Program):
    residual = specialize(program, "straight")
    assert list(residual.predicates) == ["straight"]
    (clause,) = residual.clauses
    assert functor(clause.head) == ("straight", 4)


def test_division_keeps_the_exception_branch(program: Program):
    residual = specialize(program, "divide", wrap=True)
    assert len(residual.clauses_for("divide")) == 2
    outputs, _ = residual.solve([Int(7), Int(0)])
    run = native(program, "divide", 7, 0)
    assert outputs == (run.result, run.heap)


def _inputs(rng: random.Random, name: str) -> tuple[int, ...]:
    if name == "expMain":
        return rng.randint(-6, 6), rng.randint(-6, 6), rng.randint(-2, 5)
    if name == "fact":
        return (rng.randint(-2, 8),)
    if name in ("search", "bsearch"):
        return (rng.randint(-2, 24),)
    return rng.randint(-30, 30), rng.randint(-5, 5)


@pytest.mark.parametrize("traced", [False, True])
@pytest.mark.parametrize(
    "name", ["expMain", "fact", "gcd", "lcm", "safeDiv", "search", "bsearch", "mod"]
)
def test_residual_agrees_with_native_runs(program: Program, name: str, traced: bool):
    residual = specialize(program, name, traced=traced, wrap=True)
    assert residual.traced == traced
    rng = random.Random(f"residual-{name}-{traced}")
    for _ in range(50):
        args = _inputs(rng, name)
        run = native(program, name, *args)
        answer = residual.solve([Int(a) for a in args])
        assert answer is not None, args
        outputs, _ = answer
        assert outputs[:2] == (run.result, run.heap), args
        if traced:
            assert trace_names(outputs[2]) == run.trace, args


def test_determinate_first_gives_the_same_answers(rational_program: Program):
    plain = specialize(rational_program, "expMain", wrap=True)
    eager = specialize(rational_program, "expMain", wrap=True, determinate_first=True)
    for args in [(2, 3, 0), (2, 3, 1), (-1, 5, 4)]:
        inputs = [Int(a) for a in args]
        assert plain.solve(inputs)[0] == eager.solve(inputs)[0]  # type: ignore[index]


def test_entry_name_override(rational_program: Program):
    residual = specialize(rational_program, "expMain", entry_name="power")
    assert residual.entry.name == "power"
    assert residual.clauses_for("power")


def test_residual_text_reads_back(rational_program: Program):
    residual = specialize(rational_program, "expMain", traced=True)
    text = residual.text()
    assert text.startswith("%! entry expMain/")
    loaded = parse_residual(text)
    assert loaded.entry.name == "expMain"
    assert loaded.entry.trace_args == residual.entry.trace_args
    assert len(loaded.clauses) == len(residual.clauses)
    inputs = [Int(3), Int(2), Int(3)]
    assert loaded.solve(inputs)[0] == residual.solve(inputs)[0]  # type: ignore[index]


def test_global_limit_stops_specialization(program: Program):
    with pytest.raises(GlobalLimitHit):
        specialize(program, "fact", max_global=1)
