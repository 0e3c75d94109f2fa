from __future__ import annotations

from pathlib import Path

import pytest

from src.domain.analyze import (
    assertion,
    check_trace_safety,
    default_entry,
    infer_cost,
    prove_termination,
    reachable_steps,
    verify,
)
from src.domain.jvmsem import GOOD_STEPS, MIS, interpret
from src.domain.logic import Atom, Int
from src.domain.peval import parse_residual
from src.domain.program import Program
from src.domain.value_objects import CostBound, EntrySpec, PropertySpec, Verdict
from src.shared.errors import NotTraced

from ..support.specialize import native, specialize

TERMINATES = PropertySpec(kind="termination")
COST = PropertySpec(kind="cost")
SAFE = PropertySpec(kind="trace-safety", allowed=GOOD_STEPS)


def test_exp_main_terminates(rational_program: Program):
    residual = specialize(rational_program, "expMain")
    assert prove_termination(residual).status == "checked"


@pytest.mark.parametrize("wrap", [False, True])
@pytest.mark.parametrize(("name", "inputs"), [("fact", 1), ("gcd", 2), ("mod", 2)])
def test_loops_over_integers_terminate(
    program: Program, name: str, inputs: int, wrap: bool
):
    residual = specialize(program, name, wrap=wrap)
    entry = default_entry(residual, inputs)
    verdict = prove_termination(residual, entry)
    assert verdict.status == "checked", verdict.reason


WRAPPED_COUNTDOWN = """
p(X) :- X =< 0.
p(X) :- X > 0, Y is ((X-1)+2147483648)/\\4294967295-2147483648, p(Y).
"""

WRAPPED_UNDERFLOW = """
p(X) :- X >= -2147483648, Y is ((X-1)+2147483648)/\\4294967295-2147483648, p(Y).
"""


def test_wrapped_decrement_counts_only_inside_the_int_range():
    assert prove_termination(parse_residual(WRAPPED_COUNTDOWN)).status == "checked"
    assert prove_termination(parse_residual(WRAPPED_UNDERFLOW)).status == "unknown"


def test_remainder_shrinks_the_divisor():
    euclid = "g(A,B) :- B =\\= 0, C is A rem B, g(B,C).\ng(_,0).\n"
    assert prove_termination(parse_residual(euclid)).status == "checked"
    unguarded = "g(A,B) :- C is A rem B, g(B,C).\n"
    assert prove_termination(parse_residual(unguarded)).status == "unknown"
    # 割る数ではない引数の rem は減少を示さない
    swapped = "g(A,B) :- B =\\= 0, C is B rem A, g(B,C).\n"
    assert prove_termination(parse_residual(swapped)).status == "unknown"


def test_spin_termination_is_unknown(program: Program):
    residual = specialize(program, "spin")
    assert residual.dropped
    verdict = prove_termination(residual)
    assert verdict.status == "unknown"
    assert verdict.reason
    reloaded = parse_residual(residual.text())
    assert len(reloaded.dropped) == len(residual.dropped)
    assert prove_termination(reloaded).status == "unknown"


def test_loop_removed_by_pruning_still_counts():
    text = (
        "%! entry p/1\n"
        "p(X) :- X > 0.\n"
        "%! pruned\n"
        "%  p(X) :-\n"
        "%      X =< 0,\n"
        "%      loop(X).\n"
        "%  loop(X) :-\n"
        "%      loop(X).\n"
    )
    residual = parse_residual(text)
    assert len(residual.clauses) == 1
    assert len(residual.dropped) == 2
    verdict = prove_termination(residual)
    assert verdict.status == "unknown"
    assert "loop/1" in (verdict.reason or "")


def test_cost_bound_covers_observed_steps(rational_program: Program):
    residual = specialize(rational_program, "expMain")
    entry = default_entry(residual, 3)
    bound = infer_cost(residual, entry)
    assert isinstance(bound, CostBound)
    assert "C" in bound.variables
    for c in range(-2, 8):
        answer = residual.solve([Int(2), Int(3), Int(c)])
        assert answer is not None
        _, steps = answer
        assert bound.evaluate({"A": 2, "B": 3, "C": c}) >= steps, c


def test_cost_bound_for_straight_line_code_is_constant(program: Program):
    residual = specialize(program, "straight")
    bound = infer_cost(residual, default_entry(residual, 2))
    assert isinstance(bound, CostBound)
    assert bound.variables == []
    assert bound.evaluate({}) >= residual.solve([Int(1), Int(2)])[1]  # type: ignore[index]


def test_exp_main_trace_is_safe(rational_program: Program):
    residual = specialize(rational_program, "expMain", traced=True)
    assert check_trace_safety(residual, None, GOOD_STEPS).status == "checked"


def test_division_trace_reaches_an_exception(program: Program):
    residual = specialize(program, "divide", traced=True)
    verdict = check_trace_safety(residual, None, GOOD_STEPS)
    assert verdict.status == "false"
    assert verdict.witness == "ibinop_step_ArithmeticException"


def test_trace_safety_needs_a_traced_residual(rational_program: Program):
    residual = specialize(rational_program, "expMain")
    with pytest.raises(NotTraced):
        check_trace_safety(residual, None, GOOD_STEPS)


def test_entry_must_match_the_residual(rational_program: Program):
    residual = specialize(rational_program, "expMain")
    with pytest.raises(ValueError):
        prove_termination(residual, EntrySpec(predicate="other", modes=("num",)))


def test_verify_cost_reports_the_bound(rational_program: Program):
    residual = specialize(rational_program, "expMain")
    verdict, bound = verify(residual, default_entry(residual, 3), COST)
    assert verdict.status == "checked"
    assert bound is not None
    assert verdict.reason == f"steps_ub({bound})"


def test_verify_cost_is_unknown_without_termination(program: Program):
    residual = specialize(program, "spin")
    verdict, bound = verify(residual, None, COST)
    assert verdict.status == "unknown"
    assert bound is None


def test_default_entry_modes(rational_program: Program):
    residual = specialize(rational_program, "expMain", traced=True)
    entry = default_entry(residual, 3)
    assert entry.modes == ("num", "num", "num", "var", "var", "var")
    assert str(entry) == "expMain(num(A),num(B),num(C),var(D),var(E),var(F))"


def test_assertion_lines():
    entry = EntrySpec(predicate="expMain", modes=("num", "num", "num", "var", "var"))
    assert (
        assertion(entry, TERMINATES, Verdict.checked())
        == ":- checked comp expMain(A,B,C,D,E) + terminates."
    )
    assert (
        assertion(entry, COST, Verdict.checked("steps_ub(4*C+9)"))
        == ":- checked comp expMain(A,B,C,D,E) + steps_ub(4*C+9)."
    )
    line = assertion(entry, SAFE, Verdict.false("getfield_step_NullPointerException"), 4)
    assert line == (
        ":- false success expMain(A,B,C,D,E) => goodtrace(E)."
        "  % getfield_step_NullPointerException"
    )
    unknown = assertion(entry, TERMINATES, Verdict.unknown("no decreasing integer argument"))
    assert unknown.endswith("+ terminates.  % no decreasing integer argument")


def test_removing_a_step_from_the_allowed_set_flips_the_verdict(rational_program: Program):
    residual = specialize(rational_program, "expMain", traced=True)
    verdict = check_trace_safety(residual, None, GOOD_STEPS - {"iinc_step"})
    assert verdict.status == "false"
    assert verdict.witness == "iinc_step"


def test_null_dereference_is_reachable_and_observed(program: Program):
    residual = specialize(program, "peek", traced=True)
    verdict = check_trace_safety(residual, None, GOOD_STEPS)
    assert verdict.status == "false"
    assert verdict.witness is not None and verdict.witness.endswith("NullPointerException")
    peek = program.find_method("peek")
    assert peek.body is not None
    spec = MIS(method=peek.body.method_id, args=(Atom("null"),))
    assert verdict.witness in interpret(program, spec, raise_uncaught=False).trace


def test_observed_traces_stay_within_reachable_steps(rational_program: Program):
    residual = specialize(rational_program, "expMain", traced=True)
    reachable = set(reachable_steps(residual))
    for args in [(1, 1, 0), (2, 3, 4), (-5, 7, 1)]:
        assert set(native(rational_program, "expMain", *args).trace) <= reachable


@pytest.mark.parametrize(
    "text",
    [
        "p(X) :- p(X).\n",
        "p(C) :- C>0, K is C+1, p(K).\np(C) :- C=<0.\n",
    ],
)
def test_no_ranking_argument_means_unknown(text: str):
    verdict = prove_termination(parse_residual(text))
    assert verdict.status == "unknown"


COUNTDOWN = """
execute(C) :- C =< 0.
execute(C) :- C > 0, K is C-1, execute(K).
"""


def test_countdown_cost_is_exact():
    residual = parse_residual(COUNTDOWN)
    entry = EntrySpec(predicate="execute", modes=("num",), names=("C",))
    assert prove_termination(residual, entry).status == "checked"
    bound = infer_cost(residual, entry)
    assert isinstance(bound, CostBound)
    assert bound.variables == ["C"]
    for c in range(21):
        _, steps = residual.solve([Int(c)])  # type: ignore[misc]
        assert steps == c + 1
        assert bound.evaluate({"C": c}) == c + 1


DEACCUMULATED = Path(__file__).parents[1] / "support" / "exp_execute.pl"


def test_deaccumulated_loop_costs_exactly_one_step_per_iteration():
    residual = parse_residual(DEACCUMULATED.read_text(encoding="utf-8"))
    entry = default_entry(residual, 3)
    assert str(entry) == "execute(num(A),num(B),num(C),var(D),var(E))"
    assert prove_termination(residual, entry).status == "checked"
    bound = infer_cost(residual, entry)
    assert isinstance(bound, CostBound)
    assert bound.variables == ["C"]
    for c in range(21):
        answer = residual.solve([Int(2), Int(-3), Int(c)])
        assert answer is not None
        outputs, steps = answer
        assert outputs == (Int(2**c), Int((-3) ** c))
        assert steps == c + 1
        assert bound.evaluate({"C": c}) == c + 1


def test_two_recursive_calls_leave_cost_unknown():
    residual = parse_residual("p(N) :- N>0, M is N-1, p(M), p(M).\np(N) :- N=<0.\n")
    assert prove_termination(residual).status == "checked"
    verdict = infer_cost(residual)
    assert isinstance(verdict, Verdict)
    assert verdict.status == "unknown"


def test_non_recursive_cost_takes_the_longest_chain():
    residual = parse_residual("m(X) :- X > 0, q(X).\nm(X) :- X =< 0.\nq(_).\n")
    bound = infer_cost(residual)
    assert isinstance(bound, CostBound)
    assert bound.evaluate({}) == 2
