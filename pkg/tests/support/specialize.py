"""テスト用の部分評価とネイティブ実行のショートカット"""

from __future__ import annotations

from src.domain.jvmsem import MIS, Run, as_clauses, entry_atom, interpret
from src.domain.jvmsem.clauses import TRACE_POSITIONS, method_label, whistle_filter
from src.domain.logic import ClauseStore, Int, Term, mk
from src.domain.peval import ResidualProgram, partial_evaluate
from src.domain.program import Program
from src.domain.value_objects import PEConfig

# セッションの Program ごとに符号化と残余プログラムを使い回す（どちらも読むだけ）
_stores: dict[tuple[int, bool, bool], ClauseStore] = {}
_residuals: dict[tuple, ResidualProgram] = {}


def encoding(program: Program, traced: bool, wrap: bool) -> ClauseStore:
    key = (id(program), traced, wrap)
    if key not in _stores:
        _stores[key] = as_clauses(program, traced=traced, wrap=wrap)
    return _stores[key]


def specialize(
    program: Program, name: str, traced: bool = False, wrap: bool = False, **options
) -> ResidualProgram:
    """name の全引数を未知としてインタプリタを特化する"""
    key = (id(program), name, traced, wrap, tuple(sorted(options.items())))
    if key not in _residuals:
        decl = program.find_method(name)
        config = PEConfig(watch=whistle_filter(program), **options)
        _residuals[key] = partial_evaluate(
            encoding(program, traced, wrap),
            entry_atom(program, decl, traced),
            config,
            method_label(decl),
            TRACE_POSITIONS,
        )
    return _residuals[key]


def num(n: int) -> Term:
    return mk("num", mk("int", Int(n)))


def native(program: Program, name: str, *args: int) -> Run:
    decl = program.find_method(name)
    assert decl.body is not None
    spec = MIS(method=decl.body.method_id, args=tuple(num(a) for a in args))
    return interpret(program, spec, raise_uncaught=False)
