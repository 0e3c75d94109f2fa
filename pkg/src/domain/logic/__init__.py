"""論理プログラミング基盤"""

from .solver import Solver, solve, solve_once
from .store import Clause, ClauseStore
from .syntax import (
    format_clause,
    format_program,
    format_term,
    parse_clauses,
    parse_term,
)
from .terms import NIL, Atom, Compound, Int, Term, Var, make_list, mk
from .unify import Bindings, Subst, apply, copy_term, unify

__all__ = [
    "NIL",
    "Atom",
    "Bindings",
    "Clause",
    "ClauseStore",
    "Compound",
    "Int",
    "Solver",
    "Subst",
    "Term",
    "Var",
    "apply",
    "copy_term",
    "format_clause",
    "format_program",
    "format_term",
    "make_list",
    "mk",
    "parse_clauses",
    "parse_term",
    "solve",
    "solve_once",
    "unify",
]
