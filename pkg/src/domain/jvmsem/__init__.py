"""JVML_r の動的意味論 - ネイティブインタプリタと節表現"""

from .clauses import as_clauses, entry_atom, solve_interpret, whistle_filter
from .native import Run, execute, initial_state, interpret, step
from .state import MIS, Heap, Ref, State, heap_to_term, term_to_value, value_to_term
from .steps import GOOD_STEPS, STEP_NAMES

__all__ = [
    "GOOD_STEPS",
    "MIS",
    "STEP_NAMES",
    "Heap",
    "Ref",
    "Run",
    "State",
    "as_clauses",
    "entry_atom",
    "execute",
    "heap_to_term",
    "initial_state",
    "interpret",
    "solve_interpret",
    "step",
    "term_to_value",
    "value_to_term",
    "whistle_filter",
]
