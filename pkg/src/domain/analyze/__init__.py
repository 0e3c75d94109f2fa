"""残余プログラムの検証器"""

from .callgraph import CallGraph
from .cost import infer_cost, predicate_costs
from .termination import find_ranking, prove_termination
from .trace_safety import check_trace_safety, reachable_steps
from .verifier import assertion, default_entry, verify

__all__ = [
    "CallGraph",
    "assertion",
    "check_trace_safety",
    "default_entry",
    "find_ranking",
    "infer_cost",
    "predicate_costs",
    "prove_termination",
    "reachable_steps",
    "verify",
]
