"""性質の検証と表明形式での報告"""

from __future__ import annotations

from typing import Optional

from loguru import logger

from src.shared.errors import AccumulatorLimitation

from ..peval.residual import ResidualProgram
from ..value_objects import CostBound, EntrySpec, PropertySpec, Verdict
from .cost import infer_cost
from .termination import prove_termination
from .trace_safety import check_trace_safety


def verify(
    program: ResidualProgram, entry: Optional[EntrySpec], spec: PropertySpec
) -> tuple[Verdict, Optional[CostBound]]:
    """spec の種類に応じた検査器を呼ぶ（cost のときは上界も返す）"""
    if spec.kind == "trace-safety":
        verdict = check_trace_safety(program, entry, spec.allowed)
        return verdict, None
    if spec.kind == "termination":
        return prove_termination(program, entry), None
    terminates = prove_termination(program, entry)
    if terminates.status != "checked":
        return Verdict.unknown(f"termination not established: {terminates.reason}"), None
    try:
        result = infer_cost(program, entry)
    except AccumulatorLimitation as exc:
        logger.warning("{}", exc)
        return Verdict.unknown(str(exc)), None
    if isinstance(result, Verdict):
        return result, None
    return Verdict.checked(f"steps_ub({result})"), result


def default_entry(program: ResidualProgram, inputs: int) -> EntrySpec:
    """残余入口から EntrySpec を作る（先頭 inputs 個が num、残りは var）"""
    arity = program.entry.arity
    modes = tuple("num" if i < inputs else "var" for i in range(arity))
    return EntrySpec(predicate=program.entry.name, modes=modes)  # type: ignore[arg-type]


def assertion(
    entry: EntrySpec, spec: PropertySpec, verdict: Verdict, trace_arg: Optional[int] = None
) -> str:
    """判定を表明の形で書く（例: :- checked comp p(A,B) + terminates.）"""
    status = verdict.status
    call = f"{entry.predicate}({','.join(entry.arg_names)})"
    if spec.kind == "trace-safety":
        trace = entry.arg_names[trace_arg] if trace_arg is not None else entry.arg_names[-1]
        line = f":- {status} success {call} => goodtrace({trace})."
    elif spec.kind == "termination":
        line = f":- {status} comp {call} + terminates."
    else:
        bound = verdict.reason if verdict.status == "checked" and verdict.reason else "steps_ub(_)"
        line = f":- {status} comp {call} + {bound}."
    if verdict.status == "false" and verdict.witness:
        line += f"  % {verdict.witness}"
    elif verdict.status == "unknown" and verdict.reason:
        line += f"  % {verdict.reason}"
    return line
