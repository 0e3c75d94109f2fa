"""ドメイン値オブジェクト"""

from __future__ import annotations

import json
from typing import Any, Callable, Dict, List, Literal, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .logic.builtins import evaluate
from .logic.syntax import format_term
from .logic.terms import Int, Term, Var, term_vars


class BaseValueObject(BaseModel):
    """基底値オブジェクト"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class PEConfig(BaseValueObject):
    """部分評価の制御パラメータ"""

    max_unfold: int = Field(default=20_000, gt=0)  # 1 導出あたりの展開ステップ上限
    max_global: int = Field(default=200, gt=0)
    determinate_first: bool = False
    # 埋め込みで任意の整数どうしを同一視する範囲
    widen: Literal["all", "int", "none"] = "int"
    # 局所制御の停止判定を適用するアトムの選別（None なら全アトム）
    watch: Optional[Callable[[Term], bool]] = Field(default=None, exclude=True)
    prune: bool = True
    entry_name: Optional[str] = None


class EntrySpec(BaseValueObject):
    """残余プログラムの入口 - 述語名と引数ごとのモード（num | var）"""

    predicate: str
    modes: tuple[Literal["num", "var"], ...]
    names: tuple[str, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.modes)

    def __str__(self) -> str:
        args = ",".join(f"{m}({n})" for m, n in zip(self.modes, self.arg_names))
        return f"{self.predicate}({args})"

    @property
    def arg_names(self) -> tuple[str, ...]:
        if self.names:
            return self.names
        return tuple(chr(ord("A") + i) for i in range(self.arity))


class PropertySpec(BaseValueObject):
    """検証する性質 - 許可ステップ集合、停止性、ステップ数上界"""

    kind: Literal["trace-safety", "termination", "cost"]
    allowed: frozenset[str] = frozenset()

    @model_validator(mode="after")
    def _check_allowed(self) -> "PropertySpec":
        if self.kind == "trace-safety" and not self.allowed:
            raise ValueError("trace-safety needs a nonempty set of allowed steps")
        return self


class Verdict(BaseValueObject):
    """三値の検証結果"""

    status: Literal["checked", "false", "unknown"]
    witness: Optional[str] = None
    reason: Optional[str] = None

    @classmethod
    def checked(cls, reason: Optional[str] = None) -> "Verdict":
        return cls(status="checked", reason=reason)

    @classmethod
    def false(cls, witness: str, reason: Optional[str] = None) -> "Verdict":
        return cls(status="false", witness=witness, reason=reason)

    @classmethod
    def unknown(cls, reason: str) -> "Verdict":
        return cls(status="unknown", reason=reason)

    @property
    def exit_code(self) -> int:
        return {"checked": 0, "false": 1, "unknown": 3}[self.status]

    def __str__(self) -> str:
        if self.status == "false" and self.witness:
            return f"false ({self.witness})"
        if self.status == "unknown" and self.reason:
            return f"unknown ({self.reason})"
        return self.status


class CostBound(BaseValueObject):
    """入口引数の式で表したステップ数上界（定数・+・-・*・max）"""

    expression: Term
    names: Dict[Var, str] = Field(default_factory=dict)

    def evaluate(self, values: Mapping[str, int]) -> int:
        by_var = {v: values[n] for v, n in self.names.items() if n in values}

        def walk(t: Term) -> Term:
            return Int(by_var[t]) if isinstance(t, Var) and t in by_var else t

        return evaluate(self.expression, walk, self.expression)

    @property
    def variables(self) -> list[str]:
        return [self.names.get(v, repr(v)) for v in term_vars(self.expression)]

    def __str__(self) -> str:
        return format_term(self.expression, self.names)


class Report(BaseValueObject):
    """パイプライン各段の計測値と判定"""

    stage_times_ms: Dict[str, float] = Field(default_factory=dict)
    residual_clauses: int = Field(default=0, ge=0)
    residual_bytes: int = Field(default=0, ge=0)
    pe_steps: int = Field(default=0, ge=0)
    verdicts: Dict[str, str] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_times(self) -> "Report":
        if any(t < 0 for t in self.stage_times_ms.values()):
            raise ValueError("stage timings must be non-negative")
        return self

    def to_json(self, with_times: bool = True) -> str:
        data: dict[str, Any] = self.model_dump()
        if not with_times:
            data.pop("stage_times_ms")
        return json.dumps(data, indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"{stage}: {ms:.1f} ms" for stage, ms in self.stage_times_ms.items()]
        if self.residual_clauses:
            lines.append(f"residual: {self.residual_clauses} clauses, {self.residual_bytes} bytes")
        if self.pe_steps:
            lines.append(f"pe steps: {self.pe_steps}")
        lines.extend(f"{name}: {verdict}" for name, verdict in self.verdicts.items())
        lines.extend(self.notes)
        return "\n".join(lines)


class PipelineConfig(BaseValueObject):
    """CLI から組み立てるパイプライン設定"""

    inputs: tuple[str, ...] = ()
    method: Optional[str] = None
    args: tuple[str, ...] = ()  # 整数・null・var
    traced: bool = False
    pe: PEConfig = Field(default_factory=PEConfig)
    properties: tuple[PropertySpec, ...] = ()
    out: Optional[str] = None
    wrap_residual: bool = False
