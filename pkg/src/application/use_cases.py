"""ユースケース実装 - CLI の各段（translate / run / decompile / verify）"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

from loguru import logger

from ..domain.analyze import assertion, default_entry, verify
from ..domain.jvml import ClassDecl, MethodDecl, is_reference_type
from ..domain.jvmsem import MIS, as_clauses, entry_atom, interpret, solve_interpret
from ..domain.jvmsem.clauses import TRACE_POSITIONS, method_label, whistle_filter
from ..domain.logic.terms import Atom, Int, Term, Var, is_ground, mk
from ..domain.peval import ResidualProgram, parse_residual, partial_evaluate
from ..domain.program import Program
from ..domain.services import ArtifactStore, ClassFileReader, FactCodec
from ..domain.value_objects import CostBound, PipelineConfig, PropertySpec, Report, Verdict
from ..shared.errors import ArgumentKindMismatch, ArityMismatch
from ..shared.result import Result

ArgSpec = Union[int, str, None]  # 整数・"null"・None（var）


class _Stopwatch:
    """段ごとの経過時間（ミリ秒）"""

    def __init__(self) -> None:
        self.times: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.times[name] = (time.perf_counter() - start) * 1000.0


def parse_arg(text: str) -> ArgSpec:
    text = text.strip()
    if text == "var":
        return None
    if text == "null":
        return "null"
    return int(text)


def _kinds(method: MethodDecl) -> list[Optional[Term]]:
    """引数ごとの型（インスタンスメソッドの受け手は None）"""
    return ([] if method.static else [None]) + list(method.params)


def _is_reference(kind: Optional[Term]) -> bool:
    return kind is None or is_reference_type(kind)


def _arg_term(method: str, spec: ArgSpec, kind: Optional[Term], name: str) -> Term:
    if spec is None:
        return Var(name) if _is_reference(kind) else mk("num", mk("int", Var(name)))
    if spec == "null":
        if not _is_reference(kind):
            raise ArgumentKindMismatch(method, name, "is an int; null is not allowed")
        return Atom("null")
    if _is_reference(kind):
        raise ArgumentKindMismatch(
            method, name, "is a reference; only null or var is allowed"
        )
    return mk("num", mk("int", Int(int(spec))))


def argument_terms(method: MethodDecl, specs: Sequence[ArgSpec]) -> tuple[Term, ...]:
    kinds = _kinds(method)
    if len(specs) != len(kinds):
        raise ArityMismatch(method.qualified_name, len(kinds), len(specs))
    return tuple(
        _arg_term(method.qualified_name, spec, kind, chr(ord("A") + i))
        for i, (spec, kind) in enumerate(zip(specs, kinds))
    )


class ProgramLoader:
    """.class はクラスリーダで、それ以外はファクトとして読む"""

    def __init__(self, store: ArtifactStore, reader: ClassFileReader, codec: FactCodec) -> None:
        self._store = store
        self._reader = reader
        self._codec = codec

    def decls(self, inputs: Sequence[str]) -> list[ClassDecl]:
        if not inputs:
            raise ValueError("no input files")
        decls: list[ClassDecl] = []
        for path in inputs:
            if path.endswith(".class"):
                decls.append(self._reader.read(self._store.read_bytes(path)))
            else:
                decls.extend(self._codec.load(self._store.read_text(path)).declared)
        logger.info("read {} classes from {} files", len(decls), len(inputs))
        return decls

    def program(self, inputs: Sequence[str]) -> Program:
        return Program(self.decls(inputs))


# --- translate --------------------------------------------------------------


@dataclass
class TranslateOutcome:
    facts: str
    bytes_written: int
    report: Report


class TranslateUseCase:
    """クラスファイルを JVML_r ファクトに変換する"""

    def __init__(self, loader: ProgramLoader, store: ArtifactStore, codec: FactCodec) -> None:
        self._loader = loader
        self._store = store
        self._codec = codec

    def execute(
        self, inputs: Sequence[str], out: Optional[str]
    ) -> Result[TranslateOutcome, Exception]:
        watch = _Stopwatch()
        try:
            with watch.stage("translate"):
                decls = self._loader.decls(inputs)
                facts = self._codec.emit(decls)
            written = self._store.write_text(out, facts) if out else len(facts.encode("utf-8"))
            report = Report(
                stage_times_ms=watch.times,
                residual_bytes=0,
                notes=[f"facts: {written} bytes"],
            )
            return Result.success(TranslateOutcome(facts, written, report))
        except Exception as e:
            logger.error("translate failed: {}", e)
            return Result.failure(e)


# --- run --------------------------------------------------------------------


@dataclass
class RunOutcome:
    result: Term
    heap: Term
    trace: list[str]
    encoding_agrees: Optional[bool] = None


class RunUseCase:
    """MIS をネイティブインタプリタで実行する（節表現・残余プログラムとの照合も可）"""

    def __init__(self, loader: ProgramLoader, store: ArtifactStore) -> None:
        self._loader = loader
        self._store = store

    def execute(
        self,
        inputs: Sequence[str],
        method: str,
        args: Sequence[ArgSpec],
        check_encoding: bool = False,
        budget: Optional[int] = None,
    ) -> Result[RunOutcome, Exception]:
        try:
            program = self._loader.program(inputs)
            decl = program.find_method(method)
            assert decl.body is not None
            terms = argument_terms(decl, args)
            if not all(is_ground(t) for t in terms):
                raise ValueError("run needs ground arguments")
            mis = MIS(method=decl.body.method_id, args=terms)
            run = interpret(program, mis, budget, raise_uncaught=False)
            outcome = RunOutcome(run.result, run.heap, run.trace)
            if check_encoding:
                answer = solve_interpret(as_clauses(program, traced=True), program, mis)
                outcome.encoding_agrees = answer is not None and (
                    answer[0] == run.result and answer[1] == run.heap and answer[2] == run.trace
                )
                logger.info("clause encoding agrees with native run: {}", outcome.encoding_agrees)
            return Result.success(outcome)
        except Exception as e:
            logger.error("run failed: {}", e)
            return Result.failure(e)

    def execute_residual(
        self, path: str, inputs: Sequence[int], budget: int = 1_000_000
    ) -> Result[tuple[tuple[Term, ...], int], Exception]:
        """残余プログラムの入口を整数入力で解く（出力引数と解決ステップ数）"""
        try:
            residual = parse_residual(self._store.read_text(path))
            answer = residual.solve([Int(n) for n in inputs], budget)
            if answer is None:
                raise ValueError(f"{residual.entry.name} has no answer for {list(inputs)}")
            return Result.success(answer)
        except Exception as e:
            logger.error("residual run failed: {}", e)
            return Result.failure(e)


# --- decompile --------------------------------------------------------------


@dataclass
class DecompileOutcome:
    residual: ResidualProgram
    text: str
    report: Report
    inputs: int = 0


class DecompileUseCase:
    """インタプリタの節表現をメソッドについて部分評価する"""

    def __init__(self, loader: ProgramLoader, store: ArtifactStore) -> None:
        self._loader = loader
        self._store = store

    def execute(self, config: PipelineConfig) -> Result[DecompileOutcome, Exception]:
        watch = _Stopwatch()
        try:
            with watch.stage("translate"):
                program = self._loader.program(config.inputs)
            if config.method is None:
                raise ValueError("decompile needs a method")
            decl = program.find_method(config.method)
            if config.args:
                specs = [parse_arg(a) for a in config.args]
            else:
                specs = [None] * len(_kinds(decl))
            with watch.stage("pe"):
                residual = specialize(program, decl, specs, config)
            text = residual.text()
            if config.out:
                written = self._store.write_text(config.out, text)
            else:
                written = len(text.encode("utf-8"))
            report = Report(
                stage_times_ms=watch.times,
                residual_clauses=len(residual.clauses),
                residual_bytes=written,
                pe_steps=residual.steps,
                notes=_program_notes(program),
            )
            inputs = sum(1 for s in specs if s is None)
            return Result.success(DecompileOutcome(residual, text, report, inputs))
        except Exception as e:
            logger.error("decompile failed: {}", e)
            return Result.failure(e)


def specialize(
    program: Program, decl: MethodDecl, specs: Sequence[ArgSpec], config: PipelineConfig
) -> ResidualProgram:
    """メソッドの入口アトムを作り、節表現を部分評価する"""
    store = as_clauses(program, traced=config.traced, wrap=config.wrap_residual)
    entry = entry_atom(program, decl, traced=config.traced, args=argument_terms(decl, specs))
    pe = config.pe
    if pe.watch is None:
        pe = pe.model_copy(update={"watch": whistle_filter(program)})
    logger.info("specializing {} (traced={})", decl.qualified_name, config.traced)
    return partial_evaluate(store, entry, pe, method_label(decl), TRACE_POSITIONS)


# --- verify -----------------------------------------------------------------


@dataclass
class Finding:
    spec: PropertySpec
    verdict: Verdict
    line: str
    bound: Optional[CostBound] = None


@dataclass
class VerifyOutcome:
    findings: list[Finding]
    report: Report
    residual: Optional[ResidualProgram] = None
    notes: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        """false が 1 つでもあれば 1、unknown があれば 3、すべて checked なら 0"""
        statuses = {f.verdict.status for f in self.findings}
        if "false" in statuses:
            return 1
        if "unknown" in statuses:
            return 3
        return 0


class VerifyUseCase:
    """残余プログラム（既存ファイルまたはその場で部分評価したもの）を検証する"""

    def __init__(self, decompile: DecompileUseCase, store: ArtifactStore) -> None:
        self._decompile = decompile
        self._store = store

    def execute(
        self, config: PipelineConfig, residual_path: Optional[str] = None
    ) -> Result[VerifyOutcome, Exception]:
        watch = _Stopwatch()
        try:
            if residual_path is not None:
                residual = parse_residual(self._store.read_text(residual_path))
                times: dict[str, float] = {}
                inputs = _leading_inputs(residual)
                pe_steps = 0
                notes: list[str] = []
            else:
                decompiled = self._decompile.execute(config)
                if decompiled.is_failure():
                    return Result.failure(decompiled.error)
                outcome = decompiled.unwrap()
                residual, inputs = outcome.residual, outcome.inputs
                times = dict(outcome.report.stage_times_ms)
                pe_steps = outcome.report.pe_steps
                notes = list(outcome.report.notes)
            entry = default_entry(residual, inputs)
            findings: list[Finding] = []
            with watch.stage("ana"):
                for spec in config.properties:
                    verdict, bound = verify(residual, entry, spec)
                    trace_arg = residual.entry.trace_args[0] if residual.entry.trace_args else None
                    line = assertion(entry, spec, verdict, trace_arg)
                    logger.info("{}: {}", spec.kind, verdict)
                    findings.append(Finding(spec, verdict, line, bound))
            times.update(watch.times)
            report = Report(
                stage_times_ms=times,
                residual_clauses=len(residual.clauses),
                residual_bytes=residual.size,
                pe_steps=pe_steps,
                verdicts={f.spec.kind: str(f.verdict) for f in findings},
                notes=notes,
            )
            return Result.success(VerifyOutcome(findings, report, residual))
        except Exception as e:
            logger.error("verify failed: {}", e)
            return Result.failure(e)


def _program_notes(program: Program) -> list[str]:
    if not program.builtin_classes:
        return []
    return ["stub classes: " + ", ".join(program.builtin_classes)]


def _leading_inputs(residual: ResidualProgram) -> int:
    """読み戻した残余プログラムの入力引数の数（入口は入力・結果・ヒープ・トレースの順）"""
    if residual.entry.trace_args:
        return max(min(residual.entry.trace_args) - 2, 0)
    return max(residual.entry.arity - 2, 0)
