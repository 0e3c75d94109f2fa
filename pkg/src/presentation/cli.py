"""コマンドラインインターフェース - translate / run / decompile / verify"""

from __future__ import annotations

import argparse
import re
import sys
from typing import Optional, Sequence, TextIO

from loguru import logger

from ..application.use_cases import (
    DecompileUseCase,
    ProgramLoader,
    RunUseCase,
    TranslateUseCase,
    VerifyUseCase,
    parse_arg,
)
from ..domain.jvmsem import GOOD_STEPS
from ..domain.logic import format_term
from ..domain.value_objects import PEConfig, PipelineConfig, PropertySpec, Report
from ..infrastructure import FileStore, JvmClassReader, PrologFactCodec
from ..shared.config import Settings, get_settings
from ..shared.logging import configure_logging

EXIT_ERROR = 2
PROPERTIES = ("trace-safety", "termination", "cost")


class _Services:
    """ユースケースの組み立て"""

    def __init__(self, store: Optional[FileStore] = None) -> None:
        self.store = store or FileStore()
        codec = PrologFactCodec()
        loader = ProgramLoader(self.store, JvmClassReader(), codec)
        self.translate = TranslateUseCase(loader, self.store, codec)
        self.run = RunUseCase(loader, self.store)
        self.decompile = DecompileUseCase(loader, self.store)
        self.verify = VerifyUseCase(self.decompile, self.store)


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the stage artifact to this file instead of stdout")
    common.add_argument(
        "--report",
        choices=("json", "text"),
        default=settings.report_format,
        help="format of the report printed to stderr",
    )
    common.add_argument("--log-level", default=settings.log_level)

    method = argparse.ArgumentParser(add_help=False)
    method.add_argument("inputs", nargs="*", help=".class files or fact files")
    method.add_argument("--method", help="method as name or Class.name")
    method.add_argument("--args", default="", help="comma separated integers, null or var")
    method.add_argument("--traced", action="store_true", help="use the traced encoding")

    pe = argparse.ArgumentParser(add_help=False)
    pe.add_argument("--max-unfold", type=int, default=settings.max_unfold)
    pe.add_argument("--max-global", type=int, default=settings.max_global)
    pe.add_argument(
        "--wrap-residual",
        action=argparse.BooleanOptionalAction,
        default=settings.wrap_residual,
        help="keep 32-bit masking in residual arithmetic",
    )
    pe.add_argument("--determinate-first", action="store_true")
    pe.add_argument("--no-prune", dest="prune", action="store_false")
    pe.add_argument("--entry-name", help="name of the residual entry predicate")

    parser = argparse.ArgumentParser(
        prog="jvm-by-pe",
        description="Decompile JVM bytecode by partial evaluation and verify the result",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", parents=[common], help="class files to JVML_r facts")
    p.add_argument("inputs", nargs="*", help=".class files")

    p = sub.add_parser("run", parents=[common, method], help="run a method on ground arguments")
    p.add_argument("--trace", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--check-encoding", action="store_true", help="also solve the clause encoding")
    p.add_argument("--residual", help="solve an emitted residual program instead")
    p.add_argument("--budget", type=int, default=settings.solve_budget)

    p = sub.add_parser(
        "decompile", parents=[common, method, pe], help="residual program of a method"
    )
    p.add_argument("--emit", dest="out_alias", help="same as --out")

    p = sub.add_parser("verify", parents=[common, method, pe], help="check properties")
    p.add_argument("--property", action="append", choices=PROPERTIES, dest="properties")
    p.add_argument("--allowed", help="file with the allowed step names")
    p.add_argument("--residual", help="verify a residual written by an earlier decompile")
    return parser


def _pe_config(ns: argparse.Namespace) -> PEConfig:
    return PEConfig(
        max_unfold=ns.max_unfold,
        max_global=ns.max_global,
        determinate_first=ns.determinate_first,
        prune=ns.prune,
        entry_name=ns.entry_name,
    )


def _split_args(text: str) -> tuple[str, ...]:
    return tuple(a.strip() for a in text.split(",") if a.strip())


def _pipeline(
    ns: argparse.Namespace, properties: Sequence[PropertySpec] = (), out: Optional[str] = None
) -> PipelineConfig:
    traced = ns.traced or any(p.kind == "trace-safety" for p in properties)
    return PipelineConfig(
        inputs=tuple(ns.inputs),
        method=ns.method,
        args=_split_args(ns.args),
        traced=traced,
        pe=_pe_config(ns),
        properties=tuple(properties),
        out=out,
        wrap_residual=ns.wrap_residual,
    )


def _emit(text: str, stream: TextIO) -> None:
    stream.write(text if text.endswith("\n") else text + "\n")


def _print_report(report: Report, fmt: str, stream: TextIO) -> None:
    _emit(report.to_json() if fmt == "json" else report.to_text(), stream)


def _fail(error: Exception, err: TextIO) -> int:
    _emit(f"error: {error}", err)
    return EXIT_ERROR


def _allowed(services: _Services, path: Optional[str]) -> frozenset[str]:
    if path is None:
        return GOOD_STEPS
    names = re.split(r"[\s,]+", services.store.read_text(path))
    return frozenset(n for n in names if n)


def _properties(ns: argparse.Namespace, allowed: frozenset[str]) -> list[PropertySpec]:
    kinds = ns.properties or (
        ["trace-safety"] if ns.traced else ["termination", "cost"]
    )
    return [
        PropertySpec(kind=k, allowed=allowed if k == "trace-safety" else frozenset())
        for k in kinds
    ]


def cmd_translate(ns: argparse.Namespace, services: _Services, out: TextIO, err: TextIO) -> int:
    result = services.translate.execute(ns.inputs, ns.out)
    if result.is_failure():
        return _fail(result.error, err)
    outcome = result.unwrap()
    if ns.out is None:
        _emit(outcome.facts, out)
    _print_report(outcome.report, ns.report, err)
    return 0


def cmd_run(ns: argparse.Namespace, services: _Services, out: TextIO, err: TextIO) -> int:
    if ns.residual is not None:
        try:
            inputs = [int(a) for a in _split_args(ns.args)]
        except ValueError as e:
            return _fail(e, err)
        answer = services.run.execute_residual(ns.residual, inputs, ns.budget)
        if answer.is_failure():
            return _fail(answer.error, err)
        outputs, steps = answer.unwrap()
        for i, term in enumerate(outputs):
            _emit(f"Out{i} = {format_term(term)}", out)
        _emit(f"% {steps} resolution steps", out)
        return 0
    if ns.method is None:
        return _fail(ValueError("run needs --method or --residual"), err)
    try:
        specs = [parse_arg(a) for a in _split_args(ns.args)]
    except ValueError as e:
        return _fail(e, err)
    result = services.run.execute(ns.inputs, ns.method, specs, ns.check_encoding, ns.budget)
    if result.is_failure():
        return _fail(result.error, err)
    outcome = result.unwrap()
    _emit(f"Result = {format_term(outcome.result)}", out)
    _emit(f"Heap = {format_term(outcome.heap)}", out)
    if ns.trace:
        _emit(f"Trace = [{','.join(outcome.trace)}]", out)
    if outcome.encoding_agrees is False:
        _emit("error: clause encoding disagrees with the native interpreter", err)
        return EXIT_ERROR
    return 0


def cmd_decompile(ns: argparse.Namespace, services: _Services, out: TextIO, err: TextIO) -> int:
    if ns.out is None and ns.out_alias is not None:
        ns.out = ns.out_alias
    config = _pipeline(ns, out=ns.out)
    result = services.decompile.execute(config)
    if result.is_failure():
        return _fail(result.error, err)
    outcome = result.unwrap()
    if ns.out is None:
        _emit(outcome.text, out)
    _print_report(outcome.report, ns.report, err)
    return 0


def cmd_verify(ns: argparse.Namespace, services: _Services, out: TextIO, err: TextIO) -> int:
    try:
        properties = _properties(ns, _allowed(services, ns.allowed))
    except Exception as e:
        return _fail(e, err)
    config = _pipeline(ns, properties)
    if ns.residual is None and ns.method is None:
        return _fail(ValueError("verify needs --method or --residual"), err)
    result = services.verify.execute(config, ns.residual)
    if result.is_failure():
        return _fail(result.error, err)
    outcome = result.unwrap()
    lines = [f.line for f in outcome.findings]
    if ns.out is not None:
        services.store.write_text(ns.out, "\n".join(lines) + "\n")
    for line in lines:
        _emit(line, out)
    _print_report(outcome.report, ns.report, err)
    return outcome.exit_code


_COMMANDS = {
    "translate": cmd_translate,
    "run": cmd_run,
    "decompile": cmd_decompile,
    "verify": cmd_verify,
}


def main(
    argv: Optional[Sequence[str]] = None,
    out: TextIO = sys.stdout,
    err: TextIO = sys.stderr,
    services: Optional[_Services] = None,
) -> int:
    """CLI 本体 - 終了コードを返す（0 checked/成功, 1 false, 3 unknown, 2 エラー）"""
    settings = get_settings()
    parser = build_parser(settings)
    ns = parser.parse_args(argv)
    configure_logging(ns.log_level)
    if ns.command == "translate" and not ns.inputs:
        parser.error("translate needs at least one class file")
    logger.info("jvm-by-pe {}", ns.command)
    return _COMMANDS[ns.command](ns, services or _Services(), out, err)
