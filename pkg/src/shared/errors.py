"""例外階層 - すべてのドメインエラーは JvmByPeError から派生する"""

from __future__ import annotations

from typing import Any, Sequence


class JvmByPeError(Exception):
    """ツールキット共通の基底例外"""


# --- classfile -------------------------------------------------------------


class ClassFileError(JvmByPeError):
    """クラスファイル読み込みエラー（バイトオフセット付き）"""

    def __init__(self, message: str, offset: int | None = None) -> None:
        self.offset = offset
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")


class BadMagic(ClassFileError):
    def __init__(self, found: int, offset: int = 0) -> None:
        self.found = found
        super().__init__(f"bad magic 0x{found:08X}", offset)


class TruncatedFile(ClassFileError):
    def __init__(self, needed: int, offset: int) -> None:
        self.needed = needed
        super().__init__(f"truncated file: {needed} more byte(s) expected", offset)


class BadPoolEntry(ClassFileError):
    def __init__(self, index: int, reason: str, offset: int | None = None) -> None:
        self.index = index
        super().__init__(f"bad constant pool entry #{index}: {reason}", offset)


class UnsupportedVersion(ClassFileError):
    def __init__(self, major: int, minor: int, offset: int = 4) -> None:
        self.major = major
        self.minor = minor
        super().__init__(f"unsupported class file version {major}.{minor}", offset)


class DanglingPoolRef(ClassFileError):
    def __init__(self, index: int, expected: str) -> None:
        self.index = index
        self.expected = expected
        super().__init__(f"pool reference #{index} does not name a {expected}")


class MalformedDescriptor(ClassFileError):
    def __init__(self, text: str) -> None:
        self.text = text
        super().__init__(f"malformed descriptor {text!r}")


class UnsupportedOpcode(ClassFileError):
    def __init__(self, opcode: int, pc: int, reason: str = "") -> None:
        self.opcode = opcode
        self.pc = pc
        detail = f" ({reason})" if reason else ""
        super().__init__(f"unsupported opcode 0x{opcode:02X} at pc {pc}{detail}")


class FactParseError(JvmByPeError):
    """ファクトファイルの構文/意味エラー"""

    def __init__(self, line: int, reason: str) -> None:
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicatePc(JvmByPeError):
    def __init__(self, method: Any, pc: int) -> None:
        self.method = method
        self.pc = pc
        super().__init__(f"duplicate pc {pc} in method {method}")


class NoSuchInstruction(JvmByPeError):
    def __init__(self, method: Any, pc: int) -> None:
        self.method = method
        self.pc = pc
        super().__init__(f"no instruction at pc {pc} of method {method}")


class IncoherentCode(JvmByPeError):
    """pc が連続しない、または分岐先に命令がないメソッド本体"""

    def __init__(self, method: Any, problems: Sequence[str]) -> None:
        self.method = method
        self.problems = list(problems)
        super().__init__(f"incoherent code in method {method}: {'; '.join(self.problems)}")


# --- logic -------------------------------------------------------------------


class LogicError(JvmByPeError):
    """解決エンジンのエラー"""


class BudgetExhausted(LogicError):
    def __init__(self, steps: int, partial: Sequence[Any] = ()) -> None:
        self.steps = steps
        self.partial = list(partial)
        super().__init__(f"step budget exhausted after {steps} steps")


class InstantiationError(LogicError):
    def __init__(self, literal: Any) -> None:
        self.literal = literal
        super().__init__(f"insufficiently instantiated: {literal}")


class EvaluationError(LogicError):
    """算術式を評価できない（0 除算・負のシフト量）"""

    def __init__(self, expression: Any, reason: str) -> None:
        self.expression = expression
        super().__init__(f"{reason} in {expression}")


class ZeroDivisor(EvaluationError):
    def __init__(self, expression: Any) -> None:
        super().__init__(expression, "division by zero")


class SyntaxError_(LogicError):
    """節テキストの構文エラー"""

    def __init__(self, line: int, column: int, reason: str) -> None:
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"{line}:{column}: {reason}")


# --- jvmsem ------------------------------------------------------------------


class SemanticsError(JvmByPeError):
    """インタプリタのエラー"""


class NoSuchMethod(SemanticsError):
    def __init__(self, method: Any) -> None:
        self.method = method
        super().__init__(f"no such method (or method has no body): {method}")


class ArityMismatch(SemanticsError):
    def __init__(self, method: Any, expected: int, got: int) -> None:
        self.expected = expected
        self.got = got
        super().__init__(f"{method} expects {expected} argument(s), got {got}")


class ArgumentKindMismatch(SemanticsError, ValueError):
    """int を参照の位置に渡した（またはその逆）"""

    def __init__(self, method: Any, name: str, reason: str) -> None:
        self.name = name
        super().__init__(f"{method}: argument {name} {reason}")


class Stuck(SemanticsError):
    """不正な状態（トランスレータの不具合を示す）"""

    def __init__(self, reason: str, trace: Sequence[str] = ()) -> None:
        self.reason = reason
        self.trace = list(trace)
        super().__init__(f"stuck: {reason}")


class UncaughtException(SemanticsError):
    def __init__(
        self,
        class_name: str,
        trace: Sequence[str],
        location: int,
        state: Any = None,
    ) -> None:
        self.class_name = class_name
        self.trace = list(trace)
        self.location = location
        self.state = state
        super().__init__(f"uncaught {class_name}")


# --- peval / analyze -----------------------------------------------------------


class GlobalLimitHit(JvmByPeError):
    def __init__(self, atoms: int, pending: Sequence[Any] = ()) -> None:
        self.atoms = atoms
        self.pending = list(pending)
        super().__init__(f"global set exceeded {atoms} atoms")


class NotTraced(JvmByPeError):
    def __init__(self, entry: str) -> None:
        self.entry = entry
        super().__init__(f"residual program for {entry} carries no trace argument")


class AccumulatorLimitation(JvmByPeError):
    def __init__(self, predicate: str, reason: str) -> None:
        self.predicate = predicate
        self.reason = reason
        super().__init__(f"cost of {predicate} depends on output sizes: {reason}")
