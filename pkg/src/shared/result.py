"""Result型 - パイプライン各段の成功/失敗を値として運ぶ"""

from __future__ import annotations

from typing import Generic, TypeVar, Union

T = TypeVar("T")
E = TypeVar("E")


class Result(Generic[T, E]):
    """Either型: 成功値かエラーのどちらか一方を保持する"""

    __slots__ = ("_value", "_is_success")

    def __init__(self, value: Union[T, E], is_success: bool) -> None:
        self._value = value
        self._is_success = is_success

    @classmethod
    def success(cls, value: T) -> Result[T, E]:
        """成功を表すResultを作成"""
        return cls(value, True)

    @classmethod
    def failure(cls, error: E) -> Result[T, E]:
        """失敗を表すResultを作成"""
        return cls(error, False)

    def is_success(self) -> bool:
        return self._is_success

    def is_failure(self) -> bool:
        return not self._is_success

    @property
    def error(self) -> E:
        """エラー値を取得（成功の場合は例外）"""
        if self._is_success:
            raise ValueError("Result is success; no error to read")
        return self._value  # type: ignore[return-value]

    def unwrap(self) -> T:
        """値を取得（失敗の場合は保持している例外を送出）"""
        if self._is_success:
            return self._value  # type: ignore[return-value]
        if isinstance(self._value, BaseException):
            raise self._value
        raise ValueError(f"Result is failure: {self._value}")

    def __repr__(self) -> str:
        if self._is_success:
            return f"Success({self._value!r})"
        return f"Failure({self._value!r})"
