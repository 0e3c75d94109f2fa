"""ドメインサービス - 層の間のインターフェース"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Protocol

from .jvml import ClassDecl
from .program import Program


class ArtifactStore(Protocol):
    """成果物の読み書き（インターフェース）"""

    def read_bytes(self, path: str | Path) -> bytes:
        ...

    def read_text(self, path: str | Path) -> str:
        ...

    def write_text(self, path: str | Path, text: str) -> int:
        """書き出したバイト数を返す"""
        ...


class ClassFileReader(Protocol):
    """クラスファイルのバイト列から解決済みの宣言を作る（インターフェース）"""

    def read(self, data: bytes) -> ClassDecl:
        ...


class FactCodec(Protocol):
    """JVML_r ファクトの書き出しと読み込み（インターフェース）"""

    def emit(self, decls: Iterable[ClassDecl]) -> str:
        ...

    def load(self, text: str) -> Program:
        ...
