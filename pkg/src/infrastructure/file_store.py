"""段間の成果物（クラスファイル・ファクト・残余プログラム・レポート）の入出力"""

from __future__ import annotations

from pathlib import Path

from loguru import logger

from src.shared.errors import JvmByPeError


class ArtifactError(JvmByPeError):
    def __init__(self, path: Path, reason: str) -> None:
        self.path = path
        super().__init__(f"{path}: {reason}")


class FileStore:
    """ファイルシステム上の成果物ストア"""

    def __init__(self, root: Path | None = None) -> None:
        self.root = root

    def _path(self, path: str | Path) -> Path:
        p = Path(path)
        if self.root is not None and not p.is_absolute():
            p = self.root / p
        return p

    def read_bytes(self, path: str | Path) -> bytes:
        p = self._path(path)
        try:
            return p.read_bytes()
        except OSError as e:
            raise ArtifactError(p, e.strerror or "unreadable") from e

    def read_text(self, path: str | Path) -> str:
        return self.read_bytes(path).decode("utf-8")

    def write_text(self, path: str | Path, text: str) -> int:
        """UTF-8 で書き出し、書いたバイト数を返す"""
        p = self._path(path)
        data = text.encode("utf-8")
        try:
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_bytes(data)
        except OSError as e:
            raise ArtifactError(p, e.strerror or "unwritable") from e
        logger.debug("wrote {} ({} bytes)", p, len(data))
        return len(data)
