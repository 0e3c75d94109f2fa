"""アプリケーション設定 - 環境変数と .env から読み込む"""

from __future__ import annotations

from functools import lru_cache
from typing import Literal

from dotenv import find_dotenv, load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """パイプライン全体の既定値（CLI フラグで上書き可能）"""

    model_config = SettingsConfigDict(
        env_prefix="JVM_BY_PE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    log_level: str = "WARNING"
    solve_budget: int = Field(default=1_000_000, gt=0)
    max_unfold: int = Field(default=20_000, gt=0)
    max_global: int = Field(default=200, gt=0)
    wrap_residual: bool = False
    report_format: Literal["json", "text"] = "text"


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """設定を取得（プロセス内で一度だけ構築）

    カレントディレクトリから上へ探した .env を環境変数に読み込んでから構築する。
    すでに設定されている環境変数は上書きしない。
    """
    load_dotenv(find_dotenv(usecwd=True), override=False)
    return Settings()
