"""ロギング設定"""

from __future__ import annotations

import sys

from loguru import logger

_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <7}</level> | "
    "<cyan>{name}</cyan> - {message}"
)


def configure_logging(level: str = "WARNING") -> None:
    """loguru のシンクを stderr 一本に張り替える"""
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=_FORMAT, backtrace=False)
