"""アプリケーション層 - translate / run / decompile / verify の各段"""

from .use_cases import (
    DecompileUseCase,
    ProgramLoader,
    RunUseCase,
    TranslateUseCase,
    VerifyUseCase,
)

__all__ = [
    "DecompileUseCase",
    "ProgramLoader",
    "RunUseCase",
    "TranslateUseCase",
    "VerifyUseCase",
]
