from __future__ import annotations

from pathlib import Path

import pytest

from src.domain.program import Program
from src.infrastructure import emit_facts, read_class
from src.shared.logging import configure_logging

from .support.fixtures import arith_bytes, rational_bytes


@pytest.fixture(autouse=True, scope="session")
def _quiet_logs() -> None:
    configure_logging("WARNING")


@pytest.fixture(scope="session")
def rational_program() -> Program:
    return Program([read_class(rational_bytes())])


@pytest.fixture(scope="session")
def program() -> Program:
    """Rational と Arith の両方"""
    return Program([read_class(rational_bytes()), read_class(arith_bytes())])


@pytest.fixture
def class_files(tmp_path: Path) -> dict[str, Path]:
    paths = {"Rational": tmp_path / "Rational.class", "Arith": tmp_path / "Arith.class"}
    paths["Rational"].write_bytes(rational_bytes())
    paths["Arith"].write_bytes(arith_bytes())
    return paths


@pytest.fixture
def fact_file(tmp_path: Path) -> Path:
    path = tmp_path / "program.pl"
    decls = [read_class(rational_bytes()), read_class(arith_bytes())]
    path.write_text(emit_facts(decls), encoding="utf-8")
    return path
