from __future__ import annotations

from pathlib import Path

import pytest

from src.infrastructure import ArtifactError, FileStore


def test_write_then_read(tmp_path: Path):
    store = FileStore()
    target = tmp_path / "out" / "residual.pl"
    written = store.write_text(target, "p(1).\n% ü\n")
    assert written == len("p(1).\n% ü\n".encode("utf-8"))
    assert store.read_text(target) == "p(1).\n% ü\n"


def test_relative_paths_use_the_root(tmp_path: Path):
    store = FileStore(root=tmp_path)
    store.write_text("facts.pl", "program([],[]).\n")
    assert (tmp_path / "facts.pl").exists()
    assert store.read_bytes("facts.pl").startswith(b"program")


def test_missing_file(tmp_path: Path):
    with pytest.raises(ArtifactError) as info:
        FileStore().read_bytes(tmp_path / "absent.class")
    assert info.value.path == tmp_path / "absent.class"
