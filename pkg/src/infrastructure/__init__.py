"""インフラストラクチャ層"""

from .class_reader import JvmClassReader, read_class
from .fact_codec import PrologFactCodec, emit_facts, load_program
from .file_store import ArtifactError, FileStore

__all__ = [
    "ArtifactError",
    "FileStore",
    "JvmClassReader",
    "PrologFactCodec",
    "emit_facts",
    "load_program",
    "read_class",
]
