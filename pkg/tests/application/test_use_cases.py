from __future__ import annotations

from pathlib import Path

import pytest

from src.application.use_cases import (
    DecompileUseCase,
    ProgramLoader,
    RunUseCase,
    TranslateUseCase,
    VerifyUseCase,
    argument_terms,
    parse_arg,
)
from src.domain.jvml import OBJECT_CLASS
from src.domain.jvmsem import GOOD_STEPS
from src.domain.logic import Atom, Int, parse_term
from src.domain.value_objects import PipelineConfig, PropertySpec
from src.infrastructure import FileStore, JvmClassReader, PrologFactCodec
from src.shared.errors import ArityMismatch, NoSuchMethod


@pytest.fixture
def store() -> FileStore:
    return FileStore()


@pytest.fixture
def loader(store: FileStore) -> ProgramLoader:
    return ProgramLoader(store, JvmClassReader(), PrologFactCodec())


def _paths(class_files: dict[str, Path]) -> list[str]:
    return [str(class_files["Rational"]), str(class_files["Arith"])]


def test_parse_arg():
    assert parse_arg(" 42 ") == 42
    assert parse_arg("-3") == -3
    assert parse_arg("var") is None
    assert parse_arg("null") == "null"
    with pytest.raises(ValueError):
        parse_arg("x")


def test_argument_terms_follow_parameter_kinds(program):
    peek = program.find_method("peek")
    assert argument_terms(peek, ["null"]) == (Atom("null"),)
    with pytest.raises(ValueError):
        argument_terms(peek, [3])
    exp_main = program.find_method("expMain")
    with pytest.raises(ValueError):
        argument_terms(exp_main, [1, "null", 2])
    with pytest.raises(ArityMismatch):
        argument_terms(exp_main, [1, 2])


def test_loader_rejects_empty_input(loader: ProgramLoader):
    with pytest.raises(ValueError):
        loader.decls([])


def test_translate_writes_facts(loader, store, class_files, tmp_path: Path):
    out = tmp_path / "facts.pl"
    result = TranslateUseCase(loader, store, PrologFactCodec()).execute(
        _paths(class_files), str(out)
    )
    outcome = result.unwrap()
    assert out.read_text(encoding="utf-8") == outcome.facts
    assert outcome.bytes_written == out.stat().st_size
    assert "translate" in outcome.report.stage_times_ms


def test_translate_reports_missing_files(loader, store, tmp_path: Path):
    result = TranslateUseCase(loader, store, PrologFactCodec()).execute(
        [str(tmp_path / "absent.class")], None
    )
    assert result.is_failure()


def test_facts_and_class_files_load_the_same_program(loader, class_files, fact_file):
    from_classes = loader.program(_paths(class_files))
    from_facts = loader.program([str(fact_file)])
    assert from_classes.declared == from_facts.declared


def test_run_exp_main(loader, fact_file):
    outcome = RunUseCase(loader, FileStore()).execute(
        [str(fact_file)], "expMain", [2, 3, 2], check_encoding=True
    ).unwrap()
    assert outcome.result == parse_term("ref(loc(2))")
    assert outcome.encoding_agrees is True
    assert outcome.trace[-1] == "areturn_step_ok"


def test_run_needs_ground_arguments(loader, fact_file):
    result = RunUseCase(loader, FileStore()).execute([str(fact_file)], "fact", [None])
    assert result.is_failure()
    assert isinstance(result.error, ValueError)


def test_run_unknown_method(loader, fact_file):
    result = RunUseCase(loader, FileStore()).execute([str(fact_file)], "nothing", [])
    assert isinstance(result.error, NoSuchMethod)


def test_decompile_then_run_the_residual(loader, store, fact_file, tmp_path: Path):
    out = tmp_path / "expMain.pl"
    config = PipelineConfig(inputs=(str(fact_file),), method="expMain", out=str(out))
    outcome = DecompileUseCase(loader, store).execute(config).unwrap()
    assert outcome.inputs == 3
    assert out.read_text(encoding="utf-8") == outcome.text
    assert outcome.report.residual_clauses == len(outcome.residual.clauses)
    assert outcome.report.residual_bytes == out.stat().st_size
    assert set(outcome.report.stage_times_ms) == {"translate", "pe"}
    (note,) = outcome.report.notes
    assert note.startswith("stub classes: ") and OBJECT_CLASS in note

    outputs, steps = RunUseCase(loader, store).execute_residual(str(out), [2, 3, 2]).unwrap()
    assert outputs[0] == parse_term("ref(loc(2))")
    assert steps > 0


def test_decompile_with_a_known_argument(loader, store, fact_file):
    config = PipelineConfig(
        inputs=(str(fact_file),), method="expMain", args=("var", "var", "2")
    )
    outcome = DecompileUseCase(loader, store).execute(config).unwrap()
    assert outcome.inputs == 2
    outputs, _ = outcome.residual.solve([Int(2), Int(3)])  # type: ignore[misc]
    assert outputs[1] == parse_term(
        "heap([obj('Rational',[num(int(2)),num(int(3))]),"
        "obj('Rational',[num(int(4)),num(int(9))])],[])"
    )


def test_decompile_needs_a_method(loader, store, fact_file):
    config = PipelineConfig(inputs=(str(fact_file),))
    assert DecompileUseCase(loader, store).execute(config).is_failure()


def _verify(loader, store) -> VerifyUseCase:
    return VerifyUseCase(DecompileUseCase(loader, store), store)


def test_verify_exp_main_properties(loader, store, fact_file):
    config = PipelineConfig(
        inputs=(str(fact_file),),
        method="expMain",
        properties=(PropertySpec(kind="termination"), PropertySpec(kind="cost")),
    )
    outcome = _verify(loader, store).execute(config).unwrap()
    assert outcome.exit_code == 0
    assert [f.verdict.status for f in outcome.findings] == ["checked", "checked"]
    assert outcome.findings[0].line == ":- checked comp expMain(A,B,C,D,E) + terminates."
    assert outcome.findings[1].bound is not None
    assert set(outcome.report.verdicts) == {"termination", "cost"}
    assert "ana" in outcome.report.stage_times_ms


def test_verify_trace_safety_from_a_residual_file(loader, store, fact_file, tmp_path: Path):
    out = tmp_path / "divide.pl"
    config = PipelineConfig(
        inputs=(str(fact_file),), method="divide", traced=True, out=str(out)
    )
    DecompileUseCase(loader, store).execute(config).unwrap()
    safety = PipelineConfig(
        properties=(PropertySpec(kind="trace-safety", allowed=GOOD_STEPS),)
    )
    outcome = _verify(loader, store).execute(safety, residual_path=str(out)).unwrap()
    assert outcome.exit_code == 1
    (finding,) = outcome.findings
    assert finding.verdict.witness == "ibinop_step_ArithmeticException"
    assert finding.line.startswith(":- false success divide(A,B,C,D,E) => goodtrace(E).")


def test_verify_unknown_termination(loader, store, fact_file):
    config = PipelineConfig(
        inputs=(str(fact_file),),
        method="spin",
        properties=(PropertySpec(kind="termination"), PropertySpec(kind="cost")),
    )
    outcome = _verify(loader, store).execute(config).unwrap()
    assert outcome.exit_code == 3
    assert [f.verdict.status for f in outcome.findings] == ["unknown", "unknown"]
    assert outcome.findings[1].line.startswith(":- unknown comp spin(A,B) + steps_ub(_).")
