"""ステップ名の語彙

通常の遷移と例外的な遷移は別のアトムで区別する。
"""

from __future__ import annotations

NPE = "NullPointerException"
ARITH = "ArithmeticException"
AIOOBE = "ArrayIndexOutOfBoundsException"
NASE = "NegativeArraySizeException"
CCE = "ClassCastException"

BRANCH_FAMILIES = ("if0", "if_icmp", "ifnull", "ifnonnull", "if_acmpeq", "if_acmpne")
ARRAY_LOADS = ("iaload", "baload", "saload", "aaload")
ARRAY_STORES = ("iastore", "bastore", "sastore", "aastore")


def ok(name: str) -> str:
    return f"{name}_step_ok"


def failed(name: str, exception: str) -> str:
    return f"{name}_step_{exception}"


def jump(name: str) -> str:
    return f"{name}_step_jump"


def fallthrough(name: str) -> str:
    return f"{name}_step_continue"


def _vocabulary() -> frozenset[str]:
    names = {"iload_step", "iinc_step", "invokespecial_step_here_ok", "normal_end"}
    for plain in (
        "nop",
        "aconst_null",
        "const",
        "aload",
        "istore",
        "astore",
        "goto",
        "ibinop",
        "ineg",
        "i2b",
        "i2s",
        "getstatic",
        "putstatic",
        "new",
        "instanceof",
        "dup",
        "dup_x1",
        "dup_x2",
        "pop",
        "pop2",
        "swap",
        "invokestatic",
        "return",
        "ireturn",
        "areturn",
    ):
        names.add(ok(plain))
    for family in BRANCH_FAMILIES:
        names.update((jump(family), fallthrough(family)))
    for name in ("getfield", "putfield", "arraylength", "invokevirtual", "athrow"):
        names.update((ok(name), failed(name, NPE)))
    names.add(failed("invokespecial", NPE))
    names.add(failed("ibinop", ARITH))
    names.update((ok("checkcast"), failed("checkcast", CCE)))
    for name in ("newarray", "anewarray", "multianewarray"):
        names.update((ok(name), failed(name, NASE)))
    for name in (*ARRAY_LOADS, *ARRAY_STORES):
        names.update((ok(name), failed(name, NPE), failed(name, AIOOBE)))
    return frozenset(names)


STEP_NAMES: frozenset[str] = _vocabulary()

# 例外を起こさない実行だけが通るステップ
GOOD_STEPS: frozenset[str] = frozenset(
    {
        "iinc_step",
        "aload_step_ok",
        "invokevirtual_step_ok",
        "iload_step",
        "if0_step_jump",
        "invokestatic_step_ok",
        "normal_end",
        "const_step_ok",
        "if0_step_continue",
        "new_step_ok",
        "return_step_ok",
        "if_icmp_step_jump",
        "pop_step_ok",
        "astore_step_ok",
        "putfield_step_ok",
        "dup_step_ok",
        "istore_step_ok",
        "getfield_step_ok",
        "goto_step_ok",
        "ibinop_step_ok",
        "if_icmp_step_continue",
        "areturn_step_ok",
        "invokespecial_step_here_ok",
    }
)
