"""テスト用クラス - Rational（実行例）と小さな静的メソッド群"""

from __future__ import annotations

from .classgen import ACC_PUBLIC, ACC_STATIC, ClassSpec, FieldSpec, MethodSpec, build_class

STATIC = ACC_PUBLIC | ACC_STATIC


def rational() -> ClassSpec:
    init = MethodSpec(
        "<init>",
        "(II)V",
        [
            ("aload", 0),
            ("invokespecial", "java/lang/Object", "<init>", "()V"),
            ("aload", 0),
            ("iload", 1),
            ("putfield", "Rational", "num", "I"),
            ("aload", 0),
            ("iload", 2),
            ("putfield", "Rational", "den", "I"),
            ("return",),
        ],
        max_stack=2,
        max_locals=3,
    )
    exp = MethodSpec(
        "exp",
        "(I)LRational;",
        [
            ("iconst_1",),
            ("istore", 2),
            ("iconst_1",),
            ("istore", 3),
            "loop:",
            ("iload", 1),
            ("ifle", "done"),
            ("iload", 2),
            ("aload", 0),
            ("getfield", "Rational", "num", "I"),
            ("imul",),
            ("istore", 2),
            ("iload", 3),
            ("aload", 0),
            ("getfield", "Rational", "den", "I"),
            ("imul",),
            ("istore", 3),
            ("iinc", 1, -1),
            ("goto", "loop"),
            "done:",
            ("new", "Rational"),
            ("dup",),
            ("iload", 2),
            ("iload", 3),
            ("invokespecial", "Rational", "<init>", "(II)V"),
            ("areturn",),
        ],
        max_stack=4,
        max_locals=4,
    )
    exp_main = MethodSpec(
        "expMain",
        "(III)LRational;",
        [
            ("new", "Rational"),
            ("dup",),
            ("iload", 0),
            ("iload", 1),
            ("invokespecial", "Rational", "<init>", "(II)V"),
            ("iload", 2),
            ("invokevirtual", "Rational", "exp", "(I)LRational;"),
            ("areturn",),
        ],
        max_stack=4,
        max_locals=3,
        access=STATIC,
    )
    return ClassSpec(
        "Rational",
        fields=[FieldSpec("num", "I"), FieldSpec("den", "I")],
        methods=[init, exp, exp_main],
    )


def arith() -> ClassSpec:
    methods = [
        MethodSpec(
            "straight",
            "(II)I",
            [("iload", 0), ("iload", 1), ("iadd",), ("iconst_2",), ("imul",), ("ireturn",)],
            access=STATIC,
        ),
        MethodSpec(
            "mod",
            "(II)I",
            [("iload", 0), ("iload", 1), ("irem",), ("ireturn",)],
            access=STATIC,
        ),
        MethodSpec(
            "fact",
            "(I)I",
            [
                ("iconst_1",),
                ("istore", 1),
                "loop:",
                ("iload", 0),
                ("ifle", "done"),
                ("iload", 1),
                ("iload", 0),
                ("imul",),
                ("istore", 1),
                ("iinc", 0, -1),
                ("goto", "loop"),
                "done:",
                ("iload", 1),
                ("ireturn",),
            ],
            max_locals=2,
            access=STATIC,
        ),
        MethodSpec(
            "gcd",
            "(II)I",
            [
                "loop:",
                ("iload", 1),
                ("ifeq", "done"),
                ("iload", 0),
                ("iload", 1),
                ("irem",),
                ("istore", 2),
                ("iload", 1),
                ("istore", 0),
                ("iload", 2),
                ("istore", 1),
                ("goto", "loop"),
                "done:",
                ("iload", 0),
                ("ireturn",),
            ],
            max_locals=3,
            access=STATIC,
        ),
        MethodSpec(
            "lcm",
            "(II)I",
            [
                ("iload", 0),
                ("iload", 1),
                ("imul",),
                ("iload", 0),
                ("iload", 1),
                ("invokestatic", "Arith", "gcd", "(II)I"),
                ("idiv",),
                ("ireturn",),
            ],
            access=STATIC,
        ),
        MethodSpec(
            "divide",
            "(II)I",
            [("iload", 0), ("iload", 1), ("idiv",), ("ireturn",)],
            access=STATIC,
        ),
        MethodSpec(
            "safeDiv",
            "(II)I",
            [
                "start:",
                ("iload", 0),
                ("iload", 1),
                ("idiv",),
                "end:",
                ("ireturn",),
                "handler:",
                ("astore", 2),
                ("iconst_0",),
                ("ireturn",),
            ],
            max_locals=3,
            access=STATIC,
            handlers=[("start", "end", "handler", "java/lang/ArithmeticException")],
        ),
        MethodSpec(
            "search",
            "(I)I",
            [
                ("iconst_5",),
                ("newarray", "int"),
                ("astore", 1),
                ("iconst_0",),
                ("istore", 2),
                "fill:",
                ("iload", 2),
                ("aload", 1),
                ("arraylength",),
                ("if_icmpge", "filled"),
                ("aload", 1),
                ("iload", 2),
                ("iload", 2),
                ("iconst_3",),
                ("imul",),
                ("iastore",),
                ("iinc", 2, 1),
                ("goto", "fill"),
                "filled:",
                ("iconst_0",),
                ("istore", 2),
                "scan:",
                ("iload", 2),
                ("aload", 1),
                ("arraylength",),
                ("if_icmpge", "missing"),
                ("aload", 1),
                ("iload", 2),
                ("iaload",),
                ("iload", 0),
                ("if_icmpne", "next"),
                ("iload", 2),
                ("ireturn",),
                "next:",
                ("iinc", 2, 1),
                ("goto", "scan"),
                "missing:",
                ("iconst_m1",),
                ("ireturn",),
            ],
            max_locals=3,
            access=STATIC,
        ),
        MethodSpec(
            "bsearch",
            "(I)I",
            [
                ("bipush", 8),
                ("newarray", "int"),
                ("astore", 1),
                ("iconst_0",),
                ("istore", 2),
                "fill:",
                ("iload", 2),
                ("aload", 1),
                ("arraylength",),
                ("if_icmpge", "filled"),
                ("aload", 1),
                ("iload", 2),
                ("iload", 2),
                ("iconst_3",),
                ("imul",),
                ("iastore",),
                ("iinc", 2, 1),
                ("goto", "fill"),
                "filled:",
                ("iconst_0",),
                ("istore", 2),
                ("aload", 1),
                ("arraylength",),
                ("iconst_1",),
                ("isub",),
                ("istore", 3),
                "loop:",
                ("iload", 2),
                ("iload", 3),
                ("if_icmpgt", "missing"),
                ("iload", 2),
                ("iload", 3),
                ("iadd",),
                ("iconst_1",),
                ("ishr",),
                ("istore", 4),
                ("aload", 1),
                ("iload", 4),
                ("iaload",),
                ("istore", 5),
                ("iload", 5),
                ("iload", 0),
                ("if_icmpne", "narrow"),
                ("iload", 4),
                ("ireturn",),
                "narrow:",
                ("iload", 5),
                ("iload", 0),
                ("if_icmpgt", "upper"),
                ("iload", 4),
                ("iconst_1",),
                ("iadd",),
                ("istore", 2),
                ("goto", "loop"),
                "upper:",
                ("iload", 4),
                ("iconst_1",),
                ("isub",),
                ("istore", 3),
                ("goto", "loop"),
                "missing:",
                ("iconst_m1",),
                ("ireturn",),
            ],
            max_locals=6,
            access=STATIC,
        ),
        MethodSpec("spin", "()V", ["top:", ("goto", "top")], max_locals=0, access=STATIC),
        MethodSpec(
            "peek",
            "(LRational;)I",
            [("aload", 0), ("getfield", "Rational", "num", "I"), ("ireturn",)],
            max_locals=1,
            access=STATIC,
        ),
    ]
    return ClassSpec("Arith", methods=methods)


def rational_bytes() -> bytes:
    return build_class(rational())


def arith_bytes() -> bytes:
    return build_class(arith())
