"""節テキストの読み書き（演算子順位つき）"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from src.shared.errors import SyntaxError_

from .store import Clause
from .terms import (
    NIL,
    Atom,
    Compound,
    Int,
    Term,
    Var,
    is_cons,
    list_items,
    term_vars,
)

INFIX: dict[str, tuple[int, str]] = {
    ":-": (1200, "xfx"),
    ",": (1000, "xfy"),
    "=": (700, "xfx"),
    "is": (700, "xfx"),
    "<": (700, "xfx"),
    "=<": (700, "xfx"),
    ">": (700, "xfx"),
    ">=": (700, "xfx"),
    "=:=": (700, "xfx"),
    "=\\=": (700, "xfx"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "/\\": (500, "yfx"),
    "\\/": (500, "yfx"),
    "xor": (500, "yfx"),
    "*": (400, "yfx"),
    "/": (400, "yfx"),
    "//": (400, "yfx"),
    "rem": (400, "yfx"),
    "mod": (400, "yfx"),
    "<<": (400, "yfx"),
    ">>": (400, "yfx"),
}

PREFIX: dict[str, tuple[int, str]] = {
    "-": (200, "fy"),
    "+": (200, "fy"),
    ":-": (1200, "fx"),
}

SYMBOL_CHARS = set("+-*/\\^<>=~:.?@#&$")
_PLAIN_ATOM = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*|/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<quoted>'(?:[^'\\]|''|\\.)*')
  | (?P<punct>[()\[\],|])
  | (?P<solo>[!;])
  | (?P<symbol>[+\-*/\\^<>=~:.?@#&$]+)
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # int var name punct end eof
    text: str
    start: int
    end: int
    quoted: bool = False


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "'" and i + 1 < len(body) and body[i + 1] == "'":
            out.append("'")
            i += 2
        elif ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            out.append({"n": "\n", "t": "\t"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Lexer:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = list(self._scan())
        self.pos = 0

    def where(self, offset: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, offset) + 1
        col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return line, col

    def error(self, tok: _Tok, reason: str) -> SyntaxError_:
        line, col = self.where(tok.start)
        return SyntaxError_(line, col, reason)

    def _scan(self) -> Iterator[_Tok]:
        text = self.text
        i = 0
        while i < len(text):
            m = _TOKEN.match(text, i)
            if m is None:
                line, col = self.where(i)
                raise SyntaxError_(line, col, f"unexpected character {text[i]!r}")
            kind = m.lastgroup
            value = m.group()
            if kind == "ws":
                i = m.end()
                continue
            if kind == "symbol" and value == "." and (
                m.end() == len(text) or text[m.end()].isspace() or text[m.end()] == "%"
            ):
                yield _Tok("end", ".", i, m.end())
            elif kind == "symbol" and value.endswith(".") and len(value) > 1 and (
                m.end() == len(text) or text[m.end()].isspace()
            ):
                # "X=<0." : the final dot terminates the clause
                yield _Tok("name", value[:-1], i, m.end() - 1)
                yield _Tok("end", ".", m.end() - 1, m.end())
            elif kind == "quoted":
                yield _Tok("name", _unquote(value), i, m.end(), quoted=True)
            elif kind in ("symbol", "solo"):
                yield _Tok("name", value, i, m.end())
            else:
                yield _Tok(kind, value, i, m.end())
            i = m.end()
        yield _Tok("eof", "", len(text), len(text))

    def peek(self, ahead: int = 0) -> _Tok:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Tok:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            raise self.error(tok, f"expected {text or kind}, found {tok.text or tok.kind!r}")
        return tok


class _Parser:
    def __init__(self, lexer: _Lexer) -> None:
        self.lx = lexer
        self.varmap: dict[str, Var] = {}

    def _starts_term(self, tok: _Tok) -> bool:
        if tok.kind in ("int", "var"):
            return True
        if tok.kind == "punct":
            return tok.text in ("(", "[")
        if tok.kind == "name":
            return tok.quoted or tok.text not in INFIX or tok.text in PREFIX
        return False

    def parse(self, max_prec: int) -> Term:
        left, left_prec = self._primary(max_prec)
        while True:
            tok = self.lx.peek()
            if tok.kind == "punct" and tok.text == ",":
                op = ","
            elif tok.kind == "name" and not tok.quoted and tok.text in INFIX:
                op = tok.text
            else:
                break
            prec, kind = INFIX[op]
            if prec > max_prec:
                break
            left_max = prec - 1 if kind[0] == "x" else prec
            if left_prec > left_max:
                break
            right_max = prec - 1 if kind[2] == "x" else prec
            self.lx.next()
            right = self.parse(right_max)
            left = Compound(op, (left, right))
            left_prec = prec
        return left

    def _primary(self, max_prec: int) -> tuple[Term, int]:
        tok = self.lx.next()
        if tok.kind == "int":
            return Int(int(tok.text)), 0
        if tok.kind == "var":
            if tok.text == "_":
                return Var("_"), 0
            var = self.varmap.get(tok.text)
            if var is None:
                var = self.varmap[tok.text] = Var(tok.text)
            return var, 0
        if tok.kind == "punct" and tok.text == "(":
            inner = self.parse(1200)
            self.lx.expect("punct", ")")
            return inner, 0
        if tok.kind == "punct" and tok.text == "[":
            return self._list(), 0
        if tok.kind != "name":
            raise self.lx.error(tok, f"unexpected {tok.text or tok.kind!r}")

        nxt = self.lx.peek()
        if nxt.kind == "punct" and nxt.text == "(" and nxt.start == tok.end:
            self.lx.next()
            args = [self.parse(999)]
            while self.lx.peek().kind == "punct" and self.lx.peek().text == ",":
                self.lx.next()
                args.append(self.parse(999))
            self.lx.expect("punct", ")")
            return Compound(tok.text, args), 0
        if not tok.quoted and tok.text in ("-", "+") and nxt.kind == "int" and nxt.start == tok.end:
            self.lx.next()
            value = int(nxt.text)
            return Int(-value if tok.text == "-" else value), 0
        if not tok.quoted and tok.text in PREFIX and self._starts_term(nxt):
            prec, kind = PREFIX[tok.text]
            prec = min(prec, max_prec)
            arg_max = prec - 1 if kind == "fx" else prec
            arg = self.parse(arg_max)
            return Compound(tok.text, (arg,)), prec
        return Atom(tok.text), 0

    def _list(self) -> Term:
        if self.lx.peek().kind == "punct" and self.lx.peek().text == "]":
            self.lx.next()
            return NIL
        items = [self.parse(999)]
        tail: Term = NIL
        while True:
            tok = self.lx.next()
            if tok.kind == "punct" and tok.text == ",":
                items.append(self.parse(999))
            elif tok.kind == "punct" and tok.text == "|":
                tail = self.parse(999)
                self.lx.expect("punct", "]")
                break
            elif tok.kind == "punct" and tok.text == "]":
                break
            else:
                raise self.lx.error(tok, "expected , | or ] in list")
        result = tail
        for item in reversed(items):
            result = Compound(".", (item, result))
        return result


def read_terms(text: str) -> Iterator[tuple[Term, dict[str, Var], int]]:
    """'.' で終わる項を順に読む。(項, 変数名表, 行番号) を返す"""
    lexer = _Lexer(text)
    while lexer.peek().kind != "eof":
        start = lexer.peek()
        parser = _Parser(lexer)
        term = parser.parse(1200)
        lexer.expect("end")
        yield term, parser.varmap, lexer.where(start.start)[0]


def parse_term(text: str) -> Term:
    """単一の項を読む（末尾の '.' は省略可）"""
    lexer = _Lexer(text)
    term = _Parser(lexer).parse(1200)
    if lexer.peek().kind == "end":
        lexer.next()
    tok = lexer.peek()
    if tok.kind != "eof":
        raise lexer.error(tok, "trailing text after term")
    return term


def conjuncts(body: Term) -> list[Term]:
    out: list[Term] = []
    stack = [body]
    while stack:
        t = stack.pop()
        if isinstance(t, Compound) and t.name == "," and len(t.args) == 2:
            stack.append(t.args[1])
            stack.append(t.args[0])
        elif t != Atom("true"):
            out.append(t)
    return out


def term_to_clause(term: Term) -> Clause:
    if isinstance(term, Compound) and term.name == ":-" and len(term.args) == 2:
        head, body = term.args
        return Clause(head, tuple(conjuncts(body)))  # type: ignore[arg-type]
    if isinstance(term, (Var, Int)):
        raise ValueError(f"{term!r} cannot be a clause")
    return Clause(term)  # type: ignore[arg-type]


def parse_clauses(text: str) -> list[Clause]:
    clauses: list[Clause] = []
    for term, _, line in read_terms(text):
        try:
            clauses.append(term_to_clause(term))
        except ValueError as e:
            raise SyntaxError_(line, 1, str(e)) from e
    return clauses


# --- printing --------------------------------------------------------------


def quote_atom(name: str) -> str:
    if name == "[]" or _PLAIN_ATOM.match(name):
        return name
    if name and all(ch in SYMBOL_CHARS for ch in name):
        return name
    if name in ("!", ";"):
        return name
    escaped = name.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


def variable_names(terms: Iterable[Term]) -> dict[Var, str]:
    """A, B, ..., Z, A1, ... を出現順に割り当てる"""
    names: dict[Var, str] = {}
    for i, var in enumerate(term_vars(list(terms))):
        letter = chr(ord("A") + i % 26)
        names[var] = letter if i < 26 else f"{letter}{i // 26}"
    return names


class _Printer:
    def __init__(self, names: Mapping[Var, str] | None) -> None:
        self.names = names or {}

    def fmt(self, term: Term, max_prec: int = 1200) -> str:
        if isinstance(term, Var):
            return self.names.get(term) or f"_G{term.id}"
        if isinstance(term, Int):
            return str(term.value)
        if isinstance(term, Atom):
            return quote_atom(term.name)
        if is_cons(term):
            return self._list(term)
        assert isinstance(term, Compound)
        if len(term.args) == 2 and term.name in INFIX:
            return self._infix(term, max_prec)
        if len(term.args) == 1 and term.name in PREFIX and term.name != ":-":
            prec, _ = PREFIX[term.name]
            arg = term.args[0]
            inner = self._operand(arg, prec)
            if isinstance(arg, Int) or inner[:1] in SYMBOL_CHARS:
                inner = f"({self.fmt(arg)})"
            text = f"{term.name}{inner}"
            return f"({text})" if prec > max_prec else text
        args = ",".join(self.fmt(a, 999) for a in term.args)
        return f"{quote_atom(term.name)}({args})"

    def _operand(self, term: Term, max_prec: int) -> str:
        if isinstance(term, Int) and term.value < 0:
            return f"({term.value})"
        if (
            isinstance(term, Compound)
            and len(term.args) == 1
            and term.name in PREFIX
        ):
            return f"({self.fmt(term)})"
        return self.fmt(term, max_prec)

    def _infix(self, term: Compound, max_prec: int) -> str:
        prec, kind = INFIX[term.name]
        left_max = prec - 1 if kind[0] == "x" else prec
        right_max = prec - 1 if kind[2] == "x" else prec
        left = self._operand(term.args[0], left_max)
        right = self._operand(term.args[1], right_max)
        op = term.name
        if op == ",":
            text = f"{left},{right}"
        elif op[0].isalpha() or op == ":-":
            text = f"{left} {op} {right}"
        else:
            text = f"{left}{op}{right}"
        return f"({text})" if prec > max_prec else text

    def _list(self, term: Term) -> str:
        items, tail = list_items(term)
        inner = ",".join(self.fmt(i, 999) for i in items)
        if tail == NIL:
            return f"[{inner}]"
        return f"[{inner}|{self.fmt(tail, 999)}]"


def format_term(term: Term, names: Mapping[Var, str] | None = None) -> str:
    return _Printer(names).fmt(term, 1200)


def format_clause(clause: Clause, names: Mapping[Var, str] | None = None) -> str:
    """節を 'head :-\\n    lit,\\n    lit.' の形で書く"""
    if names is None:
        names = variable_names([clause.head, *clause.body])
    printer = _Printer(names)
    head = printer.fmt(clause.head, 999)
    if not clause.body:
        return f"{head}."
    body = ",\n    ".join(printer.fmt(lit, 999) for lit in clause.body)
    return f"{head} :-\n    {body}."


def format_program(clauses: Iterable[Clause]) -> str:
    return "".join(format_clause(c) + "\n" for c in clauses)
