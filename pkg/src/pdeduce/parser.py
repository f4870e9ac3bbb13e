"""Surface syntax reader.

Accepted forms: facts ``h.``, rules ``h :- b1, ..., bn.``, negation
``\\+ a`` (alias ``not(a)``), ``%`` line comments, and the directive
``:- open(p/n).``.  Lists carry the usual ``[a,b|T]`` sugar; ``=``,
``\\=`` and ``=..`` are infix.  Variables start with an uppercase letter
or ``_``; unsigned and negative integers are constants.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .terms import (
    BUILTIN_PREDS,
    Clause,
    Compound,
    Conjunction,
    Literal,
    Program,
    Term,
    Var,
    mklist,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>%[^\n]*)
      | (?P<univ>=\.\.)
      | (?P<neck>:-)
      | (?P<neq>\\=)
      | (?P<naf>\\\+)
      | (?P<num>-?\d+)
      | (?P<name>[a-z]\w*)
      | (?P<var>[A-Z_]\w*)
      | (?P<punct>[()\[\],.|=])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or "?"
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def error(self, msg: str) -> ParseError:
        tok = self.peek()
        return ParseError(msg, tok.line, tok.col)

    # grammar ---------------------------------------------------------

    def clause(self, cid: int) -> Clause:
        head_lit = self.literal()
        if not head_lit.positive:
            tok = self.peek()
            raise ParseError("negative literal cannot be a clause head", tok.line, tok.col)
        if head_lit.pred in BUILTIN_PREDS:
            tok = self.peek()
            raise ParseError(f"reserved predicate {head_lit.pred!r} cannot be defined", tok.line, tok.col)
        body: list[Literal] = []
        if self.peek().kind == "neck":
            self.next()
            body.append(self.literal())
            while self.peek().text == ",":
                self.next()
                body.append(self.literal())
        self.expect(".")
        return Clause(cid, head_lit.atom, tuple(body))

    def literal(self) -> Literal:
        tok = self.peek()
        if tok.kind == "naf":
            self.next()
            inner = self.literal()
            if not inner.positive:
                raise ParseError("double negation is not supported", tok.line, tok.col)
            return Literal(inner.atom, positive=False)
        if tok.kind == "name" and tok.text == "not":
            # `not(a)` sugar: only when immediately applied to one argument
            save = self.pos
            self.next()
            if self.peek().text == "(":
                self.next()
                inner = self.literal()
                self.expect(")")
                if not inner.positive:
                    raise ParseError("double negation is not supported", tok.line, tok.col)
                return Literal(inner.atom, positive=False)
            self.pos = save
        t = self.term()
        nxt = self.peek()
        if nxt.text in ("=", "\\=", "=.."):
            self.next()
            rhs = self.term()
            return Literal(Compound(nxt.text, (t, rhs)))
        if isinstance(t, Var):
            raise ParseError("a variable is not a literal", nxt.line, nxt.col)
        return Literal(t)

    def term(self) -> Term:
        tok = self.next()
        if tok.kind == "var":
            return Var(tok.text)
        if tok.kind == "num":
            return Compound(tok.text)
        if tok.kind == "name":
            if self.peek().text == "(":
                self.next()
                args = [self.term()]
                while self.peek().text == ",":
                    self.next()
                    args.append(self.term())
                self.expect(")")
                return Compound(tok.text, tuple(args))
            return Compound(tok.text)
        if tok.text == "[":
            return self.list_tail()
        raise ParseError(f"expected a term, found {tok.text!r}", tok.line, tok.col)

    def list_tail(self) -> Term:
        if self.peek().text == "]":
            self.next()
            return Compound("[]")
        items = [self.term()]
        while self.peek().text == ",":
            self.next()
            items.append(self.term())
        tail: Term = Compound("[]")
        if self.peek().text == "|":
            self.next()
            tail = self.term()
        self.expect("]")
        return mklist(items, tail)

    def _check_arities(self, clauses: list[Clause]) -> None:
        seen_pred: dict[str, int] = {}
        seen_fun: dict[str, int] = {}

        def note(table: dict[str, int], name: str, arity: int, what: str) -> None:
            if name in table and table[name] != arity:
                raise ParseError(f"{what} {name!r} used with arities {table[name]} and {arity}", 1, 1)
            table.setdefault(name, arity)

        def walk(t: Term) -> None:
            if isinstance(t, Compound):
                if t.functor not in ("[]", "."):
                    note(seen_fun, t.functor, len(t.args), "functor")
                for a in t.args:
                    walk(a)

        for c in clauses:
            note(seen_pred, c.head.functor, len(c.head.args), "predicate")
            for t in c.head.args:
                walk(t)
            for l in c.body:
                if l.pred not in BUILTIN_PREDS:
                    note(seen_pred, l.pred, l.arity, "predicate")
                for t in l.atom.args:
                    walk(t)


def parse_program(text: str) -> Program:
    return _ProgramReader(text).read()


def parse_goal(text: str) -> Conjunction:
    """Parse a goal: comma-separated literals without the final dot."""
    p = _Parser(text.strip().rstrip("."))
    lits = [p.literal()]
    while p.peek().text == ",":
        p.next()
        lits.append(p.literal())
    if p.peek().kind != "eof":
        raise p.error(f"trailing input {p.peek().text!r}")
    return tuple(lits)


def parse_term(text: str) -> Term:
    p = _Parser(text.strip())
    t = p.term()
    if p.peek().kind != "eof":
        raise p.error(f"trailing input {p.peek().text!r}")
    return t


class _ProgramReader:
    """Splits the source on open/1 directives, then parses clause-wise."""

    _OPEN_RE = re.compile(r"^\s*:-\s*open\(\s*([a-z]\w*)\s*/\s*(\d+)\s*\)\s*\.\s*$")

    def __init__(self, text: str):
        self.text = text

    def read(self) -> Program:
        kept_lines: list[str] = []
        open_preds: set[tuple[str, int]] = set()
        for line in self.text.splitlines():
            m = self._OPEN_RE.match(line)
            if m:
                open_preds.add((m.group(1), int(m.group(2))))
                kept_lines.append("")  # keep line numbers aligned
            else:
                kept_lines.append(line)
        parser = _Parser("\n".join(kept_lines))
        clauses: list[Clause] = []
        next_id = 1
        while parser.peek().kind != "eof":
            if parser.peek().kind == "neck":
                tok = parser.peek()
                raise ParseError("unknown directive (only open/1 is supported)", tok.line, tok.col)
            clauses.append(parser.clause(next_id))
            next_id += 1
        parser._check_arities(clauses)
        return Program(clauses, frozenset(open_preds))
