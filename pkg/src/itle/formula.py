"""Formulas of intuitionistic temporal logic: AST, parser, printer, closure.

Concrete syntax::

    atoms       [a-z][a-zA-Z0-9_]*
    constants   false, true
    unary       ~  X  F  G        (tightest)
    binary      &   then   |   then   ->  (right associative)

``~a`` is read as ``a -> false`` and ``true`` as ``false -> false``; neither
survives in the AST.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator


class Formula:
    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    name: str

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"


@dataclass(frozen=True, repr=False)
class Falsum(Formula):
    def __repr__(self) -> str:
        return "Falsum()"


@dataclass(frozen=True, repr=False)
class _Binary(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class _Unary(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.sub!r})"


class And(_Binary):
    pass


class Or(_Binary):
    pass


class Implies(_Binary):
    pass


class Next(_Unary):
    pass


class Eventually(_Unary):
    pass


class Henceforth(_Unary):
    pass


FALSUM = Falsum()
TRUE = Implies(FALSUM, FALSUM)


def neg(f: Formula) -> Formula:
    return Implies(f, FALSUM)


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_IDENT = re.compile(r"[a-z][a-zA-Z0-9_]*")


def _tokenize(text: str) -> list[tuple[str, int]]:
    # X, F, G are single-character operators even when glued to an atom: "Xp".
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif text.startswith("->", i):
            tokens.append(("->", i))
            i += 2
        elif c in "~&|()XFG":
            tokens.append((c, i))
            i += 1
        elif "a" <= c <= "z":
            m = _IDENT.match(text, i)
            tokens.append((m.group(), i))
            i = m.end()
        else:
            raise FormulaSyntaxError(f"unknown token {c!r}", i)
    tokens.append(("", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        if self.peek() != tok:
            found = self.peek() or "end of input"
            raise FormulaSyntaxError(f"expected {tok!r}, found {found!r}", self.pos())
        self.take()

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return neg(self.unary())
        if tok == "X":
            self.take()
            return Next(self.unary())
        if tok == "F":
            self.take()
            return Eventually(self.unary())
        if tok == "G":
            self.take()
            return Henceforth(self.unary())
        if tok == "(":
            self.take()
            f = self.implication()
            self.expect(")")
            return f
        if tok == "false":
            self.take()
            return FALSUM
        if tok == "true":
            self.take()
            return TRUE
        if tok and tok[0].islower():
            self.take()
            return Atom(tok)
        found = tok or "end of input"
        raise FormulaSyntaxError(f"unexpected {found!r}", self.pos())


def parse_formula(text: str) -> Formula:
    if not text or not text.strip():
        raise FormulaSyntaxError("empty formula", 0)
    p = _Parser(text)
    f = p.implication()
    if p.peek() != "":
        raise FormulaSyntaxError(f"unexpected {p.peek()!r}", p.pos())
    return f


# precedence: -> 1, | 2, & 3, unary 4, atomic 5
def _prec(f: Formula) -> int:
    if isinstance(f, Implies):
        if f.right == FALSUM:
            return 4
        if f == TRUE:
            return 5
        return 1
    if isinstance(f, Or):
        return 2
    if isinstance(f, And):
        return 3
    if isinstance(f, _Unary):
        return 4
    return 5


def _wrap(f: Formula, minimum: int) -> str:
    s = print_formula(f)
    return f"({s})" if _prec(f) < minimum else s


def print_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Falsum):
        return "false"
    if f == TRUE:
        return "true"
    if isinstance(f, Implies) and f.right == FALSUM:
        return "~" + _wrap(f.left, 4)
    if isinstance(f, Next):
        return "X " + _wrap(f.sub, 4)
    if isinstance(f, Eventually):
        return "F " + _wrap(f.sub, 4)
    if isinstance(f, Henceforth):
        return "G " + _wrap(f.sub, 4)
    if isinstance(f, And):
        return f"{_wrap(f.left, 3)} & {_wrap(f.right, 4)}"
    if isinstance(f, Or):
        return f"{_wrap(f.left, 2)} | {_wrap(f.right, 3)}"
    if isinstance(f, Implies):
        return f"{_wrap(f.left, 2)} -> {_wrap(f.right, 1)}"
    raise TypeError(f"not a formula: {f!r}")


def size(f: Formula) -> int:
    """Number of AST nodes."""
    return 1 + sum(size(c) for c in f.children())


def iter_subtrees(f: Formula) -> Iterator[Formula]:
    yield f
    for c in f.children():
        yield from iter_subtrees(c)


def atoms(f: Formula) -> list[str]:
    return sorted({g.name for g in iter_subtrees(f) if isinstance(g, Atom)})


class ClosureSet:
    """Subformula-closed set of formulas in a fixed (size, text) order."""

    def __init__(self, formulas):
        seen = set()
        stack = list(formulas)
        while stack:
            g = stack.pop()
            if g not in seen:
                seen.add(g)
                stack.extend(g.children())
        self.members: tuple[Formula, ...] = tuple(
            sorted(seen, key=lambda g: (size(g), print_formula(g)))
        )
        self.index = {g: i for i, g in enumerate(self.members)}

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, f) -> bool:
        return f in self.index

    def __repr__(self) -> str:
        return "ClosureSet({" + ", ".join(map(print_formula, self.members)) + "})"

    @property
    def cardinality(self) -> int:
        return len(self.members)

    def atoms(self) -> list[str]:
        return sorted(g.name for g in self.members if isinstance(g, Atom))


def subformula_closure(*formulas: Formula) -> ClosureSet:
    return ClosureSet(formulas)
