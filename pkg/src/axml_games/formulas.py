"""Positive boolean formulas over hashable atoms.

Formulas are plain tuples: ``("true",)``, ``("false",)``, ``("atom", x)``,
``("and", (f, ...))`` and ``("or", (f, ...))``.  The n-ary connectives are
folded binary conjunctions/disjunctions; the constructors simplify constants.
"""

from __future__ import annotations

import re
from itertools import product as cartesian
from typing import Callable, Iterable

TRUE = ("true",)
FALSE = ("false",)


def atom(x) -> tuple:
    return ("atom", x)


def conj(fs: Iterable[tuple]) -> tuple:
    parts = []
    for f in fs:
        if f == FALSE:
            return FALSE
        if f == TRUE:
            continue
        parts.extend(f[1] if f[0] == "and" else (f,))
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else ("and", tuple(parts))


def disj(fs: Iterable[tuple]) -> tuple:
    parts = []
    for f in fs:
        if f == TRUE:
            return TRUE
        if f == FALSE:
            continue
        parts.extend(f[1] if f[0] == "or" else (f,))
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else ("or", tuple(parts))


def evaluate(f: tuple, value: Callable[[object], bool]) -> bool:
    """Short-circuit evaluation; ``value`` is consulted lazily per atom."""
    tag = f[0]
    if tag == "atom":
        return value(f[1])
    if tag == "and":
        return all(evaluate(g, value) for g in f[1])
    if tag == "or":
        return any(evaluate(g, value) for g in f[1])
    return tag == "true"


def satisfies(atoms: set, f: tuple) -> bool:
    return evaluate(f, lambda x: x in atoms)


def atoms(f: tuple) -> set:
    if f[0] == "atom":
        return {f[1]}
    if f[0] in ("and", "or"):
        out = set()
        for g in f[1]:
            out |= atoms(g)
        return out
    return set()


def dual(f: tuple) -> tuple:
    tag = f[0]
    if tag == "true":
        return FALSE
    if tag == "false":
        return TRUE
    if tag == "atom":
        return f
    return ("or" if tag == "and" else "and", tuple(dual(g) for g in f[1]))


def substitute(f: tuple, sub: Callable[[object], tuple]) -> tuple:
    tag = f[0]
    if tag == "atom":
        return sub(f[1])
    if tag == "and":
        return conj(substitute(g, sub) for g in f[1])
    if tag == "or":
        return disj(substitute(g, sub) for g in f[1])
    return f


def minimal_models(f: tuple) -> list[frozenset]:
    """Inclusion-minimal atom sets satisfying ``f`` (a DNF), sorted canonically."""
    tag = f[0]
    if tag == "true":
        models = [frozenset()]
    elif tag == "false":
        models = []
    elif tag == "atom":
        models = [frozenset([f[1]])]
    elif tag == "or":
        models = [m for g in f[1] for m in minimal_models(g)]
    else:
        models = [frozenset().union(*combo)
                  for combo in cartesian(*(minimal_models(g) for g in f[1]))]
    uniq = set(models)
    mins = [m for m in uniq if not any(o < m for o in uniq)]
    return sorted(mins, key=lambda m: (len(m), sorted(map(repr, m))))


# -- text syntax -----------------------------------------------------------------

_NAME = r'"[^"]*"|[^\s&|(),"]+'
_TOKEN = re.compile(rf'\s*(?:(?P<name>{_NAME})|(?P<op>[&|(),]))')
_PLAIN = re.compile(r"[^\s&|(),\"]+")


def _quote(name: str) -> str:
    if _PLAIN.fullmatch(name) and name not in ("true", "false"):
        return name
    return '"' + name + '"'


def to_text(f: tuple) -> str:
    tag = f[0]
    if tag in ("true", "false"):
        return tag
    if tag == "atom":
        x = f[1]
        if isinstance(x, tuple):
            return "(" + ",".join(_quote(str(y)) for y in x) + ")"
        return _quote(str(x))
    sep = " & " if tag == "and" else " | "
    return "(" + sep.join(to_text(g) for g in f[1]) + ")"


def parse_formula(text: str) -> tuple:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad formula near {text[pos:]!r}")
        tok = m.group("name") or m.group("op")
        kind = "name" if m.group("name") else "op"
        if kind == "name" and tok.startswith('"'):
            tokens.append(("qname", tok[1:-1]))
        else:
            tokens.append((kind, tok))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    tokens.append(("end", None))
    i = 0

    def peek():
        return tokens[i]

    def take():
        nonlocal i
        tok = tokens[i]
        i += 1
        return tok

    def expect(op):
        tok = take()
        if tok != ("op", op):
            raise ValueError(f"expected {op!r}, got {tok[1]!r} in {text!r}")

    def parse_or():
        parts = [parse_and()]
        while peek() == ("op", "|"):
            take()
            parts.append(parse_and())
        return disj(parts)

    def parse_and():
        parts = [parse_primary()]
        while peek() == ("op", "&"):
            take()
            parts.append(parse_primary())
        return conj(parts)

    def parse_primary():
        tok = take()
        if tok == ("name", "true"):
            return TRUE
        if tok == ("name", "false"):
            return FALSE
        if tok[0] in ("name", "qname"):
            return atom(tok[1])
        if tok == ("op", "("):
            # either a pair atom (q,p) or a parenthesised formula
            save = i
            first = peek()
            if first[0] in ("name", "qname") and tokens[i + 1] == ("op", ","):
                take()
                take()
                second = take()
                if second[0] not in ("name", "qname"):
                    raise ValueError(f"bad pair atom in {text!r}")
                expect(")")
                return atom((first[1], second[1]))
            assert i == save
            inner = parse_or()
            expect(")")
            return inner
        raise ValueError(f"unexpected token {tok[1]!r} in {text!r}")

    out = parse_or()
    if peek()[0] != "end":
        raise ValueError(f"trailing input in formula {text!r}")
    return out
