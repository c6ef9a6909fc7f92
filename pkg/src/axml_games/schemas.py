"""Deterministic regular expressions, tree grammars and simple DNWAs."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, NamedTuple

from .alternating import Sanwa, check_simplicity, Anwa
from .automata import Dnwa, fresh_name
from .errors import (GrammarSyntaxError, NotDeterministic, NotRooted, NotSingleType,
                     AutomatonFormatError)
from .formulas import FALSE, TRUE, atom, conj
from .nested_word import NestedWord, to_forest

# -- regular expressions -----------------------------------------------------------
# AST: ("empty",) | ("eps",) | ("sym", name, pos) | ("alt", l, r) | ("cat", l, r)
#      | ("star", e) | ("opt", e).  Positions number symbol occurrences from 1.

EMPTY = ("empty",)
EPS = ("eps",)

_TOKEN = re.compile(r"\s*(?:([()+.*?])|([A-Za-z0-9_'\-|,#]+))")


class _Parser:
    def __init__(self, text: str):
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise GrammarSyntaxError(f"bad regex character at {pos} in {text!r}")
            self.toks.append(m.group(1) or m.group(2))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        self.i = 0
        self.npos = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self):
        if not self.toks:
            return EPS
        e = self.alt()
        if self.peek() is not None:
            raise GrammarSyntaxError(f"unexpected {self.peek()!r}")
        return e

    def alt(self):
        e = self.cat()
        while self.peek() == "+":
            self.take()
            e = ("alt", e, self.cat())
        return e

    def cat(self):
        e = self.post()
        while self.peek() == ".":
            self.take()
            e = ("cat", e, self.post())
        return e

    def post(self):
        e = self.base()
        while self.peek() in ("*", "?"):
            e = ("star", e) if self.take() == "*" else ("opt", e)
        return e

    def base(self):
        tok = self.take()
        if tok is None:
            raise GrammarSyntaxError("unexpected end of expression")
        if tok == "(":
            e = self.alt()
            if self.take() != ")":
                raise GrammarSyntaxError("missing ')'")
            return e
        if tok in "+.*?)":
            raise GrammarSyntaxError(f"unexpected {tok!r}")
        if tok == "eps":
            return EPS
        if tok == "empty":
            return EMPTY
        self.npos += 1
        return ("sym", tok, self.npos)


def parse_dre(text: str) -> tuple:
    return _Parser(text).parse()


def dre_to_text(e) -> str:
    kind = e[0]
    if kind == "empty":
        return "empty"
    if kind == "eps":
        return "eps"
    if kind == "sym":
        return e[1]
    if kind == "alt":
        return f"({dre_to_text(e[1])}+{dre_to_text(e[2])})"
    if kind == "cat":
        return f"({dre_to_text(e[1])}.{dre_to_text(e[2])})"
    return f"{dre_to_text(e[1])}{'*' if kind == 'star' else '?'}"


def _as_ast(r):
    return parse_dre(r) if isinstance(r, str) else r


def _renumber(e, counter=None):
    """Positions in left-to-right order (needed for hand-built ASTs)."""
    counter = counter if counter is not None else [0]
    if e[0] == "sym":
        counter[0] += 1
        return ("sym", e[1], counter[0])
    if e[0] in ("alt", "cat"):
        return (e[0], _renumber(e[1], counter), _renumber(e[2], counter))
    if e[0] in ("star", "opt"):
        return (e[0], _renumber(e[1], counter))
    return e


class Glushkov(NamedTuple):
    """Position automaton data of a marked expression."""

    symbol: dict      # position -> symbol
    first: frozenset
    last: frozenset
    follow: dict      # position -> frozenset of positions
    nullable: bool


def glushkov(r) -> Glushkov:
    e = _renumber(_as_ast(r))
    symbol = {}
    follow: dict = {}

    def go(e):
        kind = e[0]
        if kind == "empty":
            return False, frozenset(), frozenset(), False
        if kind == "eps":
            return True, frozenset(), frozenset(), True
        if kind == "sym":
            symbol[e[2]] = e[1]
            follow.setdefault(e[2], set())
            p = frozenset([e[2]])
            return False, p, p, True
        if kind == "alt":
            n1, f1, l1, ne1 = go(e[1])
            n2, f2, l2, ne2 = go(e[2])
            return n1 or n2, f1 | f2, l1 | l2, ne1 or ne2
        if kind == "cat":
            n1, f1, l1, ne1 = go(e[1])
            n2, f2, l2, ne2 = go(e[2])
            if not (ne1 and ne2):
                # an empty factor kills the whole concatenation
                return False, frozenset(), frozenset(), False
            for p in l1:
                follow[p] |= f2
            return (n1 and n2, f1 | (f2 if n1 else frozenset()),
                    l2 | (l1 if n2 else frozenset()), True)
        n, f, l, ne = go(e[1])
        if kind == "star":
            for p in l:
                follow[p] |= f
            return True, f, l, True
        return True, f, l, True  # opt

    nullable, first, last, _ = go(e)
    return Glushkov(symbol, first, last, {p: frozenset(s) for p, s in follow.items()}, nullable)


class Witness(NamedTuple):
    prefix: tuple
    symbol: str
    pos1: int
    pos2: int


class Deterministic:
    def __repr__(self):
        return "Deterministic"

    def __eq__(self, other):
        return isinstance(other, Deterministic)

    def __hash__(self):
        return 0


DETERMINISTIC = Deterministic()


def _clash(g: Glushkov, positions):
    seen = {}
    for p in sorted(positions):
        a = g.symbol[p]
        if a in seen:
            return a, seen[a], p
        seen[a] = p
    return None


def dre_check_determinism(r):
    """``DETERMINISTIC`` or the first Witness found by BFS over follow sets."""
    g = glushkov(r)
    start = 0
    succ = {0: g.first, **g.follow}
    prefix = {start: ()}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        hit = _clash(g, succ[s])
        if hit:
            a, p1, p2 = hit
            return Witness(prefix[s], a, p1, p2)
        for p in sorted(succ[s]):
            if p not in prefix:
                prefix[p] = prefix[s] + (g.symbol[p],)
                queue.append(p)
    return DETERMINISTIC


def is_deterministic(r) -> bool:
    return dre_check_determinism(r) == DETERMINISTIC


@dataclass(frozen=True)
class Dfa:
    """Partial DFA; states are ints, 0 is initial."""

    states: tuple
    alphabet: frozenset
    delta: dict  # (state, symbol) -> state
    accepting: frozenset

    def step(self, q, a):
        return self.delta.get((q, a))

    def accepts(self, word: Iterable) -> bool:
        q = 0
        for a in word:
            q = self.delta.get((q, a))
            if q is None:
                return False
        return q in self.accepting


def dre_to_dfa(r) -> Dfa:
    """Glushkov automaton; raises NotDeterministic if the expression is not."""
    wit = dre_check_determinism(r)
    if wit != DETERMINISTIC:
        raise NotDeterministic(f"expression is not deterministic: {wit}")
    g = glushkov(r)
    delta = {}
    succ = {0: g.first, **g.follow}
    for s, ps in succ.items():
        for p in ps:
            delta[(s, g.symbol[p])] = p
    acc = set(g.last)
    if g.nullable:
        acc.add(0)
    return Dfa(tuple(range(len(g.symbol) + 1)), frozenset(g.symbol.values()), delta, frozenset(acc))


def regex_matches(r, word) -> bool:
    """NFA simulation on the position automaton (valid for any expression)."""
    g = glushkov(r)
    cur = {0}
    for a in word:
        nxt = set()
        for s in cur:
            for p in (g.first if s == 0 else g.follow[s]):
                if g.symbol[p] == a:
                    nxt.add(p)
        cur = nxt
        if not cur:
            return False
    return any(s in g.last or (s == 0 and g.nullable) for s in cur)


def dre_symbols(r) -> set:
    return set(glushkov(r).symbol.values())


# -- tree grammars --------------------------------------------------------------------

class GrammarKind(str, Enum):
    LOCAL = "Local"
    SINGLE_TYPE = "SingleType"
    NEITHER = "Neither"


class Classification(NamedTuple):
    kind: GrammarKind
    witness: tuple | None = None  # (type, Y, Z)

    @property
    def single_type(self) -> bool:
        return self.kind != GrammarKind.NEITHER


@dataclass
class TreeGrammar:
    labels: frozenset
    types: tuple
    start: str
    productions: dict  # type -> expression AST
    labeling: dict     # type -> label
    _dfa: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.types = tuple(sorted(set(self.types)))
        self.labels = frozenset(self.labels) | frozenset(self.labeling.values())
        if self.start not in self.types:
            raise GrammarSyntaxError(f"start type {self.start!r} is not declared")
        for X in self.types:
            if X not in self.labeling:
                raise GrammarSyntaxError(f"type {X!r} has no label")
            self.productions[X] = _as_ast(self.productions.get(X, EPS))
            unknown = dre_symbols(self.productions[X]) - set(self.types)
            if unknown:
                raise GrammarSyntaxError(f"type {X!r} uses undeclared types {sorted(unknown)}")
            wit = dre_check_determinism(self.productions[X])
            if wit != DETERMINISTIC:
                raise NotDeterministic(f"content model of {X} is not deterministic: {wit}")

    def positions(self) -> dict:
        if "_pos" not in self._dfa:
            self._dfa["_pos"] = {X: glushkov(self.productions[X]) for X in self.types}
        return self._dfa["_pos"]

    def dfa(self, X) -> Dfa:
        if X not in self._dfa:
            self._dfa[X] = dre_to_dfa(self.productions[X])
        return self._dfa[X]

    def child_type(self, X, a):
        """ν(X, a): the type with label a in the content model of X (single-type only)."""
        cands = sorted(Y for Y in dre_symbols(self.productions[X]) if self.labeling[Y] == a)
        if len(cands) > 1:
            raise NotSingleType(f"content of {X} has competing types {cands} for label {a}")
        return cands[0] if cands else None

    def to_text(self) -> str:
        lines = [f"start {self.start}"]
        for X in self.types:
            lines.append(f"type {X} label {self.labeling[X]} -> {dre_to_text(self.productions[X])}")
        return "\n".join(lines)


def classify_grammar(T: TreeGrammar) -> Classification:
    for X in T.types:
        by_label = {}
        for Y in sorted(dre_symbols(T.productions[X])):
            a = T.labeling[Y]
            if a in by_label:
                return Classification(GrammarKind.NEITHER, (X, by_label[a], Y))
            by_label[a] = Y
    seen = {}
    for X in T.types:
        a = T.labeling[X]
        if a in seen:
            return Classification(GrammarKind.SINGLE_TYPE, ("λ", seen[a], X))
        seen[a] = X
    return Classification(GrammarKind.LOCAL)


_LINE_TYPE = re.compile(r"^type\s+(\S+)\s+label\s+(\S+)\s*->\s*(.*)$")
_LINE_ELEM = re.compile(r"^element\s+(\S+)\s*->\s*(.*)$")
_LINE_START = re.compile(r"^start\s+(\S+)$")


def parse_grammar(text: str, extra_labels: Iterable[str] = ()) -> TreeGrammar:
    """Parse the line-based grammar format (``type``/``element``/``start`` lines)."""
    types, labeling, prods = [], {}, {}
    start = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if m := _LINE_START.match(line):
            start = m.group(1)
        elif m := _LINE_TYPE.match(line):
            X, a, r = m.groups()
            types.append(X)
            labeling[X] = a
            prods[X] = r
        elif m := _LINE_ELEM.match(line):
            X, r = m.groups()
            types.append(X)
            labeling[X] = X
            prods[X] = r
        else:
            raise GrammarSyntaxError(f"line {n}: cannot parse {raw!r}")
        if len(types) != len(set(types)):
            raise GrammarSyntaxError(f"line {n}: type {types[-1]!r} declared twice")
    if start is None:
        raise GrammarSyntaxError("missing 'start' line")
    try:
        asts = {X: parse_dre(r) for X, r in prods.items()}
    except GrammarSyntaxError as e:
        raise GrammarSyntaxError(f"content model: {e}") from None
    return TreeGrammar(frozenset(extra_labels), tuple(types), start, asts, labeling)


def grammar_validate_tree(T: TreeGrammar, w: NestedWord, stats: dict | None = None,
                          cache: dict | None = None) -> bool:
    """Top-down typing check.

    Child candidates are the types of the parent's content model carrying the
    child's label; ``stats['choices']`` counts nodes with more than one
    candidate (never happens for single-type grammars).  ``cache`` may be
    shared between calls on the same grammar.
    """
    if len(w) == 0:
        return False
    roots = to_forest(w)
    if len(roots) != 1:
        raise NotRooted(f"{len(roots)} roots")
    if stats is not None:
        stats.setdefault("choices", 0)
    memo = cache if cache is not None else {}
    pos = T.positions()
    content = {X: set(pos[X].symbol.values()) for X in T.types}

    def valid(node, X) -> bool:
        key = (node, X)
        hit = memo.get(key)
        if hit is not None:
            return hit
        ok = False
        if T.labeling[X] == node.label:
            options = []
            for child in node.children:
                cands = [Y for Y in sorted(content[X])
                         if T.labeling[Y] == child.label and valid(child, Y)]
                if len(cands) > 1 and stats is not None:
                    stats["choices"] += 1
                options.append(cands)
            ok = _exists_word(pos[X], options)
        memo[key] = ok
        return ok

    return valid(roots[0], T.start)


def _exists_word(g: Glushkov, options) -> bool:
    cur = {0}
    for cands in options:
        cset = set(cands)
        cur = {p for s in cur for p in (g.first if s == 0 else g.follow[s]) if g.symbol[p] in cset}
        if not cur:
            return False
    return any(s in g.last or (s == 0 and g.nullable) for s in cur)


# -- simple DNWAs -----------------------------------------------------------------------

ROOT_TYPE = "0"
BOTTOM = "⊥"


class Snwa(Dnwa):
    """A simple DNWA with its witnesses.

    ``type_of`` maps states to types, ``local_accept[a]`` is F_loc(a),
    ``target_fn[(q, a)]`` is t(q, a) and ``bottom`` is the failure state ⊥.
    """

    def __init__(self, states, alphabet, open_trans, close_trans, initial, accepting,
                 type_of, local_accept, target_fn, bottom):
        super().__init__(states, alphabet, open_trans, close_trans, initial, accepting,
                         complete=False)
        self.type_of = dict(type_of)
        self.local_accept = {a: frozenset(local_accept.get(a, ())) for a in self.alphabet}
        self.target_fn = dict(target_fn)
        self.bottom = bottom
        self.grammar = None
        problems = snwa_violations(self)
        if problems:
            raise AutomatonFormatError("not a simple DNWA: " + "; ".join(problems[:5]))

    def to_json(self) -> dict:
        out = super().to_json()
        out["snwa"] = {
            "types": dict(sorted(self.type_of.items())),
            "local_accept": {a: sorted(s) for a, s in sorted(self.local_accept.items())},
            "target": sorted([q, a, r] for (q, a), r in self.target_fn.items()),
            "bottom": self.bottom,
        }
        return out


def snwa_violations(A: Snwa) -> list[str]:
    """Check the five simple-DNWA clauses; returns a list of problems."""
    out = []
    bot = A.bottom
    for q in A.states:
        for a in A.alphabet:
            if (q, a) not in A.dopen:
                out.append(f"missing open ({q},{a})")
                continue
            r, h = A.dopen[(q, a)]
            if h != q:
                out.append(f"open ({q},{a}) not in normal form")
    by_type = {}
    for (q, a), (r, _h) in A.dopen.items():
        prev = by_type.setdefault((A.type_of.get(q), a), r)
        if prev != r:
            out.append(f"type {A.type_of.get(q)} opens {a} into both {prev} and {r}")
    for q in A.states:
        for p in A.states:
            for a in A.alphabet:
                got = A.dclose.get((q, p, a))
                want = A.target_fn.get((p, a)) if q in A.local_accept[a] else bot
                if got != want:
                    out.append(f"close ({q},{p},{a}) -> {got}, expected {want}")
    for a in A.alphabet:
        if A.dopen.get((bot, a)) != (bot, bot) or A.target_fn.get((bot, a)) != bot:
            out.append(f"⊥ not absorbing on {a}")
        if bot in A.local_accept[a]:
            out.append(f"⊥ locally accepting for {a}")
    for (q, a), r in A.target_fn.items():
        if A.type_of.get(q) != A.type_of.get(r):
            out.append(f"t({q},{a}) = {r} changes type")
    if bot in A.accepting:
        out.append("⊥ accepting")
    return out


def grammar_to_snwa(T: TreeGrammar) -> Snwa:
    """Simple DNWA with L = L(T); states are named ``TYPE:position``."""
    cls = classify_grammar(T)
    if not cls.single_type:
        X, Y, Z = cls.witness
        raise NotSingleType(f"content of {X} has competing types {Y}, {Z}")
    alphabet = tuple(sorted(T.labels))
    taken = set(T.types)
    root = fresh_name(ROOT_TYPE, taken)
    dead = "dead"
    # per-type DFAs, completed with a dead state of the same type
    dfas = {X: T.dfa(X) for X in T.types}
    root_dfa = Dfa((0, 1), frozenset([T.start]), {(0, T.start): 1}, frozenset([1]))
    dfas[root] = root_dfa

    def name(X, p):
        return f"{X}:{p}"

    child = {}
    for X in dfas:
        for a in alphabet:
            if X == root:
                child[(X, a)] = T.start if T.labeling[T.start] == a else None
            else:
                child[(X, a)] = T.child_type(X, a)

    states, type_of = [BOTTOM], {BOTTOM: BOTTOM}
    for X, D in dfas.items():
        for p in tuple(D.states) + (dead,):
            states.append(name(X, p))
            type_of[name(X, p)] = X
    local_accept = {a: set() for a in alphabet}
    for X in T.types:
        for p in dfas[X].accepting:
            local_accept[T.labeling[X]].add(name(X, p))
    target_fn = {}
    for X, D in dfas.items():
        for p in tuple(D.states) + (dead,):
            for a in alphabet:
                Y = child[(X, a)]
                nxt = D.step(p, Y) if (Y is not None and p != dead) else None
                target_fn[(name(X, p), a)] = name(X, nxt if nxt is not None else dead)
    for a in alphabet:
        target_fn[(BOTTOM, a)] = BOTTOM
    opens, closes = {}, {}
    for q in states:
        X = type_of[q]
        for a in alphabet:
            Y = child.get((X, a))
            r = name(Y, 0) if Y is not None else BOTTOM
            opens[(q, a)] = [(r, q)]
    for q in states:
        for p in states:
            for a in alphabet:
                closes[(q, p, a)] = [target_fn[(p, a)] if q in local_accept[a] else BOTTOM]
    out = Snwa(states, alphabet, opens, closes, name(root, 0), [name(root, 1)],
               type_of, local_accept, target_fn, BOTTOM)
    out.grammar = T
    return out


def snwa_as_sanwa(A: Snwa) -> Sanwa:
    """Lift to a simple ANWA: δ(q,<a>) = (q', t(q,a)) ∧ (q', q?), closes read the hierarchy."""
    test = fresh_name("q?", set(A.states))
    states = tuple(A.states) + (test,)
    open_f, close_f = {}, {}
    target = {}
    for q in A.states:
        for a in A.alphabet:
            r, _h = A.dopen[(q, a)]
            t = A.target_fn[(q, a)]
            open_f[(q, a)] = conj([atom((r, t)), atom((r, test))])
            target[(q, a)] = q
    for q in A.states:
        for a in A.alphabet:
            close_f[(q, test, a)] = TRUE if q in A.local_accept[a] else FALSE
            for p in A.states:
                close_f[(q, p, a)] = atom(p)
    anwa = Anwa(states, A.alphabet, open_f, close_f, A.initial, A.accepting)
    types = dict(A.type_of)
    return check_simplicity(anwa, types, A.local_accept, test, target)


# -- fixtures ----------------------------------------------------------------------------

G_CITY_TEXT = """\
start city
element city -> name.weather.events
element name -> eps
element weather -> eps
element events -> eps
"""


def g_city() -> TreeGrammar:
    return parse_grammar(G_CITY_TEXT)
