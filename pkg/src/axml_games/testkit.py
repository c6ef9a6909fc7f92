"""Test-vector generators and independent oracles.

Everything random here is a pure function of its parameters and a seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product as cartesian

from . import antichain as ac
from .alternating import Anwa
from .automata import Dnwa
from .errors import ExplosionGuard, GameFormatError, TooManyVariables
from .formulas import FALSE, TRUE, atom, conj, disj
from .game import Game
from .nested_word import Close, NestedWord, Open, from_forest, Node, nw, to_forest
from .schemas import (TreeGrammar, classify_grammar, dre_to_text, grammar_to_snwa,
                      is_deterministic)

# -- QBF ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Qbf:
    """Prenex CNF.  Variables are 1..n in prefix order; literals are ±i."""

    prefix: tuple   # ("E" | "A", ...) one quantifier per variable
    matrix: tuple   # tuple of clauses, each a tuple of literals

    @property
    def n(self) -> int:
        return len(self.prefix)

    def __str__(self):
        q = "".join(f"{'∃' if k == 'E' else '∀'}x{i + 1}" for i, k in enumerate(self.prefix))
        cl = "∧".join("(" + "∨".join(("¬" if l < 0 else "") + f"x{abs(l)}" for l in c) + ")"
                      for c in self.matrix)
        return f"{q}.{cl or 'true'}"


def qbf_eval(phi: Qbf) -> bool:
    if phi.n > 20:
        raise TooManyVariables(f"{phi.n} variables (limit 20)")

    def go(i, assign):
        if i == phi.n:
            return all(any((l > 0) == assign[abs(l) - 1] for l in c) for c in phi.matrix)
        branches = (go(i + 1, assign + (v,)) for v in (True, False))
        return any(branches) if phi.prefix[i] == "E" else all(branches)

    return go(0, ())


def qbf_to_anwa(phi: Qbf) -> tuple[Anwa, NestedWord]:
    """ANWA A and word w = <v1>…<vn><X></X></vn>…</v1> with A accepting w iff phi holds."""
    n, m = phi.n, len(phi.matrix)
    v = [f"v{i}" for i in range(1, n + 1)]
    alphabet = v + ["X"]
    assign = ["q0", "q+", "q-"]
    clause = [f"q{j}" for j in range(1, m + 1)]
    states = assign + ["qF"] + clause
    opens, closes = {}, {}
    for q in assign:
        for i, vi in enumerate(v):
            moves = [atom(("q+", q)), atom(("q-", q))]
            opens[(q, vi)] = disj(moves) if phi.prefix[i] == "E" else conj(moves)
        opens[(q, "X")] = conj(atom((qj, q)) for qj in clause)

    def sat(j, var, value):
        return (var if value else -var) in phi.matrix[j]

    for j, qj in enumerate(clause):
        if n:
            for q, value in (("q+", True), ("q-", False)):
                closes[(qj, q, "X")] = atom("qF" if sat(j, n, value) else qj)
        for i in range(2, n + 1):
            for q, value in (("q+", True), ("q-", False)):
                closes[(qj, q, f"v{i}")] = atom("qF" if sat(j, i - 1, value) else qj)
    for q in states:
        if n:
            closes[(q, "q0", "v1")] = atom(q)
    for i in range(2, n + 1):
        for q in assign:
            closes[("qF", q, f"v{i}")] = atom("qF")
    A = Anwa(states, alphabet, opens, closes, "q0", ["qF"])
    w = [Open(x) for x in v] + [Open("X"), Close("X")] + [Close(x) for x in reversed(v)]
    return A, NestedWord(w)


def parse_qdimacs(text: str) -> Qbf:
    """QDIMACS subset: ``p cnf``, ``e``/``a`` lines, clauses ending in 0.

    Free variables are existentially quantified outermost; variables are
    renumbered to follow prefix order.
    """
    nvars = None
    blocks, clauses = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        toks = line.split()
        if toks[0] == "p":
            if len(toks) < 4 or toks[1] != "cnf":
                raise GameFormatError(f"bad problem line {raw!r}")
            nvars = int(toks[2])
            continue
        nums = [int(t) for t in (toks[1:] if toks[0] in "ea" else toks)]
        if not nums or nums[-1] != 0:
            raise GameFormatError(f"line must end with 0: {raw!r}")
        if toks[0] in "ea":
            blocks.append((toks[0].upper(), nums[:-1]))
        else:
            clauses.append(tuple(nums[:-1]))
    if nvars is None:
        raise GameFormatError("missing 'p cnf' line")
    bound = [x for _, xs in blocks for x in xs]
    free = [x for x in range(1, nvars + 1) if x not in bound]
    order = free + bound
    kinds = ["E"] * len(free) + [k for k, xs in blocks for _ in xs]
    ren = {x: i + 1 for i, x in enumerate(order)}
    matrix = tuple(tuple((1 if l > 0 else -1) * ren[abs(l)] for l in c) for c in clauses)
    return Qbf(tuple(kinds), matrix)


def qbf_word_text(w: NestedWord) -> str:
    return str(w)


def all_small_qbfs(max_vars=3, max_clauses=2, max_lits=3):
    """Every prenex CNF within the bounds (clauses are sets of distinct variables)."""
    for n in range(max_vars + 1):
        lits = []
        for size in range(1, min(max_lits, n) + 1):
            lits += _clauses(n, size)
        for prefix in cartesian("EA", repeat=n):
            for m in range(max_clauses + 1):
                for matrix in cartesian(lits, repeat=m):
                    yield Qbf(tuple(prefix), tuple(matrix))


def _clauses(n, size):
    from itertools import combinations
    out = []
    for vars_ in combinations(range(1, n + 1), size):
        for signs in cartesian((1, -1), repeat=size):
            out.append(tuple(s * v for s, v in zip(signs, vars_)))
    return out


def random_qbf(seed: int, n: int = 6, m: int = 6, k: int = 3) -> Qbf:
    rng = random.Random(seed)
    prefix = tuple(rng.choice("EA") for _ in range(n))
    matrix = []
    for _ in range(m):
        vars_ = rng.sample(range(1, n + 1), min(k, n))
        matrix.append(tuple(v if rng.random() < 0.5 else -v for v in vars_))
    return Qbf(prefix, tuple(matrix))


# -- random words and automata -----------------------------------------------------------

def random_forest(rng: random.Random, alphabet, nodes: int) -> list[Node]:
    """A random forest with exactly ``nodes`` nodes."""
    out = []
    while nodes > 0:
        size = rng.randint(1, nodes)
        nodes -= size
        out.append(Node(rng.choice(alphabet), tuple(random_forest(rng, alphabet, size - 1))))
    return out


def random_word(rng: random.Random, alphabet, max_length: int, rooted: bool = False) -> NestedWord:
    alphabet = sorted(alphabet)
    nodes = rng.randint(1 if rooted else 0, max_length // 2)
    if rooted:
        return from_forest([Node(rng.choice(alphabet),
                                 tuple(random_forest(rng, alphabet, nodes - 1)))])
    return from_forest(random_forest(rng, alphabet, nodes))


def random_dnwa(rng: random.Random, alphabet, n_states: int) -> Dnwa:
    """Total normal-form DNWA with states q0..q{n-1} and a nonempty accepting set."""
    Q = [f"q{i}" for i in range(n_states)]
    opens = {(q, a): [(rng.choice(Q), q)] for q in Q for a in alphabet}
    closes = {(q, p, a): [rng.choice(Q)] for q in Q for p in Q for a in alphabet}
    acc = [q for q in Q if rng.random() < 0.4] or [rng.choice(Q)]
    return Dnwa(Q, alphabet, opens, closes, "q0", acc)


@dataclass(frozen=True)
class GameParams:
    max_states: int = 4
    max_symbols: int = 3
    max_functions: int = 2
    max_rule_words: int = 3
    max_rule_length: int = 6
    max_word_length: int = 10


def random_finite_game(params: GameParams = GameParams(), seed: int = 0) -> Game:
    rng = random.Random(seed)
    k = rng.randint(2, params.max_symbols)
    alphabet = [chr(ord("a") + i) for i in range(k)]
    nf = rng.randint(1, min(params.max_functions, k))
    functions = sorted(rng.sample(alphabet, nf))
    target = random_dnwa(rng, alphabet, rng.randint(2, params.max_states))
    rules = {}
    for f in functions:
        count = rng.randint(1, params.max_rule_words)
        rules[f] = tuple(random_word(rng, alphabet, params.max_rule_length) for _ in range(count))
    return Game(alphabet, functions, rules, target, name=f"random-{seed}")


def random_game_word(game: Game, seed: int, max_length: int = 10) -> NestedWord:
    return random_word(random.Random(seed), game.alphabet, max_length)


# -- random grammars and simple games ------------------------------------------------------

def random_dre(rng: random.Random, symbols, size: int):
    """Random expression AST (positions are renumbered by the consumers)."""
    if size <= 1:
        r = rng.random()
        if r < 0.08:
            return ("eps",)
        return ("sym", rng.choice(symbols), 0)
    kind = rng.choice(["alt", "cat", "cat", "star", "opt"])
    if kind in ("star", "opt"):
        return (kind, random_dre(rng, symbols, size - 1))
    left = rng.randint(1, size - 1)
    return (kind, random_dre(rng, symbols, left), random_dre(rng, symbols, size - left))


def random_deterministic_dre(rng: random.Random, symbols, size: int):
    for _ in range(200):
        e = random_dre(rng, symbols, size)
        if is_deterministic(e):
            return e
    return ("sym", rng.choice(symbols), 0)


def random_grammar(seed: int, max_types: int = 5, n_labels: int | None = None,
                   local: bool = False) -> TreeGrammar:
    """Random single-type grammar (local when ``local``) with deterministic content models."""
    rng = random.Random(seed)
    n = rng.randint(1, max_types)
    types = [f"T{i}" for i in range(n)]
    if local:
        labeling = {X: chr(ord("a") + i) for i, X in enumerate(types)}
    else:
        k = n_labels or rng.randint(1, n)
        labeling = {X: chr(ord("a") + rng.randrange(k)) for X in types}
        labeling[types[0]] = "a"
    labels = sorted(set(labeling.values()) | ({chr(ord("a") + i) for i in range(k)}
                                              if not local else set()))
    prods = {}
    for X in types:
        # a content model uses at most one type per label
        pool = {}
        for Y in rng.sample(types, len(types)):
            pool.setdefault(labeling[Y], Y)
        allowed = sorted(pool.values())
        if rng.random() < 0.25 or not allowed:
            prods[X] = ("eps",)
        else:
            prods[X] = random_deterministic_dre(rng, allowed, rng.randint(1, 4))
    return TreeGrammar(frozenset(labels), tuple(types), types[0], prods, labeling)


def random_simple_game(seed: int, max_types: int = 3, max_rule_words: int = 2,
                       max_rule_length: int = 6) -> Game:
    rng = random.Random(seed)
    g = random_grammar(rng.randrange(1 << 30), max_types=max_types)
    labels = sorted(g.labels)
    extra = [] if rng.random() < 0.5 else ["f"]
    alphabet = labels + extra
    g = TreeGrammar(frozenset(alphabet), g.types, g.start, g.productions, g.labeling)
    target = grammar_to_snwa(g)
    functions = sorted(set(rng.sample(alphabet, rng.randint(1, min(2, len(alphabet))))) | set(extra))
    rules = {}
    for f in functions:
        rules[f] = tuple(random_word(rng, alphabet, max_rule_length)
                         for _ in range(rng.randint(1, max_rule_words)))
    game = Game(alphabet, functions, rules, target, name=f"simple-{seed}")
    game.meta["grammar"] = g
    return game


# -- brute-force word effects ---------------------------------------------------------------

def brute_force_effect(game: Game, w: NestedWord, q: str, depth_cap: int,
                       node_cap: int = 200_000) -> tuple:
    """Antichain of final-state sets Juliet can force on ``w`` from ``q``.

    The game tree is explored literally on concrete words: Juliet's options
    are unions, Romeo's replies are combined by taking one outcome set per
    reply.  Calls are allowed on tags whose level is below ``depth_cap``.
    Returned as a tuple of frozensets of state names, minimized.
    """
    T = game.target
    memo: dict = {}
    count = [0]

    def outcomes(state, stack, v):
        key = (state, stack, v)
        if key in memo:
            return memo[key]
        count[0] += 1
        if count[0] > node_cap:
            raise ExplosionGuard(f"more than {node_cap} game nodes")
        if not v:
            res = {frozenset([state])}
        else:
            (tag, lvl), rest = v[0], v[1:]
            if tag.is_open:
                r, _h = T.step_open(state, tag.symbol)
                res = outcomes(r, stack + (state,), rest)
            else:
                res = set(outcomes(T.step_close(state, stack[-1], tag.symbol), stack[:-1], rest))
                if tag.symbol in game.functions and lvl < depth_cap:
                    acc = {frozenset()}
                    for y in game.words(tag.symbol):
                        sub = outcomes(stack[-1], stack[:-1],
                                       tuple((t, lvl + 1) for t in y) + rest)
                        acc = {x | s for x in acc for s in sub}
                    res |= acc
        res = _min_sets(res)
        memo[key] = res
        return res

    return tuple(sorted(outcomes(q, (), tuple((t, 0) for t in w)), key=lambda s: (len(s), sorted(s))))


def _min_sets(sets):
    sets = sorted(set(sets), key=len)
    out = []
    for s in sets:
        if not any(m <= s for m in out):
            out.append(s)
    return frozenset(out)


def effect_as_sets(game: Game, antichain) -> tuple:
    """Convert a bitset antichain to the brute-force representation."""
    names = game.target.states
    return tuple(sorted((frozenset(names[i] for i in ac.members(x)) for x in antichain),
                        key=lambda s: (len(s), sorted(s))))


# -- fixtures ---------------------------------------------------------------------------------

def two_stage_game() -> Game:
    """R_a = {<b></b>}, R_b = {<c></c>}, T = {<r><c></c></r>}; C¹ ≠ C² = C³."""
    opens = {("q0", "r"): [("q1", "q0")], ("q1", "c"): [("q2", "q1")]}
    closes = {("q2", "q1", "c"): ["q3"], ("q3", "q0", "r"): ["qF"]}
    T = Dnwa(["q0", "q1", "q2", "q3", "qF", "⊥"], ["r", "a", "b", "c"], opens, closes, "q0", ["qF"])
    rules = {"a": (nw("<b></b>"),), "b": (nw("<c></c>"),)}
    return Game(("r", "a", "b", "c"), ("a", "b"), rules, T, name="two-stage")


def city_game() -> Game:
    """G_city target; a placeholder <f> element is replaced by the missing events."""
    from .schemas import G_CITY_TEXT, parse_grammar
    g = parse_grammar(G_CITY_TEXT, extra_labels=["f"])
    target = grammar_to_snwa(g)
    rules = {"f": (nw("<events></events>"),)}
    game = Game(sorted(g.labels), ("f",), rules, target, name="city")
    game.meta["grammar"] = g
    return game


CITY_WORD = "<city><name></name><weather></weather><f></f></city>"


# -- validation games ---------------------------------------------------------------------

def random_dtd(rng: random.Random, labels, start: str, eps_bias: float = 0.35) -> TreeGrammar:
    labels = sorted(labels)
    prods = {}
    for a in labels:
        if rng.random() < eps_bias:
            prods[a] = ("eps",)
        else:
            prods[a] = random_deterministic_dre(rng, labels, rng.randint(1, 3))
    return TreeGrammar(frozenset(labels), tuple(labels), start, prods, {a: a for a in labels})


def random_validation_game(seed: int, labels=("a", "b", "c"), max_rule_words: int = 2,
                           max_rule_length: int = 6, universal: bool = False):
    """A DTD-targeted game with explicit rules and one validator per function.

    With ``universal`` every validator accepts all trees rooted at its symbol,
    so the validated game coincides with the plain one.
    """
    from .validation import ValidationGame, universal_dtd

    rng = random.Random(seed)
    labels = sorted(labels)
    target = random_dtd(rng, labels, rng.choice(labels))
    functions = sorted(rng.sample(labels, rng.randint(1, 2)))
    rules = {f: tuple(random_word(rng, labels, max_rule_length)
                      for _ in range(rng.randint(1, max_rule_words))) for f in functions}
    validators = {}
    for f in functions:
        if universal:
            validators[f] = universal_dtd(labels, f)
        else:
            start = f if rng.random() < 0.85 else rng.choice(labels)
            validators[f] = random_dtd(rng, labels, start, eps_bias=0.2)
    base = Game(labels, functions, rules, grammar_to_snwa(target), name=f"validation-{seed}")
    base.target.grammar = target
    return ValidationGame.build(base, target, validators)


def random_validation_word(seed: int, G, max_length: int = 8) -> NestedWord:
    rng = random.Random(seed)
    w = random_word(rng, G.base.alphabet, max_length, rooted=True)
    if rng.random() < 0.7:
        kids = to_forest(w)[0].children
        w = from_forest([Node(G.target.start, kids)])
    return w
