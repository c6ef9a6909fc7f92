"""Nested words: well-nested tag sequences linearising forests."""

from __future__ import annotations

import re
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import IndexOutOfRange, NotWellNested, TagSyntaxError

# ⌫ is the reserved backspace symbol of converted insertion games
SYMBOL_RE = re.compile(r"[A-Za-z0-9_'()|,.#\-]+|⌫")
_TAG_RE = re.compile(r"<(/?)([^<>\s/]+)>")


class Tag(NamedTuple):
    """An opening or closing tag.  Sorts opens before closes for equal symbols."""

    is_open: bool
    symbol: str

    def __repr__(self) -> str:
        return f"<{self.symbol}>" if self.is_open else f"</{self.symbol}>"

    def sort_key(self):
        return (self.symbol, 0 if self.is_open else 1)


def Open(a: str) -> Tag:
    return Tag(True, a)


def Close(a: str) -> Tag:
    return Tag(False, a)


class NestedWord:
    """Immutable well-nested sequence of tags.

    The matching table is computed lazily with a single stack scan.
    """

    __slots__ = ("tags", "_match", "_hash")

    def __init__(self, tags: Iterable[Tag] = (), check: bool = True):
        self.tags = tuple(tags)
        self._match = None
        self._hash = None
        if check:
            self._compute_matching()

    # -- sequence protocol -------------------------------------------------
    def __len__(self) -> int:
        return len(self.tags)

    def __iter__(self) -> Iterator[Tag]:
        return iter(self.tags)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return NestedWord(self.tags[i])
        return self.tags[i]

    def __add__(self, other: "NestedWord") -> "NestedWord":
        return NestedWord(self.tags + tuple(other), check=False)

    def __eq__(self, other) -> bool:
        if isinstance(other, NestedWord):
            return self.tags == other.tags
        return NotImplemented

    def __lt__(self, other: "NestedWord") -> bool:
        return length_lex_key(self) < length_lex_key(other)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.tags)
        return self._hash

    def __repr__(self) -> str:
        return f"NestedWord({serialize_nested_word(self)!r})"

    def __str__(self) -> str:
        return serialize_nested_word(self)

    # -- structure -----------------------------------------------------------
    def _compute_matching(self):
        if self._match is not None:
            return self._match
        match = [0] * len(self.tags)
        stack: list[int] = []
        for i, tag in enumerate(self.tags):
            if tag.is_open:
                stack.append(i)
                continue
            if not stack:
                raise NotWellNested(f"closing tag {tag!r} at {i} has no opening tag")
            j = stack.pop()
            if self.tags[j].symbol != tag.symbol:
                raise NotWellNested(f"{self.tags[j]!r} at {j} closed by {tag!r} at {i}")
            match[i], match[j] = j, i
        if stack:
            raise NotWellNested(f"unclosed tag {self.tags[stack[-1]]!r} at {stack[-1]}")
        self._match = tuple(match)
        return self._match

    def matching(self, i: int) -> int:
        if not 0 <= i < len(self.tags):
            raise IndexOutOfRange(f"position {i} outside word of length {len(self.tags)}")
        return self._compute_matching()[i]

    @property
    def symbols(self) -> frozenset:
        return frozenset(t.symbol for t in self.tags)

    def roots(self) -> list[tuple[int, int]]:
        """(open, close) positions of the top-level trees."""
        out = []
        i = 0
        while i < len(self.tags):
            j = self.matching(i)
            out.append((i, j))
            i = j + 1
        return out

    def is_rooted(self) -> bool:
        return len(self.tags) > 0 and self.matching(0) == len(self.tags) - 1

    def forest(self) -> list["Node"]:
        return to_forest(self)


def length_lex_key(w: Sequence[Tag]):
    return (len(w), tuple(t.sort_key() for t in w))


EPSILON = NestedWord(())


def parse_nested_word(text: str) -> NestedWord:
    pos = 0
    tags = []
    for m in _TAG_RE.finditer(text):
        gap = text[pos:m.start()]
        if gap.strip():
            raise TagSyntaxError(f"unexpected text {gap.strip()!r} at offset {pos}")
        name = m.group(2)
        if not SYMBOL_RE.fullmatch(name):
            raise TagSyntaxError(f"bad tag name {name!r} at offset {m.start()}")
        tags.append(Tag(m.group(1) == "", name))
        pos = m.end()
    if text[pos:].strip():
        raise TagSyntaxError(f"unexpected text {text[pos:].strip()!r} at offset {pos}")
    return NestedWord(tags)


def serialize_nested_word(w: Iterable[Tag]) -> str:
    return "".join(f"<{t.symbol}>" if t.is_open else f"</{t.symbol}>" for t in w)


def nw(text: str) -> NestedWord:
    """Shorthand used heavily in tests and fixtures."""
    return parse_nested_word(text)


# -- forest view -----------------------------------------------------------

class Node(NamedTuple):
    label: str
    children: tuple


def to_forest(w: NestedWord) -> list[Node]:
    stack: list[list] = [[]]
    for t in w.tags:
        if t.is_open:
            stack.append([])
        else:
            kids = stack.pop()
            stack[-1].append(Node(t.symbol, tuple(kids)))
    return stack[0]


def from_forest(forest: Iterable[Node]) -> NestedWord:
    tags: list[Tag] = []

    def emit(node):
        tags.append(Open(node.label))
        for c in node.children:
            emit(c)
        tags.append(Close(node.label))

    for n in forest:
        emit(n)
    return NestedWord(tags, check=False)


def tree(label: str, *children: NestedWord) -> NestedWord:
    inner = tuple(t for c in children for t in c)
    return NestedWord((Open(label),) + inner + (Close(label),), check=False)


def measures(w: NestedWord) -> tuple[int, int, int]:
    """(depth, width, rootWidth) of the forest encoded by ``w``."""
    depth = 0
    width = 0
    cur = 0
    counts = [0]  # children counted per open node, index 0 = roots
    for t in w:
        if t.is_open:
            counts[-1] += 1
            counts.append(0)
            cur += 1
            depth = max(depth, cur)
        else:
            width = max(width, counts.pop())
            cur -= 1
    return depth, width, counts[0]


def flat_embed(s: Iterable[str]) -> NestedWord:
    tags = []
    for a in s:
        tags += [Open(a), Close(a)]
    return NestedWord(tags, check=False)


def nested_words(alphabet: Iterable[str], max_depth: int, max_width: int,
                 max_length: int | None = None) -> Iterator[NestedWord]:
    """All forests within the bounds, in length-lexicographic order.

    ``max_width`` bounds both the root count and every node's child count.
    """
    alphabet = sorted(alphabet)
    by_len: dict[int, list[tuple]] = {}

    def forests(depth: int, width: int) -> list[tuple]:
        # forests of trees with depth <= depth and at most width roots
        if depth == 0:
            return [()]
        trees = [
            (Open(a),) + f + (Close(a),)
            for f in forests(depth - 1, max_width) for a in alphabet
            if max_length is None or len(f) + 2 <= max_length
        ]
        out = [()]
        layer = [()]
        for _ in range(width):
            layer = [f + t for f in layer for t in trees]
            if max_length is not None:
                layer = [f for f in layer if len(f) <= max_length]
            out += layer
        return out

    for f in forests(max_depth, max_width):
        if max_length is None or len(f) <= max_length:
            by_len.setdefault(len(f), []).append(f)
    for n in sorted(by_len):
        for f in sorted(by_len[n], key=lambda f: tuple(t.sort_key() for t in f)):
            yield NestedWord(f, check=False)


def nested_trees(alphabet: Iterable[str], max_depth: int, max_width: int) -> Iterator[NestedWord]:
    """All single trees of depth <= max_depth and node width <= max_width."""
    alphabet = sorted(alphabet)

    def trees(depth):
        if depth == 0:
            return []
        below = trees(depth - 1)
        kids = [()]
        layer = [()]
        for _ in range(max_width if depth > 1 else 0):
            layer = [f + t for f in layer for t in below]
            kids += layer
        return [(Open(a),) + f + (Close(a),) for a in alphabet for f in kids]

    for t in sorted(trees(max_depth), key=lambda f: (len(f), tuple(x.sort_key() for x in f))):
        yield NestedWord(t, check=False)
