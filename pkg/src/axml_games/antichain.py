"""Antichains of state sets encoded as int bitsets.

An antichain is a tuple of ints sorted by (popcount, value) with no member a
subset of another, which makes the representation canonical.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import EmptyFamilyMember


def popcount(x: int) -> int:
    return bin(x).count("1")


def _key(x: int):
    return (popcount(x), x)


def minimize(sets: Iterable[int]) -> tuple:
    out: list[int] = []
    for s in sorted(set(sets), key=_key):
        if not any(m & s == m for m in out):
            out.append(s)
    return tuple(out)


def is_antichain(sets: Sequence[int]) -> bool:
    return tuple(sets) == minimize(sets)


def mix(family: Iterable[Sequence[int]], strict: bool = True) -> tuple:
    """Minimal unions picking one member from each antichain of ``family``."""
    acc = (0,)
    for member in family:
        if not member:
            if strict:
                raise EmptyFamilyMember("mix over an empty antichain")
            return ()
        acc = minimize(x | y for x in acc for y in member)
    return acc


def leq(a: Sequence[int], b: Sequence[int]) -> bool:
    """a ⊑ b: every member of b has a subset in a (a is at least as good)."""
    return all(any(x & y == x for x in a) for y in b)


def has_subset_of(a: Sequence[int], bound: int) -> bool:
    return any(x & bound == x for x in a)


def bits(indices: Iterable[int]) -> int:
    out = 0
    for i in indices:
        out |= 1 << i
    return out


def members(x: int) -> list[int]:
    out = []
    i = 0
    while x:
        if x & 1:
            out.append(i)
        x >>= 1
        i += 1
    return out


def identity_effect(n: int) -> tuple:
    return tuple(((1 << q),) for q in range(n))


def compose(e1: Sequence, e2: Sequence, strict: bool = True) -> tuple:
    """(E1∘E2)(q) = min ⋃_{X∈E1(q)} mix{E2(q') | q' ∈ X}."""
    cache: dict[int, tuple] = {}
    out = []
    for ac in e1:
        sets = []
        for x in ac:
            if x not in cache:
                cache[x] = mix((e2[p] for p in members(x)), strict=strict)
            sets.extend(cache[x])
        out.append(minimize(sets))
    return tuple(out)
