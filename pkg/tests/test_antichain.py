import pytest
from hypothesis import given, strategies as st

from axml_games import antichain as ac
from axml_games.errors import EmptyFamilyMember

N = 4
sets = st.integers(min_value=0, max_value=(1 << N) - 1)
families = st.lists(sets, max_size=6)
antichains = families.map(ac.minimize)
effects = st.tuples(*[antichains.filter(bool)] * N)


def brute_min(family):
    family = set(family)
    return {x for x in family if not any(y != x and y & x == y for y in family)}


@given(families)
def test_minimize_is_canonical_antichain(f):
    m = ac.minimize(f)
    assert ac.is_antichain(m)
    assert set(m) == brute_min(f)
    assert ac.minimize(m) == m
    assert ac.minimize(reversed(f)) == m


@given(st.lists(antichains.filter(bool), max_size=3))
def test_mix_matches_cartesian_definition(fam):
    from itertools import product
    expected = brute_min(_union(p) for p in product(*fam))
    assert set(ac.mix(fam)) == expected


def _union(xs):
    out = 0
    for x in xs:
        out |= x
    return out


def test_mix_empty_member():
    with pytest.raises(EmptyFamilyMember):
        ac.mix([(1,), ()])
    assert ac.mix([(1,), ()], strict=False) == ()


def test_mix_of_nothing_is_empty_set():
    assert ac.mix([]) == (0,)


@given(antichains, antichains, antichains)
def test_leq_is_a_preorder(a, b, c):
    assert ac.leq(a, a)
    if ac.leq(a, b) and ac.leq(b, c):
        assert ac.leq(a, c)


@given(antichains, antichains)
def test_leq_antisymmetric_on_canonical_forms(a, b):
    if ac.leq(a, b) and ac.leq(b, a):
        assert a == b


@given(st.sets(st.integers(0, 9)))
def test_bits_members_roundtrip(ix):
    assert ac.members(ac.bits(ix)) == sorted(ix)
    assert ac.popcount(ac.bits(ix)) == len(ix)


@given(effects)
def test_identity_is_neutral(e):
    ident = ac.identity_effect(N)
    assert ac.compose(ident, e) == e
    assert ac.compose(e, ident) == e


@given(effects, effects, effects)
def test_compose_is_associative(e1, e2, e3):
    assert ac.compose(ac.compose(e1, e2), e3) == ac.compose(e1, ac.compose(e2, e3))


@given(effects, effects, effects)
def test_compose_monotone_in_left_argument(e1, e1b, e2):
    # refining the first effect cannot hurt
    better = tuple(ac.minimize(x + y) for x, y in zip(e1, e1b))
    lhs, rhs = ac.compose(better, e2), ac.compose(e1, e2)
    assert all(ac.leq(x, y) for x, y in zip(lhs, rhs))
