import itertools
import random
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from skewdyn.errors import EmptyInputError, NotIrreducibleError, ValidationError
from skewdyn.sft import (
    Sft,
    allowed_blocks,
    components,
    is_irreducible,
    period,
    power_presentation,
    simple_blocks,
    simple_cycles,
    transient_states,
)


@st.composite
def graphs(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    return Sft.of([[int(draw(st.booleans())) for _ in range(n)] for _ in range(n)])


def brute_force_cycles(g):
    """Every elementary circuit, as a set of canonical rotations."""
    n = g.state_count
    found = set()
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            first = subset[0]
            for rest in itertools.permutations(subset[1:]):
                path = (first,) + rest + (first,)
                if all(g.allows(a, b) for a, b in zip(path, path[1:])):
                    found.add(path)
    return found


def test_full_two_shift_cycles():
    g = Sft.full_shift(2)
    assert [str(c) for c in simple_cycles(g)] == ["0->0", "1->1", "0->1->0"]
    assert len(simple_blocks(g)) == 4
    assert period(g) == 1


def test_period_of_cycle_graph():
    g = Sft.of([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    assert period(g) == 3
    assert is_irreducible(g)


def test_reducible_graph():
    g = Sft.of([[1, 1], [0, 1]])
    assert not is_irreducible(g)
    assert components(g) == [[0], [1]]
    with pytest.raises(NotIrreducibleError):
        period(g)


def test_transient_states_are_flagged():
    g = Sft.of([[0, 1], [0, 1]])
    assert transient_states(g) == [0]


def test_invalid_matrix_rejected():
    with pytest.raises(ValidationError):
        Sft.of([[2]])
    with pytest.raises(ValidationError):
        Sft.of([[1, 0]])


def test_allowed_blocks_of_golden_mean_shift():
    g = Sft.of([[1, 1], [1, 0]])
    assert allowed_blocks(g, 2) == [(0, 0), (0, 1), (1, 0)]


@settings(max_examples=120, deadline=None)
@given(graphs())
def test_simple_cycles_match_brute_force(g):
    cycles = simple_cycles(g)
    assert {c.states for c in cycles} == brute_force_cycles(g)
    assert len(cycles) == len({c.states for c in cycles})
    for c in cycles:
        assert c.states[0] == min(c.states)
        assert len(set(c.states[:-1])) == c.length


@settings(max_examples=120, deadline=None)
@given(graphs())
def test_simple_blocks_are_rotations(g):
    blocks = simple_blocks(g)
    assert len(blocks) == sum(c.length for c in simple_cycles(g))
    for b in blocks:
        assert all(g.allows(x, y) for x, y in b.edges())


@settings(max_examples=120, deadline=None)
@given(graphs())
def test_period_divides_cycle_lengths(g):
    if not is_irreducible(g):
        return
    p = period(g)
    lengths = [c.length for c in simple_cycles(g)]
    for n in lengths:
        assert n % p == 0
    assert p == lengths[0] if len(lengths) == 1 else p == _gcd_all(lengths)


def _gcd_all(xs):
    out = 0
    for x in xs:
        out = gcd(out, x)
    return out


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=4), st.integers(1, 3), st.integers(0, 10**6))
def test_power_presentation_is_additive(g, k, seed):
    rng = random.Random(seed)
    w = {e: (rng.randint(-3, 3),) for e in g.edges()}
    if not allowed_blocks(g, k):
        with pytest.raises(EmptyInputError):
            power_presentation(g, k)
        return
    g2, blocks, weights = power_presentation(g, k, lambda a, b: w[(a, b)])
    for _ in range(5):
        # a random closed walk in the block shift, when one shows up
        start = rng.randrange(g2.state_count)
        path = [start]
        for _ in range(6):
            nxt = g2.successors(path[-1])
            if not nxt:
                break
            path.append(rng.choice(nxt))
        closings = [i for i, x in enumerate(path) if i and x == start]
        if not closings:
            continue
        path = path[: closings[0] + 1]
        total = sum(weights[e][0] for e in zip(path, path[1:]))
        walk = [s for i in path[:-1] for s in blocks[i]] + [blocks[start][0]]
        assert len(walk) == k * (len(path) - 1) + 1
        assert total == sum(w[(a, b)][0] for a, b in zip(walk, walk[1:]))
