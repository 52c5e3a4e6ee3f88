"""Subshifts of finite type given by a 0/1 transition matrix.

States are the integers ``0 .. n-1``; an edge ``a -> b`` is allowed when
``transitions[a][b] == 1``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import EmptyInputError, NotIrreducibleError, ValidationError
from .intlat import IntMatrix

Edge = tuple[int, int]


@dataclass(frozen=True)
class Sft:
    transitions: IntMatrix

    def __post_init__(self):
        t = self.transitions
        if not t.is_square():
            raise ValidationError("transition matrix must be square")
        if any(x not in (0, 1) for row in t.rows for x in row):
            raise ValidationError("transition matrix entries must be 0 or 1")

    @classmethod
    def of(cls, rows: Iterable[Iterable[int]]) -> Sft:
        return cls(IntMatrix.of(rows))

    @classmethod
    def full_shift(cls, n: int) -> Sft:
        return cls.of([[1] * n for _ in range(n)])

    @property
    def state_count(self) -> int:
        return self.transitions.nrows

    def successors(self, a: int) -> list[int]:
        return [b for b, x in enumerate(self.transitions.rows[a]) if x]

    def edges(self) -> list[Edge]:
        n = self.state_count
        return [(a, b) for a in range(n) for b in range(n) if self.transitions.rows[a][b]]

    def allows(self, a: int, b: int) -> bool:
        return self.transitions.rows[a][b] == 1


@dataclass(frozen=True)
class SimpleCycle:
    """A closed path ``states[0] -> ... -> states[-1] == states[0]``."""

    states: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.states) - 1

    def edges(self) -> list[Edge]:
        return list(zip(self.states, self.states[1:]))

    def __str__(self) -> str:
        return "->".join(map(str, self.states))


# -- graph helpers on adjacency lists ----------------------------------------


def strongly_connected_components(n: int, succ: Callable[[int], Iterable[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative. Components come out sorted by smallest member."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    comps.sort(key=lambda c: c[0])
    return comps


def reachable(n: int, succ: Callable[[int], Iterable[int]], start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in succ(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def _strongly_connected(n: int, succ: Callable[[int], Iterable[int]]) -> bool:
    comps = strongly_connected_components(n, succ)
    return len(comps) == 1 and any(True for v in range(n) for _ in succ(v))


# -- public operations -------------------------------------------------------


def components(g: Sft) -> list[list[int]]:
    return strongly_connected_components(g.state_count, g.successors)


def is_irreducible(g: Sft) -> bool:
    """One strongly connected component holding every state, with at least one edge."""
    return _strongly_connected(g.state_count, g.successors)


def transient_states(g: Sft) -> list[int]:
    """States lying on no cycle."""
    out = []
    for comp in components(g):
        if len(comp) == 1 and not g.allows(comp[0], comp[0]):
            out.append(comp[0])
    return out


def period(g: Sft) -> int:
    """gcd of cycle lengths, via BFS levels: gcd of level(a) + 1 - level(b) over edges."""
    if not is_irreducible(g):
        raise NotIrreducibleError("period is defined for irreducible shifts only")
    level = {0: 0}
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for b in g.successors(a):
            if b not in level:
                level[b] = level[a] + 1
                queue.append(b)
    p = 0
    for a, b in g.edges():
        p = math.gcd(p, level[a] + 1 - level[b])
    return p


def simple_cycles(g: Sft) -> list[SimpleCycle]:
    """Every elementary circuit once, started at its smallest state (Johnson's algorithm)."""
    n = g.state_count
    out: list[SimpleCycle] = []
    for s in range(n):
        # restrict to the subgraph on states >= s, and to the component of s there
        def succ_from(v: int, s=s) -> list[int]:
            return [w for w in g.successors(v) if w >= s]

        sub = strongly_connected_components(n, succ_from)
        comp = next(c for c in sub if s in c)
        allowed = set(comp)
        blocked = [False] * n
        bmap: dict[int, set[int]] = {v: set() for v in allowed}
        path = [s]

        def unblock(u: int) -> None:
            stack = [u]
            while stack:
                x = stack.pop()
                if blocked[x]:
                    blocked[x] = False
                    stack.extend(bmap[x])
                    bmap[x].clear()

        # iterative circuit search
        blocked[s] = True
        frames = [(s, iter([w for w in succ_from(s) if w in allowed]), False)]
        while frames:
            v, it, found = frames[-1]
            pushed = False
            for w in it:
                if w == s:
                    out.append(SimpleCycle(tuple(path) + (s,)))
                    found = True
                elif not blocked[w]:
                    frames[-1] = (v, it, found)
                    path.append(w)
                    blocked[w] = True
                    frames.append((w, iter([x for x in succ_from(w) if x in allowed]), False))
                    pushed = True
                    break
            if pushed:
                continue
            frames[-1] = (v, it, found)
            frames.pop()
            if found:
                unblock(v)
            else:
                for w in succ_from(v):
                    if w in allowed:
                        bmap[w].add(v)
            path.pop()
            if frames:
                u, uit, ufound = frames[-1]
                frames[-1] = (u, uit, ufound or found)
    out.sort(key=lambda c: (c.length, c.states))
    return out


def simple_blocks(g: Sft) -> list[SimpleCycle]:
    """Every rotation of every elementary circuit: closed blocks with no inner repeat."""
    out = []
    for c in simple_cycles(g):
        body = c.states[:-1]
        for i in range(len(body)):
            rot = body[i:] + body[:i]
            out.append(SimpleCycle(rot + (rot[0],)))
    out.sort(key=lambda c: (c.length, c.states))
    return out


def allowed_blocks(g: Sft, k: int) -> list[tuple[int, ...]]:
    """All allowed words of length k, lexicographic."""
    words = [(a,) for a in range(g.state_count)]
    for _ in range(k - 1):
        words = [w + (b,) for w in words for b in g.successors(w[-1])]
    return sorted(words)


def power_presentation(
    g: Sft,
    k: int,
    weights: Callable[[int, int], Sequence[int]] | None = None,
    combine: Callable[[Sequence[Sequence[int]]], Sequence[int]] | None = None,
) -> tuple[Sft, list[tuple[int, ...]], dict[Edge, tuple[int, ...]]]:
    """Non-overlapping k-block presentation of sigma^k.

    Returns the new shift, its states (the allowed k-blocks, in index order),
    and block-edge weights. The weight of ``b -> b'`` combines the k edge
    weights read along ``b`` followed by the first symbol of ``b'``; by
    default they are summed.
    """
    if k < 1:
        raise ValueError("k must be positive")
    blocks = allowed_blocks(g, k)
    if not blocks:
        raise EmptyInputError(f"no allowed blocks of length {k}")
    m = len(blocks)
    rows = [[0] * m for _ in range(m)]
    new_weights: dict[Edge, tuple[int, ...]] = {}
    for i, b in enumerate(blocks):
        for j, c in enumerate(blocks):
            if g.allows(b[-1], c[0]):
                rows[i][j] = 1
                if weights is not None:
                    path = b + (c[0],)
                    parts = [tuple(weights(x, y)) for x, y in zip(path, path[1:])]
                    if combine is None:
                        total = tuple(sum(col) for col in zip(*parts))
                    else:
                        total = tuple(combine(parts))
                    new_weights[(i, j)] = total
    return Sft.of(rows), blocks, new_weights
