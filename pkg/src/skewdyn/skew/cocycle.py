"""Untwisted Z^k cocycles over finite directed graphs.

An untwisted skew product, the Fried quotient of any iterate of a twisted
one, and translates of these all reduce to the same object: a finite graph
whose edges carry integer vectors. Closed walks are the periodic orbits of
the base; the displacement lattice and rotation set are read off here
without enumerating cycles:

* the lattice from fundamental cycles of a spanning tree, and
* the rotation polytope from a support oracle, each query being a
  maximum-mean-cycle problem solved exactly with Karp's recursion.

Iterates are handled by *phased* graphs: ``PhasedSkew(tau, block, reps,
shift)`` stands for ``(T_shift o tau^block)^reps``. Its nodes are
``(state, phase)`` with ``P = block * reps`` phases; a cycle of length
``m P`` is a periodic orbit of period ``m`` of the iterate, whose rotation
vector is ``P`` times the mean edge weight.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from ..intlat import IntMatrix, Lattice, Vector, lattice_from_generators
from ..polytope import Point, RatPolytope, hull_from_support
from ..sft import reachable, strongly_connected_components
from .core import TwistedSkew, fried_splitting


@dataclass(frozen=True)
class CocycleGraph:
    n: int
    k: int
    edges: tuple[tuple[int, int, Vector], ...]
    stride: int = 1
    labels: tuple = ()

    @cached_property
    def out_edges(self) -> list[list[int]]:
        out = [[] for _ in range(self.n)]
        for i, (u, _, _) in enumerate(self.edges):
            out[u].append(i)
        return out

    def successors(self, v: int) -> list[int]:
        return [self.edges[i][1] for i in self.out_edges[v]]

    def components(self) -> list[list[int]]:
        return strongly_connected_components(self.n, self.successors)

    def is_strongly_connected(self) -> bool:
        return bool(self.edges) and len(self.components()) == 1

    def lattice(self) -> Lattice:
        """Subgroup generated by the weights of closed walks."""
        gens = []
        comp_of = {}
        for ci, comp in enumerate(self.components()):
            for v in comp:
                comp_of[v] = ci
        pot: dict[int, Vector] = {}
        zero = (0,) * self.k
        for comp in self.components():
            root = comp[0]
            pot[root] = zero
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for i in self.out_edges[u]:
                    _, v, w = self.edges[i]
                    if comp_of.get(v) == comp_of[root] and v not in pot:
                        pot[v] = tuple(x + y for x, y in zip(pot[u], w))
                        queue.append(v)
        for u, v, w in self.edges:
            if comp_of[u] == comp_of[v]:
                gens.append(tuple(a + x - b for a, x, b in zip(pot[u], w, pot[v])))
        return lattice_from_generators(gens, self.k)

    # -- max mean cycle ------------------------------------------------------

    def _scalar(self, functional: Sequence[int]) -> list[int]:
        return [sum(c * x for c, x in zip(functional, w)) for _, _, w in self.edges]

    def max_mean_cycle(self, functional: Sequence[int]) -> tuple[Fraction, list[int]]:
        """Largest mean of ``functional . weight`` over cycles, and a simple cycle attaining it.

        The cycle is returned as a list of edge indices.
        """
        s = self._scalar(functional)
        n = self.n
        neg = None
        # D[j][v]: best weight of a walk with exactly j edges ending at v
        D = [[0] * n]
        for _ in range(n):
            prev = D[-1]
            cur = [neg] * n
            for i, (u, v, _) in enumerate(self.edges):
                if prev[u] is not neg:
                    val = prev[u] + s[i]
                    if cur[v] is neg or val > cur[v]:
                        cur[v] = val
            D.append(cur)
        best = None
        for v in range(n):
            if D[n][v] is neg:
                continue
            worst = None
            for j in range(n):
                if D[j][v] is neg:
                    continue
                val = Fraction(D[n][v] - D[j][v], n - j)
                if worst is None or val < worst:
                    worst = val
            if worst is not None and (best is None or worst > best):
                best = worst
        if best is None:
            raise ValueError("graph has no cycles")
        return best, self._tight_cycle(s, best)

    def _tight_cycle(self, s: list[int], mean: Fraction) -> list[int]:
        num, den = mean.numerator, mean.denominator
        w = [den * x - num for x in s]
        # longest-walk potentials; all cycles are nonpositive so this converges
        pot = [0] * self.n
        for _ in range(self.n + 1):
            changed = False
            for i, (u, v, _) in enumerate(self.edges):
                if pot[u] + w[i] > pot[v]:
                    pot[v] = pot[u] + w[i]
                    changed = True
            if not changed:
                break
        else:
            raise AssertionError("positive cycle after mean normalization")
        tight = [[] for _ in range(self.n)]
        for i, (u, v, _) in enumerate(self.edges):
            if pot[u] + w[i] == pot[v]:
                tight[u].append(i)
        # any cycle of the tight subgraph is optimal; find one by DFS
        color = [0] * self.n
        for root in range(self.n):
            if color[root]:
                continue
            stack = [(root, iter(tight[root]))]
            path_edges: list[int] = []
            color[root] = 1
            while stack:
                v, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    color[v] = 2
                    stack.pop()
                    if path_edges:
                        path_edges.pop()
                    continue
                x = self.edges[nxt][1]
                if color[x] == 0:
                    color[x] = 1
                    path_edges.append(nxt)
                    stack.append((x, iter(tight[x])))
                elif color[x] == 1:
                    # cycle: from x along the current path back to v, then nxt
                    nodes = [f for f, _ in stack]
                    start = nodes.index(x)
                    cyc = path_edges[start:] + [nxt]
                    return cyc
        raise AssertionError("tight subgraph has no cycle")

    def cycle_weight(self, cycle: Sequence[int]) -> Vector:
        total = [0] * self.k
        for i in cycle:
            for j, x in enumerate(self.edges[i][2]):
                total[j] += x
        return tuple(total)

    def cycle_rotation(self, cycle: Sequence[int]) -> Point:
        w = self.cycle_weight(cycle)
        return tuple(Fraction(self.stride * x, len(cycle)) for x in w)

    def rotation_support(self, functional: Sequence[int]) -> Point:
        _, cyc = self.max_mean_cycle(functional)
        return self.cycle_rotation(cyc)

    def rotation_polytope(self) -> RatPolytope:
        """Convex hull of the rotation vectors of all closed walks."""
        return hull_from_support(self.rotation_support, self.k)

    def cycle_nodes(self, cycle: Sequence[int]) -> list[int]:
        nodes = [self.edges[i][0] for i in cycle]
        return nodes + [nodes[0]]


def from_untwisted(tau: TwistedSkew) -> CocycleGraph:
    if not tau.is_untwisted():
        raise ValueError("expected an untwisted skew product")
    edges = tuple((a, b, tau.h(a, b)) for a, b in tau.base.edges())
    return CocycleGraph(tau.base.state_count, tau.d, edges, 1, tuple(range(tau.base.state_count)))


@dataclass(frozen=True)
class PhasedSkew:
    """``(T_shift o tau^block)^reps`` kept on the original alphabet."""

    tau: TwistedSkew
    block: int = 1
    reps: int = 1
    shift: Vector | None = None

    @property
    def period(self) -> int:
        return self.block * self.reps

    @property
    def twist(self) -> IntMatrix:
        return self.tau.twist ** self.period

    def _shift_at(self, i: int) -> Vector:
        if self.shift is not None and i % self.block == self.block - 1:
            return tuple(self.shift)
        return (0,) * self.tau.d

    def node(self, state: int, phase: int) -> int:
        return phase * self.tau.base.state_count + state

    def step_edges(self):
        """Yield (state, phase, next_state, increment) with increment = h + shift at that phase."""
        base = self.tau.base
        for i in range(self.period):
            s = self._shift_at(i)
            for a, b in base.edges():
                yield a, i, b, tuple(x + y for x, y in zip(self.tau.h(a, b), s))

    def cocycle(self, proj: IntMatrix | None = None) -> CocycleGraph:
        """Edge weights ``proj . A^(P-1-i) (h + shift_i)``: a cocycle once ``proj`` kills im(A^P - I)."""
        P = self.period
        n = self.tau.base.state_count
        powers = [self.tau.twist ** j for j in range(P)]
        mats = [(proj @ powers[P - 1 - i]) if proj is not None else powers[P - 1 - i] for i in range(P)]
        k = mats[0].nrows
        edges = tuple(
            (self.node(a, i), self.node(b, (i + 1) % P), mats[i].apply(inc)) for a, i, b, inc in self.step_edges()
        )
        labels = tuple((s, i) for i in range(P) for s in range(n))
        return CocycleGraph(n * P, k, edges, P, labels)

    def fried(self) -> tuple[Lattice, IntMatrix | None, IntMatrix | None, CocycleGraph | None]:
        """Fried quotient of the iterate as a cocycle graph (None when trivial)."""
        f, proj, embed = fried_splitting(self.twist)
        if proj is None:
            return f, None, None, None
        return f, proj, embed, self.cocycle(proj)

    def finite_quotient_connected(self, m: int) -> tuple[bool, dict]:
        """Is the iterate modulo m Z^d transitive? Strong connectivity of phase x (Z/m)^d."""
        base = self.tau.base
        n = base.state_count
        P = self.period
        d = self.tau.d
        a_mat = self.tau.twist
        steps = list(self.step_edges())
        succ_by = {}
        for a, i, b, inc in steps:
            succ_by.setdefault((a, i), []).append((b, inc))

        def encode(state: int, phase: int, g: Vector) -> int:
            code = 0
            for x in g:
                code = code * m + x
            return (code * P + phase) * n + state

        def decode(code: int) -> tuple[int, int, Vector]:
            state = code % n
            code //= n
            phase = code % P
            code //= P
            g = []
            for _ in range(d):
                g.append(code % m)
                code //= m
            return state, phase, tuple(reversed(g))

        total = n * P * m**d

        def succ(code: int):
            a, i, g = decode(code)
            image = a_mat.apply(g)
            for b, inc in succ_by.get((a, i), []):
                yield encode(b, (i + 1) % P, tuple((x + y) % m for x, y in zip(image, inc)))

        comps = strongly_connected_components(total, lambda v: list(succ(v)))
        ok = len(comps) == 1 and bool(steps)
        info = {"modulus": m, "nodes": total, "components": len(comps)}
        if not ok and len(comps) > 1:
            first = comps[0][0]
            reach = reachable(total, lambda v: list(succ(v)), first)
            missing = min(v for v in range(total) if v not in reach) if len(reach) < total else None
            if missing is None:
                # everything reachable from `first`; some node cannot return to it
                missing = first
                source = next(v for c in comps[1:] for v in c)
                first, missing = source, first
            s0, p0, g0 = decode(first)
            s1, p1, g1 = decode(missing)
            info["unreachable_pair"] = {
                "from": {"state": s0, "phase": p0, "class": list(g0)},
                "to": {"state": s1, "phase": p1, "class": list(g1)},
            }
        return ok, info
