"""Exact rational convex hulls in low dimension.

Hulls are discovered through a support oracle: a callable that, given an
integer functional ``L``, returns a point of the set maximizing ``L``.
For an explicit point list the oracle is a linear scan; for rotation sets
it is a maximum-mean-cycle computation, so the (possibly huge) set of
cycles never has to be listed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import EmptyInputError, NotFullDimensionalError

Point = tuple[Fraction, ...]
Support = Callable[[tuple[int, ...]], Point]


def as_point(v: Iterable) -> Point:
    return tuple(Fraction(x) for x in v)


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((Fraction(x) * y for x, y in zip(a, b)), Fraction(0))


def _primitive(v: Sequence[Fraction]) -> tuple[int, ...]:
    den = math.lcm(*(Fraction(x).denominator for x in v))
    ints = [int(Fraction(x) * den) for x in v]
    g = math.gcd(*ints) or 1
    return tuple(i // g for i in ints)


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[tuple[int, ...]]:
    """Primitive integer basis of {x : row . x = 0 for every row}."""
    red, pivots = _rref([[Fraction(x) for x in r] for r in rows], ncols)
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        out.append(_primitive(v))
    return out


@dataclass(frozen=True)
class RatPolytope:
    """Convex hull of finitely many rational points.

    ``equations`` are pairs ``(c, b)`` with ``c . x = b`` on the hull;
    ``facets`` are pairs ``(a, b)`` with ``a . x <= b``, tight on a facet.
    Together they describe the hull exactly.
    """

    ambient: int
    vertices: tuple[Point, ...]
    affine_dim: int
    equations: tuple[tuple[tuple[int, ...], Fraction], ...]
    facets: tuple[tuple[tuple[int, ...], Fraction], ...]

    def is_full_dimensional(self) -> bool:
        return self.affine_dim == self.ambient

    def contains(self, x: Sequence) -> bool:
        return all(_dot(c, x) == b for c, b in self.equations) and all(
            _dot(a, x) <= b for a, b in self.facets
        )

    def support(self, functional: Sequence[int]) -> Fraction:
        return max(_dot(functional, v) for v in self.vertices)

    def vertex_strings(self) -> list[list[str]]:
        return [[frac_str(x) for x in v] for v in self.vertices]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatPolytope):
            return NotImplemented
        return self.ambient == other.ambient and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash((self.ambient, self.vertices))


def _chart(directions: list[Point], k: int) -> list[int]:
    """Coordinates onto which projection is injective on the affine hull."""
    _, pivots = _rref([list(d) for d in directions], k)
    return pivots


def _facets_in_chart(pts: list[Point], dim: int) -> list[tuple[tuple[int, ...], Fraction]]:
    """Facets of a full-dimensional point set in R^dim, by exhaustive search."""
    found = {}
    for subset in itertools.combinations(range(len(pts)), dim):
        base = pts[subset[0]]
        diffs = [[a - b for a, b in zip(pts[i], base)] for i in subset[1:]]
        ns = nullspace(diffs, dim)
        if len(ns) != 1:
            continue
        n = ns[0]
        b = _dot(n, base)
        vals = [_dot(n, p) for p in pts]
        if all(v <= b for v in vals):
            found[n] = b
        if all(v >= b for v in vals):
            found[tuple(-x for x in n)] = -b
    return sorted(found.items())


def _affine_data(pts: list[Point], k: int):
    p0 = pts[0]
    diffs = [[a - b for a, b in zip(p, p0)] for p in pts[1:]]
    red, _ = _rref(diffs, k) if diffs else ([], [])
    directions = [tuple(r) for r in red]
    normals = nullspace(directions, k) if directions else [tuple(int(i == j) for j in range(k)) for i in range(k)]
    return directions, normals


def _assemble(pts: list[Point], k: int) -> RatPolytope:
    """Exact hull of a small point set."""
    pts = sorted(set(pts))
    directions, normals = _affine_data(pts, k)
    dim = len(directions)
    equations = tuple((c, _dot(c, pts[0])) for c in normals)
    if dim == 0:
        return RatPolytope(k, (pts[0],), 0, equations, ())
    chart = _chart(directions, k)
    proj = [tuple(p[i] for i in chart) for p in pts]
    chart_facets = _facets_in_chart(proj, dim)
    facets = []
    for n, b in chart_facets:
        a = [0] * k
        for i, c in zip(chart, n):
            a[i] = c
        facets.append((tuple(a), b))
    verts = []
    for p, y in zip(pts, proj):
        tight = [list(map(Fraction, n)) for n, b in chart_facets if _dot(n, y) == b]
        if tight and len(_rref(tight, dim)[1]) == dim:
            verts.append(p)
    return RatPolytope(k, tuple(sorted(verts)), dim, equations, tuple(sorted(facets)))


def hull_from_support(support: Support, k: int) -> RatPolytope:
    """Hull of a set known only through its support oracle (assumed to be a polytope)."""
    if k == 0:
        raise ValueError("ambient dimension must be positive")
    pts = [as_point(support(tuple(int(i == 0) for i in range(k))))]
    # affine hull: probe both sides of every equation normal until stable
    while True:
        _, normals = _affine_data(pts, k)
        if len(normals) == 0:
            break
        grew = False
        for c in normals:
            level = _dot(c, pts[0])
            for sign in (1, -1):
                q = as_point(support(tuple(sign * x for x in c)))
                if _dot(c, q) != level:
                    pts.append(q)
                    grew = True
                    break
            if grew:
                break
        if not grew:
            break
    # facets: each candidate facet is either confirmed or yields a new point
    while True:
        current = _assemble(pts, k)
        grew = False
        for a, b in current.facets:
            q = as_point(support(a))
            if _dot(a, q) > b:
                pts.append(q)
                grew = True
                break
        if not grew:
            return current


def hull(points: Iterable[Sequence]) -> RatPolytope:
    pts = sorted(set(as_point(p) for p in points))
    if not pts:
        raise EmptyInputError("hull of an empty point set")
    k = len(pts[0])
    if any(len(p) != k for p in pts):
        raise ValueError("points of differing dimension")

    def scan(functional: tuple[int, ...]) -> Point:
        return max(pts, key=lambda p: (_dot(functional, p), p))

    return hull_from_support(scan, k)


def contains_zero_interior(p: RatPolytope | None) -> bool:
    """0 in the interior taken in the ambient space (empty hull: never)."""
    if p is None or not p.is_full_dimensional():
        return False
    return all(b > 0 for _, b in p.facets)


def interior_point(p: RatPolytope) -> Point:
    """Vertex centroid."""
    if not p.is_full_dimensional():
        raise NotFullDimensionalError("polytope has empty interior")
    n = len(p.vertices)
    return tuple(sum((v[i] for v in p.vertices), Fraction(0)) / n for i in range(p.ambient))


def separating_functional(p: RatPolytope) -> tuple[int, ...] | None:
    """A nonzero integer L with L <= 0 on the hull, or None when 0 is interior.

    Such an L is exactly the obstruction: 0 is interior iff every nonzero
    functional is positive somewhere on the hull.
    """
    if contains_zero_interior(p):
        return None
    for c, b in p.equations:
        return c if b <= 0 else tuple(-x for x in c)
    for a, b in p.facets:
        if b <= 0:
            return a
    raise AssertionError("no separating functional found for a non-interior point")


def affine_image(p: RatPolytope, q: int, shift: Sequence[int]) -> RatPolytope:
    """Hull of q*v + shift over the vertices (q > 0)."""
    return hull([tuple(q * x + s for x, s in zip(v, shift)) for v in p.vertices])
