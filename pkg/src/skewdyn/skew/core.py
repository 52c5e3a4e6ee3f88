"""Twisted skew products over a subshift of finite type and their basic operations.

A point is ``(s, n)`` with ``s`` a sequence of the base shift and ``n`` in
Z^d; one step sends it to ``(sigma(s), A n + h(s_0, s_1))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from ..errors import (
    NotInvariantError,
    NotInvertibleError,
    NotPureError,
    TwistedInputError,
    ValidationError,
)
from ..intlat import (
    IntMatrix,
    Lattice,
    Vector,
    complement,
    is_pure,
    lattice_from_generators,
    member,
    snf,
)
from ..polytope import RatPolytope, hull
from ..sft import Edge, SimpleCycle, Sft, power_presentation, simple_blocks
from ..spectral import fried_lattice


@dataclass(frozen=True, eq=False)
class TwistedSkew:
    base: Sft
    d: int
    twist: IntMatrix
    heights: Mapping[Edge, Vector] = field(repr=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError("group dimension must be at least 1")
        if self.twist.shape != (self.d, self.d):
            raise ValidationError("twist must be a d x d matrix")
        if self.twist.det() not in (1, -1):
            raise NotInvertibleError("twist must have determinant +-1")
        edges = set(self.base.edges())
        keys = set(self.heights)
        if keys != edges:
            missing = sorted(edges - keys)
            extra = sorted(keys - edges)
            raise ValidationError(f"heights must be given exactly on allowed edges (missing {missing}, extra {extra})")
        clean = {}
        for e in sorted(edges):
            v = tuple(int(x) for x in self.heights[e])
            if len(v) != self.d:
                raise ValidationError(f"height on edge {e[0]}->{e[1]} has length {len(v)}, expected {self.d}")
            clean[e] = v
        object.__setattr__(self, "heights", clean)

    @classmethod
    def untwisted(cls, base: Sft, heights: Mapping[Edge, Sequence[int]], d: int | None = None) -> TwistedSkew:
        if d is None:
            d = len(next(iter(heights.values())))
        return cls(base, d, IntMatrix.identity(d), dict(heights))

    def h(self, a: int, b: int) -> Vector:
        return self.heights[(a, b)]

    def is_untwisted(self) -> bool:
        return self.twist.is_identity()

    def walk_sum(self, walk: Sequence[int], start: Sequence[int] | None = None) -> Vector:
        """Group coordinate after following ``walk`` from ``start`` (default 0)."""
        n = tuple(start) if start is not None else (0,) * self.d
        for a, b in zip(walk, walk[1:]):
            n = tuple(x + y for x, y in zip(self.twist.apply(n), self.h(a, b)))
        return n

    def key(self) -> tuple:
        return (self.base.transitions.rows, self.d, self.twist.rows, tuple(sorted(self.heights.items())))

    def __eq__(self, other) -> bool:
        return isinstance(other, TwistedSkew) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())


def iterate(tau: TwistedSkew, k: int) -> TwistedSkew:
    """tau^k presented over the non-overlapping k-block shift.

    The block edge ``b -> b'`` carries A^(k-1) h_0 + ... + A h_(k-2) + h_(k-1),
    where h_i is the height of the i-th edge read along ``b`` then ``b'[0]``.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return tau
    a = tau.twist
    powers = [a**j for j in range(k)]

    def combine(parts):
        total = (0,) * tau.d
        for i, v in enumerate(parts):
            total = tuple(x + y for x, y in zip(total, powers[k - 1 - i].apply(v)))
        return total

    base, _, weights = power_presentation(tau.base, k, tau.h, combine)
    return TwistedSkew(base, tau.d, a**k, weights)


def translate(tau: TwistedSkew, p: Sequence[int]) -> TwistedSkew:
    """T_p o tau: every height shifted by p."""
    p = tuple(int(x) for x in p)
    heights = {e: tuple(x + y for x, y in zip(v, p)) for e, v in tau.heights.items()}
    return TwistedSkew(tau.base, tau.d, tau.twist, heights)


@dataclass(frozen=True)
class FiniteQuotient:
    """Skew product reduced modulo a co-finite lattice: a finite shift on S x G."""

    sft: Sft
    labels: tuple[tuple[int, Vector], ...]
    moduli: tuple[int, ...]


def _check_invariant(a: IntMatrix, gamma: Lattice) -> None:
    for col in gamma.basis:
        if not member(gamma, a.apply(col)):
            raise NotInvariantError("lattice is not invariant under the twist")


def quotient(tau: TwistedSkew, gamma: Lattice) -> FiniteQuotient | TwistedSkew:
    """tau modulo an A-invariant lattice.

    Co-finite lattices give a finite shift on (state, class) pairs, with
    classes in Smith coordinates; pure lattices of lower rank give a skew
    product over Z^(d - rank) in complement coordinates.
    """
    if gamma.ambient != tau.d:
        raise ValueError("lattice dimension does not match the skew product")
    _check_invariant(tau.twist, gamma)
    if gamma.rank == tau.d:
        return _finite_quotient(tau, gamma)
    if not is_pure(gamma):
        raise NotPureError("quotients by lattices of lower rank need a torsion-free quotient group")
    proj, embed = splitting(gamma)
    twist = proj @ tau.twist @ embed
    heights = {e: proj.apply(v) for e, v in tau.heights.items()}
    return TwistedSkew(tau.base, tau.d - gamma.rank, twist, heights)


def splitting(gamma: Lattice) -> tuple[IntMatrix, IntMatrix]:
    """(pi, embed) for a pure lattice: Z^d = gamma + embed(Z^k), pi kills gamma, pi embed = I."""
    d = gamma.ambient
    h = complement(gamma)
    full = IntMatrix.from_columns(list(gamma.basis) + list(h.basis))
    inv = full.inverse()
    proj = IntMatrix.of(inv.rows[gamma.rank :])
    embed = IntMatrix.from_columns(list(h.basis))
    assert (proj @ embed).is_identity()
    assert all(not any(proj.apply(c)) for c in gamma.basis)
    assert proj.shape == (d - gamma.rank, d)
    return proj, embed


def _finite_quotient(tau: TwistedSkew, gamma: Lattice) -> FiniteQuotient:
    s, u, _ = snf(gamma.matrix())
    moduli = tuple(s[i, i] for i in range(tau.d))
    u_inv = u.inverse()
    classes = [()]
    for m in moduli:
        classes = [c + (x,) for c in classes for x in range(m)]

    def reduce(v: Vector) -> Vector:
        w = u.apply(v)
        return tuple(x % m for x, m in zip(w, moduli))

    labels = [(a, g) for a in range(tau.base.state_count) for g in classes]
    pos = {lab: i for i, lab in enumerate(labels)}
    size = len(labels)
    rows = [[0] * size for _ in range(size)]
    for a, g in labels:
        rep = u_inv.apply(g)
        image = tau.twist.apply(rep)
        for b in tau.base.successors(a):
            target = reduce(tuple(x + y for x, y in zip(image, tau.h(a, b))))
            rows[pos[(a, g)]][pos[(b, target)]] = 1
    return FiniteQuotient(Sft.of(rows), tuple(labels), moduli)


@dataclass(frozen=True)
class FriedQuotient:
    """tau modulo F = P(im(A - I)).

    ``skew`` is the induced untwisted skew product over Z^k, or None when
    F is everything (k = 0, the trivial quotient, whose rotation set is
    taken to be empty). ``embed`` maps Z^k back into Z^d along a complement
    of F.
    """

    lattice: Lattice
    k: int
    projection: IntMatrix | None
    embed: IntMatrix | None
    skew: TwistedSkew | None

    @property
    def trivial(self) -> bool:
        return self.k == 0


def fried_splitting(a: IntMatrix) -> tuple[Lattice, IntMatrix | None, IntMatrix | None]:
    f = fried_lattice(a)
    if f.rank == a.nrows:
        return f, None, None
    proj, embed = splitting(f)
    induced = proj @ a @ embed
    assert induced.is_identity(), "twist does not descend to the identity"
    return f, proj, embed


def fried_quotient(tau: TwistedSkew) -> FriedQuotient:
    f, proj, embed = fried_splitting(tau.twist)
    if proj is None:
        return FriedQuotient(f, 0, None, None, None)
    q = quotient(tau, f)
    assert isinstance(q, TwistedSkew) and q.is_untwisted()
    return FriedQuotient(f, q.d, proj, embed, q)


@dataclass(frozen=True)
class DisplacementEntry:
    cycle: SimpleCycle
    displacement: Vector
    rotation: tuple[Fraction, ...]

    @property
    def length(self) -> int:
        return self.cycle.length


@dataclass(frozen=True)
class DisplacementData:
    entries: tuple[DisplacementEntry, ...]
    lattice: Lattice
    polytope: RatPolytope | None


def _require_untwisted(tau: TwistedSkew) -> None:
    if not tau.is_untwisted():
        raise TwistedInputError("displacements are only a cocycle over the base when the twist is the identity")


def displacement_data(tau: TwistedSkew) -> DisplacementData:
    """Displacements and rotation vectors of every simple block."""
    _require_untwisted(tau)
    entries = []
    for c in simple_blocks(tau.base):
        disp = tau.walk_sum(c.states)
        rot = tuple(Fraction(x, c.length) for x in disp)
        entries.append(DisplacementEntry(c, disp, rot))
    lat = lattice_from_generators([e.displacement for e in entries], tau.d)
    poly = hull([e.rotation for e in entries]) if entries else None
    return DisplacementData(tuple(entries), lat, poly)

