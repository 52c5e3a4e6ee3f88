"""Exact spectral data and normal forms for integer matrices.

Covers the characteristic polynomial, quasi-unipotence and the order
N(A), the kernel-chain decomposition of a nilpotent map, the block shear
form of a matrix with spectrum {1}, Fried lattices and the positive
relation construction for a shifted lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .errors import (
    NotInvertibleError,
    NotNilpotentError,
    RankDeficientError,
    SpectralRadiusError,
    SpectrumError,
)
from .intlat import (
    IntMatrix,
    Lattice,
    Vector,
    complement,
    coordinates,
    direct_sum_is_full,
    image_lattice,
    index,
    kernel_basis,
    lattice_from_generators,
    member,
    purify,
)

Poly = tuple[int, ...]  # coefficients, leading term first


# -- polynomials -------------------------------------------------------------


def _trim(p: Sequence[int]) -> Poly:
    p = list(p)
    while len(p) > 1 and p[0] == 0:
        p.pop(0)
    return tuple(p)


def poly_mul(p: Poly, q: Poly) -> Poly:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _trim(out)


def poly_divmod(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    """Division by a monic polynomial over Z."""
    if q[0] != 1:
        raise ValueError("divisor must be monic")
    p = list(p)
    if len(p) < len(q):
        return (0,), _trim(p)
    quot = []
    for i in range(len(p) - len(q) + 1):
        c = p[i]
        quot.append(c)
        if c:
            for j, b in enumerate(q):
                p[i + j] -= c * b
    return _trim(quot), _trim(p[len(p) - len(q) + 1 :] or [0])


def unipotent_poly(d: int) -> Poly:
    """(x - 1)^d."""
    return tuple(math.comb(d, k) * (-1) ** k for k in range(d + 1))


def poly_str(p: Poly, var: str = "x") -> str:
    terms = []
    deg = len(p) - 1
    for i, c in enumerate(p):
        e = deg - i
        if c == 0:
            continue
        mag = abs(c)
        if e == 0:
            body = str(mag)
        else:
            body = ("" if mag == 1 else str(mag)) + (var if e == 1 else f"{var}^{e}")
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    head = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    return " ".join([head] + [f"{s} {b}" for s, b in terms[1:]])


@lru_cache(maxsize=None)
def cyclotomic(m: int) -> Poly:
    """The m-th cyclotomic polynomial."""
    p: Poly = (1,) + (0,) * (m - 1) + (-1,)
    for k in range(1, m):
        if m % k == 0:
            p, r = poly_divmod(p, cyclotomic(k))
            assert r == (0,)
    return p


def totient(m: int) -> int:
    out, n, f = m, m, 2
    while f * f <= n:
        if n % f == 0:
            while n % f == 0:
                n //= f
            out -= out // f
        f += 1
    if n > 1:
        out -= out // n
    return out


def admissible_orders(d: int) -> list[int]:
    """All m with phi(m) <= d: the possible orders of eigenvalues of unit modulus."""
    # phi(m) >= sqrt(m / 2), so m <= 2 d^2 suffices
    return [m for m in range(1, 2 * d * d + 3) if totient(m) <= d]


def order_bound(d: int) -> int:
    return math.lcm(*admissible_orders(d))


@dataclass(frozen=True)
class CharPoly:
    coefficients: Poly

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __str__(self) -> str:
        return poly_str(self.coefficients)


def char_poly(a: IntMatrix) -> CharPoly:
    """det(xI - A) by the Faddeev-LeVerrier recursion (exact integer division)."""
    if not a.is_square():
        raise ValueError("characteristic polynomial of a non-square matrix")
    n = a.nrows
    coeffs = [1]
    m = IntMatrix.zeros(n, n)
    ident = IntMatrix.identity(n)
    c = 1
    for k in range(1, n + 1):
        m = a @ m + ident.scale(c)
        c = -((a @ m).trace()) // k
        coeffs.append(c)
    return CharPoly(tuple(coeffs))


def cyclotomic_split(p: Poly) -> tuple[list[tuple[int, int]], Poly]:
    """Strip cyclotomic factors: returns ([(m, multiplicity)], non-cyclotomic cofactor)."""
    d = len(p) - 1
    found = []
    for m in admissible_orders(d):
        phi = cyclotomic(m)
        mult = 0
        while len(p) >= len(phi):
            q, r = poly_divmod(p, phi)
            if any(r):
                break
            p, mult = q, mult + 1
        if mult:
            found.append((m, mult))
    return found, p


def _require_invertible(a: IntMatrix) -> None:
    if not a.is_square() or a.det() not in (1, -1):
        raise NotInvertibleError("twist must be square with determinant +-1")


def _has_unit_spectrum(a: IntMatrix) -> bool:
    return char_poly(a).coefficients == unipotent_poly(a.nrows)


def _coefficients_bounded(p: Poly) -> bool:
    # all roots on the unit circle forces |c_k| <= C(d, k)
    d = len(p) - 1
    return all(abs(c) <= math.comb(d, k) for k, c in enumerate(p))


def is_quasi_unipotent(a: IntMatrix) -> bool:
    """True iff every eigenvalue of A is a root of unity (rho(A) = 1)."""
    _require_invertible(a)
    if not _coefficients_bounded(char_poly(a).coefficients):
        return False
    return _has_unit_spectrum(a ** order_bound(a.nrows))


def order_N(a: IntMatrix) -> int:
    """Least N >= 1 with spec(A^N) = {1}."""
    if not is_quasi_unipotent(a):
        raise SpectralRadiusError("spectral radius is not one")
    bound = order_bound(a.nrows)
    for m in sorted(k for k in range(1, bound + 1) if bound % k == 0):
        if _has_unit_spectrum(a**m):
            return m
    raise AssertionError("unreachable: A^bound has unit spectrum")


@dataclass(frozen=True)
class SpectralWitness:
    """Exact evidence that rho(A) > 1, with a floating-point modulus for display."""

    char_poly: CharPoly
    non_cyclotomic_factor: Poly
    cyclotomic_factors: tuple[tuple[int, int], ...]
    spectral_radius: float

    def to_dict(self) -> dict:
        return {
            "char_poly": str(self.char_poly),
            "char_poly_coefficients": [str(c) for c in self.char_poly.coefficients],
            "non_cyclotomic_factor": poly_str(self.non_cyclotomic_factor),
            "non_cyclotomic_factor_coefficients": [str(c) for c in self.non_cyclotomic_factor],
            "cyclotomic_factors": [[str(m), str(k)] for m, k in self.cyclotomic_factors],
            "spectral_radius_approx": f"{self.spectral_radius:.12g}",
        }


def spectral_witness(a: IntMatrix) -> SpectralWitness:
    import numpy as np

    cp = char_poly(a)
    cyc, rest = cyclotomic_split(cp.coefficients)
    roots = np.roots([float(c) for c in rest]) if len(rest) > 1 else []
    radius = float(max((abs(r) for r in roots), default=1.0))
    return SpectralWitness(cp, rest, tuple(cyc), radius)


# -- nilpotent maps and shears -----------------------------------------------


def nilpotency_order(t: IntMatrix) -> int:
    n = t.nrows
    p = t
    for j in range(1, n + 1):
        if p.is_zero():
            return j
        p = p @ t
    raise NotNilpotentError("matrix is not nilpotent")


@dataclass(frozen=True)
class NilpotentDecomposition:
    order: int
    parts: tuple[Lattice, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(p.rank for p in self.parts)

    def basis_matrix(self) -> IntMatrix:
        return IntMatrix.from_columns([c for p in self.parts for c in p.basis])


def _kernel_lattice(m: IntMatrix) -> Lattice:
    return lattice_from_generators(kernel_basis(m), m.ncols)


def nilpotent_decomposition(t: IntMatrix) -> NilpotentDecomposition:
    """Z^d = V_1 + ... + V_J with V_1 + ... + V_j = ker(T^j).

    Each V_j is a complement of ker(T^(j-1)) inside ker(T^j), computed in the
    coordinates of ker(T^j) so that the sum stays direct.
    """
    order = nilpotency_order(t)
    d = t.nrows
    kernels = [lattice_from_generators([], d)]
    p = t
    for _ in range(order):
        kernels.append(_kernel_lattice(p))
        p = p @ t
    parts = []
    for j in range(1, order + 1):
        big, small = kernels[j], kernels[j - 1]
        local = [coordinates(big, v) for v in small.basis]
        h = complement(lattice_from_generators(local, big.rank))
        vecs = [tuple(sum(c * b[i] for c, b in zip(col, big.basis)) for i in range(d)) for col in h.basis]
        parts.append(lattice_from_generators(vecs, d))
    dec = NilpotentDecomposition(order, tuple(parts))
    check_nilpotent_decomposition(t, dec)
    return dec


def _projection_coords(dec: NilpotentDecomposition, v: Vector) -> list[Vector]:
    """Split v into its V_j components (coefficient vectors in each part's basis)."""
    basis = dec.basis_matrix()
    coeffs = basis.inverse().apply(v)
    out, pos = [], 0
    for part in dec.parts:
        out.append(tuple(coeffs[pos : pos + part.rank]))
        pos += part.rank
    return out


def check_nilpotent_decomposition(t: IntMatrix, dec: NilpotentDecomposition) -> None:
    """Raise AssertionError unless the decomposition has the kernel-chain properties."""
    d = t.nrows
    assert all(p.rank > 0 for p in dec.parts), "empty part"
    assert direct_sum_is_full(list(dec.parts)), "parts do not form Z^d"
    power = IntMatrix.identity(d)
    for j in range(1, dec.order + 1):
        power = power @ t
        chain = lattice_from_generators([c for p in dec.parts[:j] for c in p.basis], d)
        assert chain == _kernel_lattice(power), f"kernel condition fails at j={j}"
    for j, part in enumerate(dec.parts):
        for v in part.basis:
            comps = _projection_coords(dec, t.apply(v))
            assert all(not any(c) for c in comps[j:]), f"T(V_{j + 1}) leaves V_1..V_{j}"
        if j:
            images = [_projection_coords(dec, t.apply(v))[j - 1] for v in part.basis]
            rank = lattice_from_generators(images, dec.parts[j - 1].rank).rank
            assert rank == part.rank, f"projection restricted to V_{j + 1} is not injective"


@dataclass(frozen=True)
class ShearForm:
    """Block lower-triangular conjugate ``blocked = E^-1 S E`` of a unipotent S."""

    E: IntMatrix
    block_sizes: tuple[int, ...]
    raw_sizes: tuple[int, ...]
    blocked: IntMatrix

    def block(self, alpha: int, beta: int) -> list[list[int]]:
        offs = [sum(self.block_sizes[:k]) for k in range(len(self.block_sizes) + 1)]
        return [
            list(self.blocked.rows[i][offs[beta] : offs[beta + 1]])
            for i in range(offs[alpha], offs[alpha + 1])
        ]


def shear_form(s: IntMatrix) -> ShearForm:
    if not _has_unit_spectrum(s):
        raise SpectrumError("spectrum is not {1}")
    d = s.nrows
    dec = nilpotent_decomposition(s.T - IntMatrix.identity(d))
    p = dec.basis_matrix()
    e = p.T.inverse()
    blocked = p.T @ s @ e
    sizes = dec.sizes
    form = ShearForm(e, tuple(sorted(sizes, reverse=True)), sizes, blocked)
    check_shear_form(s, form)
    return form


def check_shear_form(s: IntMatrix, form: ShearForm) -> None:
    assert form.E.det() in (1, -1), "change of basis is not unimodular"
    assert form.E.inverse() @ s @ form.E == form.blocked, "blocked is not the conjugate"
    sizes = form.raw_sizes
    assert list(sizes) == sorted(sizes, reverse=True), "block sizes not non-increasing"
    assert sum(sizes) == s.nrows
    shaped = ShearForm(form.E, sizes, sizes, form.blocked)
    J = len(sizes)
    for a in range(J):
        for b in range(J):
            blk = shaped.block(a, b)
            if a == b:
                assert blk == IntMatrix.identity(sizes[a]).tolist(), "diagonal block is not I"
            elif a < b:
                assert all(x == 0 for r in blk for x in r), "block above the diagonal"
        if a:
            sub = IntMatrix.of(shaped.block(a, a - 1))
            assert image_lattice(sub.T).rank == sizes[a], "subdiagonal block is not of full rank"


# -- Fried lattices ----------------------------------------------------------


def fried_lattice(a: IntMatrix) -> Lattice:
    """P(im(A - I))."""
    return purify(image_lattice(a - IntMatrix.identity(a.nrows)))


def fried_stability_check(a: IntMatrix, kmax: int) -> bool:
    if not _has_unit_spectrum(a):
        raise SpectrumError("spectrum is not {1}")
    f = fried_lattice(a)
    return all(fried_lattice(a**k) == f for k in range(1, kmax + 1))


# -- positive relations among shifted lattice elements ---------------------


@dataclass(frozen=True)
class GtlCertificate:
    """Elements g_j of Gamma, k_j = g_j + w, and a positive relation sum c_j k_j = 0.

    ``witnesses`` lists, for every generator of H and its negative, a
    nonnegative integer combination of the k_j producing it.
    """

    gamma: Lattice
    w: Vector
    elements: tuple[Vector, ...]
    shifted: tuple[Vector, ...]
    coefficients: tuple[int, ...]
    H: Lattice
    generators: tuple[Vector, ...]
    witnesses: tuple[tuple[Vector, tuple[int, ...]], ...]
    params: dict

    def verify(self) -> None:
        d = self.gamma.ambient
        k = self.shifted
        assert len(k) == 2 * d
        for g, kk in zip(self.elements, k):
            assert member(self.gamma, g)
            assert kk == tuple(x + y for x, y in zip(g, self.w))
        assert all(c > 0 for c in self.coefficients)
        total = [sum(c * v[i] for c, v in zip(self.coefficients, k)) for i in range(d)]
        assert not any(total), "relation does not vanish"
        assert self.H.rank == d
        assert lattice_from_generators(self.generators, d) == self.H
        for vec, combo in self.witnesses:
            assert all(c >= 0 for c in combo)
            assert tuple(sum(c * v[i] for c, v in zip(combo, k)) for i in range(d)) == vec

    def to_dict(self) -> dict:
        return {
            "w": [str(x) for x in self.w],
            "elements": [[str(x) for x in v] for v in self.elements],
            "shifted": [[str(x) for x in v] for v in self.shifted],
            "coefficients": [str(c) for c in self.coefficients],
            "H_basis": [[str(x) for x in v] for v in self.H.basis],
            "params": {k: str(v) for k, v in self.params.items()},
        }


def _neg(v: Vector) -> Vector:
    return tuple(-x for x in v)


def _add(u: Vector, v: Vector) -> Vector:
    return tuple(x + y for x, y in zip(u, v))


def _mul(c: int, v: Vector) -> Vector:
    return tuple(c * x for x in v)


def gtl_construct(gamma: Lattice, w: Sequence[int]) -> GtlCertificate:
    """Shifts g_j + w of lattice elements whose positive cone contains a full-rank H."""
    d = gamma.ambient
    if gamma.rank != d:
        raise RankDeficientError("Gamma must have full rank")
    w = tuple(int(x) for x in w)
    if member(gamma, w):
        basis = list(gamma.basis)
        elements = tuple(_add(b, _neg(w)) for b in basis) + tuple(_add(_neg(b), _neg(w)) for b in basis)
        shifted = tuple(basis) + tuple(_neg(b) for b in basis)
        coeffs = (1,) * (2 * d)
        gens = tuple(basis)
        witnesses = []
        for j in range(d):
            witnesses.append((shifted[j], tuple(int(i == j) for i in range(2 * d))))
            witnesses.append((shifted[d + j], tuple(int(i == d + j) for i in range(2 * d))))
        cert = GtlCertificate(gamma, w, elements, shifted, coeffs, gamma, gens, tuple(witnesses), {"case": "w_in_gamma"})
        cert.verify()
        return cert

    q = index(gamma)
    x = coordinates(gamma, _mul(q, w))
    p = math.gcd(*x)
    prim = tuple(c // p for c in x)
    # extend the primitive coordinate vector to a basis of Z^d (Gamma coordinates)
    rest = complement(lattice_from_generators([prim], d)).basis

    def to_ambient(c: Sequence[int]) -> Vector:
        return tuple(sum(ci * b[i] for ci, b in zip(c, gamma.basis)) for i in range(d))

    gbar = to_ambient(prim)
    others = [to_ambient(c) for c in rest]
    n0 = (-p) // q  # strict: q does not divide p because w is not in Gamma
    A = q * n0 + q + p
    B = -(q * n0 + p)
    C = 2 * p
    g = [None] * (2 * d)
    g[0] = _mul(n0 + 1, gbar)
    g[d] = _mul(n0, gbar)
    for j, o in enumerate(others, start=1):
        g[j] = o
        g[j + d] = _neg(o)
    elements = tuple(g)
    shifted = tuple(_add(e, w) for e in elements)
    coeffs = [0] * (2 * d)
    coeffs[0] = B
    coeffs[d] = A + C * (d - 1)
    for j in range(1, d):
        coeffs[j] = B
        coeffs[j + d] = B
    gens = tuple(_mul(B, shifted[j]) for j in range(d))
    witnesses = []
    for j in range(d):
        witnesses.append((gens[j], tuple(B if i == j else 0 for i in range(2 * d))))
        # -c_j k_j is the sum of the remaining terms of the relation
        witnesses.append((_neg(gens[j]), tuple(0 if i == j else coeffs[i] for i in range(2 * d))))
    H = lattice_from_generators(gens, d)
    params = {"q": q, "p": p, "n0": n0, "A": A, "B": B, "C": C, "gbar": list(gbar)}
    cert = GtlCertificate(gamma, w, elements, shifted, tuple(coeffs), H, gens, tuple(witnesses), params)
    cert.verify()
    return cert
