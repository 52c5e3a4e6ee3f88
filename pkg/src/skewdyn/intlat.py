"""Exact integer matrices and subgroups of Z^d.

All arithmetic uses Python integers, so nothing here ever overflows or
rounds.  A :class:`Lattice` is stored by the column Hermite normal form of
a basis, which makes two lattices equal exactly when their bases are equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotInvertibleError, NotPureError

Vector = tuple[int, ...]

INFINITE = math.inf


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix, row-major."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.rows or not self.rows[0]:
            raise ValueError("IntMatrix dimensions must be positive")
        width = len(self.rows[0])
        for r in self.rows:
            if len(r) != width:
                raise ValueError("ragged rows")
            for x in r:
                if not isinstance(x, int) or isinstance(x, bool):
                    raise TypeError(f"non-integer entry {x!r}")

    @classmethod
    def of(cls, rows: Iterable[Iterable[int]]) -> IntMatrix:
        return cls(tuple(tuple(int(x) for x in r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, m: int, n: int) -> IntMatrix:
        return cls(tuple((0,) * n for _ in range(m)))

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence[int]]) -> IntMatrix:
        return cls(tuple(tuple(int(c[i]) for c in cols) for i in range(len(cols[0]))))

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.ncols)]

    @property
    def T(self) -> IntMatrix:
        return IntMatrix(tuple(zip(*self.rows)))

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __add__(self, other: IntMatrix) -> IntMatrix:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return IntMatrix(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: IntMatrix) -> IntMatrix:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return IntMatrix(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> IntMatrix:
        return IntMatrix(tuple(tuple(-a for a in r) for r in self.rows))

    def scale(self, c: int) -> IntMatrix:
        return IntMatrix(tuple(tuple(c * a for a in r) for r in self.rows))

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other.rows))
        return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in self.rows))

    def apply(self, v: Sequence[int]) -> Vector:
        if len(v) != self.ncols:
            raise ValueError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.rows)

    def __pow__(self, k: int) -> IntMatrix:
        if not self.is_square():
            raise ValueError("power of a non-square matrix")
        if k < 0:
            return self.inverse() ** (-k)
        result = IntMatrix.identity(self.nrows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def is_identity(self) -> bool:
        return self.is_square() and self == IntMatrix.identity(self.nrows)

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.rows for x in r)

    def det(self) -> int:
        """Determinant by fraction-free (Bareiss) elimination."""
        if not self.is_square():
            raise ValueError("determinant of a non-square matrix")
        a = [list(r) for r in self.rows]
        n = len(a)
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def inverse(self) -> IntMatrix:
        """Inverse of a unimodular matrix."""
        if self.det() not in (1, -1):
            raise NotInvertibleError("matrix is not unimodular")
        inv = rational_inverse(self)
        return IntMatrix(tuple(tuple(int(x) for x in r) for r in inv))

    def trace(self) -> int:
        return sum(self.rows[i][i] for i in range(min(self.shape)))


def rational_inverse(m: IntMatrix) -> list[list[Fraction]]:
    n = m.nrows
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(m.rows)]
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            raise NotInvertibleError("singular matrix")
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [r[n:] for r in a]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with x*a + y*b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _hnf_columns(a: list[list[int]], ncols: int) -> tuple[list[list[int]], list[list[int]], int]:
    """In-place column Hermite reduction of the m x n array ``a``.

    Returns (H, U, rank) with (original a) @ U == H.  Pivot rows increase
    with the column index, pivots are positive and entries to the left of a
    pivot lie in [0, pivot).
    """
    m = len(a)
    u = _identity(ncols)

    def colop(j: int, k: int, x: int, y: int, z: int, w: int) -> None:
        # (col_j, col_k) <- (x*col_j + y*col_k, z*col_j + w*col_k)
        for mat in (a, u):
            for row in mat:
                cj, ck = row[j], row[k]
                row[j] = x * cj + y * ck
                row[k] = z * cj + w * ck

    r = 0
    for i in range(m):
        if r == ncols:
            break
        for j in range(r + 1, ncols):
            b = a[i][j]
            if b == 0:
                continue
            p = a[i][r]
            if p != 0 and b % p == 0:
                q = b // p
                for mat in (a, u):
                    for row in mat:
                        row[j] -= q * row[r]
                continue
            g, x, y = _xgcd(p, b)
            colop(r, j, x, y, -b // g, p // g)
        if a[i][r] == 0:
            continue
        if a[i][r] < 0:
            for mat in (a, u):
                for row in mat:
                    row[r] = -row[r]
        piv = a[i][r]
        for j in range(r):
            q = a[i][j] // piv
            if q:
                for mat in (a, u):
                    for row in mat:
                        row[j] -= q * row[r]
        r += 1
    return a, u, r


def hnf(m: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Column Hermite normal form: returns (H, U) with M @ U == H, U unimodular."""
    a = m.tolist()
    h, u, _ = _hnf_columns(a, m.ncols)
    return IntMatrix.of(h), IntMatrix.of(u)


def snf(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form: returns (S, U, V) with U @ M @ V == S.

    The diagonal of S is nonnegative and each entry divides the next.
    """
    a = m.tolist()
    rows, cols = m.shape
    u = _identity(rows)
    v = _identity(cols)

    def swap_rows(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i: int, j: int) -> None:
        for mat in (a, v):
            for row in mat:
                row[i], row[j] = row[j], row[i]

    def add_row(dst: int, src: int, c: int) -> None:
        a[dst] = [x + c * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def add_col(dst: int, src: int, c: int) -> None:
        for mat in (a, v):
            for row in mat:
                row[dst] += c * row[src]

    for t in range(min(rows, cols)):
        while True:
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            piv = a[t][t]
            clean = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // piv))
                    clean = clean and a[i][t] == 0
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // piv))
                    clean = clean and a[t][j] == 0
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % piv),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return IntMatrix.of(a), IntMatrix.of(u), IntMatrix.of(v)


def smith_invariants(m: IntMatrix) -> list[int]:
    s, _, _ = snf(m)
    return [s[i, i] for i in range(min(s.shape))]


def kernel_basis(m: IntMatrix) -> list[Vector]:
    """Basis of the integer kernel {x : M x = 0}; the kernel is always pure."""
    _, u, r = _hnf_columns(m.tolist(), m.ncols)
    return [tuple(row[j] for row in u) for j in range(r, m.ncols)]


@dataclass(frozen=True)
class Lattice:
    """A subgroup of Z^d with its canonical (column Hermite) basis.

    ``basis`` holds the basis columns; the zero subgroup has an empty basis.
    """

    ambient: int
    basis: tuple[Vector, ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def matrix(self) -> IntMatrix:
        if not self.basis:
            raise ValueError("zero lattice has no basis matrix")
        return IntMatrix.from_columns(self.basis)

    def __contains__(self, v: Sequence[int]) -> bool:
        return member(self, v)

    def is_full(self) -> bool:
        return self.rank == self.ambient and index(self) == 1

    def __repr__(self) -> str:
        return f"Lattice(d={self.ambient}, basis={[list(b) for b in self.basis]})"


def lattice_from_generators(vectors: Iterable[Sequence[int]], d: int) -> Lattice:
    gens = [tuple(int(x) for x in v) for v in vectors]
    for v in gens:
        if len(v) != d:
            raise ValueError(f"generator {v} does not have length {d}")
    gens = [v for v in gens if any(v)]
    if not gens:
        return Lattice(d, ())
    a = [list(row) for row in zip(*gens)]
    h, _, r = _hnf_columns(a, len(gens))
    return Lattice(d, tuple(tuple(row[j] for row in h) for j in range(r)))


def zero_lattice(d: int) -> Lattice:
    return Lattice(d, ())


def full_lattice(d: int) -> Lattice:
    return lattice_from_generators(IntMatrix.identity(d).columns(), d)


def scaled_lattice(m: int, d: int) -> Lattice:
    """The subgroup m Z^d."""
    return lattice_from_generators(IntMatrix.identity(d).scale(m).columns(), d)


def member(lat: Lattice, v: Sequence[int]) -> bool:
    if len(v) != lat.ambient:
        raise ValueError("vector has the wrong dimension")
    w = list(v)
    for col in lat.basis:
        p = next(i for i, x in enumerate(col) if x)
        if w[p] % col[p]:
            return False
        c = w[p] // col[p]
        if c:
            w = [x - c * y for x, y in zip(w, col)]
    return not any(w)


def coordinates(lat: Lattice, v: Sequence[int]) -> Vector:
    """Integer coefficients of ``v`` in the canonical basis of ``lat``."""
    w = list(v)
    out = []
    for col in lat.basis:
        p = next(i for i, x in enumerate(col) if x)
        if w[p] % col[p]:
            raise ValueError(f"{tuple(v)} is not in the lattice")
        c = w[p] // col[p]
        out.append(c)
        w = [x - c * y for x, y in zip(w, col)]
    if any(w):
        raise ValueError(f"{tuple(v)} is not in the lattice")
    return tuple(out)


def index(lat: Lattice) -> int | float:
    """|Z^d / L|, or INFINITE when L has lower rank."""
    if lat.rank < lat.ambient:
        return INFINITE
    out = 1
    for col in lat.basis:
        out *= next(x for x in col if x)
    return abs(out)


def _unimodular_completion(lat: Lattice) -> tuple[list[list[int]], int]:
    """Columns of a unimodular matrix whose first ``rank`` columns span P(L)."""
    d = lat.ambient
    if lat.rank == 0:
        return _identity(d), 0
    _, u, _ = snf(lat.matrix())
    uinv = u.inverse()
    return [list(c) for c in uinv.columns()], lat.rank


def purify(lat: Lattice) -> Lattice:
    """Saturation of L: all v with some nonzero multiple in L."""
    cols, r = _unimodular_completion(lat)
    return lattice_from_generators(cols[:r], lat.ambient)


def is_pure(lat: Lattice) -> bool:
    return purify(lat) == lat


def complement(lat: Lattice) -> Lattice:
    """A subgroup H with Z^d = L (+) H; requires L pure."""
    if not is_pure(lat):
        raise NotPureError(f"{lat} is not pure")
    cols, r = _unimodular_completion(lat)
    extra = []
    for c in cols[r:]:
        # reduce against L's canonical basis so the choice is reproducible
        for b in lat.basis:
            p = next(i for i, x in enumerate(b) if x)
            q = c[p] // b[p]
            if q:
                c = [x - q * y for x, y in zip(c, b)]
        extra.append(c)
    return lattice_from_generators(extra, lat.ambient)


def intersect(l1: Lattice, l2: Lattice) -> Lattice:
    if l1.ambient != l2.ambient:
        raise ValueError("ambient dimensions differ")
    d = l1.ambient
    if l1.rank == 0 or l2.rank == 0:
        return zero_lattice(d)
    stacked = IntMatrix.from_columns(list(l1.basis) + [tuple(-x for x in b) for b in l2.basis])
    gens = []
    for k in kernel_basis(stacked):
        x = k[: l1.rank]
        gens.append(tuple(sum(c * b[i] for c, b in zip(x, l1.basis)) for i in range(d)))
    return lattice_from_generators(gens, d)


def direct_sum_is_full(parts: Sequence[Lattice]) -> bool:
    """True when the given subgroups form an internal direct sum equal to Z^d."""
    d = parts[0].ambient
    cols = [c for p in parts for c in p.basis]
    if len(cols) != d:
        return False
    return IntMatrix.from_columns(cols).det() in (1, -1)


def image_lattice(m: IntMatrix) -> Lattice:
    """Column span of M."""
    return lattice_from_generators(m.columns(), m.nrows)


def contains(big: Lattice, small: Lattice) -> bool:
    return all(member(big, v) for v in small.basis)
