"""Transitivity deciders for twisted skew products.

Every verdict is graded (see :mod:`skewdyn.skew.verdict`). Negative
verdicts always rest on a necessary condition that fails, with its
certificate: a non-transitive factor (reducible base, finite quotient,
Fried quotient), a proper displacement lattice, a functional that is
nonpositive on the rotation set, or a non-cyclotomic factor of the
characteristic polynomial of the twist.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import (
    InvariantBreach,
    NotIrreducibleError,
    ThresholdNotMetError,
    TwistedInputError,
)
from ..intlat import (
    IntMatrix,
    Lattice,
    Vector,
    index,
    lattice_from_generators,
    scaled_lattice,
    smith_invariants,
)
from ..polytope import (
    RatPolytope,
    contains_zero_interior,
    frac_str,
    interior_point,
    separating_functional,
)
from ..sft import components, is_irreducible, period, strongly_connected_components
from ..spectral import is_quasi_unipotent, order_N, spectral_witness
from .cocycle import CocycleGraph, PhasedSkew, from_untwisted
from .core import FiniteQuotient, TwistedSkew, quotient
from .verdict import Status, Verdict, inconclusive, proven, proven_not, verified

DEFAULT_MAX_POWER = 6
DEFAULT_MAX_INDEX = 4


# -- certificate helpers -----------------------------------------------------


def _vec(v: Sequence) -> list[str]:
    return [frac_str(Fraction(x)) for x in v]


def lattice_summary(lat: Lattice) -> dict:
    idx = index(lat)
    inv = smith_invariants(lat.matrix()) if lat.rank else []
    return {
        "basis": [_vec(c) for c in lat.basis],
        "rank": str(lat.rank),
        "index": "inf" if idx == math.inf else str(idx),
        "snf": [str(x) for x in inv],
    }


def polytope_summary(p: RatPolytope | None) -> dict:
    if p is None:
        return {"vertices": [], "affine_dim": "-1"}
    return {"vertices": p.vertex_strings(), "affine_dim": str(p.affine_dim)}


def _labels(g: CocycleGraph, nodes: Sequence[int]) -> list:
    out = []
    for v in nodes:
        lab = g.labels[v] if g.labels else v
        out.append(list(lab) if isinstance(lab, tuple) else lab)
    return out


# -- untwisted decision ------------------------------------------------------


def decide_cocycle(g: CocycleGraph, claim: str = "transitive") -> Verdict:
    """Transitivity of an untwisted product given as a cocycle graph.

    Transitive iff the graph is strongly connected, closed walks generate
    Z^k, and 0 is interior to the rotation set.
    """
    if not g.is_strongly_connected():
        comps = g.components()
        return proven_not(claim, "base_reducible", components=[_labels(g, c) for c in comps])
    lat = g.lattice()
    if index(lat) != 1:
        return proven_not(claim, "proper_displacement_lattice", lattice=lattice_summary(lat))
    poly = g.rotation_polytope()
    if not contains_zero_interior(poly):
        L = separating_functional(poly)
        return proven_not(
            claim,
            "zero_not_interior",
            functional=[str(x) for x in L],
            max_on_rotation_set=frac_str(poly.support(L)),
            rotation_set=polytope_summary(poly),
        )
    margins = [frac_str(b) for _, b in poly.facets]
    return proven(
        claim,
        lattice=lattice_summary(lat),
        rotation_set=polytope_summary(poly),
        facet_offsets=margins,
    )


def is_transitive_untwisted(tau: TwistedSkew) -> Verdict:
    if not tau.is_untwisted():
        raise TwistedInputError("expected the identity twist")
    return decide_cocycle(from_untwisted(tau))


def has_ftp_untwisted(tau: TwistedSkew) -> bool:
    """ftp of an untwisted product: irreducible base and closed walks generating Z^d."""
    if not tau.is_untwisted():
        raise TwistedInputError("expected the identity twist")
    g = from_untwisted(tau)
    return g.is_strongly_connected() and index(g.lattice()) == 1


# -- boundedness witness -----------------------------------------------------


@dataclass(frozen=True)
class WitnessCycle:
    states: tuple[int, ...]
    displacement: Vector
    rotation: tuple[Fraction, ...]
    functional_value: Fraction
    threshold: int
    connector: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.states) - 1


def _shortest_path(tau: TwistedSkew, i: int, j: int) -> list[int]:
    """Shortest path of length >= 1 from i to j, preferring smaller next states."""
    prev: dict[int, int] = {}
    queue: deque[int] = deque()
    for b in tau.base.successors(i):
        prev[b] = i
        queue.append(b)
    while queue:
        v = queue.popleft()
        if v == j:
            path = [j]
            while True:
                path.append(prev[path[-1]])
                if path[-1] == i:
                    return list(reversed(path))
        for b in tau.base.successors(v):
            if b not in prev:
                prev[b] = v
                queue.append(b)
    raise NotIrreducibleError(f"no path from {i} to {j}")


def connector_table(tau: TwistedSkew) -> dict[tuple[int, int], tuple[list[int], Vector]]:
    n = tau.base.state_count
    out = {}
    for i in range(n):
        for j in range(n):
            path = _shortest_path(tau, i, j)
            out[(i, j)] = (path, tau.walk_sum(path))
    return out


def _primitive_period(states: list[int]) -> list[int]:
    body = states[:-1]
    n = len(body)
    for p in range(1, n + 1):
        if n % p == 0 and body == body[:p] * (n // p):
            return body[:p] + [body[0]]
    return states


def witness_cycle(tau: TwistedSkew, functional: Sequence[int], walk: Sequence[int]) -> WitnessCycle:
    """Close a walk of large ``functional`` displacement into a periodic orbit with positive rotation."""
    if not tau.is_untwisted():
        raise TwistedInputError("expected the identity twist")
    if not is_irreducible(tau.base):
        raise NotIrreducibleError("base must be irreducible")
    walk = list(walk)
    for a, b in zip(walk, walk[1:]):
        if not tau.base.allows(a, b):
            raise ValueError(f"walk uses a forbidden edge {a}->{b}")
    L = [int(x) for x in functional]

    def ev(v: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(L, v))

    table = connector_table(tau)
    C = max(2 * max(abs(ev(dv)) for _, dv in table.values()), 1)
    value = ev(tau.walk_sum(walk))
    if value <= C:
        raise ThresholdNotMetError(f"L(h(walk)) = {value} does not exceed C = {C}")
    if len(walk) > 1 and walk[0] == walk[-1]:
        closed, conn = walk, ()
    else:
        path, _ = table[(walk[-1], walk[0])]
        closed, conn = walk + path[1:], tuple(path)
    closed = _primitive_period(closed)
    disp = tau.walk_sum(closed)
    n = len(closed) - 1
    rot = tuple(Fraction(x, n) for x in disp)
    lval = sum((Fraction(a) * r for a, r in zip(L, rot)), Fraction(0))
    if lval <= 0:
        raise InvariantBreach("closed walk does not have positive rotation")
    return WitnessCycle(tuple(closed), disp, rot, lval, C, conn)


# -- finite quotients --------------------------------------------------------


def _finite_quotient_info(q: FiniteQuotient) -> tuple[bool, dict]:
    n = q.sft.state_count
    comps = components(q.sft)
    ok = is_irreducible(q.sft)
    info = {"nodes": n, "components": len(comps)}
    if not ok and len(comps) > 1:
        pair = [q.labels[comps[0][0]], q.labels[comps[1][0]]]
        info["component_pair"] = [{"state": a, "class": [str(x) for x in g]} for a, g in pair]
    return ok, info


def _lattice_surjects_mod(lat: Lattice, m: int) -> bool:
    d = lat.ambient
    gens = list(lat.basis) + [tuple(m * int(i == j) for i in range(d)) for j in range(d)]
    return index(lattice_from_generators(gens, d)) == 1


def _witness_modulus(lat: Lattice) -> int:
    if lat.rank < lat.ambient:
        return 2
    top = smith_invariants(lat.matrix())[-1]
    p = 2
    while top % p:
        p += 1
    return p


def ftp_bounded(tau: TwistedSkew, M: int = DEFAULT_MAX_INDEX) -> Verdict:
    """Transitivity of tau modulo m Z^d for all m <= M.

    Every invariant co-finite lattice of index K contains K Z^d, so passing
    all m <= M covers every invariant lattice of index at most M. For an
    untwisted product the exact lattice criterion is authoritative and is
    cross-checked against the finite quotients.
    """
    claim = "ftp"
    results = []
    failure = None
    for m in range(1, M + 1):
        q = quotient(tau, scaled_lattice(m, tau.d))
        ok, info = _finite_quotient_info(q)
        info = {"modulus": str(m), **{k: (str(v) if isinstance(v, int) else v) for k, v in info.items()}}
        results.append({"modulus": str(m), "transitive": ok})
        if not ok and failure is None:
            failure = info
    if tau.is_untwisted():
        g = from_untwisted(tau)
        irreducible = g.is_strongly_connected()
        lat = g.lattice()
        for m, r in zip(range(1, M + 1), results):
            predicted = irreducible and _lattice_surjects_mod(lat, m)
            if predicted != r["transitive"]:
                raise InvariantBreach(f"lattice test and finite quotient disagree at m={m}")
        if irreducible and index(lat) == 1:
            return proven(claim, method="displacement_lattice", lattice=lattice_summary(lat), checked=results)
        m_star = 1 if not irreducible else _witness_modulus(lat)
        q = quotient(tau, scaled_lattice(m_star, tau.d))
        ok, info = _finite_quotient_info(q)
        if ok:
            raise InvariantBreach(f"witness modulus {m_star} yields a transitive quotient")
        return proven_not(
            claim,
            "finite_quotient_not_transitive",
            method="displacement_lattice",
            modulus=str(m_star),
            quotient={k: (str(v) if isinstance(v, int) else v) for k, v in info.items()},
            lattice=lattice_summary(lat),
            checked=results,
        )
    if failure is not None:
        return proven_not(claim, "finite_quotient_not_transitive", modulus=failure["modulus"], quotient=failure, checked=results)
    return verified(claim, bounds={"M": str(M)}, checked=results)


# -- phased helpers (iterates and translates without block blow-up) ----------


def _spectral_cert(a: IntMatrix) -> dict:
    return spectral_witness(a).to_dict()


def _fried_decision(ph: PhasedSkew) -> tuple[Verdict, dict]:
    """Transitivity of the Fried quotient of a phased iterate."""
    f, proj, embed, g = ph.fried()
    meta = {"fried_lattice": lattice_summary(f)}
    if g is None:
        base_ok = _phased_base_connected(ph)
        if base_ok:
            return proven("transitive", trivial_quotient=True), meta
        return proven_not("transitive", "base_reducible", trivial_quotient=True), meta
    return decide_cocycle(g), meta


def _phased_base_connected(ph: PhasedSkew) -> bool:
    n = ph.tau.base.state_count
    P = ph.period
    succ = [[] for _ in range(n * P)]
    for a, i, b, _ in ph.step_edges():
        succ[ph.node(a, i)].append(ph.node(b, (i + 1) % P))
    comps = strongly_connected_components(n * P, lambda v: succ[v])
    return len(comps) == 1 and any(succ)


def _phased_ftp(ph: PhasedSkew, M: int) -> tuple[bool | None, dict]:
    """(passed, info) for all moduli m <= M. For untwisted iterates the lattice test decides."""
    if ph.tau.is_untwisted():
        g = ph.cocycle()
        ok = g.is_strongly_connected() and index(g.lattice()) == 1
        info = {"method": "displacement_lattice", "lattice": lattice_summary(g.lattice())}
        return ok, info
    checked = []
    for m in range(1, M + 1):
        ok, info = ph.finite_quotient_connected(m)
        checked.append({"modulus": str(m), "transitive": ok})
        if not ok:
            return False, {
                "method": "finite_quotients",
                "modulus": str(m),
                "unreachable_pair": info.get("unreachable_pair"),
                "checked": checked,
            }
    return True, {"method": "finite_quotients", "checked": checked}


def _power_check(args) -> dict:
    tau, block, shift, k, M, assume_ftp = args
    ph = PhasedSkew(tau, block, k, shift)
    fv, meta = _fried_decision(ph)
    out = {"k": str(k), "fried_quotient": fv.status.value, "fried": {**meta, **fv.certificate}}
    failed = None
    if fv.status == Status.PROVEN_NOT_TRANSITIVE:
        failed = "fried_quotient_not_transitive"
    ftp_ok = None
    if failed is None and (not assume_ftp or tau.is_untwisted()):
        ftp_ok, info = _phased_ftp(ph, M)
        out["ftp"] = info
        if not ftp_ok:
            failed = "ftp_fails"
    out["ftp_passed"] = ftp_ok
    out["failed"] = failed
    return out


def _map(fn, items, jobs: int):
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# -- total transitivity ------------------------------------------------------


def _totally_transitive_phased(
    tau: TwistedSkew,
    block: int,
    shift: Vector | None,
    K: int,
    M: int,
    assume_ftp: bool,
    jobs: int,
) -> Verdict:
    claim = "totally_transitive"
    echo = {"bounds": {"K": str(K), "M": str(M)}, "assume_ftp": assume_ftp}
    if not is_irreducible(tau.base):
        return proven_not(claim, "base_reducible", components=components(tau.base), **echo)
    per = period(tau.base)
    if per != 1:
        return proven_not(claim, "base_not_mixing", base_period=str(per), **echo)
    a = tau.twist ** block
    if not is_quasi_unipotent(a):
        return proven_not(claim, "spectral_radius_exceeds_one", spectral=_spectral_cert(a), **echo)
    N = order_N(a)
    ph = PhasedSkew(tau, block, N, shift)
    fv, meta = _fried_decision(ph)
    if fv.status == Status.PROVEN_NOT_TRANSITIVE:
        return proven_not(
            claim,
            "zero_not_interior_of_fried_rotation_set" if fv.certificate.get("reason") == "zero_not_interior" else "fried_quotient_of_power_not_transitive",
            power=str(N),
            fried={**meta, **fv.certificate},
            **echo,
        )
    checks = _map(_power_check, [(tau, block, shift, k, M, assume_ftp) for k in range(1, K + 1)], jobs)
    for c in checks:
        if c["failed"]:
            return proven_not(claim, c["failed"], power=c["k"], N=str(N), checks=checks, **echo)
    body = {"N": str(N), "fried_of_power_N": {**meta, **fv.certificate}, "checks": checks, **echo}
    if assume_ftp:
        return proven(claim, **body)
    return verified(claim, **body)


def is_totally_transitive(
    tau: TwistedSkew,
    K: int = DEFAULT_MAX_POWER,
    M: int = DEFAULT_MAX_INDEX,
    assume_ftp: bool = False,
    jobs: int = 1,
) -> Verdict:
    """Total transitivity: twist of spectral radius one, 0 interior to the Fried
    rotation set of tau^N, and the total ftp (assumed, or checked for powers
    k <= K and moduli m <= M)."""
    return _totally_transitive_phased(tau, 1, None, K, M, assume_ftp, jobs)


# -- transitivity of a single map --------------------------------------------


def _transitive_phased(tau: TwistedSkew, block: int, shift: Vector | None, M: int, assume_ftp: bool) -> Verdict:
    claim = "transitive"
    echo = {"bounds": {"M": str(M)}, "assume_ftp": assume_ftp}
    ph = PhasedSkew(tau, block, 1, shift)
    if not _phased_base_connected(ph):
        return proven_not(claim, "base_reducible", **echo)
    a = ph.twist
    if a.is_identity():
        return decide_cocycle(ph.cocycle(), claim)
    if not is_quasi_unipotent(a):
        return proven_not(claim, "spectral_radius_exceeds_one", spectral=_spectral_cert(a), **echo)
    fv, meta = _fried_decision(ph)
    if fv.status == Status.PROVEN_NOT_TRANSITIVE:
        return proven_not(claim, "fried_quotient_not_transitive", fried={**meta, **fv.certificate}, **echo)
    ftp_ok, ftp_info = _phased_ftp(ph, M)
    if not ftp_ok:
        return proven_not(claim, "finite_quotient_not_transitive", ftp=ftp_info, **echo)
    N = order_N(a)
    if N == 1:
        body = {"fried": {**meta, **fv.certificate}, "ftp": ftp_info, **echo}
        return proven(claim, **body) if assume_ftp else verified(claim, **body)
    # spectrum not {1}: a transitive power forces transitivity
    phN = PhasedSkew(tau, block, N, shift)
    fvN, metaN = _fried_decision(phN)
    if fvN.status == Status.PROVEN_TRANSITIVE:
        ftpN, infoN = (True, None) if assume_ftp else _phased_ftp(phN, M)
        body = {"N": str(N), "fried_of_power_N": {**metaN, **fvN.certificate}, "ftp": ftp_info, **echo}
        if ftpN:
            return proven(claim, **body) if assume_ftp else verified(claim, power_ftp=infoN, **body)
    return inconclusive(
        claim,
        "only_necessary_conditions_hold",
        N=str(N),
        fried={**meta, **fv.certificate},
        fried_of_power_N={**metaN, **fvN.certificate},
        ftp=ftp_info,
        **echo,
    )


def is_transitive(tau: TwistedSkew, M: int = DEFAULT_MAX_INDEX, assume_ftp: bool = False) -> Verdict:
    """Transitivity of tau itself (exact for untwisted products)."""
    if tau.is_untwisted():
        return is_transitive_untwisted(tau)
    return is_transitive_twisted(tau, M, assume_ftp)


def is_transitive_twisted(tau: TwistedSkew, M: int = DEFAULT_MAX_INDEX, assume_ftp: bool = False) -> Verdict:
    return _transitive_phased(tau, 1, None, M, assume_ftp)


# -- H1-transitivity ---------------------------------------------------------


@dataclass(frozen=True)
class H1Candidate:
    """The map T_(-m) o tau^(q N), described lazily."""

    tau: TwistedSkew
    q: int
    N: int
    m: Vector
    p: Vector

    def materialize(self) -> TwistedSkew:
        from .core import iterate, translate

        return translate(iterate(self.tau, self.q * self.N), tuple(-x for x in self.m))

    def to_dict(self) -> dict:
        return {"q": str(self.q), "N": str(self.N), "m": [str(x) for x in self.m], "p": [str(x) for x in self.p]}


def _interior_lattice_points(poly: RatPolytope, q: int) -> list[tuple[int, ...]]:
    """Integer points strictly inside q * poly, nearest the origin first."""
    k = poly.ambient
    lo = [math.floor(q * min(v[i] for v in poly.vertices)) for i in range(k)]
    hi = [math.ceil(q * max(v[i] for v in poly.vertices)) for i in range(k)]
    pts = []
    for p in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if all(sum(Fraction(c) * x for c, x in zip(a, p)) < q * b for a, b in poly.facets):
            pts.append(p)
    pts.sort(key=lambda p: (max((abs(x) for x in p), default=0), p))
    return pts


def h1_transitivity(
    tau: TwistedSkew,
    K: int = DEFAULT_MAX_POWER,
    M: int = DEFAULT_MAX_INDEX,
    assume_ftp: bool = False,
    max_q: int = 6,
    max_candidates: int = 24,
) -> tuple[Verdict, H1Candidate | None]:
    """Is some translate T_(-m) o tau^(q N) transitive?

    Candidates come from interior points p/q of the Fried rotation set of
    tau^N, embedded into Z^d along the complement of the Fried lattice. The
    first candidate is the vertex centroid cleared of denominators.
    """
    claim = "h1_transitive"
    echo = {"bounds": {"K": str(K), "M": str(M)}, "assume_ftp": assume_ftp}
    a = tau.twist
    if not is_quasi_unipotent(a):
        return proven_not(claim, "spectral_radius_exceeds_one", spectral=_spectral_cert(a), **echo), None
    if not is_irreducible(tau.base):
        return proven_not(claim, "base_reducible", **echo), None
    N = order_N(a)
    f, proj, embed, g = PhasedSkew(tau, 1, N, None).fried()
    assert g is not None, "Fried quotient of tau^N is never trivial"
    poly = g.rotation_polytope()
    if not poly.is_full_dimensional():
        L = separating_functional(poly)
        return (
            proven_not(
                claim,
                "fried_rotation_set_not_full_dimensional",
                N=str(N),
                rotation_set=polytope_summary(poly),
                equations=[[_vec(c), frac_str(b)] for c, b in poly.equations],
                functional=[str(x) for x in L],
            ),
            None,
        )
    centroid = interior_point(poly)
    q0 = math.lcm(*(x.denominator for x in centroid))
    first = tuple(int(x * q0) for x in centroid)
    candidates = [(q0, first)]
    for q in range(1, max_q + 1):
        for p in _interior_lattice_points(poly, q):
            if (q, p) != (q0, first):
                candidates.append((q, p))
    tried = []
    for q, p in candidates[:max_candidates]:
        m = embed.apply(p)
        cand = H1Candidate(tau, q, N, m, p)
        v = _transitive_phased(tau, q * N, tuple(-x for x in m), M, assume_ftp)
        tried.append({**cand.to_dict(), "status": v.status.value})
        if v.positive:
            total = _totally_transitive_phased(tau, q * N, tuple(-x for x in m), K, M, assume_ftp, 1)
            body = {
                "N": str(N),
                "witness": cand.to_dict(),
                "candidate_transitive": v.to_dict(),
                "candidate_totally_transitive": total.to_dict(),
                "fried_rotation_set": polytope_summary(poly),
                **echo,
            }
            exact = v.status == Status.PROVEN_TRANSITIVE
            return (proven(claim, **body) if exact else verified(claim, **body)), cand
    return inconclusive(claim, "no_transitive_candidate_found", N=str(N), tried=tried, **echo), None
