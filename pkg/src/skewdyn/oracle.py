"""Brute-force ground truth for the deciders.

Reachability on the lifted chain ``(a, n) -> (b, A n + h(a, b))`` inside a
sup-norm ball, exact transitivity of finite quotients by product-graph
search, seeded random instances, and a numerical escape check for twists
with an eigenvalue off the unit circle.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from collections import deque
from dataclasses import dataclass, field

from .errors import PreconditionError
from .intlat import IntMatrix, Vector
from .sft import Sft
from .skew.core import TwistedSkew
from .spectral import is_quasi_unipotent

Node = tuple[int, Vector]


@dataclass(frozen=True)
class BallConfig:
    radius: int = 8
    steps: int = 1_000_000
    box: int = 3

    def __post_init__(self):
        if not (self.radius >= self.box >= 0):
            raise ValueError("need radius >= box >= 0")
        if self.steps < 1:
            raise ValueError("steps must be positive")


@dataclass(frozen=True)
class ReachResult:
    reached: frozenset[Node]
    truncated: bool  # some successor fell outside the ball
    exhausted: bool  # the frontier emptied before the step bound


def ball_reach(tau: TwistedSkew, start: Node, cfg: BallConfig) -> ReachResult:
    state, vec = start[0], tuple(start[1])
    if max((abs(x) for x in vec), default=0) > cfg.radius:
        raise ValueError("start lies outside the ball")
    seen = {(state, vec)}
    frontier = [(state, vec)]
    truncated = False
    depth = 0
    a = tau.twist
    identity = a.is_identity()
    while frontier and depth < cfg.steps:
        nxt = []
        for s, n in frontier:
            image = n if identity else a.apply(n)
            for b in tau.base.successors(s):
                m = tuple(x + y for x, y in zip(image, tau.h(s, b)))
                if max(abs(x) for x in m) > cfg.radius:
                    truncated = True
                    continue
                node = (b, m)
                if node not in seen:
                    seen.add(node)
                    nxt.append(node)
        frontier = nxt
        depth += 1
    return ReachResult(frozenset(seen), truncated, not frontier)


class OracleStatus(str, enum.Enum):
    REACHED_ALL = "REACHED_ALL"
    MISSING = "MISSING"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class OracleVerdict:
    status: OracleStatus
    missing: tuple[tuple[int, Node], ...] = ()  # (source state, unreached target)
    reach_counts: tuple[int, ...] = ()
    exact: bool = False  # MISSING with no truncation: non-reachability is certain
    config: BallConfig = field(default_factory=BallConfig)

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "exact": self.exact,
            "missing_count": str(len(self.missing)),
            "missing_sample": [
                {"from": str(a), "state": str(b), "vector": [str(x) for x in v]} for a, (b, v) in self.missing[:10]
            ],
            "reach_counts": [str(c) for c in self.reach_counts],
            "radius": str(self.config.radius),
            "box": str(self.config.box),
            "steps": str(self.config.steps),
        }


def _box_targets(tau: TwistedSkew, r: int) -> list[Node]:
    vecs = itertools.product(range(-r, r + 1), repeat=tau.d)
    return [(b, v) for v in vecs for b in range(tau.base.state_count)]


def _scan(tau: TwistedSkew, cfg: BallConfig):
    targets = _box_targets(tau, cfg.box)
    missing = []
    counts = []
    clean = True
    zero = (0,) * tau.d
    for a in range(tau.base.state_count):
        res = ball_reach(tau, (a, zero), cfg)
        counts.append(len(res.reached))
        clean = clean and not res.truncated and res.exhausted
        missing.extend((a, t) for t in targets if t not in res.reached)
    return missing, counts, clean


def oracle_transitive(tau: TwistedSkew, cfg: BallConfig = BallConfig()) -> OracleVerdict:
    """Can every (a, 0) reach every (b, m) with |m| <= box?

    Reaching is a proof. Missing targets are certain only if the search
    never touched the ball boundary; otherwise the search is repeated in a
    ball of twice the radius, and the targets are reported missing only if
    the enlarged search misses exactly the same ones.
    """
    missing, counts, clean = _scan(tau, cfg)
    if not missing:
        return OracleVerdict(OracleStatus.REACHED_ALL, (), tuple(counts), True, cfg)
    if clean:
        return OracleVerdict(OracleStatus.MISSING, tuple(missing), tuple(counts), True, cfg)
    big = BallConfig(2 * cfg.radius, 2 * cfg.steps, cfg.box)
    missing2, counts2, clean2 = _scan(tau, big)
    if not missing2:
        return OracleVerdict(OracleStatus.REACHED_ALL, (), tuple(counts2), True, big)
    if missing2 == missing:
        return OracleVerdict(OracleStatus.MISSING, tuple(missing), tuple(counts), clean2, cfg)
    return OracleVerdict(OracleStatus.INCONCLUSIVE, tuple(missing2), tuple(counts2), False, big)


def finite_quotient_transitive_exact(tau: TwistedSkew, m: int) -> bool:
    """Strong connectivity of the chain on S x (Z/m)^d, by forward and backward search."""
    if m < 1:
        raise ValueError("modulus must be positive")
    n = tau.base.state_count
    d = tau.d
    nodes = [(a, g) for a in range(n) for g in itertools.product(range(m), repeat=d)]
    fwd: dict[Node, list[Node]] = {v: [] for v in nodes}
    bwd: dict[Node, list[Node]] = {v: [] for v in nodes}
    for a, g in nodes:
        image = tau.twist.apply(g)
        for b in tau.base.successors(a):
            t = (b, tuple((x + y) % m for x, y in zip(image, tau.h(a, b))))
            fwd[(a, g)].append(t)
            bwd[t].append((a, g))
    if not any(fwd.values()):
        return False

    def sweep(adj) -> int:
        start = nodes[0]
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen)

    return sweep(fwd) == len(nodes) and sweep(bwd) == len(nodes)


# -- random instances --------------------------------------------------------


@dataclass(frozen=True)
class RandomParams:
    n_states: int = 3
    d: int = 1
    height_range: int = 2
    twist_kind: str = "identity"  # identity | unipotent | general
    edge_density: float = 0.4

    def __post_init__(self):
        if self.n_states < 1 or self.d < 1 or self.height_range < 0:
            raise ValueError("invalid random instance parameters")
        if self.twist_kind not in ("identity", "unipotent", "general"):
            raise ValueError(f"unknown twist kind {self.twist_kind!r}")


def random_unimodular(rng: random.Random, d: int, moves: int = 6, span: int = 2) -> IntMatrix:
    """A product of random elementary matrices (and possibly a sign flip)."""
    rows = [[int(i == j) for j in range(d)] for i in range(d)]
    for _ in range(moves if d > 1 else 0):
        i, j = rng.sample(range(d), 2)
        c = rng.randint(-span, span)
        rows[i] = [x + c * y for x, y in zip(rows[i], rows[j])]
    if rng.random() < 0.25:
        k = rng.randrange(d)
        rows[k] = [-x for x in rows[k]]
    return IntMatrix.of(rows)


def random_unipotent(rng: random.Random, d: int, span: int = 2) -> IntMatrix:
    upper = IntMatrix.of([[1 if i == j else (rng.randint(-span, span) if j > i else 0) for j in range(d)] for i in range(d)])
    u = random_unimodular(rng, d, moves=4, span=1)
    return u @ upper @ u.inverse()


def random_instance(seed: int, params: RandomParams = RandomParams()) -> TwistedSkew:
    """Deterministic from the seed; the base is always strongly connected."""
    rng = random.Random(seed)
    n = params.n_states
    order = list(range(n))
    rng.shuffle(order)
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[order[i]][order[(i + 1) % n]] = 1
    for a in range(n):
        for b in range(n):
            if rng.random() < params.edge_density:
                rows[a][b] = 1
    base = Sft.of(rows)
    hr = params.height_range
    heights = {e: tuple(rng.randint(-hr, hr) for _ in range(params.d)) for e in base.edges()}
    if params.twist_kind == "identity":
        twist = IntMatrix.identity(params.d)
    elif params.twist_kind == "unipotent":
        twist = random_unipotent(rng, params.d)
    else:
        twist = random_unimodular(rng, params.d)
    return TwistedSkew(base, params.d, twist, heights)


# -- escape from balls when the spectral radius exceeds one ------------------


@dataclass(frozen=True)
class EscapeResult:
    ok: bool
    eigenvalue_modulus: float
    threshold: float
    samples: tuple[dict, ...]

    def __bool__(self) -> bool:
        return self.ok


def escape_check(
    tau: TwistedSkew,
    samples: int = 5,
    seed: int = 0,
    bound_factor: float = 1e6,
    starts: list[Vector] | None = None,
) -> EscapeResult:
    """Orbits started beyond C/(|lambda| - 1) along the expanding eigendirection diverge.

    Phi is a left eigenvector for the eigenvalue lambda of largest modulus,
    so Phi(A n + h) = lambda Phi(n) + Phi(h) and |Phi| grows once it exceeds
    C / (|lambda| - 1) with C = max |Phi(h)|. Floating point is used for Phi
    only; the orbit itself is computed exactly. Explicit ``starts`` inside
    the threshold are excluded (reported, not checked); otherwise ``samples``
    random starts are drawn beyond it.
    """
    import numpy as np

    a = tau.twist
    if is_quasi_unipotent(a):
        raise PreconditionError("twist has spectral radius one; nothing escapes")
    mat = np.array(a.tolist(), dtype=float)
    vals, vecs = np.linalg.eig(mat.T)
    i = int(np.argmax(np.abs(vals)))
    lam = vals[i]
    phi = vecs[:, i]
    phi = phi / np.max(np.abs(phi))
    mod = float(abs(lam))

    def Phi(v) -> complex:
        return complex(np.dot(phi, np.array([float(x) for x in v])))

    C = max(abs(Phi(h)) for h in tau.heights.values()) + 1e-9
    threshold = C / (mod - 1)
    rng = random.Random(seed)
    out = []
    ok = True
    n_states = tau.base.state_count
    initial: list[Vector] = []
    excluded = []
    if starts is not None:
        for v in starts:
            v = tuple(int(x) for x in v)
            (initial if abs(Phi(v)) > threshold else excluded).append(v)
    else:
        for _ in range(samples):
            initial.append(_beyond_threshold(rng, tau.d, Phi, phi, threshold))
    for n in initial:
        start = abs(Phi(n))
        target = bound_factor * max(threshold, 1.0)
        # from the growth estimate: |Phi_k| - t >= mod^k (|Phi_0| - t)
        need = max(1, math.ceil(math.log((target - threshold) / (start - threshold)) / math.log(mod)) + 1)
        s = rng.randrange(n_states)
        values = [start]
        monotone = True
        for _ in range(need):
            b = rng.choice(tau.base.successors(s))
            n = tuple(x + y for x, y in zip(a.apply(n), tau.h(s, b)))
            s = b
            cur = abs(Phi(n))
            if cur < values[-1] * (1 - 1e-12):
                monotone = False
            values.append(cur)
        exceeded = values[-1] > target
        ok = ok and monotone and exceeded
        out.append({"start": [str(x) for x in initial[len(out)]], "start_phi": f"{start:.6g}", "steps": need, "final_phi": f"{values[-1]:.6g}", "monotone": monotone, "exceeded": exceeded})
    for v in excluded:
        out.append({"start": [str(x) for x in v], "excluded": True})
    return EscapeResult(ok and bool(initial), mod, threshold, tuple(out))


def _beyond_threshold(rng: random.Random, d: int, Phi, phi, threshold: float) -> Vector:
    v = [rng.randint(-3, 3) for _ in range(d)]
    if not any(v):
        v[0] = 1
    scale = 1
    while abs(Phi([scale * x for x in v])) <= 2 * threshold + 1 and scale < 2**60:
        scale *= 2
    n = tuple(scale * x for x in v)
    if abs(Phi(n)) > threshold:
        return n
    # the random direction is (numerically) orthogonal to Phi
    j = max(range(d), key=lambda k: abs(phi[k]))
    return tuple(int(k == j) * math.ceil((2 * threshold + 1) / abs(phi[j])) for k in range(d))
