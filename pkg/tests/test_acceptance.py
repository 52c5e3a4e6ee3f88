"""Acceptance criteria. Each test records a one-line detail for the summary."""

import json
import os
import random
import subprocess
import sys
import time
from fractions import Fraction
from math import gcd

import pytest

from skewdyn.intlat import IntMatrix, index, kernel_basis, lattice_from_generators, member, smith_invariants
from skewdyn.model import BUILTINS, builtin
from skewdyn.oracle import (
    BallConfig,
    OracleStatus,
    RandomParams,
    escape_check,
    finite_quotient_transitive_exact,
    oracle_transitive,
    random_instance,
    random_unimodular,
    random_unipotent,
)
from skewdyn.polytope import affine_image
from skewdyn.sft import Sft, is_irreducible
from skewdyn.skew import (
    Status,
    TwistedSkew,
    displacement_data,
    from_untwisted,
    ftp_bounded,
    is_transitive,
    iterate,
    translate,
)
from skewdyn.spectral import (
    char_poly,
    fried_stability_check,
    gtl_construct,
    is_quasi_unipotent,
    nilpotent_decomposition,
    order_N,
    poly_divmod,
    shear_form,
    unipotent_poly,
)

# pinned thresholds
GOLDEN_SECONDS = 1.0
ORACLE_INSTANCES = 120
ORACLE_SECONDS = 60.0
ORACLE_INCONCLUSIVE_RATE = 0.20
ORACLE_CONFIG = BallConfig(radius=8, box=3)
SPECTRAL_INSTANCES = 60
SPECTRAL_SECONDS = 30.0
GTL_INSTANCES = 60
EQUIVARIANCE_INSTANCES = 60
NEGATIVE_INSTANCES = 24
ESCAPE_STARTS = 5


def corpus():
    """Seeded untwisted instances: 1..5 states, d in {1, 2}, heights in [-2, 2]^d."""
    out = []
    for seed in range(ORACLE_INSTANCES):
        params = RandomParams(n_states=1 + seed % 5, d=1 + (seed // 5) % 2, height_range=2)
        out.append(random_instance(seed, params))
    return out


def fr(*xs):
    return tuple(Fraction(x) for x in xs)


@pytest.mark.criterion("C1 golden examples")
def test_golden_examples(record_property):
    start = time.perf_counter()
    problems = []

    eta1, eta2, eta3, eta4 = (builtin(n) for n in ("eta1", "eta2", "eta3", "eta4"))

    d1 = displacement_data(eta1)
    if ftp_bounded(eta1).status != Status.PROVEN_TRANSITIVE:
        problems.append("eta1 ftp")
    if d1.polytope.vertices != (fr(1),):
        problems.append("eta1 rot")
    if is_transitive(eta1).status != Status.PROVEN_NOT_TRANSITIVE:
        problems.append("eta1 transitive")

    d2 = displacement_data(eta2)
    if d2.lattice != lattice_from_generators([(2,)], 1):
        problems.append("eta2 lattice")
    if d2.polytope.vertices != (fr(-2), fr(2)):
        problems.append("eta2 rot")
    if is_transitive(eta2).status != Status.PROVEN_NOT_TRANSITIVE:
        problems.append("eta2 transitive")
    f2 = ftp_bounded(eta2)
    if f2.status != Status.PROVEN_NOT_TRANSITIVE or f2.certificate.get("modulus") != "2":
        problems.append("eta2 ftp at m=2")

    if is_transitive(eta3).status != Status.PROVEN_TRANSITIVE:
        problems.append("eta3 transitive")
    if is_transitive(iterate(eta3, 2)).status != Status.PROVEN_NOT_TRANSITIVE:
        problems.append("eta3 iterate 2")

    d4 = displacement_data(eta4)
    if index(d4.lattice) != 1 or ftp_bounded(eta4).status != Status.PROVEN_TRANSITIVE:
        problems.append("eta4 lattice/ftp")
    if set(d4.polytope.vertices) != {fr(1, 0), fr(0, 1)} or d4.polytope.affine_dim != 1:
        problems.append("eta4 rot")
    if is_transitive(eta4).status != Status.PROVEN_NOT_TRANSITIVE:
        problems.append("eta4 transitive")

    elapsed = time.perf_counter() - start
    record_property(
        "detail", f"eta1-eta4 exact, discrepancies: {problems or 'none'}, {elapsed:.3f}s (limit {GOLDEN_SECONDS}s)"
    )
    assert not problems
    assert elapsed < GOLDEN_SECONDS


@pytest.mark.criterion("C2 oracle equivalence")
def test_oracle_equivalence(record_property):
    start = time.perf_counter()
    mismatches, inconclusive, undecided = [], 0, []
    instances = corpus()
    for i, tau in enumerate(instances):
        verdict = is_transitive(tau).status
        if verdict not in (Status.PROVEN_TRANSITIVE, Status.PROVEN_NOT_TRANSITIVE):
            undecided.append(i)
        oracle = oracle_transitive(tau, ORACLE_CONFIG)
        if oracle.status == OracleStatus.INCONCLUSIVE:
            inconclusive += 1
            continue
        reached = oracle.status == OracleStatus.REACHED_ALL
        if reached != (verdict == Status.PROVEN_TRANSITIVE):
            mismatches.append(i)
    elapsed = time.perf_counter() - start
    rate = inconclusive / len(instances)
    record_property(
        "detail",
        f"{len(instances)} instances, {len(mismatches)} mismatches, inconclusive {inconclusive} "
        f"({rate:.1%}, limit {ORACLE_INCONCLUSIVE_RATE:.0%}), {elapsed:.1f}s (limit {ORACLE_SECONDS:.0f}s)",
    )
    assert not mismatches, f"mismatching seeds {mismatches}"
    assert not undecided
    assert rate < ORACLE_INCONCLUSIVE_RATE
    assert elapsed < ORACLE_SECONDS


def lattice_predicts(tau, m):
    """Displacement-lattice route: irreducible base and L + m Z^d = Z^d."""
    if not is_irreducible(tau.base):
        return False
    lat = from_untwisted(tau).lattice()
    if lat.rank < tau.d:
        return m == 1
    return all(gcd(s, m) == 1 for s in smith_invariants(lat.matrix()))


@pytest.mark.criterion("C3 ftp cross-check")
def test_ftp_cross_check(record_property):
    mismatches = []
    checks = 0
    for i, tau in enumerate(corpus()):
        for m in (2, 3, 4):
            checks += 1
            if lattice_predicts(tau, m) != finite_quotient_transitive_exact(tau, m):
                mismatches.append((i, m))
        reported = [c["transitive"] for c in ftp_bounded(tau, 4).certificate["checked"]]
        if reported != [finite_quotient_transitive_exact(tau, m) for m in range(1, 5)]:
            mismatches.append((i, "ftp_bounded"))
    record_property("detail", f"{checks} (instance, m) pairs, {len(mismatches)} mismatches")
    assert not mismatches


FINITE_ORDER_BLOCKS = (((-1,),), ((0, -1), (1, 0)), ((0, -1), (1, -1)), ((1, -1), (1, 0)))


def random_quasi_unipotent(rng, d):
    blocks, size = [], 0
    while rng.random() < 0.5:
        b = rng.choice(FINITE_ORDER_BLOCKS)
        if size + len(b) > d - 1:
            break
        blocks.append(b)
        size += len(b)
    blocks.append(random_unipotent(rng, d - size).rows)
    rows = [[0] * d for _ in range(d)]
    at = 0
    for b in blocks:
        for i, r in enumerate(b):
            for j, x in enumerate(r):
                rows[at + i][at + j] = x
        at += len(b)
    u = random_unimodular(rng, d, moves=4, span=1)
    return u @ IntMatrix.of(rows) @ u.inverse()


def unipotent(a):
    return char_poly(a).coefficients == unipotent_poly(a.nrows)


def spectral_problems(a):
    problems = []
    if not is_quasi_unipotent(a):
        return ["not quasi-unipotent"]
    n = order_N(a)
    s = a**n
    if not unipotent(s):
        problems.append("A^N not unipotent")
    if any(unipotent(a**m) for m in range(1, n) if n % m == 0):
        problems.append("N not minimal")
    d = a.nrows
    # shear form: unimodular E, identity diagonal blocks, zero above, full-rank subdiagonal blocks
    form = shear_form(s)
    if form.E.det() not in (1, -1) or form.E.inverse() @ s @ form.E != form.blocked:
        problems.append("shear form conjugacy")
    sizes = form.raw_sizes
    if list(sizes) != sorted(sizes, reverse=True) or sum(sizes) != d:
        problems.append("shear form sizes")
    offs = [sum(sizes[:k]) for k in range(len(sizes) + 1)]
    rows = form.blocked.rows
    for a_ in range(len(sizes)):
        for b_ in range(len(sizes)):
            blk = [rows[i][offs[b_] : offs[b_ + 1]] for i in range(offs[a_], offs[a_ + 1])]
            if a_ == b_ and [list(r) for r in blk] != IntMatrix.identity(sizes[a_]).tolist():
                problems.append("shear form diagonal")
            if a_ < b_ and any(x for r in blk for x in r):
                problems.append("shear form upper")
            if a_ == b_ + 1 and lattice_from_generators(blk, sizes[b_]).rank != sizes[a_]:
                problems.append("shear form subdiagonal rank")
    # nilpotent decomposition: direct sum, kernel chain, injectivity of T on higher parts
    t = s.T - IntMatrix.identity(d)
    dec = nilpotent_decomposition(t)
    if IntMatrix.from_columns([c for p in dec.parts for c in p.basis]).det() not in (1, -1):
        problems.append("nilpotent decomposition direct sum")
    power = t
    for j in range(1, dec.order + 1):
        partial = lattice_from_generators([c for p in dec.parts[:j] for c in p.basis], d)
        if partial != lattice_from_generators(kernel_basis(power), d):
            problems.append("nilpotent decomposition kernel chain")
        power = power @ t
    for j in range(1, dec.order):
        if lattice_from_generators([t.apply(c) for c in dec.parts[j].basis], d).rank != dec.parts[j].rank:
            problems.append("nilpotent decomposition injectivity")
    if not fried_stability_check(s, 5):
        problems.append("Fried lattice not stable")
    return problems


@pytest.mark.criterion("C4 spectral suite")
def test_spectral_suite(record_property):
    start = time.perf_counter()
    rng = random.Random(2024)
    failures = []
    orders = set()
    for i in range(SPECTRAL_INSTANCES):
        a = random_quasi_unipotent(rng, rng.randint(1, 5))
        orders.add(order_N(a))
        p = spectral_problems(a)
        if p:
            failures.append((i, p))
    elapsed = time.perf_counter() - start
    record_property(
        "detail",
        f"{SPECTRAL_INSTANCES} matrices (orders N seen: {sorted(orders)}), {len(failures)} failures, "
        f"{elapsed:.1f}s (limit {SPECTRAL_SECONDS:.0f}s)",
    )
    assert not failures, failures[:3]
    assert elapsed < SPECTRAL_SECONDS


@pytest.mark.criterion("C5 positive-relation certificates")
def test_positive_relation_certificates(record_property):
    rng = random.Random(7)
    failures = []
    made = 0
    while made < GTL_INSTANCES:
        d = rng.randint(1, 3)
        gens = [tuple(rng.randint(-5, 5) for _ in range(d)) for _ in range(d + rng.randint(0, 1))]
        gamma = lattice_from_generators(gens, d)
        if gamma.rank < d:
            continue
        w = tuple(rng.randint(-6, 6) for _ in range(d))
        made += 1
        cert = gtl_construct(gamma, w)
        k = cert.shifted
        ok = all(c > 0 for c in cert.coefficients)
        ok = ok and all(sum(c * v[i] for c, v in zip(cert.coefficients, k)) == 0 for i in range(d))
        ok = ok and cert.H.rank == d
        ok = ok and all(member(gamma, g) and kk == tuple(x + y for x, y in zip(g, w)) for g, kk in zip(cert.elements, k))
        if not ok:
            failures.append((gens, w))
    record_property("detail", f"{made} certificates, {len(failures)} failures")
    assert not failures


@pytest.mark.criterion("C6 rotation equivariance")
def test_rotation_equivariance(record_property):
    rng = random.Random(11)
    failures = []
    literal_blocks = 0
    for i in range(EQUIVARIANCE_INSTANCES):
        params = RandomParams(n_states=rng.randint(1, 4), d=rng.randint(1, 2))
        tau = random_instance(1000 + i, params)
        q = rng.randint(1, 3)
        p = tuple(rng.randint(-2, 2) for _ in range(tau.d))
        lhs_map = translate(iterate(tau, q), p)
        expected = affine_image(displacement_data(tau).polytope, q, p)
        if from_untwisted(lhs_map).rotation_polytope() != expected:
            failures.append((i, "cycle-mean route"))
        if lhs_map.base.state_count <= 6:
            literal_blocks += 1
            if displacement_data(lhs_map).polytope != expected:
                failures.append((i, "simple-block route"))
    record_property(
        "detail",
        f"{EQUIVARIANCE_INSTANCES} instances ({literal_blocks} also via simple blocks), {len(failures)} failures",
    )
    assert not failures


@pytest.mark.criterion("C7 negative certificates")
def test_negative_certificates(record_property):
    rng = random.Random(5)
    failures = []
    made = 0
    while made < NEGATIVE_INSTANCES:
        d = rng.randint(2, 4)
        a = random_unimodular(rng, d, moves=8, span=2)
        if is_quasi_unipotent(a):
            continue
        made += 1
        n = rng.randint(1, 3)
        base = Sft.full_shift(n)
        tau = TwistedSkew(base, d, a, {e: tuple(rng.randint(-2, 2) for _ in range(d)) for e in base.edges()})
        v = is_transitive(tau)
        cert = v.certificate.get("spectral", {})
        factor = [int(c) for c in cert.get("non_cyclotomic_factor_coefficients", [])]
        good = v.status == Status.PROVEN_NOT_TRANSITIVE and len(factor) > 1
        # the factor must divide the characteristic polynomial exactly
        if good:
            _, rem = poly_divmod(char_poly(a).coefficients, tuple(factor))
            good = not any(rem)
        esc = escape_check(tau, samples=ESCAPE_STARTS, seed=made)
        checked = sum(1 for s in esc.samples if not s.get("excluded"))
        if not good or not esc.ok or checked != ESCAPE_STARTS:
            failures.append((made, v.status.value, esc.ok))
    record_property("detail", f"{made} expanding twists, {ESCAPE_STARTS} escape starts each, {len(failures)} failures")
    assert not failures


_DETERMINISM_SCRIPT = r"""
import contextlib, hashlib, io, json, sys
from skewdyn.cli import main
out = {}
for argv in json.loads(sys.argv[1]):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    out[" ".join(argv)] = [code, hashlib.sha256(buf.getvalue().encode()).hexdigest()]
print(json.dumps(out, sort_keys=True))
"""


def determinism_commands():
    cmds = []
    for name in BUILTINS:
        cmds += [
            ["analyze", name, "--h1"],
            ["analyze", name, "--h1", "--jobs", "3"],
            ["analyze", name, "--format", "text"],
            ["rotset", name],
            ["rotset", name, "--fried"],
            ["structure", name],
            ["ftp", name],
            ["oracle", name],
            ["example", name],
        ]
    cmds.append(["example"])
    cmds.append(["structure", "--matrix", "[[0,-1],[1,0]]", "--gtl-gamma", "[[2,0],[0,3]]", "--gtl-w", "[1,1]"])
    return cmds


@pytest.mark.criterion("C8 determinism")
def test_determinism(record_property):
    cmds = determinism_commands()
    runs = []
    for hash_seed in ("0", "1", "12345"):
        env = {**os.environ, "PYTHONHASHSEED": hash_seed}
        res = subprocess.run(
            [sys.executable, "-c", _DETERMINISM_SCRIPT, json.dumps(cmds)], env=env, capture_output=True, text=True
        )
        assert res.returncode == 0, res.stderr
        runs.append(json.loads(res.stdout))
    differing = [c for c in runs[0] if len({json.dumps(r[c]) for r in runs}) != 1]
    failed = [c for c in runs[0] if runs[0][c][0] != 0]
    # parallel and sequential analyze reports must match too
    jobs_mismatch = [
        name
        for name in BUILTINS
        if runs[0][f"analyze {name} --h1"][1] != runs[0][f"analyze {name} --h1 --jobs 3"][1]
    ]
    record_property(
        "detail",
        f"{len(cmds)} commands x {len(runs)} runs (varied hash seeds, --jobs 3): "
        f"{len(differing)} differing, {len(jobs_mismatch)} jobs mismatches, {len(failed)} nonzero exits",
    )
    assert not differing and not jobs_mismatch and not failed
