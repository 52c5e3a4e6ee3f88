import random

import pytest
from hypothesis import given, settings, strategies as st

from skewdyn.errors import PreconditionError
from skewdyn.intlat import IntMatrix
from skewdyn.model import builtin
from skewdyn.oracle import (
    BallConfig,
    OracleStatus,
    RandomParams,
    ball_reach,
    escape_check,
    finite_quotient_transitive_exact,
    oracle_transitive,
    random_instance,
    random_unimodular,
)
from skewdyn.sft import Sft, is_irreducible
from skewdyn.skew import Status, TwistedSkew, ftp_bounded, is_transitive_untwisted
from skewdyn.skew.cocycle import PhasedSkew
from skewdyn.spectral import is_quasi_unipotent

from strategies import untwisted_instances

CAT = IntMatrix.of([[2, 1], [1, 1]])


def cat_skew():
    base = Sft.full_shift(2)
    return TwistedSkew(base, 2, CAT, {e: (1, 0) for e in base.edges()})


def test_ball_config_validation():
    with pytest.raises(ValueError):
        BallConfig(radius=2, box=3)
    with pytest.raises(ValueError):
        BallConfig(steps=0)


def test_eta3_reaches_everything():
    v = oracle_transitive(builtin("eta3"))
    assert v.status == OracleStatus.REACHED_ALL


def test_eta1_misses_negative_targets():
    v = oracle_transitive(builtin("eta1"))
    assert v.status == OracleStatus.MISSING
    assert all(t[1][0] <= 0 for _, t in v.missing)


def test_eta2_misses_odd_targets_as_evidence():
    v = oracle_transitive(builtin("eta2"), BallConfig(radius=4, box=2))
    assert v.status == OracleStatus.MISSING
    # steps of size 2 touch the boundary, so the miss is evidence, not proof
    assert not v.exact
    assert all(t[1][0] % 2 for _, t in v.missing)


def test_finite_quotients_of_examples():
    assert finite_quotient_transitive_exact(builtin("eta1"), 3)
    assert not finite_quotient_transitive_exact(builtin("eta2"), 2)
    assert finite_quotient_transitive_exact(builtin("eta2"), 3)


def test_random_instances_are_seeded():
    p = RandomParams(n_states=4, d=2)
    assert random_instance(7, p) == random_instance(7, p)
    assert is_irreducible(random_instance(7, p).base)


def test_escape_check_on_cat_map():
    res = escape_check(cat_skew(), samples=5, seed=1)
    assert res.ok
    assert res.eigenvalue_modulus == pytest.approx((3 + 5**0.5) / 2)
    res = escape_check(cat_skew(), starts=[(0, 0), (5, 3)])
    assert res.ok
    assert any(s.get("excluded") for s in res.samples)


def test_escape_check_needs_expanding_twist():
    with pytest.raises(PreconditionError):
        escape_check(builtin("eta3"))


@settings(max_examples=40, deadline=None)
@given(untwisted_instances(max_states=4), st.integers(1, 6), st.integers(1, 4))
def test_reach_monotone_in_radius_and_steps(tau, r, t):
    zero = (0,) * tau.d
    small = ball_reach(tau, (0, zero), BallConfig(radius=r, steps=t, box=0))
    for cfg in (BallConfig(radius=r + 1, steps=t, box=0), BallConfig(radius=r, steps=t + 1, box=0)):
        assert small.reached <= ball_reach(tau, (0, zero), cfg).reached


@settings(max_examples=40, deadline=None)
@given(untwisted_instances(max_states=4))
def test_oracle_soundness(tau):
    truth = is_transitive_untwisted(tau).status
    v = oracle_transitive(tau, BallConfig(radius=8, box=3))
    if v.status == OracleStatus.REACHED_ALL:
        assert truth != Status.PROVEN_NOT_TRANSITIVE
    if v.status == OracleStatus.MISSING and v.exact:
        assert truth != Status.PROVEN_TRANSITIVE


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4))
def test_exact_quotient_matches_phased_quotient(seed, m):
    tau = random_instance(seed, RandomParams(n_states=3, d=2, twist_kind="general"))
    ok, _ = PhasedSkew(tau).finite_quotient_connected(m)
    assert ok == finite_quotient_transitive_exact(tau, m)


@settings(max_examples=40, deadline=None)
@given(untwisted_instances())
def test_exact_quotient_matches_ftp_checks(tau):
    checked = ftp_bounded(tau, 4).certificate["checked"]
    assert [c["transitive"] for c in checked] == [finite_quotient_transitive_exact(tau, m) for m in range(1, 5)]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_escape_on_random_hyperbolic_twists(seed):
    rng = random.Random(seed)
    a = random_unimodular(rng, 2, moves=8, span=2)
    if is_quasi_unipotent(a):
        return
    base = Sft.full_shift(2)
    tau = TwistedSkew(base, 2, a, {e: (rng.randint(-2, 2), rng.randint(-2, 2)) for e in base.edges()})
    assert escape_check(tau, samples=5, seed=seed).ok
