import pytest
from hypothesis import given, settings, strategies as st

from skewdyn.errors import NotInvertibleError, RankDeficientError, SpectralRadiusError, SpectrumError
from skewdyn.intlat import (
    IntMatrix,
    contains,
    direct_sum_is_full,
    image_lattice,
    is_pure,
    kernel_basis,
    lattice_from_generators,
    member,
)
from skewdyn.spectral import (
    char_poly,
    cyclotomic,
    cyclotomic_split,
    fried_lattice,
    fried_stability_check,
    gtl_construct,
    is_quasi_unipotent,
    nilpotent_decomposition,
    order_N,
    poly_mul,
    shear_form,
    spectral_witness,
    totient,
    unipotent_poly,
)

from strategies import quasi_unipotent, unimodular, unipotent_conjugates, vectors

CAT = IntMatrix.of([[2, 1], [1, 1]])
ROT = IntMatrix.of([[0, -1], [1, 0]])
SHEAR = IntMatrix.of([[1, 1], [0, 1]])


def is_unipotent(a):
    return char_poly(a).coefficients == unipotent_poly(a.nrows)


def test_char_poly_is_monic_of_full_degree():
    p = char_poly(CAT)
    assert p.degree == 2
    assert p.coefficients[0] == 1
    assert p.coefficients == (1, -3, 1)


def test_cyclotomic_and_totient_agree():
    for m in range(1, 30):
        assert len(cyclotomic(m)) - 1 == totient(m)
    assert poly_mul(cyclotomic(1), cyclotomic(2)) == (1, 0, -1)


def test_shear_has_order_one():
    assert is_quasi_unipotent(SHEAR)
    assert order_N(SHEAR) == 1


def test_rotation_has_order_four():
    assert is_quasi_unipotent(ROT)
    assert order_N(ROT) == 4


def test_cat_map_is_not_quasi_unipotent():
    assert not is_quasi_unipotent(CAT)
    with pytest.raises(SpectralRadiusError):
        order_N(CAT)
    w = spectral_witness(CAT)
    assert w.non_cyclotomic_factor == (1, -3, 1)
    assert w.spectral_radius == pytest.approx((3 + 5**0.5) / 2)


def test_singular_matrix_rejected():
    with pytest.raises(NotInvertibleError):
        is_quasi_unipotent(IntMatrix.of([[1, 2], [2, 4]]))


def test_shear_form_needs_unit_spectrum():
    with pytest.raises(SpectrumError):
        shear_form(ROT)


def test_cyclotomic_split_of_rotation():
    factors, cofactor = cyclotomic_split(char_poly(ROT).coefficients)
    assert factors == [(4, 1)]
    assert cofactor == (1,)


def test_positive_relation_worked_case():
    gamma = lattice_from_generators([(2, 0), (0, 3)], 2)
    cert = gtl_construct(gamma, (1, 1))
    cert.verify()
    assert cert.params["q"] == 6 and cert.params["p"] == 1
    assert cert.coefficients == (5, 5, 3, 5)
    assert cert.H == lattice_from_generators([(5, 0), (0, 5)], 2)


def test_positive_relation_needs_full_rank():
    with pytest.raises(RankDeficientError):
        gtl_construct(lattice_from_generators([(1, 0)], 2), (0, 1))


def test_positive_relation_with_w_in_gamma():
    gamma = lattice_from_generators([(2, 0), (0, 2)], 2)
    cert = gtl_construct(gamma, (2, 4))
    assert cert.H == gamma


def test_fried_lattice_of_shear():
    assert fried_lattice(SHEAR) == lattice_from_generators([(1, 0)], 2)
    assert fried_lattice(IntMatrix.identity(3)).rank == 0


# -- properties --------------------------------------------------------------


def check_order_minimal(a):
    n = order_N(a)
    assert is_unipotent(a**n)
    for m in range(1, n):
        if n % m == 0:
            assert not is_unipotent(a**m)


def check_nilpotent_parts(t):
    dec = nilpotent_decomposition(t)
    d = t.nrows
    assert all(p.rank > 0 for p in dec.parts)
    assert direct_sum_is_full(list(dec.parts))
    power = t
    for j in range(1, dec.order + 1):
        partial = lattice_from_generators([c for p in dec.parts[:j] for c in p.basis], d)
        ker = lattice_from_generators(kernel_basis(power), d)
        assert partial == ker
        power = power @ t
    for j in range(1, dec.order):
        images = [t.apply(c) for c in dec.parts[j].basis]
        assert lattice_from_generators(images, d).rank == dec.parts[j].rank


def check_shear_blocks(s):
    form = shear_form(s)
    e = form.E
    assert e.det() in (1, -1)
    assert e.inverse() @ s @ e == form.blocked
    sizes = list(form.block_sizes)
    assert sizes == sorted(sizes, reverse=True)
    assert sorted(form.raw_sizes, reverse=True) == sizes
    offs = [sum(form.raw_sizes[:k]) for k in range(len(form.raw_sizes) + 1)]
    b = form.blocked.rows
    for i in range(s.nrows):
        for j in range(s.ncols):
            bi = max(k for k in range(len(offs) - 1) if offs[k] <= i)
            bj = max(k for k in range(len(offs) - 1) if offs[k] <= j)
            if bi == bj:
                assert b[i][j] == int(i == j)
            elif bi < bj:
                assert b[i][j] == 0
    for a in range(1, len(form.raw_sizes)):
        sub = IntMatrix.of([list(b[i][offs[a - 1] : offs[a]]) for i in range(offs[a], offs[a + 1])])
        assert image_lattice(sub.T).rank == form.raw_sizes[a]


def check_fried(a):
    f = fried_lattice(a)
    assert is_pure(f)
    if f.rank:
        assert lattice_from_generators([a.apply(c) for c in f.basis], a.nrows) == f
    eye = IntMatrix.identity(a.nrows)
    for col in (a - eye).columns():
        assert member(f, col)


@settings(max_examples=60, deadline=None)
@given(quasi_unipotent())
def test_quasi_unipotent_order_is_minimal(a):
    assert is_quasi_unipotent(a)
    check_order_minimal(a)


@settings(max_examples=60, deadline=None)
@given(unipotent_conjugates())
def test_unipotent_conjugate_shear_form(s):
    assert is_quasi_unipotent(s)
    assert order_N(s) == 1
    check_shear_blocks(s)


@settings(max_examples=60, deadline=None)
@given(unipotent_conjugates())
def test_nilpotent_decomposition_properties(s):
    check_nilpotent_parts(s.T - IntMatrix.identity(s.nrows))


@settings(max_examples=60, deadline=None)
@given(quasi_unipotent())
def test_fried_lattice_pure_invariant(a):
    check_fried(a)
    n = order_N(a)
    assert fried_stability_check(a**n, 5)


@settings(max_examples=60, deadline=None)
@given(unimodular(max_d=4))
def test_quasi_unipotence_matches_cyclotomic_split(a):
    _, cofactor = cyclotomic_split(char_poly(a).coefficients)
    assert is_quasi_unipotent(a) == (cofactor == (1,))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda d: st.tuples(st.just(d), st.lists(vectors(d, -4, 4), min_size=d, max_size=d + 1), vectors(d, -6, 6))))
def test_positive_relation_certificate_properties(args):
    d, gens, w = args
    gamma = lattice_from_generators(gens, d)
    if gamma.rank < d:
        with pytest.raises(RankDeficientError):
            gtl_construct(gamma, w)
        return
    cert = gtl_construct(gamma, w)
    k = cert.shifted
    assert all(c > 0 for c in cert.coefficients)
    assert all(sum(c * v[i] for c, v in zip(cert.coefficients, k)) == 0 for i in range(d))
    assert cert.H.rank == d
    for g in cert.elements:
        assert member(gamma, g)
    for vec, combo in cert.witnesses:
        assert all(c >= 0 for c in combo)
        assert tuple(sum(c * v[i] for c, v in zip(combo, k)) for i in range(d)) == vec
    witnessed = lattice_from_generators([vec for vec, _ in cert.witnesses], d)
    assert contains(witnessed, cert.H)
