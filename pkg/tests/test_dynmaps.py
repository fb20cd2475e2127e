"""Map representations, evaluation conventions, conjugation, and family
enumeration."""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from dyncensus.dynmaps import (
    DegreeDropError,
    FamilySpec,
    InvalidSpecError,
    ModelMismatchError,
    PolyMap,
    RationalMap,
    ZeroLambdaError,
    poly_gcd,
    poly_mul,
)
from dyncensus.gfq import make_field

F3 = make_field(3, 1)
F4 = make_field(2, 2)
F5 = make_field(5, 1)
F7 = make_field(7, 1)
F9 = make_field(3, 2)
F11 = make_field(11, 1)


def test_eval_basics():
    ident = PolyMap(F5, (0, 1))
    assert all(ident.eval(x) == x for x in range(5))
    sq1 = PolyMap(F5, (1, 0, 1))
    assert sq1.eval(2) == 0  # 4 + 1 = 5 = 0


def test_dense_and_sparse_agree():
    dense = PolyMap(F11, (0, 1, 0, 0, 0, 0, 0, 3))
    sparse = PolyMap.sparse(F11, [(7, 3), (1, 1)])
    assert dense.coeffs == sparse.coeffs
    for x in range(11):
        assert dense.eval(x) == sparse.eval(x)


@settings(deadline=None, max_examples=100)
@given(st.data())
def test_dense_and_sparse_agree_random(data):
    field = F9
    n_terms = data.draw(st.integers(1, 4))
    exps = data.draw(
        st.lists(st.integers(0, 12), min_size=n_terms, max_size=n_terms, unique=True)
    )
    coeffs = data.draw(
        st.lists(st.integers(1, field.q - 1), min_size=n_terms, max_size=n_terms)
    )
    sparse = PolyMap.sparse(field, zip(exps, coeffs))
    dense = PolyMap(field, sparse.coeffs)
    for x in range(field.q):
        assert sparse.eval(x) == dense.eval(x)


def test_sparse_validation():
    with pytest.raises(InvalidSpecError):
        PolyMap.sparse(F5, [(2, 1), (2, 3)])
    with pytest.raises(InvalidSpecError):
        PolyMap.sparse(F5, [(2, 0)])


def test_rational_eval_conventions():
    # f = X^2, g = X: the affine and projective conventions differ at 0
    f, g = PolyMap(F5, (0, 0, 1)), PolyMap(F5, (0, 1))
    affine = RationalMap(F5, f, g, alpha=3, model="affine")
    assert affine.eval(0) == 3  # unreduced: g(0) = 0 sends 0 to alpha
    projective = RationalMap(F5, f, g, model="projective")
    assert projective.eval(0) == 0  # X^2/X reduces to X
    assert projective.eval(projective.infinity) == projective.infinity

    inv = RationalMap(F5, PolyMap(F5, (1,)), PolyMap(F5, (0, 1)), alpha=0)
    assert inv.eval(0) == 0
    assert inv.eval(2) == 3  # 1/2 = 3 in F_5

    proj = RationalMap(F3, PolyMap(F3, (1, 0, 1)), PolyMap(F3, (0, 1)), model="projective")
    assert proj.eval(proj.infinity) == proj.infinity  # numerator degree wins


def test_rational_infinity_cases():
    # equal degrees: infinity -> ratio of leading coefficients
    r = RationalMap(F5, PolyMap(F5, (1, 3)), PolyMap(F5, (2, 1)), model="projective")
    assert r.eval(5) == 3
    # denominator degree wins: infinity -> 0
    r = RationalMap(F5, PolyMap(F5, (1,)), PolyMap(F5, (0, 1)), model="projective")
    assert r.eval(5) == 0


def test_rational_model_mismatch():
    r = RationalMap(F5, PolyMap(F5, (1,)), PolyMap(F5, (0, 1)), model="affine")
    with pytest.raises(ModelMismatchError):
        r.eval(5)
    with pytest.raises(ModelMismatchError):
        r.infinity


def test_rational_requires_monic_denominator():
    with pytest.raises(InvalidSpecError):
        RationalMap(F5, PolyMap(F5, (1,)), PolyMap(F5, (0, 2)))


def test_conjugate_identity_and_hand_value():
    sq = PolyMap(F5, (0, 0, 1))
    assert sq.conjugate(1, 0).coeffs == sq.coeffs
    assert sq.conjugate(2, 0).coeffs == (0, 0, 2)  # lam^-1 (lam X)^2 = lam X^2
    with pytest.raises(ZeroLambdaError):
        sq.conjugate(0, 1)


@pytest.mark.parametrize("field", [F5, F7])
def test_conjugation_commutes_pointwise(field):
    maps = [
        PolyMap(field, (1, 2, 3)),
        PolyMap(field, (0, 1, 0, 2)),
        PolyMap.sparse(field, [(1, 2), (4, 1)]),
    ]
    for mp in maps:
        for lam in range(1, field.q):
            for mu in range(field.q):
                conj = mp.conjugate(lam, mu)
                for x in range(field.q):
                    phi_x = field.add(field.mul(lam, x), mu)
                    expected = field.mul(field.inv(lam), field.sub(mp.eval(phi_x), mu))
                    assert conj.eval(x) == expected


def test_conjugation_is_group_action():
    mp = PolyMap(F7, (3, 1, 5))
    for l1, m1, l2, m2 in itertools.product((1, 2, 3), (0, 4), (1, 5), (0, 2)):
        twice = mp.conjugate(l1, m1).conjugate(l2, m2)
        lam = F7.mul(l1, l2)
        mu = F7.add(F7.mul(l1, m2), m1)  # phi1(phi2(X))
        assert twice.coeffs == mp.conjugate(lam, mu).coeffs


def test_rational_conjugation_pointwise_projective():
    f, g = PolyMap(F5, (1, 0, 0, 2)), PolyMap(F5, (2, 1))
    r = RationalMap(F5, f, g, model="projective")
    for lam in range(1, 5):
        for mu in range(5):
            conj = r.conjugate(lam, mu)
            assert conj.denom.coeffs[-1] == 1
            assert conj.degrees == r.degrees
            def relabel_point(y):
                # phi extends to the projective line fixing infinity
                if y == r.infinity:
                    return y
                return F5.mul(F5.inv(lam), F5.sub(y, mu))

            for x in range(6):
                phi_x = F5.add(F5.mul(lam, x), mu) if x < 5 else r.infinity
                assert conj.eval(x) == relabel_point(r.eval(phi_x))


def test_rational_conjugation_scaling_affine_model():
    # scaling with alpha = 0 is a true relabeling of the evaluated system
    f, g = PolyMap(F5, (1, 2)), PolyMap(F5, (3, 0, 1))
    r = RationalMap(F5, f, g, alpha=0, model="affine")
    for lam in range(1, 5):
        conj = r.conjugate(lam, 0)
        assert conj.alpha == 0
        for x in range(5):
            assert conj.eval(x) == F5.mul(F5.inv(lam), r.eval(F5.mul(lam, x)))


def test_rational_conjugation_degree_drop():
    # m = n with mu equal to the leading coefficient collapses the numerator
    f, g = PolyMap(F5, (0, 2)), PolyMap(F5, (1, 1))
    r = RationalMap(F5, f, g, model="projective")
    with pytest.raises(DegreeDropError):
        r.conjugate(1, 2)


def test_frobenius_twist():
    mp = PolyMap.sparse(F4, [(2, 2)])  # omega X^2
    twisted = mp.frobenius_twist(1)
    assert twisted.coeffs == (0, 0, 3)  # omega^2 = omega + 1
    assert mp.frobenius_twist(0).coeffs == mp.coeffs
    rational_coeffs = PolyMap(F4, (1, 0, 1))
    assert rational_coeffs.frobenius_twist(1).coeffs == (1, 0, 1)  # F_2 coefficients fixed


def test_frobenius_twist_composes():
    f27 = make_field(3, 3)
    mp = PolyMap(f27, (5, 17, 0, 9))
    for i in range(3):
        for j in range(3):
            twice = mp.frobenius_twist(i).frobenius_twist(j)
            assert twice.coeffs == mp.frobenius_twist((i + j) % 3).coeffs


FAMILY_CASES = [
    (FamilySpec(kind="linear", field=F5), 20),
    (FamilySpec(kind="all-degree-d", field=F3, d=2), 18),
    (FamilySpec(kind="power", field=F7, d=3), 6),
    (FamilySpec(kind="sparse", field=F9, exps=(0, 2)), 64),
    (FamilySpec(kind="linearised", field=F4, n=2), 48),
    (FamilySpec(kind="frobenius-affine", field=F9, norm_filter="norm1"), 36),
    (FamilySpec(kind="frobenius-affine", field=F4, norm_filter="any"), 12),
    (FamilySpec(kind="rational", field=F3, m=2, n=1), 54),
    (FamilySpec(kind="rational", field=F3, m=0, n=2, model="projective"), 18),
]


@pytest.mark.parametrize("spec,size", FAMILY_CASES)
def test_family_sizes_and_uniqueness(spec, size):
    assert spec.size() == size
    members = list(spec.members())
    assert len(members) == size
    assert len({m.encoding() for m in members}) == size
    for i, mp in enumerate(members):
        assert spec.index_of(mp) == i
        assert spec.contains(mp)


def test_frobenius_affine_norm1_size():
    # kernel of the norm has (q-1)/(p-1) elements, paired with q shifts
    spec = FamilySpec(kind="frobenius-affine", field=F9, norm_filter="norm1")
    assert spec.size() == 4 * 9


def test_family_encoding_matches_index_order():
    spec = FamilySpec(kind="all-degree-d", field=F3, d=2)
    encs = [m.encoding() for m in spec.members()]
    assert encs == sorted(encs)
    spec = FamilySpec(kind="rational", field=F3, m=1, n=1)
    encs = [m.encoding() for m in spec.members()]
    assert encs == sorted(encs)


def test_family_validation():
    with pytest.raises(InvalidSpecError):
        FamilySpec(kind="sparse", field=F5, exps=(2, 2))
    with pytest.raises(InvalidSpecError):
        FamilySpec(kind="rational", field=F5, m=0, n=0)
    with pytest.raises(InvalidSpecError):
        FamilySpec(kind="nonsense", field=F5)
    with pytest.raises(InvalidSpecError):
        FamilySpec(kind="rational", field=F5, m=1, n=1, alpha=7)


def test_is_permutation():
    assert PolyMap(F5, (3, 2)).is_permutation()
    assert not PolyMap(F5, (0, 0, 1)).is_permutation()
    # a X^p + b is a bijection for every a != 0
    for field in (F4, F9):
        spec = FamilySpec(kind="frobenius-affine", field=field)
        assert all(mp.is_permutation() for mp in spec.members())


def test_poly_gcd_clears_common_factors():
    # (X+1)(X+2) and (X+1)(X+3) share exactly X+1
    a = poly_mul(F7, (1, 1), (2, 1))
    b = poly_mul(F7, (1, 1), (3, 1))
    assert poly_gcd(F7, a, b) == (1, 1)


def test_map_serialization():
    mp = PolyMap.sparse(F9, [(3, 2), (0, 1)])
    blob = mp.to_json()
    assert blob["coeffs"] == [1, 0, 0, 2]
    assert blob["terms"] == [[0, 1], [3, 2]]
    r = RationalMap(F5, PolyMap(F5, (1, 2)), PolyMap(F5, (0, 1)), alpha=4)
    blob = r.to_json()
    assert blob["denom"] == [0, 1] and blob["alpha"] == 4 and blob["model"] == "affine"
