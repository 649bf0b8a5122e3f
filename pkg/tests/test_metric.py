import random
from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmetric.canonical import CantorPoint, cantor_space, from_prefix, nbullet_of_nat, nbullet_space, unit_interval_space
from cmetric.errors import ContractError, DomainError, ParseError
from cmetric.generators import random_metric
from cmetric.metric import (
    Apartness,
    MapKind,
    MetricMap,
    MetricViolation,
    SeparableSpace,
    SeqPoint,
    as_separable,
    check_map_on,
    covering_index,
    diameter,
    discrete_space,
    dist_to_tb_subset,
    dump_fms,
    kolmogorov_apart,
    load_fms,
    product_binary,
    product_countable,
    tb_witness_product_countable,
    transport_witness_retract,
    validate_matrix,
)
from cmetric.numerics import pow2
from cmetric.reals import Real

UNIT2 = "fms 2\n0 1\n1 0\n"


def exact(x: Real, q, n=20) -> bool:
    lo, hi = x.interval(n)
    return lo <= q <= hi


def test_load_valid_and_singleton():
    fs = load_fms(UNIT2)
    assert fs.size == 2 and fs.dist(0, 1) == 1
    one = load_fms("# comment\nfms 1\n0\n")
    assert one.size == 1 and one.exact_diameter() == 0


def test_triangle_violation_names_the_triple():
    with pytest.raises(MetricViolation) as info:
        load_fms("fms 3\n0 1 5\n1 0 1\n5 1 0\n")
    assert info.value.indices == (0, 1, 2)


@pytest.mark.parametrize(
    "text, err",
    [
        ("", ParseError),
        ("fms x\n", ParseError),
        ("fms 2\n0 1\n", ParseError),
        ("fms 2\n0 1\n1\n", ParseError),
        ("fms 2\n0 1/0\n1 0\n", ParseError),
        ("fms 2\n0 1\n2 0\n", MetricViolation),
        ("fms 2\n1 1\n1 0\n", MetricViolation),
        ("fms 2\n0 -1\n-1 0\n", MetricViolation),
    ],
)
def test_load_rejects(text, err):
    with pytest.raises(err):
        load_fms(text)


@given(st.integers(0, 2**32), st.integers(1, 7))
def test_dump_load_roundtrip(seed, n):
    fs = random_metric(random.Random(seed), n)
    assert load_fms(dump_fms(fs)) == fs


def test_as_separable_shapes():
    one = as_separable(load_fms("fms 1\n0\n"))
    assert all(one.enum(k) == 0 for k in range(10))
    empty = as_separable(validate_matrix([]))
    assert all(empty.enum(k) is None for k in range(10))
    three = as_separable(load_fms("fms 3\n0 1 2\n1 0 1\n2 1 0\n"))
    assert all(three.tb(n) == 3 for n in range(10))


def test_generic_space_laws_on_finite_spaces():
    rng = random.Random(7)
    for _ in range(20):
        fs = random_metric(rng, rng.randint(1, 5))
        X = as_separable(fs)
        pts = range(fs.size)
        for x, y, z in product(pts, repeat=3):
            n = 10
            assert X.dist(x, x).upper(n) == 0
            assert X.dist(x, y).interval(n) == X.dist(y, x).interval(n)
            assert X.dist(x, z).upper(n) <= X.dist(x, y).upper(n) + X.dist(y, z).upper(n) + pow2(-n + 2)
        for x in pts:
            for n in range(6):
                assert covering_index(X, x, n) is not None


def test_binary_product():
    I = unit_interval_space()
    P = product_binary(I, I)
    assert exact(P.dist((F(0), F(0)), (F(1), F(1, 2))), F(1))
    one = as_separable(load_fms("fms 1\n0\n"))
    S = product_binary(one, one)
    assert {S.enum(k) for k in range(10)} == {(0, 0)}
    two = as_separable(load_fms(UNIT2))
    T = product_binary(two, two)
    pts = sorted({T.enum(k) for k in range(T.tb(0))})
    assert pts == [(0, 0), (0, 1), (1, 0), (1, 1)]
    for a, b in product(pts, repeat=2):
        assert exact(T.dist(a, b), F(a != b))


def test_countable_product_distances():
    two = discrete_space(2)
    Pc = product_countable(two, "identity")
    x = from_prefix([0, 0, 0], SeqPoint)
    assert exact(Pc.dist(x, x), F(0))
    y = from_prefix([0, 1, 0], SeqPoint)
    assert exact(Pc.dist(x, y), F(1, 2))
    ones = from_prefix([1], SeqPoint)
    assert exact(Pc.dist(x, ones), F(1))
    # canonical gauge squashes d to d/(1+d)
    Pk = product_countable(two, "canonical")
    assert exact(Pk.dist(x, y), F(1, 4))


def test_identity_gauge_needs_bounded_factors():
    with pytest.raises(DomainError):
        product_countable(as_separable(load_fms("fms 2\n0 3\n3 0\n")), "identity")


def test_product_witness_examples():
    enum_, tb = tb_witness_product_countable([lambda n: 1] * 30, [lambda k: 0] * 30)
    assert [tb(n) for n in range(6)] == [1] * 6
    with pytest.raises(DomainError):
        tb_witness_product_countable([lambda n: 0], [lambda k: None])


def _covers(P, factor_points, n, length):
    """Every point with coordinates from the factor lists is within 2^-n of an entry below tb(n)."""
    net = [P.enum(k) for k in range(P.tb(n))]
    net = [p for p in net if p is not None]
    for coords in product(*factor_points[:length]):
        x = SeqPoint(lambda i, c=coords: c[i] if i < len(c) else 0)
        if not any(P.dist(x, s).upper(n + 2) < pow2(-n) for s in net):
            return False
    return True


def test_product_witnesses_cover_small_products():
    two, three = as_separable(load_fms(UNIT2)), as_separable(load_fms("fms 3\n0 1 2\n1 0 1\n2 1 0\n"))
    B = product_binary(two, three)
    for n in range(7):
        net = [B.enum(k) for k in range(B.tb(n))]
        for a, b in product(range(2), range(3)):
            assert any(B.dist((a, b), s).upper(n + 2) < pow2(-n) for s in net)
    P = product_countable(lambda k: two if k % 2 else three, "canonical")
    for n in range(4):
        assert _covers(P, [range(3), range(2)] * 3, n, 3)


def test_distance_to_subset():
    A = SeparableSpace(
        lambda a, b: abs(a - b), lambda k: Real.const(k % 2), lambda n: 2, name="pair"
    )
    assert exact(dist_to_tb_subset(A, Real.const(F(1, 4))), F(1, 4))
    assert exact(dist_to_tb_subset(A, Real.const(1)), F(0))
    X = as_separable(load_fms("fms 3\n0 1 2\n1 0 1\n2 1 0\n"))
    assert all(exact(dist_to_tb_subset(X, i), F(0)) for i in range(3))


def test_diameter():
    assert diameter(as_separable(validate_matrix([]))).interval(5) == (0, 0)
    assert exact(diameter(as_separable(load_fms(UNIT2))), F(1))
    d = diameter(unit_interval_space())
    for n in range(8):
        assert exact(d, F(1), n)


def test_kolmogorov_apartness():
    X = as_separable(load_fms(UNIT2))
    assert kolmogorov_apart(X, 0, 1, 2) is Apartness.APART
    assert all(kolmogorov_apart(X, 0, 0, n) is Apartness.WITHIN_TOLERANCE for n in range(20))
    tiny = as_separable(validate_matrix([[0, pow2(-10)], [pow2(-10), 0]]))
    assert kolmogorov_apart(tiny, 0, 1, 4) is Apartness.WITHIN_TOLERANCE


def test_transport_witnesses():
    X = as_separable(load_fms("fms 3\n0 1 2\n1 0 1\n2 1 0\n"))
    same = transport_witness_retract(X, MetricMap(lambda x: x, MapKind.NONEXPANSIVE))
    assert [same.enum(k) for k in range(5)] == [X.enum(k) for k in range(5)]
    const = transport_witness_retract(X, MetricMap(lambda x: 1, MapKind.NONEXPANSIVE))
    assert {const.enum(k) for k in range(6)} == {1} and const.tb(4) == X.tb(4)
    with pytest.raises(ContractError):
        transport_witness_retract(X, MetricMap(lambda x: x, MapKind.EPS_DELTA))


def test_nbullet_witness_covers_samples():
    N = nbullet_space()
    samples = [nbullet_of_nat(k) for k in range(8)] + [from_prefix([1], CantorPoint)]
    for n in range(5):
        for x in samples:
            assert covering_index(N, x, n) is not None
    C = cantor_space()
    for n in range(4):
        for bits in product((0, 1), repeat=4):
            assert covering_index(C, from_prefix(list(bits), CantorPoint), n) is not None


def test_check_map_on():
    X = as_separable(load_fms(UNIT2))
    ident = MetricMap(lambda x: x, MapKind.ISOMETRY)
    check_map_on(ident, X, X, [(0, 1)], 10)
    collapse = MetricMap(lambda x: 0, MapKind.ISOMETRY)
    with pytest.raises(ContractError):
        check_map_on(collapse, X, X, [(0, 1)], 10)
