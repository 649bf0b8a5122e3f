import random
from fractions import Fraction as F
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from spaces import rational_grid
from cmetric.completion import embed_dense
from cmetric.errors import ContractError, DomainError, ParseError
from cmetric.generators import random_metric, random_targets
from cmetric.metric import as_separable, load_fms
from cmetric.numerics import pow2
from cmetric.reals import Real
from cmetric.urysohn import (
    BASE_POINT,
    EMPTY,
    UPoint,
    approx_tuple,
    core_sequence,
    decode,
    embed_located,
    encode,
    enumerate_core,
    extend_core,
    extend_finite_isometry,
    extend_real,
    format_encoding,
    format_tuple,
    is_permissible,
    make_tuple,
    parse_encoding,
    parse_tuple,
    rank,
    tup,
    u_dist,
    u_distance,
    urysohn_space,
    w_distance,
    w_distance_naive,
)

VALUES = [F(0), F(1, 2), F(1), F(2), F(3, 2)]

plain_tuples = st.recursive(
    st.just(()),
    lambda kids: st.lists(st.tuples(kids, st.sampled_from(VALUES)), max_size=3).map(tuple),
    max_leaves=8,
)


def build(p: tuple):
    return make_tuple([(build(c), q) for c, q in p])


def within(x: Real, q, n=12) -> bool:
    lo, hi = x.interval(n)
    return lo - pow2(-n) <= q <= hi + pow2(-n)


# distance ------------------------------------------------------------------


def test_distance_examples():
    assert w_distance(EMPTY, EMPTY) == 0
    assert w_distance(tup(EMPTY, 1), tup(EMPTY, 3)) == 2
    a = tup(EMPTY, 1, EMPTY, 2)
    assert w_distance(a, a) == 1


@given(plain_tuples, plain_tuples)
def test_distance_matches_oracle(a, b):
    assert w_distance(build(a), build(b)) == oracles.dist(a, b)
    assert w_distance_naive(build(a), build(b)) == oracles.dist(a, b)


@given(plain_tuples, plain_tuples, plain_tuples)
def test_protometric_laws(a, b, c):
    x, y, z = build(a), build(b), build(c)
    assert w_distance(x, y) == w_distance(y, x)
    assert w_distance(x, y) + w_distance(y, z) >= w_distance(x, z)


@given(plain_tuples)
def test_distance_sees_only_the_entry_set(a):
    x = build(a)
    for perm in list(permutations(a))[:6]:
        assert w_distance(build(perm), x) == w_distance(x, x)
    if a:
        assert w_distance(build(a + a[:1]), x) == w_distance(x, x)


def test_private_memo_agrees_with_global():
    rng = random.Random(1)
    pool = enumerate_core(2)
    for _ in range(50):
        a, b = rng.choice(pool).rep, rng.choice(pool).rep
        assert w_distance(a, b, {}) == w_distance(a, b)


# permissibility ------------------------------------------------------------


def test_permissibility_examples():
    assert is_permissible(EMPTY)
    for x in VALUES + [F(7, 3)]:
        assert is_permissible(tup(EMPTY, x))
    assert not is_permissible(tup(EMPTY, 1, EMPTY, 2))


@given(plain_tuples)
def test_permissibility_matches_oracle(a):
    assert is_permissible(build(a)) == oracles.permissible(a)


@given(plain_tuples)
def test_permissible_tuples_have_self_distance_zero(a):
    if oracles.permissible(a):
        t = build(a)
        assert w_distance(t, t) == 0
        for c, q in t.entries:
            assert w_distance(t, c) == q


def test_upoint_rejects_non_permissible():
    with pytest.raises(DomainError):
        UPoint(tup(EMPTY, 1, EMPTY, 2))
    p = UPoint(tup(EMPTY, 1))
    assert p == UPoint(tup(EMPTY, 1, EMPTY, 1))
    with pytest.raises(TypeError):
        hash(p)


# encoding and text ----------------------------------------------------------


def test_encoding_example():
    t = tup(tup(EMPTY, 1), 2, EMPTY, F(1, 2))
    assert encode(t) == tuple(oracles.encode(oracles.plain(t)))
    assert [str(v) for v in encode(t)] == "2 2 6 2 1 1 2 0 0 1 2 0 0 1/2".split()
    assert encode(EMPTY) == (0, 0)


@given(plain_tuples)
def test_encoding_roundtrip(a):
    t = build(a)
    assert list(encode(t)) == oracles.encode(a)
    assert decode(encode(t), strict=True) is t
    assert parse_encoding(format_encoding(t)) is t
    assert parse_tuple(format_tuple(t)) is t
    assert t.age == oracles.age(a) and t.length == len(a)


def test_lenient_and_strict_decoding():
    # an empty tuple written with a nonzero age, and an overstated age field
    assert decode([3, 0]) is EMPTY
    with pytest.raises(ParseError):
        decode([3, 0], strict=True)
    loose = [5, 1, 2, 0, 0, 1]
    assert decode(loose) is tup(EMPTY, 1)
    with pytest.raises(ParseError):
        decode(loose, strict=True)


@pytest.mark.parametrize(
    "seq",
    [[1], [0, 1], [1, 1, 2, 0, 0], [1, 1, 3, 0, 0, 1], [1, 1, 2, 0, 0, -1], [1, 2, 2, 0, 0, 1],
     [1, 1, 2, 1, 1, 2, 0, 0, 1, 1], [F(1, 2), 0], [0, 0, 0]],
)
def test_malformed_encodings(seq):
    with pytest.raises(ParseError):
        decode(seq)


@pytest.mark.parametrize("text", ["", "(", "(():)", "(():1", "(():-1)", "(():1,)", "()()", "(x:1)"])
def test_malformed_text(text):
    with pytest.raises(ParseError):
        parse_tuple(text)


def test_text_syntax():
    assert format_tuple(tup(EMPTY, F(5, 2), tup(EMPTY, 1), 2)) == "(():5/2, (():1):2)"
    assert parse_tuple(" ( ( ) : 1/2 ) ") is tup(EMPTY, F(1, 2))


# extension -------------------------------------------------------------------


def test_extend_core_examples():
    p = extend_core([(BASE_POINT, F(5, 2))])
    assert format_tuple(p.rep) == "(():5/2)" and u_distance(p, BASE_POINT) == F(5, 2)
    one = UPoint(tup(EMPTY, 1))
    q = extend_core([(BASE_POINT, 1), (one, 2)])
    assert u_distance(q, BASE_POINT) == 1 and u_distance(q, one) == 2
    assert extend_core([]).rep is EMPTY


def test_extend_core_names_the_bad_pair():
    one = UPoint(tup(EMPTY, 1))
    with pytest.raises(ContractError) as info:
        extend_core([(BASE_POINT, 1), (one, 3)])
    assert info.value.pair == (0, 1)
    with pytest.raises(ContractError):
        extend_core([(BASE_POINT, -1)])
    with pytest.raises(DomainError):
        extend_core([(BASE_POINT, Real.const(1))])


@given(st.integers(0, 2**32), st.integers(0, 4))
def test_extend_core_hits_targets(seed, n):
    targets = random_targets(random.Random(seed), enumerate_core(2), n)
    p = extend_core(targets)
    assert all(u_distance(p, x) == w for x, w in targets)


# enumeration -----------------------------------------------------------------


def test_enumeration_stages():
    assert [format_tuple(p.rep) for p in enumerate_core(0)] == ["()"]
    s1 = [format_tuple(p.rep) for p in enumerate_core(1)]
    assert s1 == ["()", "(():0)", "(():1)"]
    s2 = enumerate_core(2)
    assert len(s2) == 601
    assert {oracles.plain(p.rep) for p in s2} == set(oracles.stage(2))
    assert all(is_permissible(p.rep) for p in s2)


def test_flat_core_sequence_prefix():
    want = [
        "()", "(():0)", "(():1)", "(():1/2)", "(():2)", "(():0, ():0)", "(():1/2, ():1/2)",
        "(():1, ():1)", "(():2, ():2)", "((():0):0)", "((():0):1/2)", "((():0):1)",
    ]
    assert [format_tuple(core_sequence(i).rep) for i in range(12)] == want
    ranks = [rank(core_sequence(i).rep) for i in range(603)]
    assert ranks == sorted(ranks)


def test_urysohn_space_basics():
    U = urysohn_space()
    assert U.enum(0).seq(5).rep is EMPTY
    a, b = U.enum(1), U.enum(2)
    assert within(U.dist(a, b), F(1))


# real targets ------------------------------------------------------------------


def test_approx_tuple_examples():
    assert approx_tuple([], F(1, 8)) is EMPTY
    a = approx_tuple([(embed_dense(BASE_POINT), Real.const(1))], F(1, 8))
    assert format_tuple(a) == "((():0):71/64)"
    (pred, alpha), = a.entries
    assert F(35, 32) < alpha < F(36, 32)
    assert w_distance(pred, EMPTY) == 0


def _real_targets(rng, n):
    pool = enumerate_core(2)
    rational = random_targets(rng, pool, n, steps=8)
    return [(embed_dense(x), Real.const(w)) for x, w in rational], rational


@given(st.integers(0, 2**32), st.integers(1, 3), st.sampled_from([F(1, 2), F(1, 8), F(1, 64)]))
def test_approx_tuple_guarantees(seed, n, eps):
    targets, rational = _real_targets(random.Random(seed), n)
    a = approx_tuple(targets, eps)
    assert is_permissible(a)
    for (pred, alpha), (x, w) in zip(a.entries, rational):
        assert w_distance(pred, x.rep) <= eps
        assert abs(alpha - w) <= eps


def test_approx_tuple_rejects_bad_targets():
    one = embed_dense(UPoint(tup(EMPTY, 1)))
    with pytest.raises(ContractError):
        approx_tuple([(embed_dense(BASE_POINT), Real.const(1)), (one, Real.const(5))], F(1, 8))
    with pytest.raises(DomainError):
        approx_tuple([], 0)


def test_extend_real_matches_extend_core():
    rng = random.Random(5)
    for _ in range(5):
        targets, rational = _real_targets(rng, 2)
        p = extend_real(targets)
        q = extend_core(rational)
        assert u_dist(p, q).upper(10) <= pow2(-9)
    assert u_dist(extend_real([]), BASE_POINT).upper(10) <= pow2(-9)
    x = UPoint(tup(EMPTY, 2))
    assert u_dist(extend_real([(embed_dense(x), Real.const(0))]), x).upper(8) <= pow2(-7)


def test_extend_real_with_irrational_distance():
    third = Real(lambda n: (F(1, 3) - pow2(-n - 1), F(1, 3) + pow2(-n - 1)))
    p = extend_real([(embed_dense(BASE_POINT), third)])
    assert within(u_dist(p, BASE_POINT), F(1, 3), 10)


# isometric embeddings -----------------------------------------------------------


def test_embedding_two_point_space():
    f = extend_finite_isometry(as_separable(load_fms("fms 2\n0 1\n1 0\n")), [])
    assert f.image(0).rep is EMPTY
    assert u_distance(f.image(0), f.image(1)) == 1
    assert f(1) is f.image(1)


def test_embedding_respects_pins():
    X = as_separable(load_fms("fms 3\n0 1 2\n1 0 1\n2 1 0\n"))
    pin = UPoint(tup(EMPTY, 3))
    f = extend_finite_isometry(X, [(0, pin)])
    assert f.image(0) == pin
    with pytest.raises(ContractError):
        extend_finite_isometry(X, [(0, BASE_POINT), (2, UPoint(tup(EMPTY, 1)))])


def test_six_point_embedding_with_two_pins():
    rng = random.Random(11)
    fs = random_metric(rng, 6)
    g = extend_finite_isometry(as_separable(fs), [])
    pins = [(2, g.image(2)), (4, g.image(4))]
    f = extend_finite_isometry(as_separable(fs), pins)
    imgs = [f.image(i) for i in range(6)]
    for i in range(6):
        for j in range(6):
            assert u_distance(imgs[i], imgs[j]) == fs.dist(i, j)


def test_embedding_of_a_real_valued_space():
    X = rational_grid()
    f = extend_finite_isometry(X, [], limit=16)
    for i in range(5):
        for j in range(5):
            assert u_distance(f.image(i), f.image(j)) == abs(X.enum(i) - X.enum(j))


def test_located_embedding_examples():
    f, l = embed_located(as_separable(load_fms("fms 1\n0\n")))
    assert u_distance(f.image(0), BASE_POINT) == 0
    for i in range(5):
        assert l(i).interval(5) == (u_distance(BASE_POINT, core_sequence(i)),) * 2
    f2, _ = embed_located(as_separable(load_fms("fms 2\n0 1\n1 0\n")))
    assert u_distance(f2.image(0), f2.image(1)) == 1


def test_located_embedding_stabilizes():
    fs = random_metric(random.Random(2), 4)
    f, l = embed_located(as_separable(fs))
    for i in range(6):
        li = l(i).upper(20)
        for n in range(i + 1, i + 5):
            assert u_distance(f.image(n), core_sequence(i)) >= li
