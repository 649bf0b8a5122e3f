"""Seeded property suites behind ``cmetric verify``.

Each suite returns a list of :class:`Check` records. Output depends only on
``(suite, trials, seed)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .canonical import BairePoint, comparison_dist, first_mismatch, from_prefix, generic_sequence_distance
from .completion import embed_dense
from .errors import ContractError
from .generators import (
    feasible_interval,
    random_eventually_constant,
    random_metric,
    random_rational,
    random_targets,
    random_tuple,
)
from .metric import as_separable, dump_fms, load_fms
from .numerics import pair_square, pow2, tuple_enum, tuple_index, unpair_square
from .reals import Real, RealSeq, real_limit
from .representations import decode, encode, hilbert_embed, quotient_build
from .urysohn import (
    enumerate_core,
    extend_core,
    make_tuple,
    u_distance,
    w_distance,
    w_distance_naive,
)

SUITES = ("urysohn", "reals", "spaces", "representations")


@dataclass
class Check:
    name: str
    passed: int = 0
    total: int = 0

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def record(self, good: bool) -> None:
        self.total += 1
        self.passed += bool(good)


def _core_pool() -> list:
    return enumerate_core(2)


# ---------------------------------------------------------------------------
# urysohn


def suite_urysohn(trials: int, rng: random.Random) -> list[Check]:
    tri = Check("triangle on random tuples")
    sym = Check("symmetry on random tuples")
    memo = Check("memoized equals naive")
    selfd = Check("self distance of extensions")
    exact = Check("extension hits target distances")
    pert = Check("perturbation bound")
    zero = Check("zero-distance predecessors")
    pool = _core_pool()
    for _ in range(trials):
        a, b, c = (random_tuple(rng, 3, 3) for _ in range(3))
        tri.record(w_distance(a, b) + w_distance(b, c) >= w_distance(a, c))
        sym.record(w_distance(a, b) == w_distance(b, a))
        small_a, small_b = random_tuple(rng, 2, 3), random_tuple(rng, 2, 3)
        memo.record(w_distance(small_a, small_b) == w_distance_naive(small_a, small_b))

        targets = random_targets(rng, pool, rng.randint(0, 4))
        p = extend_core(targets)
        selfd.record(w_distance(p.rep, p.rep) == 0)
        exact.record(all(u_distance(p, x) == w for x, w in targets))

        if targets:
            others = []
            for x, _ in targets:
                y = rng.choice(pool)
                lo, hi = feasible_interval([q for q, _ in others], [w for _, w in others], y)
                w = lo if hi is None else lo + (hi - lo) * Fraction(rng.randint(0, 3), 3)
                others.append((y, w))
            q = extend_core(others)
            eps = max(u_distance(x, y) for (x, _), (y, _) in zip(targets, others))
            eps2 = max(abs(v - w) for (_, v), (_, w) in zip(targets, others))
            pert.record(u_distance(p, q) <= eps + eps2)

            alt = make_tuple([(_variant(x.rep), w) for x, w in targets])
            zero.record(w_distance(alt, p.rep) == 0)
    return [tri, sym, memo, selfd, exact, pert, zero]


def _variant(t):
    """A different tuple at distance zero from ``t``: entries reversed and one repeated."""
    if not t.entries:
        return make_tuple([(t, Fraction(0))])
    ents = list(reversed(t.entries))
    return make_tuple(ents + [ents[0]])


# ---------------------------------------------------------------------------
# reals


_OPS: dict[str, Callable] = {
    "add": (lambda x, y: x + y, lambda a, b: a + b),
    "sub": (lambda x, y: x - y, lambda a, b: a - b),
    "mul": (lambda x, y: x * y, lambda a, b: a * b),
    "sup": (lambda x, y: x.sup(y), max),
    "inf": (lambda x, y: x.inf(y), min),
    "abs": (lambda x, y: abs(x), lambda a, b: abs(a)),
    "neg": (lambda x, y: -x, lambda a, b: -a),
}


def _opaque(q: Fraction) -> Real:
    """``q`` behind a non-exact oracle (intervals of full allowed width)."""
    return Real(lambda n: (q - pow2(-(n + 1)), q + pow2(-(n + 1))))


def suite_reals(trials: int, rng: random.Random, prec: int = 16) -> list[Check]:
    checks = {name: Check(f"{name} encloses the exact result") for name in _OPS}
    lim = Check("limit of constant sequence")
    for _ in range(trials):
        a = random_rational(rng, 40, 9) * rng.choice((1, -1))
        b = random_rational(rng, 40, 9) * rng.choice((1, -1))
        for name, (real_op, exact_op) in _OPS.items():
            lo, hi = real_op(_opaque(a), _opaque(b)).interval(prec)
            want = exact_op(a, b)
            checks[name].record(lo <= want <= hi and hi - lo <= pow2(-prec))
        x = _opaque(a)
        lo, hi = real_limit(RealSeq(lambda k: x, lambda n: n)).interval(prec)
        lim.record(lo <= a <= hi and hi - lo <= pow2(-prec))
    return list(checks.values()) + [lim]


# ---------------------------------------------------------------------------
# spaces


def suite_spaces(trials: int, rng: random.Random) -> list[Check]:
    prefix_law = Check("comparison metric prefix law")
    fast_path = Check("comparison fast path matches product form")
    pairing = Check("pairing roundtrip")
    metric = Check("generated matrices are metrics")
    for _ in range(trials):
        pa = random_eventually_constant(rng)
        pb = list(pa[: rng.randint(0, len(pa))]) + random_eventually_constant(rng)
        alpha, beta = from_prefix(pa, BairePoint), from_prefix(pb, BairePoint)
        n = rng.randint(0, 14)
        agree = first_mismatch(alpha, beta, n) is None
        d = comparison_dist(alpha, beta)
        # d <= 2^-n is decided exactly: d is 2^-k at the first mismatch k, or 0
        k = first_mismatch(alpha, beta, 64)
        exact_d = Fraction(0) if k is None else pow2(-k)
        prefix_law.record(agree == (exact_d <= pow2(-n)) and d.lower(20) <= exact_d <= d.upper(20))
        g = generic_sequence_distance(alpha, beta)
        fast_path.record(abs(g.midpoint(14) - d.midpoint(14)) <= pow2(-12))

        m = rng.randrange(10_000)
        i, j = pair_square(m)
        ar = rng.randint(1, 3)
        pairing.record(unpair_square(i, j) == m and tuple_index(tuple_enum(ar, m)) == m)
        fs = random_metric(rng, rng.randint(1, 6))
        metric.record(load_fms(dump_fms(fs)) == fs)
    return [prefix_law, fast_path, pairing, metric]


# ---------------------------------------------------------------------------
# representations


def suite_representations(trials: int, rng: random.Random, prec: int = 8) -> list[Check]:
    roundtrip = Check("decode after encode returns the point")
    sandwich = Check("cube embedding sandwich")
    for t in range(trials):
        fs = random_metric(rng, rng.randint(1, 4))
        X = as_separable(fs)
        bq = quotient_build(X)
        i = rng.randrange(fs.size)
        x = embed_dense(i)
        back = decode(bq, encode(bq, x))
        roundtrip.record(bq.space.dist(back, x).upper(prec) <= pow2(-prec))

        H = hilbert_embed(X)
        j = rng.randrange(fs.size)
        d = fs.dist(i, j)
        de = H.distance(H.embed(i), H.embed(j))
        C = H.C
        lo_ok = C * d * d / 32 - pow2(-10) <= de.upper(12)
        hi_ok = de.lower(12) <= C * d + pow2(-10)
        sandwich.record(lo_ok and hi_ok)
    return [roundtrip, sandwich]


_RUNNERS = {
    "urysohn": suite_urysohn,
    "reals": suite_reals,
    "spaces": suite_spaces,
    "representations": suite_representations,
}


def run(suite: str, trials: int, seed: int) -> list[tuple[str, Check]]:
    names = SUITES if suite == "all" else (suite,)
    out = []
    for name in names:
        if name not in _RUNNERS:
            raise ContractError(f"unknown suite {suite!r}")
        rng = random.Random(f"{name}:{seed}")
        for c in _RUNNERS[name](trials, rng):
            out.append((name, c))
    return out


def report(results: list[tuple[str, Check]]) -> str:
    lines = [
        f"{suite}: {c.name}: {c.passed}/{c.total} {'PASS' if c.ok else 'FAIL'}"
        for suite, c in results
    ]
    ok = all(c.ok for _, c in results)
    lines.append("ALL PASS" if ok else "FAILURES PRESENT")
    return "\n".join(lines)

