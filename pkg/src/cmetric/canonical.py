"""Sequence spaces under the comparison metric, the unit interval, and the Hilbert cube.

The comparison metric puts two sequences at distance ``2^-k`` when ``k`` is the
first index where they differ (0 when they never do). Points of the Baire
space, Cantor space and of the decreasing binary sequences (``N•``, natural
numbers plus a point at infinity) are all memoized term functions.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Optional

from .completion import CompletionPoint
from .errors import DomainError, InvariantError, ParseError
from .metric import (
    Gauge,
    MapKind,
    MetricMap,
    SeparableSpace,
    SeqPoint,
    discrete_space,
    product_countable,
    product_distance,
    transport_witness_retract,
)
from .numerics import pow2
from .reals import Real

# ---------------------------------------------------------------------------
# points


class BairePoint(SeqPoint):
    __slots__ = ()


class CantorPoint(SeqPoint):
    __slots__ = ()

    def __call__(self, n: int):
        v = super().__call__(n)
        if v not in (0, 1):
            raise DomainError(f"Cantor point has term {v!r} at index {n}")
        return v


class NBulletPoint(SeqPoint):
    """A decreasing binary sequence; ``n`` is ``n`` ones then zeros, infinity is all ones.

    Monotonicity is checked on every queried prefix.
    """

    __slots__ = ("_checked",)

    def __init__(self, term):
        super().__init__(term)
        self._checked = 0  # prefix length verified so far

    def __call__(self, n: int):
        while self._checked <= n:
            i = self._checked
            v = super().__call__(i)
            if v not in (0, 1):
                raise InvariantError(f"N• point has term {v!r} at index {i}")
            if i > 0 and v > super().__call__(i - 1):
                raise InvariantError(f"N• point increases at index {i}")
            self._checked += 1
        return super().__call__(n)


def from_prefix(prefix: list[int], cls=BairePoint, tail: Optional[int] = None) -> SeqPoint:
    """Sequence with the given prefix, continued by ``tail`` (default: last value)."""
    if not prefix and tail is None:
        raise DomainError("empty prefix needs an explicit tail value")
    vals = list(prefix)
    t = vals[-1] if tail is None else tail
    m = len(vals)
    return cls(lambda n: vals[n] if n < m else t)


_LITERAL_RE = re.compile(r"^\s*\d+(\s*,\s*\d+)*\s*(,\s*\*)?\s*$")


def parse_sequence(text: str, cls=BairePoint) -> SeqPoint:
    """Parse ``1,1,0,*``: a prefix whose last value repeats forever.

    Without a trailing ``*`` the sequence continues with zeros.
    """
    if not _LITERAL_RE.match(text):
        raise ParseError(f"not a sequence literal: {text!r}")
    parts = [p.strip() for p in text.split(",")]
    if parts[-1] == "*":
        return from_prefix([int(p) for p in parts[:-1]], cls)
    return from_prefix([int(p) for p in parts], cls, tail=0)


def format_sequence(alpha, length: int) -> str:
    """Literal for the first ``length`` terms, with a constant tail folded into ``,*``."""
    terms = [alpha(i) for i in range(length)]
    if not terms:
        return "*"
    cut = len(terms)
    while cut > 1 and terms[cut - 2] == terms[-1]:
        cut -= 1
    return ",".join(str(t) for t in terms[:cut]) + ",*"


# ---------------------------------------------------------------------------
# comparison metric


def first_mismatch(alpha, beta, upto: int) -> Optional[int]:
    for k in range(upto):
        if alpha(k) != beta(k):
            return k
    return None


def comparison_dist(alpha, beta) -> Real:
    def oracle(n):
        k = first_mismatch(alpha, beta, n + 2)
        if k is None:
            return Fraction(0), pow2(-(n + 1))
        v = pow2(-k)
        return v, v

    return Real(oracle)


# ---------------------------------------------------------------------------
# retractions and N• structure


def retract_baire_cantor(alpha) -> CantorPoint:
    return CantorPoint(lambda n: 0 if alpha(n) == 0 else 1)


def retract_cantor_nbullet(alpha) -> NBulletPoint:
    """Prefix minimum: stays 1 until the first 0 of ``alpha``."""
    state = {"zero_at": None, "scanned": 0}

    def term(n):
        while state["zero_at"] is None and state["scanned"] <= n:
            if alpha(state["scanned"]) == 0:
                state["zero_at"] = state["scanned"]
            state["scanned"] += 1
        z = state["zero_at"]
        return 0 if z is not None and n >= z else 1

    return NBulletPoint(term)


def nbullet_of_nat(n: int) -> NBulletPoint:
    if n < 0:
        raise DomainError("negative natural")
    return NBulletPoint(lambda k: 1 if k < n else 0)


INFINITY = NBulletPoint(lambda k: 1)


def nbullet_value(t, limit: int) -> Optional[int]:
    """The natural ``t`` encodes, or ``None`` if no zero shows up before ``limit``."""
    for k in range(limit):
        if t(k) == 0:
            return k
    return None


def nbullet_succ(t) -> NBulletPoint:
    return NBulletPoint(lambda k: 1 if k == 0 else t(k - 1))


def nbullet_pred(t) -> NBulletPoint:
    return NBulletPoint(lambda k: t(k + 1))


def nbullet_lattice(op: str, t, u) -> NBulletPoint:
    if op == "sup":
        return NBulletPoint(lambda k: max(t(k), u(k)))
    if op == "inf":
        return NBulletPoint(lambda k: min(t(k), u(k)))
    raise DomainError(f"unknown lattice operation {op!r}")


def shift(m: int, alpha) -> SeqPoint:
    if m < 0:
        raise DomainError("negative shift")
    cls = type(alpha) if isinstance(alpha, SeqPoint) else BairePoint
    return cls(lambda n: alpha(n + m))


def ball_retract(kind: str, beta, t) -> MetricMap:
    """Nonexpansive retraction onto the closed ball of radius ``2^-t`` around ``beta``.

    Terms below ``t`` are copied from ``beta``. For ``N•`` the later terms are
    capped by ``min(beta_k : k < t)`` so the result stays decreasing.
    """
    if kind not in ("baire", "cantor", "nbullet"):
        raise DomainError(f"unknown sequence space {kind!r}")
    cls = {"baire": BairePoint, "cantor": CantorPoint, "nbullet": NBulletPoint}[kind]

    def apply(alpha):
        def term(n):
            if t(n) == 1:  # n < t
                return beta(n)
            if kind != "nbullet":
                return alpha(n)
            cap = min((beta(k) for k in range(n) if t(k) == 1), default=None)
            return alpha(n) if cap is None else min(alpha(n), cap)

        return cls(term)

    return MetricMap(apply, MapKind.NONEXPANSIVE)


def nbullet_extend(seq: Callable[[int], CompletionPoint], t) -> CompletionPoint:
    """Value at ``t`` of the map ``N• -> Z`` determined by a fast-Cauchy sequence in ``Z``.

    Term ``n`` of the result is ``seq(min(n+2, t)).seq(n+2)``; it lies within
    ``2^-(n+1)`` of the limit ``lim_k seq(min(k, t))``.
    """

    def term(n):
        k = nbullet_value(t, n + 2)
        idx = n + 2 if k is None else k
        return seq(idx).seq(n + 2)

    return CompletionPoint(term)


# ---------------------------------------------------------------------------
# spaces


def interval_space(lo=0, hi=1) -> SeparableSpace:
    """``[lo, hi]`` with points as Reals; enumeration walks dyadic grids of growing depth.

    Grid ``n`` has spacing ``(hi-lo)/2^n`` and ``2^n + 1`` points; the first
    ``2^(n+1) + n`` entries are grids ``0..n``.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if hi <= lo:
        raise DomainError("empty or degenerate interval")
    width = hi - lo
    cache: dict[int, Real] = {}

    def grid_point(n, k):
        return lo + width * Fraction(k, 1 << n)

    def enum_(idx):
        if idx in cache:
            return cache[idx]
        n = 0
        off = idx
        while off >= (1 << n) + 1:
            off -= (1 << n) + 1
            n += 1
        r = Real.const(grid_point(n, off))
        cache[idx] = r
        return r

    # grids needed for cover radius 2^-m
    def depth(m):
        d = 0
        while width / (1 << d) >= pow2(-m) * 2:
            d += 1
        return d

    def tb(m):
        d = depth(m)
        return (1 << (d + 1)) + d

    def net(m):
        d = depth(m)
        return [Real.const(grid_point(d, k)) for k in range((1 << d) + 1)]

    def dist(x, y):
        return abs(_as_real(x) - _as_real(y)).clamp_nonneg()

    def contains(x):
        a, b = _as_real(x).interval(4)
        if a < lo - pow2(-4) or b > hi + pow2(-4):
            raise DomainError(f"point [{a}, {b}] escapes [{lo}, {hi}]")

    return SeparableSpace(
        dist, enum_, tb, width, False, f"interval[{lo},{hi}]", contains, net
    )


def _as_real(x) -> Real:
    if isinstance(x, Real):
        return x
    if isinstance(x, (int, Fraction)):
        return Real.const(x)
    raise DomainError(f"not a real number: {x!r}")


def unit_interval_space() -> SeparableSpace:
    return interval_space(0, 1)


def hilbert_cube() -> SeparableSpace:
    unit = unit_interval_space()
    return product_countable(lambda _k: unit, Gauge.IDENTITY, "hilbert-cube")


def cube_point(values: Callable[[int], object]) -> SeqPoint:
    return SeqPoint(lambda n: _as_real(values(n)))


def _sequence_space(factor: SeparableSpace, cls, name: str) -> SeparableSpace:
    generic = product_countable(lambda _k: factor, Gauge.IDENTITY, name)
    inner_enum = generic.enum

    def enum_(k):
        p = inner_enum(k)
        return None if p is None else cls(p)

    return SeparableSpace(
        comparison_dist, enum_, generic.tb, Fraction(1), True, name
    )


def baire_space() -> SeparableSpace:
    return _sequence_space(discrete_space(None), BairePoint, "baire")


def cantor_space() -> SeparableSpace:
    return _sequence_space(discrete_space(2), CantorPoint, "cantor")


def nbullet_space() -> SeparableSpace:
    r = MetricMap(retract_cantor_nbullet, MapKind.NONEXPANSIVE)
    return transport_witness_retract(cantor_space(), r, "tb", "nbullet")


def generic_sequence_distance(alpha, beta) -> Real:
    """The comparison metric evaluated as a weighted product of discrete metrics."""
    disc = discrete_space(None)
    return product_distance(lambda _k: disc, Gauge.IDENTITY, alpha, beta)


def baire_limit(p: CompletionPoint) -> BairePoint:
    """Limit of a fast-Cauchy sequence of Baire points.

    Terms ``n+1`` and later agree below index ``n+1``, so index ``n`` is read off
    term ``n+1``.
    """
    return BairePoint(lambda n: p.seq(n + 1)(n))

