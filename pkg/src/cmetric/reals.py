"""Effective real numbers as rational interval oracles.

A :class:`Real` answers a precision ``n`` with a rational interval ``(lo, hi)`` of
width at most ``2^-n`` that contains the number. Answers at different precisions
need not nest, but they always intersect (they share the true value).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import DomainError, InvariantError, WitnessError
from .numerics import ceil_log2, pow2

Interval = tuple[Fraction, Fraction]

# Endpoints with denominators wider than this many bits past the requested
# precision are rounded outward to a dyadic grid.
_ROUND_SLACK_BITS = 8


def _round_out(lo: Fraction, hi: Fraction, n: int) -> Interval:
    """Round outward to multiples of 2^-(n+2) when endpoints got unwieldy."""
    limit = n + 2 + _ROUND_SLACK_BITS
    if lo.denominator.bit_length() <= limit and hi.denominator.bit_length() <= limit:
        return lo, hi
    scale = 1 << (n + 2)
    lo_r = Fraction((lo.numerator * scale) // lo.denominator, scale)
    hi_r = Fraction(-((-hi.numerator * scale) // hi.denominator), scale)
    return lo_r, hi_r


class Real:
    """A real number given by a precision-indexed interval oracle.

    The oracle is called at most once per precision; answers are cached so
    repeated queries are deterministic. The cache is a plain dict: concurrent
    readers are safe and a racing duplicate write stores an equal answer.
    """

    __slots__ = ("_oracle", "_cache", "label")

    def __init__(self, oracle: Callable[[int], Interval], label: str | None = None):
        self._oracle = oracle
        self._cache: dict[int, Interval] = {}
        self.label = label

    @classmethod
    def const(cls, q) -> Real:
        q = Fraction(q)
        return cls(lambda n: (q, q), label=str(q))

    def interval(self, n: int) -> Interval:
        if n < 0:
            n = 0
        hit = self._cache.get(n)
        if hit is not None:
            return hit
        lo, hi = self._oracle(n)
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi or hi - lo > pow2(-n):
            raise InvariantError(
                f"oracle {self.label or '?'} returned [{lo}, {hi}] at precision {n}"
            )
        self._cache[n] = (lo, hi)
        return lo, hi

    def lower(self, n: int) -> Fraction:
        return self.interval(n)[0]

    def upper(self, n: int) -> Fraction:
        return self.interval(n)[1]

    def midpoint(self, n: int) -> Fraction:
        lo, hi = self.interval(n)
        return (lo + hi) / 2

    def __repr__(self) -> str:
        lo, hi = self.interval(20)
        return f"Real([{float(lo):.6g}, {float(hi):.6g}])"

    # arithmetic -----------------------------------------------------------

    def __add__(self, other) -> Real:
        return real_add(self, _lift(other))

    __radd__ = __add__

    def __neg__(self) -> Real:
        return real_neg(self)

    def __sub__(self, other) -> Real:
        return real_add(self, real_neg(_lift(other)))

    def __rsub__(self, other) -> Real:
        return real_add(_lift(other), real_neg(self))

    def __mul__(self, other) -> Real:
        if isinstance(other, (int, Fraction)):
            return scale(self, Fraction(other))
        return real_mul(self, other)

    __rmul__ = __mul__

    def __abs__(self) -> Real:
        return real_lattice("abs", self)

    def sup(self, other) -> Real:
        return real_lattice("sup", self, _lift(other))

    def inf(self, other) -> Real:
        return real_lattice("inf", self, _lift(other))

    def clamp_nonneg(self) -> Real:
        """Same number with negative lower endpoints raised to 0; only for x >= 0."""
        x = self
        return Real(lambda n: (max(x.lower(n), Fraction(0)), max(x.upper(n), Fraction(0))))


def _lift(v) -> Real:
    if isinstance(v, Real):
        return v
    if isinstance(v, (int, Fraction)):
        return Real.const(v)
    raise TypeError(f"cannot use {type(v).__name__} as a Real")


def real_of_rational(q) -> Real:
    return Real.const(q)


ZERO = Real.const(0)
ONE = Real.const(1)


def real_add(x: Real, y: Real) -> Real:
    def oracle(n):
        xl, xh = x.interval(n + 2)
        yl, yh = y.interval(n + 2)
        return _round_out(xl + yl, xh + yh, n)

    return Real(oracle)


def real_neg(x: Real) -> Real:
    def oracle(n):
        lo, hi = x.interval(n)
        return -hi, -lo

    return Real(oracle)


def scale(x: Real, c: Fraction) -> Real:
    """Multiply by an exact rational."""
    if c == 0:
        return ZERO
    extra = max(0, ceil_log2(abs(c)))

    def oracle(n):
        lo, hi = x.interval(n + extra)
        a, b = lo * c, hi * c
        return (a, b) if a <= b else (b, a)

    return Real(oracle)


def real_mul(x: Real, y: Real) -> Real:
    """Product; inputs are queried at n plus the bits needed for the magnitudes."""
    state: dict[str, int] = {}

    def extra_bits() -> int:
        if "k" not in state:
            xl, xh = x.interval(0)
            yl, yh = y.interval(0)
            bound = max(abs(xl), abs(xh)) + max(abs(yl), abs(yh)) + 3
            state["k"] = ceil_log2(bound)
        return state["k"]

    def oracle(n):
        k = n + 1 + extra_bits()
        xl, xh = x.interval(k)
        yl, yh = y.interval(k)
        products = (xl * yl, xl * yh, xh * yl, xh * yh)
        return _round_out(min(products), max(products), n)

    return Real(oracle)


def real_lattice(op: str, x: Real, y: Real | None = None) -> Real:
    if op == "abs":
        return real_lattice("sup", x, real_neg(x))
    if y is None:
        raise DomainError(f"lattice operation {op!r} needs two operands")
    if op == "sup":
        pick = max
    elif op == "inf":
        pick = min
    else:
        raise DomainError(f"unknown lattice operation {op!r}")

    def oracle(n):
        xl, xh = x.interval(n)
        yl, yh = y.interval(n)
        return pick(xl, yl), pick(xh, yh)

    return Real(oracle)


def real_sup(xs) -> Real:
    xs = list(xs)
    if not xs:
        raise DomainError("supremum of an empty family")
    out = xs[0]
    for x in xs[1:]:
        out = real_lattice("sup", out, x)
    return out


def real_inf(xs) -> Real:
    xs = list(xs)
    if not xs:
        raise DomainError("infimum of an empty family")
    out = xs[0]
    for x in xs[1:]:
        out = real_lattice("inf", out, x)
    return out


@dataclass(frozen=True)
class ApartnessWitness:
    """Claims |x| > 2^-n for the real it is attached to."""

    n: int


def _certifies(x: Real, n: int) -> bool:
    lo, hi = x.interval(n + 2)
    eps = pow2(-n)
    return lo > eps or hi < -eps


def real_recip(x: Real, w: ApartnessWitness) -> Real:
    if w.n < 0 or not _certifies(x, w.n):
        raise WitnessError(f"witness n={w.n} does not certify |x| > 2^-{w.n}")
    m = w.n

    def oracle(n):
        lo, hi = x.interval(n + 2 * m + 2)
        if lo <= 0 <= hi:
            raise InvariantError("reciprocal interval straddles zero despite witness")
        return 1 / hi, 1 / lo

    return Real(oracle)


def find_apartness(x: Real, max_n: int) -> ApartnessWitness | None:
    for n in range(max_n + 1):
        if _certifies(x, n):
            return ApartnessWitness(n)
    return None


class Cmp(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    WITHIN = "within"


def approx_compare(x: Real, y: Real, n: int) -> Cmp:
    """LESS/GREATER are certain; WITHIN means |x - y| < 2^-(n-1).

    Gaps between the two intervals that are not wider than 2^-(n+2) count as
    WITHIN, so the answer depends only on resolution, not on oracle luck.
    """
    xl, xh = x.interval(n + 2)
    yl, yh = y.interval(n + 2)
    gap = pow2(-(n + 2))
    if yl - xh > gap:
        return Cmp.LESS
    if xl - yh > gap:
        return Cmp.GREATER
    return Cmp.WITHIN


@dataclass(frozen=True)
class RealSeq:
    """Cauchy sequence: |term(i) - term(j)| < 2^-n whenever i, j >= modulus(n)."""

    term: Callable[[int], Real]
    modulus: Callable[[int], int]


def real_limit(s: RealSeq) -> Real:
    def oracle(n):
        lo, hi = s.term(s.modulus(n + 2)).interval(n + 2)
        pad = pow2(-(n + 2))
        return lo - pad, hi + pad

    return Real(oracle)


def _decimal_digits_for(p: int) -> int:
    # ceil(p * log10(2)), at least 1
    return max(1, -(-p * 30103 // 100000))


def _format_fixed(q: Fraction, digits: int) -> str:
    scaled = round(q * 10**digits)
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    whole, frac = divmod(scaled, 10**digits)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


def _format_radius(r: Fraction) -> str:
    if r == 0:
        return "0"
    return f"{float(r):.1e}"


def render_interval(lo: Fraction, hi: Fraction, digits: int) -> str:
    return f"{_format_fixed((lo + hi) / 2, digits)} ± {_format_radius((hi - lo) / 2)}"


def render(x: Real, d: int) -> str:
    """Midpoint to ``d`` decimals, then `` ± `` and the interval radius."""
    if d < 1:
        raise DomainError("need at least one decimal digit")
    p = ceil_log2(10**d) + 2
    lo, hi = x.interval(p)
    return render_interval(lo, hi, d)


def render_at(x: Real, p: int) -> str:
    """Like :func:`render` but for a given binary precision."""
    lo, hi = x.interval(p)
    return render_interval(lo, hi, _decimal_digits_for(p))
