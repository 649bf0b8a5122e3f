"""Exact rationals and the pairing bijections between N and N^k.

Rationals are :class:`fractions.Fraction`, which already keeps numerator and
denominator coprime with a positive denominator after every operation.
"""

from __future__ import annotations

import enum
import math
import re
from fractions import Fraction
from typing import NamedTuple

from .errors import DomainError, ParseError

Rational = Fraction

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class Pair(NamedTuple):
    first: int
    second: int


def parse_rational(text: str) -> Fraction:
    """Parse ``-3/7``, ``5``, ``+2/4`` (reduced to ``1/2``)."""
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ParseError(f"not a rational: {text!r}")
    num = int(m.group(1))
    if m.group(2) is None:
        return Fraction(num)
    den = int(m.group(2))
    if den == 0:
        raise ParseError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rat_arith(op: str, a: Fraction, b: Fraction | None = None):
    """Dispatch one of add/sub/mul/div/neg/abs/sup/inf/cmp on exact rationals.

    ``neg`` and ``abs`` ignore ``b``. ``cmp`` returns an :class:`Ordering`.
    """
    a = Fraction(a)
    if op == "neg":
        return -a
    if op == "abs":
        return abs(a)
    if b is None:
        raise DomainError(f"operation {op!r} needs two operands")
    b = Fraction(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise DomainError("division by zero")
        return a / b
    if op == "sup":
        return max(a, b)
    if op == "inf":
        return min(a, b)
    if op == "cmp":
        return Ordering((a > b) - (a < b))
    raise DomainError(f"unknown rational operation {op!r}")


def _check_natural(*ns: int) -> None:
    for n in ns:
        if n < 0:
            raise DomainError(f"expected a natural number, got {n}")


def pair_cantor(n: int, m: int) -> int:
    """The bijection N x N -> N, (n, m) -> 2^n (2m + 1) - 1."""
    _check_natural(n, m)
    return (1 << n) * (2 * m + 1) - 1


def unpair_cantor(k: int) -> Pair:
    _check_natural(k)
    k += 1
    n = (k & -k).bit_length() - 1
    return Pair(n, ((k >> n) - 1) // 2)


def pair_square(n: int) -> Pair:
    """Enumerate N x N shell by shell, so the first k^2 values fill the k x k grid."""
    _check_natural(n)
    r = math.isqrt(n)
    return Pair(min(n - r * r, r), min((r + 1) ** 2 - n - 1, r))


def unpair_square(i: int, j: int) -> int:
    _check_natural(i, j)
    m = max(i, j)
    return m * m + i + m - j


def _shell_completions(m: int, remaining: int, hit: bool) -> int:
    # tuples in {0..m}^remaining, restricted to those containing m unless hit
    if hit:
        return (m + 1) ** remaining
    return (m + 1) ** remaining - m**remaining


def tuple_enum(arity: int, n: int) -> list[int]:
    """Bijection N -> N^arity whose first k^arity values are exactly the grid {0..k-1}^arity.

    Shell ``m`` (tuples with maximum ``m``) occupies indices ``m^arity`` up to
    ``(m+1)^arity - 1``. Inside a shell the order is lexicographic with the first
    coordinate ascending and the remaining ones descending, which makes arity 2
    coincide with :func:`pair_square`.
    """
    if arity < 1:
        raise DomainError("arity must be at least 1")
    _check_natural(n)
    if arity == 1:
        return [n]
    m = _iroot(n, arity)
    r = n - m**arity
    out: list[int] = []
    hit = False
    for pos in range(arity):
        values = range(m + 1) if pos == 0 else range(m, -1, -1)
        for v in values:
            c = _shell_completions(m, arity - pos - 1, hit or v == m)
            if r < c:
                out.append(v)
                hit = hit or v == m
                break
            r -= c
    return out


def tuple_index(ks: list[int] | tuple[int, ...]) -> int:
    """Inverse of :func:`tuple_enum`."""
    arity = len(ks)
    if arity < 1:
        raise DomainError("arity must be at least 1")
    _check_natural(*ks)
    if arity == 1:
        return ks[0]
    m = max(ks)
    idx = m**arity
    hit = False
    for pos, k in enumerate(ks):
        values = range(k) if pos == 0 else range(m, k, -1)
        for v in values:
            idx += _shell_completions(m, arity - pos - 1, hit or v == m)
        hit = hit or k == m
    return idx


def _iroot(n: int, k: int) -> int:
    """Largest m with m^k <= n."""
    if n < 2:
        return n
    m = int(round(n ** (1.0 / k)))
    while m**k > n:
        m -= 1
    while (m + 1) ** k <= n:
        m += 1
    return m


def ceil_log2(x: Fraction | int) -> int:
    """Smallest integer e with 2^e >= x, for x > 0."""
    x = Fraction(x)
    if x <= 0:
        raise DomainError("ceil_log2 of a nonpositive number")
    e = x.numerator.bit_length() - x.denominator.bit_length()
    # now 2^(e-1) < x < 2^(e+1)
    while Fraction(2) ** e < x:
        e += 1
    while Fraction(2) ** (e - 1) >= x:
        e -= 1
    return e


def pow2(e: int) -> Fraction:
    """2^e as an exact rational, for any integer e."""
    return Fraction(1 << e) if e >= 0 else Fraction(1, 1 << -e)
