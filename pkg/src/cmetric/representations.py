"""Coding points of complete spaces by natural-number sequences, and cube embeddings.

:class:`BaireQuotient` decodes a sequence ``alpha`` whose consecutive points
``s_alpha(k)``, ``s_alpha(k+1)`` are close (within ``2^-(k-2)`` by a rational
estimate) into the limit of ``s_alpha``. Every point has such a code, found by
searching the enumeration.

The embedding into a weighted Hilbert cube sends ``x`` to the sequence of its
scaled distances to the enumerated points.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from .canonical import BairePoint
from .completion import CompletionPoint, CompletionSpace, base_of, complete, embed_dense
from .errors import ContractError, DomainError, SearchBoundError
from .metric import MapKind, MetricMap, SeparableSpace, SeqPoint, diameter, tb_net
from .numerics import pow2
from .reals import ApartnessWitness, Real, real_recip

# ---------------------------------------------------------------------------
# Baire quotient


@dataclass
class BaireQuotient:
    """Codes for points of a complete space ``space`` over the enumeration ``s``.

    ``bound(n)``, when given, caps codes: ``alpha(n) < bound(n)``. ``None``
    means no cap.
    """

    space: CompletionSpace
    bound: Optional[Callable[[int], int]] = None
    _delta: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def base(self) -> SeparableSpace:
        return base_of(self.space)

    def s(self, i: int):
        x = self.base.enum(i)
        if x is None:
            raise ContractError(f"enumeration entry {i} is absent")
        return x

    def delta(self, i: int, j: int, k: int) -> Fraction:
        """Rational estimate of ``d(s_i, s_j)`` with error below ``2^-(k+1)``."""
        key = (i, j, k)
        v = self._delta.get(key)
        if v is None:
            v = self.base.dist(self.s(i), self.s(j)).midpoint(k + 1)
            with self._lock:
                self._delta.setdefault(key, v)
        return v

    def step_ok(self, alpha, k: int) -> bool:
        return self.delta(alpha(k), alpha(k + 1), k) < pow2(2 - k)

    def first_violation(self, alpha, upto: int) -> Optional[int]:
        """Smallest ``k < upto`` failing the step test or the cap, if any."""
        for k in range(upto):
            if self.bound is not None and alpha(k) >= self.bound(k):
                return k
            if not self.step_ok(alpha, k):
                return k
        return None

    def in_T(self, alpha, upto: int) -> bool:
        return self.first_violation(alpha, upto) is None


def quotient_build(space: SeparableSpace, bound: Optional[Callable[[int], int]] = None) -> BaireQuotient:
    """Set up codes for ``space`` (a completion, or a base space to be completed)."""
    if not isinstance(space, CompletionSpace):
        space = complete(space)
    base = base_of(space)
    try:
        base.first_point(1 << 12)
    except Exception as exc:
        raise ContractError("the space must be inhabited") from exc
    if bound is not None:
        prev = None
        for n in range(16):
            b = bound(n)
            if b < 1 or (prev is not None and b < prev):
                raise ContractError(f"bound must be increasing and at least 1 (fails at {n})")
            prev = b
    return BaireQuotient(space, bound)


def clip_to_bound(bq: BaireQuotient, alpha) -> BairePoint:
    """Nonexpansive retraction onto codes respecting the cap."""
    if bq.bound is None:
        return BairePoint(alpha)
    return BairePoint(lambda n: min(alpha(n), bq.bound(n) - 1))


def _f(bq: BaireQuotient, alpha, k: int) -> int:
    """First failing step below ``k`` (each step ``j`` judged by its own bound), else ``k``."""
    for j in range(k):
        if not bq.step_ok(alpha, j):
            return j
    return k


def retract(bq: BaireQuotient, alpha) -> BairePoint:
    """Copy ``alpha`` while the step test holds, then repeat the last good term."""
    clipped = clip_to_bound(bq, alpha)
    return BairePoint(lambda k: clipped(_f(bq, clipped, k)))


def decode(bq: BaireQuotient, alpha) -> CompletionPoint:
    """Limit of ``s_alpha(k)``; term ``n`` is ``s_alpha(n+4)``.

    Steps are checked lazily; a failing index ``k`` raises ContractError
    with ``err.index == k``.
    """

    def term(n):
        bad = bq.first_violation(alpha, n + 4)
        if bad is not None:
            err = ContractError(f"code fails the step test at index {bad}")
            err.index = bad  # type: ignore[attr-defined]
            raise err
        return bq.s(alpha(n + 4))

    return CompletionPoint(term)


def encode(
    bq: BaireQuotient, x: CompletionPoint, stage_bound: Optional[Callable[[int], int]] = None
) -> BairePoint:
    """Code with ``alpha(n)`` the first index whose point is certified within ``2^-n`` of ``x``.

    The search for term ``n`` stops at ``stage_bound(n)``; the default comes
    from the tb witness (``a(n+2)`` entries cover ``x`` well enough to
    certify), then from the cap, and otherwise is 65536.
    """
    Z = bq.space
    if stage_bound is None:
        if Z.tb is not None:
            tb = Z.tb
            stage_bound = lambda n: tb(n + 2)  # noqa: E731
        elif bq.bound is not None:
            stage_bound = bq.bound
        else:
            stage_bound = lambda n: 1 << 16  # noqa: E731

    def term(n):
        eps = pow2(-n)
        limit = stage_bound(n)
        if bq.bound is not None:
            limit = min(limit, bq.bound(n))
        for k in range(limit):
            if Z.dist(x, embed_dense(bq.s(k))).upper(n + 2) < eps:
                return k
        raise SearchBoundError(f"no enumerated point within 2^-{n} among the first {limit}")

    return BairePoint(term)


def shift4(alpha) -> BairePoint:
    return BairePoint(lambda n: alpha(n + 4))


def splice_preimage(bq: BaireQuotient, beta, x: CompletionPoint, r: Fraction, probe: int = 40):
    """A code within ``r`` of ``beta`` (comparison metric) that decodes to ``x``.

    ``x`` must lie within ``r/8`` of the decoded ``beta``. The result copies
    ``beta`` up to index ``n`` and the code of ``x`` afterwards, where
    ``r/8 < 2^-(n+1)`` and ``2^-n < r``. Returns ``(zeta, n)``.
    """
    r = Fraction(r)
    if not 0 < r <= 1:
        raise DomainError("radius must lie in (0, 1]")
    n = 0
    while not (r / 8 < pow2(-(n + 1)) and pow2(-n) < r):
        n += 1
        if n > probe:
            raise SearchBoundError("no admissible splice index")
    gamma = encode(bq, x)
    zeta = BairePoint(lambda k: beta(k) if k <= n else gamma(k))
    return zeta, n


# ---------------------------------------------------------------------------
# cube variants


def bl(n: int) -> int:
    """Least ``k >= 1`` with ``n <= 2^k``."""
    if n < 0:
        raise DomainError("negative argument")
    k = 1
    while n > (1 << k):
        k += 1
    return k


@dataclass
class CubeVariantPlan:
    """Coordinate ``n`` of a variant cube has weight ``2^-b(n)``; block ``m`` holds ``v(m)`` coordinates."""

    a: Callable[[int], int]
    b: Callable[[int], int]
    v: Callable[[int], int]
    a_prime: Optional[Callable[[int], int]] = None


def _memo(fn: Callable[[int], int]) -> Callable[[int], int]:
    cache: dict[int, int] = {}

    def wrapped(n: int) -> int:
        if n not in cache:
            cache[n] = fn(n)
        return cache[n]

    return wrapped


def cube_plan(a: Callable[[int], int], check: int = 32) -> CubeVariantPlan:
    a = _memo(a)
    prev = 0
    for n in range(check):
        if a(n) < 1 or (n > 0 and a(n) <= prev):
            raise ContractError(f"a must be strictly increasing and at least 1 (fails at {n})")
        prev = a(n)

    @_memo
    def b(n):
        k = 0
        while not n < a(k):
            k += 1
        return k

    def v(n):
        return a(0) if n == 0 else a(n) - a(n - 1)

    return CubeVariantPlan(a, b, v)


def cantor_variant_plan(tb: Callable[[int], int], check: int = 32) -> CubeVariantPlan:
    """Plan whose block ``n`` has ``v(n) = bl(max a(k), k <= n+4)`` bits, so ``2^v(n)`` codes."""
    tb = _memo(tb)

    @_memo
    def v(n):
        return bl(max(tb(k) for k in range(n + 5)))

    @_memo
    def cumulative(n):
        return v(0) if n == 0 else cumulative(n - 1) + v(n)

    plan = cube_plan(cumulative, check)
    plan.v = v
    plan.a_prime = lambda n: 1 << v(n)
    return plan


def variant_distance(plan: CubeVariantPlan, alpha, beta) -> Real:
    """``sup_n 2^-b(n) |alpha_n - beta_n|`` for cube points given as Real sequences."""

    def oracle(p):
        # coordinates with b(n) >= p + 2 contribute at most 2^-(p+2)
        count = plan.a(p + 1)
        lo = hi = Fraction(0)
        for n in range(count):
            w = pow2(-plan.b(n))
            d = abs(_coord(alpha, n) - _coord(beta, n))
            dl, dh = d.interval(p + 2)
            lo, hi = max(lo, w * dl), max(hi, w * dh)
        return lo, max(hi, pow2(-(p + 2)))

    return Real(oracle)


def _coord(point, n) -> Real:
    v = point(n)
    if isinstance(v, Real):
        return v
    return Real.const(v)


# ---------------------------------------------------------------------------
# Hilbert-cube embedding


@dataclass
class HilbertEmbedding:
    embed: MetricMap
    locate: Callable[[Any], Real]
    plan: CubeVariantPlan
    C: Any

    def distance(self, alpha, beta) -> Real:
        return variant_distance(self.plan, alpha, beta)


def repair_increasing(a: Callable[[int], int]) -> Callable[[int], int]:
    """``n -> max(a(k), k <= n) + n``: strictly increasing, same covering power."""
    a = _memo(a)
    return _memo(lambda n: max(a(k) for k in range(n + 1)) + n)


def hilbert_embed(X: SeparableSpace, a: Optional[Callable[[int], int]] = None) -> HilbertEmbedding:
    """Embed a totally bounded space into the variant cube weighted by ``a``.

    ``a`` defaults to the repaired tb witness of ``X``. The scale is
    ``C = 1 / max(diam X, 1)`` and ``e(x)_n = C d(x, s_n)``.
    """
    if X.enum(0) is None:
        raise ContractError("the space must be inhabited with entry 0 present")
    if a is None:
        if X.tb is None:
            raise DomainError("need a tb witness or an explicit sequence a")
        a = repair_increasing(X.tb)
    plan = cube_plan(a)

    if X.exact is not None and X.tb is not None and X.tb(0) == X.tb(40):
        # the net no longer grows, so it is the whole (finite) space
        pts = tb_net(X, 0)
        diam = max((X.exact(p, q) for p in pts for q in pts), default=Fraction(0))
        C: Any = 1 / max(diam, Fraction(1))
    else:
        C = real_recip(diameter(X).sup(Real.const(1)), ApartnessWitness(1))

    def s(n):
        v = X.enum(n)
        if v is None:
            raise ContractError(f"enumeration entry {n} is absent")
        return v

    def e(x):
        def coord(n):
            if isinstance(C, Fraction) and X.exact is not None:
                return Real.const(C * X.exact(x, s(n)))
            return C * X.dist(x, s(n))

        return SeqPoint(coord)

    images: dict[int, SeqPoint] = {}

    def e_s(i):
        if i not in images:
            images[i] = e(s(i))
        return images[i]

    def locate(alpha) -> Real:
        """Distance from ``alpha`` to the image, from nets of increasing radius."""

        def oracle(p):
            m = p + 2
            vals = [variant_distance(plan, e_s(i), alpha).interval(p + 2) for i in range(plan.a(m))]
            lo = min(v[0] for v in vals) - pow2(-m)
            hi = min(v[1] for v in vals)
            return max(lo, Fraction(0)), hi

        return Real(oracle)

    kind = MapKind.NONEXPANSIVE
    return HilbertEmbedding(MetricMap(e, kind, Fraction(1)), locate, plan, C)
