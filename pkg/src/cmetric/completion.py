"""Metric completion by fast-Cauchy sequences, locations, and Lipschitz extension."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional

from .errors import ContractError, DomainError, SearchBoundError
from .metric import MapKind, MetricMap, SeparableSpace, tb_net
from .numerics import ceil_log2, pow2
from .reals import ONE, Real, RealSeq, real_lattice, real_limit

DEFAULT_STAGE_BOUND = 1 << 16


class CompletionPoint:
    """A fast-Cauchy sequence of base points: terms ``i, j >= n`` are within ``2^-n``."""

    __slots__ = ("_seq", "_memo")

    def __init__(self, seq: Callable[[int], Any]):
        self._seq = seq
        self._memo: dict[int, Any] = {}

    @classmethod
    def from_cauchy(cls, term: Callable[[int], Any], modulus: Callable[[int], int]) -> CompletionPoint:
        """Reindex a sequence with modulus ``m`` (terms past ``m(n)`` within ``2^-n``)."""
        return cls(lambda n: term(modulus(n)))

    def seq(self, n: int):
        try:
            return self._memo[n]
        except KeyError:
            v = self._seq(n)
            self._memo[n] = v
            return v

    def __repr__(self) -> str:
        return f"CompletionPoint(seq(0)={self.seq(0)!r})"


def embed_dense(x) -> CompletionPoint:
    return CompletionPoint(lambda n: x)


def completion_distance(base_dist: Callable[[Any, Any], Real], p: CompletionPoint, q: CompletionPoint) -> Real:
    """Limit of termwise base distances; term ``k`` is within ``2^-(k-1)`` of the limit."""
    terms = RealSeq(lambda k: base_dist(p.seq(k), q.seq(k)), lambda n: n + 2)
    return real_limit(terms).clamp_nonneg()


@dataclass
class CompletionSpace(SeparableSpace):
    base: Optional[SeparableSpace] = None


def complete(X: SeparableSpace) -> CompletionSpace:
    """Completion of ``X``; its enumeration embeds the base enumeration.

    A tb witness ``a`` of the base becomes ``n -> a(n+2)`` so that covering
    holds with room to spare at the precision used by covering checks.
    """

    def dist(p, q):
        return completion_distance(X.dist, p, q)

    embedded: dict[int, Optional[CompletionPoint]] = {}

    def enum_(k):
        if k not in embedded:
            x = X.enum(k)
            embedded[k] = None if x is None else embed_dense(x)
        return embedded[k]

    tb = None
    if X.tb is not None:
        base_tb = X.tb
        tb = lambda n: base_tb(n + 2)  # noqa: E731
    return CompletionSpace(
        dist, enum_, tb, X.bound, X.ultrametric, f"complete({X.name})", None, base=X
    )


def base_of(Z: SeparableSpace) -> SeparableSpace:
    if isinstance(Z, CompletionSpace) and Z.base is not None:
        return Z.base
    raise DomainError("expected a completion space")


def check_fast_cauchy(X: SeparableSpace, p: CompletionPoint, upto: int) -> None:
    """Raise ContractError if sampled terms violate the fast-Cauchy bound (2^-(n+2) slack)."""
    for n in range(upto):
        for j in range(n + 1, upto + 1):
            d = X.dist(p.seq(n), p.seq(j))
            if d.lower(n + 4) > pow2(-n) + pow2(-(n + 2)):
                raise ContractError(f"terms {n} and {j} are farther apart than 2^-{n}")


# ---------------------------------------------------------------------------
# Lipschitz extension


def _pairs(points: list) -> Iterable[tuple]:
    for i, a in enumerate(points):
        for b in points[i + 1:]:
            yield a, b


def check_lipschitz(
    f: Callable, C: Fraction, X: SeparableSpace, Z: SeparableSpace, samples: list, n: int = 12
) -> None:
    for a, b in _pairs(samples):
        dz = Z.dist(f(a), f(b))
        dx = X.dist(a, b)
        if dz.lower(n) > C * dx.upper(n) + pow2(-(n - 2)):
            raise ContractError(f"map is not {C}-Lipschitz on a sampled pair")


def extend_lipschitz(
    f: Callable[[Any], CompletionPoint],
    C,
    X: SeparableSpace,
    Z: CompletionSpace,
    samples: int = 8,
) -> MetricMap:
    """Extend a ``C``-Lipschitz map from the base of ``X`` into ``Z`` to the completion of ``X``.

    The result sends a completion point ``p`` to the sequence
    ``n -> f(p.seq(n + 2 + c)).seq(n + 2)`` with ``2^c >= C``.
    """
    C = Fraction(C)
    if C <= 0:
        raise DomainError("Lipschitz coefficient must be positive")
    pts = [x for x in (X.enum(k) for k in range(samples)) if x is not None]
    check_lipschitz(f, C, X, Z, pts)
    c = max(0, ceil_log2(C))

    def apply(p: CompletionPoint) -> CompletionPoint:
        return CompletionPoint(lambda n: f(p.seq(n + 2 + c)).seq(n + 2))

    kind = MapKind.NONEXPANSIVE if C <= 1 else MapKind.LIPSCHITZ
    return MetricMap(apply, kind, C)


def extension_location(
    f: Callable[[Any], CompletionPoint],
    C,
    X: SeparableSpace,
    Z: CompletionSpace,
    y: CompletionPoint,
) -> Location:
    """The extension's value at ``y`` as a location on the base of ``Z``.

    Value at a base point ``z`` is ``inf_x C d(x, y) + d(f(x), z)`` over the base
    of ``X``; the infimum is taken over a tb net of ``X``, which is accurate to
    ``2C`` times the net radius because the integrand is ``2C``-Lipschitz in ``x``.
    """
    C = Fraction(C)
    if X.tb is None:
        raise DomainError("the location route needs a totally bounded domain")
    Zb = base_of(Z)
    extra = ceil_log2(2 * C) + 1
    nets: dict[int, list] = {}

    def net(m):
        if m not in nets:
            nets[m] = tb_net(X, m)
        return nets[m]

    images: dict[int, Any] = {}

    def image(x):
        key = id(x)
        if key not in images:
            images[key] = (x, f(x))
        return images[key][1]

    # per precision: the z-independent bounds C d(x, y) -/+ slack and f(x)'s term
    rows: dict[int, list] = {}

    def row_data(n):
        if n not in rows:
            m = max(0, n + extra)
            k = n + 4 + max(0, ceil_log2(C))
            j = n + 4
            yk = y.seq(k)
            ey = pow2(-k)
            out = []
            for x in net(m):
                if X.exact is not None:
                    dl = dh = X.exact(x, yk)
                else:
                    dl, dh = X.dist(x, yk).interval(k)
                out.append((C * (dl - ey), C * (dh + ey), image(x).seq(j)))
            rows[n] = out
        return rows[n]

    def value_at(z) -> Real:
        # d(x, y) is read off y's term k and d(f(x), z) off f(x)'s term j; each
        # costs its own width plus twice the term's distance to the limit
        def oracle(n):
            m = max(0, n + extra)
            j = n + 4
            ez = pow2(-j)
            best_lo = best_hi = None
            for cl, ch, fx in row_data(n):
                if Zb.exact is not None:
                    fl = fh = Zb.exact(fx, z)
                else:
                    fl, fh = Zb.dist(fx, z).interval(j)
                lo, hi = cl + fl, ch + fh
                if best_hi is None or hi < best_hi:
                    best_hi = hi
                if best_lo is None or lo < best_lo:
                    best_lo = lo
            lo = best_lo - ez - 2 * C * pow2(-m)
            return max(lo, Fraction(0)), max(best_hi + ez, Fraction(0))

        return Real(oracle)

    def values(i):
        z = Zb.enum(i)
        return None if z is None else value_at(z)

    return Location(Zb, values, None, value_at)


# ---------------------------------------------------------------------------
# locations


@dataclass
class Location:
    """Distances from an (ideal) point to every enumerated base point.

    ``values(i)`` is the distance to the ``i``-th enumerated point (``None`` when
    that entry is absent). ``zero_approach(n)``, if given, is an index whose
    value is below ``2^-n``. ``at`` evaluates the location at any base point.
    """

    space: SeparableSpace
    values: Callable[[int], Optional[Real]]
    zero_approach: Optional[Callable[[int], int]] = None
    at: Optional[Callable[[Any], Real]] = None


def location_of(
    X: SeparableSpace, p: CompletionPoint, stage_bound: int | None = None
) -> Location:
    def at(z):
        return completion_distance(X.dist, embed_dense(z), p)

    cache: dict[int, Optional[Real]] = {}

    def values(i):
        if i not in cache:
            s = X.enum(i)
            cache[i] = None if s is None else at(s)
        return cache[i]

    found: dict[int, int] = {}

    def zero_approach(n):
        if n in found:
            return found[n]
        if stage_bound is not None:
            bound = stage_bound
        elif X.tb is not None:
            bound = X.tb(n + 2)
        else:
            bound = DEFAULT_STAGE_BOUND
        eps = pow2(-n)
        for k in range(bound):
            v = values(k)
            if v is not None and v.upper(n + 2) < eps:
                found[n] = k
                return k
        raise SearchBoundError(
            f"no enumerated point within 2^-{n} among the first {bound} entries"
        )

    return Location(X, values, zero_approach, at)


def point_of_location(L: Location) -> CompletionPoint:
    if L.zero_approach is None:
        raise ContractError("converting a location to a point needs a zero_approach witness")
    za, X = L.zero_approach, L.space
    return CompletionPoint(lambda n: X.point(za(n + 1)))


def find_zero_approach(L: Location, n: int, bound: int) -> int:
    """Scan enumeration indices for a value certified below ``2^-n``."""
    eps = pow2(-n)
    for k in range(bound):
        v = L.values(k)
        if v is not None and v.upper(n + 2) < eps:
            return k
    raise SearchBoundError(f"no location value below 2^-{n} among the first {bound} entries")


def location_distance_on(L1: Location, L2: Location, samples: Iterable, n: int) -> Fraction:
    """Upper bound of ``max |L1(z) - L2(z)|`` over sample base points at precision n."""
    worst = Fraction(0)
    for z in samples:
        a, b = L1.at(z), L2.at(z)
        al, ah = a.interval(n)
        bl, bh = b.interval(n)
        worst = max(worst, ah - bl, bh - al)
    return worst


# ---------------------------------------------------------------------------
# basepoint adjunction


class _Star:
    __slots__ = ()

    def __repr__(self) -> str:
        return "*"


STAR = _Star()


def adjoin_basepoint(X: SeparableSpace, search_limit: int | None = None) -> SeparableSpace:
    """``1 + X`` where the new point sits at distance ``sup(d(x, s_m), 1)`` from ``x``.

    ``s_m`` is the first enumerated point present in ``X``.
    """
    anchor: list = []

    def first():
        if not anchor:
            anchor.append(X.first_point(search_limit))
        return anchor[0]

    zero = Real.const(0)

    def dist(a, b):
        if a is STAR and b is STAR:
            return zero
        if a is STAR:
            a, b = b, a
        if b is STAR:
            return real_lattice("sup", X.dist(a, first()), ONE)
        return X.dist(a, b)

    def enum_(k):
        return STAR if k == 0 else X.enum(k - 1)

    tb = None
    if X.tb is not None:
        base_tb = X.tb
        tb = lambda n: base_tb(n) + 1  # noqa: E731
    return SeparableSpace(dist, enum_, tb, None, X.ultrametric, f"1+{X.name}")
