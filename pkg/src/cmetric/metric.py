"""Separable metric spaces with explicit enumeration and total-boundedness witnesses.

Enumerations follow the ``1 + X`` convention: ``enum(k)`` returns a point or
``None`` (absent), so the empty space is just ``lambda k: None``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional, Sequence

from .errors import ContractError, DomainError, MetricViolation, ParseError, SearchBoundError
from .numerics import pair_square, parse_rational, pow2, tuple_enum, format_rational
from .reals import ZERO, Real, real_lattice

Point = Any


# ---------------------------------------------------------------------------
# finite rational spaces


@dataclass(frozen=True)
class FiniteRationalSpace:
    size: int
    matrix: tuple[tuple[Fraction, ...], ...]

    def dist(self, i: int, j: int) -> Fraction:
        if not (0 <= i < self.size and 0 <= j < self.size):
            raise DomainError(f"index out of range for a {self.size}-point space: ({i}, {j})")
        return self.matrix[i][j]

    def exact_diameter(self) -> Fraction:
        return max((max(row) for row in self.matrix), default=Fraction(0))


def validate_matrix(rows: Sequence[Sequence]) -> FiniteRationalSpace:
    """Check a square matrix exactly and return it as a space.

    Raises :class:`MetricViolation` for the first problem found, scanning
    shape, diagonal, sign, symmetry and then triangles ``(i, j, k)`` in
    lexicographic order, where a triangle fails if ``d(i,k) > d(i,j) + d(j,k)``.
    """
    n = len(rows)
    m = []
    for i, row in enumerate(rows):
        if len(row) != n:
            raise MetricViolation("shape", (i,), f"row {i} has {len(row)} entries, expected {n}")
        m.append(tuple(Fraction(v) for v in row))
    for i in range(n):
        if m[i][i] != 0:
            raise MetricViolation("diagonal", (i, i), f"d({i},{i}) = {format_rational(m[i][i])} is not 0")
    for i in range(n):
        for j in range(n):
            if m[i][j] < 0:
                raise MetricViolation("negative", (i, j), f"d({i},{j}) is negative")
    for i in range(n):
        for j in range(i + 1, n):
            if m[i][j] != m[j][i]:
                raise MetricViolation("symmetry", (i, j), f"d({i},{j}) != d({j},{i})")
    for i in range(n):
        mi = m[i]
        for j in range(n):
            mij = mi[j]
            mj = m[j]
            for k in range(n):
                if mi[k] > mij + mj[k]:
                    raise MetricViolation(
                        "triangle",
                        (i, j, k),
                        f"triangle violated at ({i},{j},{k}): "
                        f"d({i},{k}) > d({i},{j}) + d({j},{k})",
                    )
    return FiniteRationalSpace(n, tuple(m))


def load_fms(text: str) -> FiniteRationalSpace:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty FMS input")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "fms" or not head[1].isdigit():
        raise ParseError(f"bad header {lines[0]!r}, expected 'fms <n>'")
    n = int(head[1])
    body = lines[1:]
    if len(body) != n:
        raise ParseError(f"expected {n} matrix rows, found {len(body)}")
    rows = []
    for i, ln in enumerate(body):
        cells = ln.split()
        if len(cells) != n:
            raise ParseError(f"row {i} has {len(cells)} entries, expected {n}")
        rows.append([parse_rational(c) for c in cells])
    return validate_matrix(rows)


def dump_fms(fs: FiniteRationalSpace) -> str:
    out = [f"fms {fs.size}"]
    out.extend(" ".join(format_rational(v) for v in row) for row in fs.matrix)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# separable spaces


@dataclass
class SeparableSpace:
    """A metric space given by a Real-valued distance and a dense enumeration.

    ``tb(n)``, when present, bounds how many enumerated entries it takes to
    cover the space with balls of radius ``2^-n``. ``bound`` is a known upper
    bound on all distances, if any.
    """

    dist: Callable[[Point, Point], Real]
    enum: Callable[[int], Optional[Point]]
    tb: Optional[Callable[[int], int]] = None
    bound: Optional[Fraction] = None
    ultrametric: bool = False
    name: str = "space"
    contains: Optional[Callable[[Point], None]] = field(default=None, repr=False)
    # optional shortcut: a list of points within 2^-m of every point
    net: Optional[Callable[[int], list]] = field(default=None, repr=False)
    # exact rational distance, when the metric is rational-valued
    exact: Optional[Callable[[Point, Point], Fraction]] = field(default=None, repr=False)

    def point(self, k: int) -> Point:
        p = self.enum(k)
        if p is None:
            raise DomainError(f"enumeration index {k} of {self.name} is absent")
        return p

    def first_point(self, limit: int | None = None) -> Point:
        """The first present enumerated point; searches ``tb(0)`` entries or ``limit``."""
        if limit is None:
            limit = self.tb(0) if self.tb is not None else 4096
        for k in range(max(limit, 1)):
            p = self.enum(k)
            if p is not None:
                return p
        raise DomainError(f"{self.name} has no point among its first {limit} entries")

    def check_point(self, x: Point) -> Point:
        if self.contains is not None:
            self.contains(x)
        return x


def as_separable(fs: FiniteRationalSpace) -> SeparableSpace:
    lifted = [[Real.const(v) for v in row] for row in fs.matrix]
    n = fs.size

    def dist(i, j):
        return lifted[i][j]

    def enum_(k):
        return k % n if n else None

    def contains(i):
        if not isinstance(i, int) or not 0 <= i < n:
            raise DomainError(f"{i!r} is not a point of a {n}-point space")

    ultra = all(
        fs.matrix[i][k] <= max(fs.matrix[i][j], fs.matrix[j][k])
        for i in range(n)
        for j in range(n)
        for k in range(n)
    ) if n <= 40 else False
    return SeparableSpace(
        dist, enum_, tb=lambda _n: n, bound=fs.exact_diameter(), ultrametric=ultra,
        name=f"finite[{n}]", contains=contains, exact=fs.dist,
    )


def discrete_space(size: int | None = None) -> SeparableSpace:
    """Naturals (or ``range(size)``) with the discrete 0/1 metric."""
    one, zero = Real.const(1), ZERO

    def dist(a, b):
        return zero if a == b else one

    def exact(a, b):
        return Fraction(0 if a == b else 1)

    if size is None:
        return SeparableSpace(
            dist, lambda k: k, None, Fraction(1), True, "discrete[N]", exact=exact
        )
    return SeparableSpace(
        dist, lambda k: k % size if size else None, lambda _n: size, Fraction(1), True,
        f"discrete[{size}]", exact=exact,
    )


# ---------------------------------------------------------------------------
# maps


class MapKind(enum.Enum):
    ISOMETRY = "isometry"
    LIPSCHITZ = "lipschitz"
    NONEXPANSIVE = "nonexpansive"
    EPS_DELTA = "eps-delta"


@dataclass
class MetricMap:
    apply: Callable[[Point], Point]
    kind: MapKind = MapKind.EPS_DELTA
    coefficient: Optional[Fraction] = None

    def __call__(self, x: Point) -> Point:
        return self.apply(x)


def check_map_on(
    f: MetricMap,
    dom: SeparableSpace,
    cod: SeparableSpace,
    pairs: Iterable[tuple[Point, Point]],
    n: int,
) -> None:
    """Test the map's declared class on sample pairs; raises ContractError."""
    if f.kind is MapKind.EPS_DELTA:
        return
    if f.kind is MapKind.LIPSCHITZ:
        c = f.coefficient
    else:
        c = Fraction(1)
    slack = pow2(-(n - 2))
    for x, y in pairs:
        dxy = dom.dist(x, y)
        dfxy = cod.dist(f(x), f(y))
        if dfxy.lower(n) > c * dxy.upper(n) + slack:
            raise ContractError(f"{f.kind.value} bound fails on a sampled pair")
        if f.kind is MapKind.ISOMETRY and dxy.lower(n) > dfxy.upper(n) + slack:
            raise ContractError("isometry shrinks a sampled distance")


# ---------------------------------------------------------------------------
# products


def product_binary(X: SeparableSpace, Y: SeparableSpace) -> SeparableSpace:
    def dist(p, q):
        return real_lattice("sup", X.dist(p[0], q[0]), Y.dist(p[1], q[1]))

    def enum_(k):
        i, j = pair_square(k)
        a, b = X.enum(i), Y.enum(j)
        if a is None or b is None:
            return None
        return (a, b)

    tb = None
    if X.tb is not None and Y.tb is not None:
        tx, ty = X.tb, Y.tb
        tb = lambda n: max(tx(n), ty(n)) ** 2  # noqa: E731
    bound = None
    if X.bound is not None and Y.bound is not None:
        bound = max(X.bound, Y.bound)
    return SeparableSpace(
        dist, enum_, tb, bound, X.ultrametric and Y.ultrametric, f"{X.name}x{Y.name}"
    )


class Gauge(enum.Enum):
    CANONICAL = "canonical"
    IDENTITY = "identity"


class SeqPoint:
    """A point of a sequence space: a memoized function ``n -> value``."""

    __slots__ = ("_term", "_memo", "__weakref__")

    def __init__(self, term: Callable[[int], Any]):
        self._term = term
        self._memo: dict[int, Any] = {}

    def __call__(self, n: int):
        if n < 0:
            raise DomainError("negative sequence index")
        try:
            return self._memo[n]
        except KeyError:
            v = self._term(n)
            self._memo[n] = v
            return v

    def prefix(self, n: int) -> list:
        return [self(i) for i in range(n)]

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.prefix(6)}...)"


def _factor_fn(Xs) -> Callable[[int], SeparableSpace]:
    if isinstance(Xs, SeparableSpace):
        return lambda _n: Xs
    if callable(Xs):
        return Xs
    raise DomainError("countable product needs a function from indices to spaces")


def _gauged(d: Real, gauge: Gauge, n_weight: int, prec: int) -> tuple[Fraction, Fraction]:
    lo, hi = d.interval(prec)
    lo, hi = max(lo, Fraction(0)), max(hi, Fraction(0))
    if gauge is Gauge.CANONICAL:
        lo, hi = lo / (1 + lo), hi / (1 + hi)
    w = pow2(-n_weight)
    return lo * w, hi * w


def product_distance(
    factor: Callable[[int], SeparableSpace], gauge: Gauge, x, y
) -> Real:
    """sup over n of 2^-n h(d_n(x_n, y_n)), truncated at index p+2 at precision p."""

    def oracle(p):
        lo = hi = Fraction(0)
        for k in range(p + 3):
            X = factor(k)
            if gauge is Gauge.IDENTITY and (X.bound is None or X.bound > 1):
                raise DomainError(
                    f"identity gauge needs factor distances bounded by 1 (factor {k})"
                )
            # h is 1-Lipschitz and the weight is at most 1
            l, h = _gauged(X.dist(x(k), y(k)), gauge, k, p + 1)
            lo, hi = max(lo, l), max(hi, h)
        return lo, max(hi, pow2(-(p + 3)))

    return Real(oracle)


def product_countable(Xs, gauge: Gauge | str = Gauge.CANONICAL, name: str = "product") -> SeparableSpace:
    """Countable product with the weighted sup metric.

    Points are :class:`SeqPoint` (any callable ``n -> point`` works as input).
    The enumeration is the one from :func:`tb_witness_product_countable`.
    """
    gauge = Gauge(gauge)
    factor = _factor_fn(Xs)
    if gauge is Gauge.IDENTITY:
        X0 = factor(0)
        if X0.bound is None or X0.bound > 1:
            raise DomainError("identity gauge needs factor distances bounded by 1")

    def dist(x, y):
        return product_distance(factor, gauge, x, y)

    enum_, tb = _product_enum(factor)
    ultra = gauge is Gauge.IDENTITY and factor(0).ultrametric
    return SeparableSpace(dist, enum_, tb, Fraction(1), ultra, name)


def tb_witness_product_countable(tbs, enums):
    """Enumeration and covering bound for a countable product of tb factors.

    ``tbs`` and ``enums`` are functions (or sequences) indexed by factor. The
    enumeration is a concatenation of finite blocks: block ``n`` lists every
    choice of cover indices ``< K_n`` for the first ``n+1`` coordinates, where
    ``K_n = max_{k<=n} tb_k(n+2)``, padding the remaining coordinates with each
    factor's first point. Block ``n`` covers at radius ``2^-n``, so ``tb(n)`` is
    the end of block ``n`` (or 1 when every ``K_n`` so far is 1).
    """
    tb_at = tbs if callable(tbs) else (lambda k: tbs[k])
    enum_at = enums if callable(enums) else (lambda k: enums[k])
    spaces = lambda k: SeparableSpace(lambda a, b: ZERO, enum_at(k), tb_at(k))  # noqa: E731
    return _product_enum(spaces)


def _product_enum(factor: Callable[[int], SeparableSpace]):
    defaults: dict[int, Any] = {}

    def default(k):
        if k not in defaults:
            defaults[k] = factor(k).first_point()
        return defaults[k]

    default(0)  # an uninhabited first factor fails here

    # the tb bound is offered when the first factor has one; a later factor
    # without one makes tb(n) fail rather than return a wrong bound
    all_tb = factor(0).tb is not None

    size_cache: dict[int, int] = {}

    def side(n):
        if not all_tb:
            return n + 1
        out = 1
        for k in range(n + 1):
            t = factor(k).tb
            if t is None:
                raise DomainError(f"factor {k} has no tb witness")
            out = max(out, t(n + 2))
        return out

    def block_size(n):
        if n not in size_cache:
            size_cache[n] = side(n) ** (n + 1)
        return size_cache[n]

    def enum_(idx):
        n = 0
        while idx >= block_size(n):
            idx -= block_size(n)
            n += 1
        coords = tuple_enum(n + 1, idx)
        pts = []
        for k, c in enumerate(coords):
            p = factor(k).enum(c)
            if p is None:
                return None
            pts.append(p)
        fixed = tuple(pts)
        m = len(fixed)
        return SeqPoint(lambda i: fixed[i] if i < m else default(i))

    if not all_tb:
        return enum_, None

    def tb(n):
        if all(side(j) == 1 for j in range(n + 1)):
            return 1
        return sum(block_size(j) for j in range(n + 1))

    return enum_, tb


# ---------------------------------------------------------------------------
# located subsets, diameter, apartness


def covering_index(X: SeparableSpace, x: Point, n: int, limit: int | None = None) -> int | None:
    """First enumeration index whose distance to ``x`` is certified below 2^-n at precision n+2."""
    if limit is None:
        if X.tb is None:
            raise DomainError("covering search needs a tb witness or an explicit limit")
        limit = X.tb(n)
    eps = pow2(-n)
    for k in range(limit):
        s = X.enum(k)
        if s is not None and X.dist(x, s).upper(n + 2) < eps:
            return k
    return None


def _present_prefix(A: SeparableSpace, count: int) -> list:
    return [p for p in (A.enum(k) for k in range(count)) if p is not None]


def tb_net(X: SeparableSpace, m: int) -> list:
    """Points within ``2^-m`` of every point of ``X``."""
    if X.net is not None:
        return X.net(m)
    if X.tb is None:
        raise DomainError(f"{X.name} has no tb witness")
    return _present_prefix(X, X.tb(m))


def dist_to_tb_subset(A: SeparableSpace, x: Point, dist: Callable | None = None) -> Real:
    """Distance from an ambient point to a totally bounded subset."""
    if A.tb is None:
        raise DomainError("located distance needs a totally bounded subset")
    d = dist or A.dist
    if not tb_net(A, 0):
        raise DomainError("distance to an empty subset")

    def oracle(n):
        pts = tb_net(A, n + 2)
        ivs = [d(x, a).interval(n + 2) for a in pts]
        lo = min(iv[0] for iv in ivs) - pow2(-(n + 2))
        hi = min(iv[1] for iv in ivs)
        return max(lo, Fraction(0)), max(hi, Fraction(0))

    return Real(oracle)


def diameter(X: SeparableSpace) -> Real:
    if X.tb is None:
        raise DomainError("diameter needs a tb witness")

    def oracle(n):
        pts = tb_net(X, n + 2)
        if not pts:
            return Fraction(0), Fraction(0)
        lo = hi = Fraction(0)
        for i, a in enumerate(pts):
            for b in pts[i + 1:]:
                if X.exact is not None:
                    l = h = X.exact(a, b)
                else:
                    l, h = X.dist(a, b).interval(n + 2)
                lo, hi = max(lo, l), max(hi, h)
        return lo, hi + pow2(-(n + 1))

    return Real(oracle)


class Apartness(enum.Enum):
    APART = "apart"
    WITHIN_TOLERANCE = "within-tolerance"


def kolmogorov_apart(X: SeparableSpace, x: Point, y: Point, n: int) -> Apartness:
    from .reals import Cmp, approx_compare

    if approx_compare(X.dist(x, y), ZERO, n) is Cmp.GREATER:
        return Apartness.APART
    return Apartness.WITHIN_TOLERANCE


class WitnessKind(enum.Enum):
    SEPARABLE = "separable"
    TB = "tb"


def transport_witness_retract(
    X: SeparableSpace, r: MetricMap, kind: WitnessKind | str = WitnessKind.TB, name: str | None = None
) -> SeparableSpace:
    """The retract's witnesses: enumeration ``r . enum``; tb bound unchanged."""
    kind = WitnessKind(kind)
    if kind is WitnessKind.TB:
        if X.tb is None:
            raise DomainError("tb transport needs a tb witness on the source")
        if r.kind not in (MapKind.NONEXPANSIVE, MapKind.ISOMETRY) and not (
            r.kind is MapKind.LIPSCHITZ and r.coefficient is not None and r.coefficient <= 1
        ):
            raise ContractError("tb transport needs a nonexpansive retraction")

    def enum_(k):
        p = X.enum(k)
        return None if p is None else r(p)

    return SeparableSpace(
        X.dist, enum_, X.tb if kind is WitnessKind.TB else None, X.bound, X.ultrametric,
        name or f"retract({X.name})",
    )


def require_tb_cover(X: SeparableSpace, x: Point, n: int) -> int:
    k = covering_index(X, x, n)
    if k is None:
        raise SearchBoundError(f"no enumerated point within 2^-{n} among the first {X.tb(n)}")
    return k
