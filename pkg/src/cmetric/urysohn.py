"""The rational Urysohn space built from recursive distance tuples.

A tuple is a finite list of ``(predecessor tuple, nonnegative rational)``
entries; the empty tuple is the base case. The distance between two tuples is
the largest mismatch between a declared distance and the recursively computed
one. Tuples whose declared distances obey the triangle constraints
("permissible" tuples) form a pseudometric space whose completion is
universal for separable metric spaces.
"""

from __future__ import annotations

import itertools
import re
import threading
from fractions import Fraction
from typing import Any, Iterable, Iterator, Optional, Sequence

from .completion import (
    CompletionPoint,
    CompletionSpace,
    complete,
    embed_dense,
)
from .errors import ContractError, DomainError, ParseError
from .metric import MapKind, MetricMap, SeparableSpace
from .numerics import ceil_log2, format_rational, parse_rational, pow2
from .reals import Real, real_inf, real_sup

# ---------------------------------------------------------------------------
# tuples


class UrysohnTuple:
    """An immutable tuple ``((a_0, alpha_0), ..., (a_{n-1}, alpha_{n-1}))``.

    Instances made through :func:`make_tuple` are interned: structurally equal
    tuples are the same object, so identity doubles as structural equality and
    the integer ``uid`` can key the distance memo.
    """

    __slots__ = ("entries", "age", "uid", "_encoding", "_permissible", "_rank", "__weakref__")

    def __init__(self, entries: tuple, uid: int):
        self.entries = entries
        self.age = 1 + max((p.age for p, _ in entries), default=-1) if entries else 0
        self.uid = uid
        self._encoding: Optional[tuple] = None
        self._permissible: Optional[bool] = None
        self._rank: Optional[int] = None

    @property
    def length(self) -> int:
        return len(self.entries)

    @property
    def preds(self) -> tuple:
        return tuple(p for p, _ in self.entries)

    @property
    def dists(self) -> tuple:
        return tuple(q for _, q in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        return f"UrysohnTuple({format_tuple(self)})"

    def __str__(self) -> str:
        return format_tuple(self)


_intern_lock = threading.Lock()
_interned: dict[tuple, UrysohnTuple] = {}
_uids = itertools.count()


def make_tuple(entries: Iterable[tuple[UrysohnTuple, Any]] = (), intern: bool = True) -> UrysohnTuple:
    """Build a tuple from ``(pred, dist)`` pairs; distances must be nonnegative rationals.

    With ``intern=False`` the tuple gets a fresh uid and is not registered, which
    keeps short-lived tuples out of the intern table.
    """
    norm = []
    for pred, q in entries:
        if not isinstance(pred, UrysohnTuple):
            raise DomainError(f"predecessor must be a tuple, got {type(pred).__name__}")
        if isinstance(q, float):
            raise DomainError("distances must be exact rationals, not floats")
        q = Fraction(q)
        if q < 0:
            raise DomainError(f"negative distance {q}")
        norm.append((pred, q))
    entries_t = tuple(norm)
    if not intern:
        return UrysohnTuple(entries_t, next(_uids))
    key = tuple((p.uid, q) for p, q in entries_t)
    hit = _interned.get(key)
    if hit is not None:
        return hit
    with _intern_lock:
        hit = _interned.get(key)
        if hit is None:
            hit = UrysohnTuple(entries_t, next(_uids))
            _interned[key] = hit
    return hit


EMPTY = make_tuple(())


def tup(*flat) -> UrysohnTuple:
    """Shorthand: ``tup(EMPTY, 1, EMPTY, 2)`` is ``((),1,(),2)``."""
    if len(flat) % 2:
        raise DomainError("expected alternating predecessor/distance arguments")
    return make_tuple(zip(flat[0::2], flat[1::2]))


# encoding ------------------------------------------------------------------


def encode(a: UrysohnTuple) -> tuple:
    """Flat rational sequence ``(age, length, |[a_0]|, ..., [a_0], alpha_0, ...)``."""
    if a._encoding is None:
        subs = [encode(p) for p, _ in a.entries]
        out: list = [Fraction(a.age), Fraction(a.length)]
        out.extend(Fraction(len(s)) for s in subs)
        for s, (_, q) in zip(subs, a.entries):
            out.extend(s)
            out.append(q)
        a._encoding = tuple(out)
    return a._encoding


def _nat(v, what: str) -> int:
    v = Fraction(v)
    if v.denominator != 1 or v < 0:
        raise ParseError(f"{what} must be a natural number, got {v}")
    return int(v)


def decode(seq: Sequence, strict: bool = False) -> UrysohnTuple:
    """Inverse of :func:`encode`.

    By default the age field only has to exceed every predecessor's age, and a
    zero length means the empty tuple whatever the age says. ``strict=True``
    demands exactly the values :func:`encode` produces.
    """
    seq = [Fraction(v) for v in seq]
    t, used = _decode_at(seq, 0, strict)
    if used != len(seq):
        raise ParseError(f"trailing terms after position {used}")
    return t


def _decode_at(seq: list, pos: int, strict: bool) -> tuple[UrysohnTuple, int]:
    if len(seq) - pos < 2:
        raise ParseError("encoding shorter than its header")
    age = _nat(seq[pos], "age")
    lgt = _nat(seq[pos + 1], "length")
    if lgt == 0:
        if strict and age != 0:
            raise ParseError("empty tuple must have age 0")
        return EMPTY, pos + 2
    if age == 0:
        raise ParseError("nonempty tuple with age 0")
    head_end = pos + 2 + lgt
    if head_end > len(seq):
        raise ParseError("missing predecessor lengths")
    sizes = [_nat(seq[pos + 2 + k], "predecessor length") for k in range(lgt)]
    cur = head_end
    entries = []
    for size in sizes:
        pred, end = _decode_at(seq, cur, strict)
        if end - cur != size:
            raise ParseError(f"predecessor at {cur} has length {end - cur}, header says {size}")
        if pred.age >= age:
            raise ParseError(f"predecessor age {pred.age} not below {age}")
        if end >= len(seq):
            raise ParseError("missing distance after predecessor")
        q = seq[end]
        if q < 0:
            raise ParseError(f"negative distance {q}")
        entries.append((pred, q))
        cur = end + 1
    t = make_tuple(entries)
    if strict and t.age != age:
        raise ParseError(f"age field {age} differs from computed age {t.age}")
    return t, cur


# text syntax ---------------------------------------------------------------


def format_tuple(a: UrysohnTuple) -> str:
    if not a.entries:
        return "()"
    return "(" + ", ".join(f"{format_tuple(p)}:{format_rational(q)}" for p, q in a.entries) + ")"


_TOKEN_RE = re.compile(r"\s*(\(|\)|,|:|[+-]?\d+(?:\s*/\s*\d+)?)")


def parse_tuple(text: str) -> UrysohnTuple:
    """Parse ``()`` or ``(t1:q1, t2:q2, ...)``."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character at {pos} in {text!r}")
        tokens.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    t, i = _parse_tokens(tokens, 0, text)
    if i != len(tokens):
        raise ParseError(f"trailing input in {text!r}")
    return t


def _parse_tokens(tokens: list, i: int, text: str) -> tuple[UrysohnTuple, int]:
    if i >= len(tokens) or tokens[i] != "(":
        raise ParseError(f"expected '(' in {text!r}")
    i += 1
    if i < len(tokens) and tokens[i] == ")":
        return EMPTY, i + 1
    entries = []
    while True:
        pred, i = _parse_tokens(tokens, i, text)
        if i + 1 >= len(tokens) or tokens[i] != ":":
            raise ParseError(f"expected ':' after predecessor in {text!r}")
        q = parse_rational(tokens[i + 1])
        if q < 0:
            raise ParseError(f"negative distance in {text!r}")
        entries.append((pred, q))
        i += 2
        if i < len(tokens) and tokens[i] == ",":
            i += 1
            continue
        if i < len(tokens) and tokens[i] == ")":
            return make_tuple(entries), i + 1
        raise ParseError(f"expected ',' or ')' in {text!r}")


def format_encoding(a: UrysohnTuple) -> str:
    return " ".join(format_rational(q) for q in encode(a))


def parse_encoding(text: str) -> UrysohnTuple:
    parts = text.replace(",", " ").split()
    return decode([parse_rational(p) for p in parts])


# ---------------------------------------------------------------------------
# distance

_memo: dict[tuple[int, int], Fraction] = {}
_ZERO = Fraction(0)


def _key(a: UrysohnTuple, b: UrysohnTuple) -> tuple[int, int]:
    return (a.uid, b.uid) if a.uid <= b.uid else (b.uid, a.uid)


def w_distance(a: UrysohnTuple, b: UrysohnTuple, memo: Optional[dict] = None) -> Fraction:
    """Exact distance, memoized on the (unordered) pair of tuple ids.

    ``memo`` defaults to the shared table. Entries are only ever added, and a
    racing duplicate insert stores the same value, so concurrent readers are
    safe. Pass a private dict to keep transient tuples out of the shared table;
    lookups then fall back to the shared table for pairs already known there.
    """
    if memo is None:
        return _dist(a, b, _memo, None)
    return _dist(a, b, memo, _memo)


def _dist(a, b, memo, fallback) -> Fraction:
    key = _key(a, b)
    v = memo.get(key)
    if v is None and fallback is not None:
        v = fallback.get(key)
    if v is not None:
        return v
    best = _ZERO
    for p, alpha in a.entries:
        d = _dist(p, b, memo, fallback) - alpha
        if d < 0:
            d = -d
        if d > best:
            best = d
    for q, beta in b.entries:
        d = _dist(a, q, memo, fallback) - beta
        if d < 0:
            d = -d
        if d > best:
            best = d
    memo[key] = best
    return best


def w_distance_naive(a: UrysohnTuple, b: UrysohnTuple) -> Fraction:
    """The same recursion without any cache; exponential in the ages."""
    cands = [abs(w_distance_naive(p, b) - alpha) for p, alpha in a.entries]
    cands += [abs(w_distance_naive(a, q) - beta) for q, beta in b.entries]
    return max(cands, default=_ZERO)


def memo_size() -> int:
    return len(_memo)


# ---------------------------------------------------------------------------
# permissibility


def permissibility_violation(
    entries: Sequence[tuple[UrysohnTuple, Fraction]], memo: Optional[dict] = None
) -> Optional[tuple[int, int]]:
    """First pair ``(i, j)`` breaking ``alpha_i - alpha_j <= d(a_i, a_j) <= alpha_i + alpha_j``."""
    n = len(entries)
    for i in range(n):
        pi, ai = entries[i]
        for j in range(i + 1, n):
            pj, aj = entries[j]
            d = w_distance(pi, pj, memo)
            if abs(ai - aj) > d or d > ai + aj:
                return i, j
    return None


def is_permissible(a: UrysohnTuple, memo: Optional[dict] = None) -> bool:
    if a._permissible is None:
        ok = all(is_permissible(p, memo) for p, _ in a.entries)
        ok = ok and permissibility_violation(a.entries, memo) is None
        a._permissible = ok
    return a._permissible


class UPoint:
    """A point of the rational Urysohn space, represented by a permissible tuple.

    Two points are equal when their representatives are at distance zero, so
    points are not hashable.
    """

    __slots__ = ("rep",)

    def __init__(self, rep: UrysohnTuple, check: bool = True):
        if check and not is_permissible(rep):
            raise DomainError(f"tuple {format_tuple(rep)} is not permissible")
        self.rep = rep

    def __eq__(self, other) -> bool:
        if not isinstance(other, UPoint):
            return NotImplemented
        return w_distance(self.rep, other.rep) == 0

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"UPoint({format_tuple(self.rep)})"


BASE_POINT = UPoint(EMPTY)


def u_distance(x: UPoint, y: UPoint) -> Fraction:
    return w_distance(x.rep, y.rep)


def _rep(x) -> UrysohnTuple:
    if isinstance(x, UPoint):
        return x.rep
    if isinstance(x, UrysohnTuple):
        return x
    raise DomainError(f"expected a Urysohn point, got {type(x).__name__}")


# ---------------------------------------------------------------------------
# exact extension


def extend_core(targets: Sequence[tuple[Any, Any]]) -> UPoint:
    """The point at the prescribed rational distances from the given core points.

    Raises ContractError naming the first pair ``(i, j)`` whose targets violate
    the triangle constraints.
    """
    entries = []
    for x, q in targets:
        if isinstance(q, Real) or isinstance(x, CompletionPoint):
            raise DomainError("extend_core takes core points and rational distances")
        entries.append((_rep(x), Fraction(q)))
    for p, q in entries:
        if q < 0:
            raise ContractError(f"negative target distance {q}")
        if not is_permissible(p):
            raise ContractError(f"target point {format_tuple(p)} is not permissible")
    bad = permissibility_violation(entries)
    if bad is not None:
        err = ContractError(f"targets {bad[0]} and {bad[1]} violate the triangle constraints")
        err.pair = bad  # type: ignore[attr-defined]
        raise err
    return UPoint(make_tuple(entries), check=False)


# ---------------------------------------------------------------------------
# enumeration


def _values_up_to(k: int) -> list[Fraction]:
    return sorted({Fraction(p, q) for p in range(k + 1) for q in range(1, k + 1)})


def rank(a: UrysohnTuple) -> int:
    """Smallest stage containing ``a``: bounds age, every length, numerator and denominator."""
    if a._rank is None:
        r = max(a.age, a.length)
        for p, q in a.entries:
            r = max(r, rank(p), q.numerator, q.denominator)
        a._rank = r
    return a._rank


def _stage_levels(k: int) -> Iterator[tuple[int, UrysohnTuple]]:
    """Permissible tuples of stage ``k``, by age level, each with its level."""
    if k == 0:
        yield 0, EMPTY
        return
    values = _values_up_to(k)
    levels: list[list[UrysohnTuple]] = [[EMPTY]]
    yield 0, EMPTY
    for age in range(1, k + 1):
        older = [p for lvl in levels for p in lvl]
        newest = set(id(p) for p in levels[-1])
        options = [(p, q) for p in older for q in values]
        current: list[UrysohnTuple] = []
        for length in range(1, k + 1):
            for combo in itertools.product(options, repeat=length):
                if not any(id(p) in newest for p, _ in combo):
                    continue
                if permissibility_violation(combo) is not None:
                    continue
                t = make_tuple(combo)
                t._permissible = True
                current.append(t)
                yield age, t
        if not current:
            return
        levels.append(current)


def enumerate_core(stage: int) -> list[UPoint]:
    """All permissible tuples with age, lengths, numerators and denominators at most ``stage``.

    Stages are cumulative. Stage 3 already has millions of candidates; use
    :func:`core_sequence` for lazy access to the flattened enumeration.
    """
    if stage < 0:
        raise DomainError("negative stage")
    return [UPoint(t, check=False) for _, t in _stage_levels(stage)]


class _CoreSequence:
    """Flattened enumeration: stage 0, then the new tuples of stage 1, of stage 2, ..."""

    def __init__(self):
        self._items: list[UrysohnTuple] = []
        self._gen = self._generate()
        self._lock = threading.Lock()

    @staticmethod
    def _generate():
        k = 0
        while True:
            for _, t in _stage_levels(k):
                if rank(t) == k:
                    yield t
            k += 1

    def __call__(self, i: int) -> UPoint:
        if i < 0:
            raise DomainError("negative index")
        with self._lock:
            while len(self._items) <= i:
                self._items.append(next(self._gen))
        return UPoint(self._items[i], check=False)


core_sequence = _CoreSequence()


def core_space() -> SeparableSpace:
    def dist(x, y):
        return Real.const(u_distance(x, y))

    def exact(x, y):
        return u_distance(x, y)

    return SeparableSpace(
        dist, core_sequence, None, None, False, "urysohn-core", exact=exact
    )


_space_cache: list[CompletionSpace] = []


def urysohn_space() -> CompletionSpace:
    if not _space_cache:
        _space_cache.append(complete(core_space()))
    return _space_cache[0]


def u_dist(p, q) -> Real:
    """Distance between two points of the Urysohn space (core points are embedded)."""
    return urysohn_space().dist(_lift(p), _lift(q))


def _lift(x) -> CompletionPoint:
    if isinstance(x, CompletionPoint):
        return x
    if isinstance(x, UrysohnTuple):
        x = UPoint(x)
    if isinstance(x, UPoint):
        return embed_dense(x)
    raise DomainError(f"not a Urysohn point: {type(x).__name__}")


# ---------------------------------------------------------------------------
# extension with real targets


def _real(v) -> Real:
    if isinstance(v, Real):
        return v
    if isinstance(v, float):
        raise DomainError("distances must be exact, not floats")
    return Real.const(Fraction(v))


def check_real_targets(targets: Sequence[tuple[Any, Any]], n: int) -> None:
    """Raise ContractError when the targets break permissibility by more than ``2^-n``."""
    pts = [_lift(x) for x, _ in targets]
    ws = [_real(w) for _, w in targets]
    tol = pow2(-n)
    for i in range(len(pts)):
        lo_i, hi_i = ws[i].interval(n + 3)
        if hi_i < -tol:
            raise ContractError(f"target {i} has a negative distance")
        for j in range(i + 1, len(pts)):
            lo_j, hi_j = ws[j].interval(n + 3)
            d_lo, d_hi = u_dist(pts[i], pts[j]).interval(n + 3)
            if max(lo_i - hi_j, lo_j - hi_i) > d_hi + tol or d_lo > hi_i + hi_j + tol:
                err = ContractError(f"targets {i} and {j} violate the triangle constraints")
                err.pair = (i, j)  # type: ignore[attr-defined]
                raise err


def approx_tuple(targets: Sequence[tuple[Any, Any]], eps) -> UrysohnTuple:
    """A permissible core tuple within ``eps`` of the exact solution.

    Each returned entry ``(a_i, alpha_i)`` has ``d(x_i, [a_i]) <= eps`` and
    ``|omega_i - alpha_i| <= eps``.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    n = len(targets)
    if n == 0:
        return EMPTY
    check_real_targets(targets, ceil_log2(8 / eps))
    lam = eps / (4 * n)
    pts = [_lift(x) for x, _ in targets]
    ws = [_real(w) for _, w in targets]

    # alpha_i = upper end of omega_i + 7 lam / 2. An interval narrower than
    # lam / 64 puts alpha_i - omega_i inside (3 lam, 4 lam) and keeps it
    # clear of 4 lam, so later interval checks against eps have room.
    prec = ceil_log2(1 / lam) + 6
    alphas = [w.upper(prec) + lam * Fraction(7, 2) for w in ws]

    m = max(0, ceil_log2(1 / lam))
    cores = [p.seq(m).rep for p in pts]
    memo: dict = {}

    def dd(i, j):
        base = w_distance(cores[i], cores[j], memo)
        return base if i == j else base + 3 * lam

    built: list[UrysohnTuple] = []
    for k in range(n):
        head = [(built[i], dd(k, i)) for i in range(k)]
        tail = max((abs(dd(k, j) - w_distance(cores[k], built[j], memo)) for j in range(k)),
                   default=Fraction(0))
        built.append(make_tuple(head + [(cores[k], tail)]))
    out = make_tuple(zip(built, alphas))
    if not is_permissible(out):
        raise ContractError("targets are not permissible (approximation failed the exact check)")
    return out


def extend_real(targets: Sequence[tuple[Any, Any]]) -> CompletionPoint:
    """Point of the Urysohn space at the given (real) distances from the given points.

    Term ``k`` is the class of :func:`approx_tuple` at ``eps = 2^-(k+3)``.
    """
    targets = list(targets)

    def term(k):
        return UPoint(approx_tuple(targets, pow2(-(k + 3))), check=False)

    return CompletionPoint(term)


def extend_point(targets: Sequence[tuple[Any, Any]]):
    """Exact route when every target is a core point with a rational distance."""
    exact = all(
        isinstance(x, (UPoint, UrysohnTuple)) and isinstance(q, (int, Fraction))
        for x, q in targets
    )
    if exact:
        return extend_core(targets)
    return extend_real(targets)


# ---------------------------------------------------------------------------
# isometric embeddings


def _index_of(X: SeparableSpace, x, limit: int) -> int:
    for k in range(limit):
        s = X.enum(k)
        if s is not None and s == x:
            return k
    raise DomainError(f"point {x!r} not found among the first {limit} enumerated points")


class _Embedding:
    """Lazily built values ``f(s_n)`` for the enumerated points of ``X``."""

    def __init__(self, X: SeparableSpace, limit: int):
        self.X = X
        self.limit = limit
        self.values: list = []
        self.first: dict[int, int] = {}  # enumeration index -> index of first equal point
        self.lock = threading.RLock()

    def exact(self) -> bool:
        return self.X.exact is not None

    def d(self, a, b):
        if self.X.exact is not None:
            return self.X.exact(a, b)
        return self.X.dist(a, b)

    def canonical(self, n: int) -> Optional[int]:
        """Index of the first enumerated point equal to ``s_n`` (hashable points only)."""
        s = self.X.enum(n)
        if s is None:
            return None
        try:
            hash(s)
        except TypeError:
            return n
        for k in range(n):
            t = self.X.enum(k)
            if t is not None and type(t) is type(s) and t == s:
                return k
        return n


def _point_dist(p, q) -> Real:
    if isinstance(p, UPoint) and isinstance(q, UPoint):
        return Real.const(u_distance(p, q))
    return u_dist(p, q)


def extend_finite_isometry(
    X: SeparableSpace, F: Sequence[tuple[Any, Any]], limit: int = 1 << 12
) -> MetricMap:
    """Isometry from the enumerated points of ``X`` into the Urysohn space extending ``F``.

    ``f(s_n)`` is the extension at distances ``d(s_n, y_i)`` from the images of
    ``F`` and ``d(s_n, s_j)`` from the earlier images ``f(s_j)``. Rational
    spaces with core targets stay in the exact core; otherwise terms are
    completion points. Points are located by searching the first ``limit``
    enumeration entries.
    """
    F = list(F)
    emb = _Embedding(X, limit)
    _check_partial_isometry(emb, F)

    def image(n):
        with emb.lock:
            while len(emb.values) <= n:
                m = len(emb.values)
                s = X.enum(m)
                if s is None:
                    emb.values.append(None)
                    continue
                c = emb.canonical(m)
                if c is not None and c < m:
                    emb.values.append(emb.values[c])
                    continue
                targets = [(e, emb.d(s, y)) for y, e in F]
                targets += [
                    (emb.values[j], emb.d(s, X.enum(j)))
                    for j in range(m)
                    if emb.values[j] is not None
                ]
                emb.values.append(extend_point(targets))
            return emb.values[n]

    def apply(x):
        v = image(_index_of(X, x, limit))
        return v

    f = MetricMap(apply, MapKind.ISOMETRY)
    f.image = image  # type: ignore[attr-defined]
    return f


def _check_partial_isometry(emb: _Embedding, F: list) -> None:
    for i in range(len(F)):
        for j in range(i + 1, len(F)):
            (x, ex), (y, ey) = F[i], F[j]
            dx = emb.d(x, y)
            if isinstance(dx, Fraction) and isinstance(ex, UPoint) and isinstance(ey, UPoint):
                if dx != u_distance(ex, ey):
                    raise ContractError(f"pins {i} and {j} are not isometric")
                continue
            dx_r = dx if isinstance(dx, Real) else Real.const(dx)
            du = _point_dist(_as_upoint(ex), _as_upoint(ey))
            lo, hi = (dx_r - du).interval(20)
            if lo > pow2(-18) or hi < -pow2(-18):
                raise ContractError(f"pins {i} and {j} are not isometric")


def _as_upoint(x):
    if isinstance(x, UrysohnTuple):
        return UPoint(x)
    return x


def embed_located(X: SeparableSpace, limit: int = 1 << 12):
    """Isometric embedding of ``X`` with a located image.

    Returns ``(f, l)`` where ``l(i)`` is the distance from the image to the
    ``i``-th core point ``u_i``. Each new image ``f(s_n)`` is placed no closer
    to ``u_i`` (``i < n``) than ``b_i = min_{k <= i} d(s_n, s_k) + d(f(s_k), u_i)``,
    so ``l(i) = min_{k <= i} d(f(s_k), u_i)`` never changes later.
    """
    if X.enum(0) is None:
        raise ContractError("embed_located needs an enumeration without absences")
    emb = _Embedding(X, limit)
    u = core_sequence

    def s(n):
        v = X.enum(n)
        if v is None:
            raise ContractError(f"enumeration entry {n} is absent")
        return v

    def du(p, i) -> Any:
        q = u(i)
        if isinstance(p, UPoint):
            return u_distance(p, q)
        return u_dist(p, q)

    def build(n):
        sn = s(n)
        c = emb.canonical(n)
        if c is not None and c < n:
            return emb.values[c]
        targets: list = [(emb.values[i], emb.d(sn, s(i))) for i in range(n)]
        exact = emb.exact() and all(isinstance(v, UPoint) for v in emb.values[:n])
        for i in range(n):
            b = _inf(
                [_plus(emb.d(sn, s(k)), du(emb.values[k], i)) for k in range(i + 1)], exact
            )
            gaps = [_absdiff(emb.d(sn, s(k)), du(emb.values[k], i)) for k in range(n)]
            targets.append((u(i), _sup(gaps + [b], exact)))
        return extend_point(targets)

    def image(n):
        with emb.lock:
            while len(emb.values) <= n:
                emb.values.append(build(len(emb.values)))
            return emb.values[n]

    def apply(x):
        return image(_index_of(X, x, limit))

    def l(i):
        image(i)
        vals = [du(emb.values[k], i) for k in range(i + 1)]
        if all(isinstance(v, Fraction) for v in vals):
            return Real.const(min(vals))
        return real_inf([_real(v) for v in vals])

    f = MetricMap(apply, MapKind.ISOMETRY)
    f.image = image  # type: ignore[attr-defined]
    return f, l


def _plus(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    return _real(a) + _real(b)


def _absdiff(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return abs(a - b)
    return abs(_real(a) - _real(b))


def _inf(vals: list, exact: bool):
    if all(isinstance(v, Fraction) for v in vals):
        return min(vals)
    return real_inf([_real(v) for v in vals])


def _sup(vals: list, exact: bool):
    if all(isinstance(v, Fraction) for v in vals):
        return max(vals)
    return real_sup([_real(v) for v in vals])


def image_distance(p, q) -> Real:
    """Distance between two images, exact when both are core points."""
    return _point_dist(p, q)
