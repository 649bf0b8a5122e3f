"""Exhaustive check that every small permissible tuple is at distance zero from itself.

The distance recursion reads a tuple's entries only through suprema over its
index set, so reordering or repeating entries never changes a distance. Every
tuple is therefore equivalent, for all distance purposes, to the tuple of its
distinct entries, and it suffices to check tuples whose entries form a set.

Tuples of the top age are far too many for the recursive implementation, so
they are evaluated in bulk with numpy: all distances are scaled to integers by
a common denominator, which keeps the arithmetic exact. A deterministic sample
of the bulk results is recomputed with :func:`w_distance`.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError
from .urysohn import EMPTY, UrysohnTuple, make_tuple, permissibility_violation, w_distance


@dataclass
class ExhaustiveReport:
    checked: int = 0
    pool_size: int = 0
    sampled: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures


def permissible_sets(values: Sequence[Fraction], max_age: int, max_length: int) -> list[UrysohnTuple]:
    """Permissible tuples with distinct entries, age below ``max_age``, sorted by age."""
    pool = [EMPTY]
    for _age in range(1, max_age):
        options = [(p, q) for p in pool for q in values]
        seen = {id(p) for p in pool}
        fresh = []
        for size in range(1, max_length + 1):
            for combo in itertools.combinations(options, size):
                if permissibility_violation(combo) is not None:
                    continue
                t = make_tuple(combo)
                if id(t) not in seen:
                    seen.add(id(t))
                    t._permissible = True
                    fresh.append(t)
        pool.extend(fresh)
    pool.sort(key=lambda t: t.age)
    return pool


def _cliques(adj: np.ndarray, size: int) -> Iterator[np.ndarray]:
    """Rows of increasing vertex ids forming cliques with 1..size vertices."""
    n = adj.shape[0]
    yield np.arange(n)[:, None]
    for s in range(2, size + 1):
        for v in range(n):
            cand = np.nonzero(adj[v, v + 1:])[0] + v + 1
            yield from _fixed_size(adj, (v,), cand, s)


def _fixed_size(adj, prefix, cand, s):
    if len(prefix) == s - 1:
        if cand.size:
            head = np.tile(np.array(prefix), (cand.size, 1))
            yield np.column_stack([head, cand])
        return
    for i, v in enumerate(cand):
        rest = cand[i + 1:]
        yield from _fixed_size(adj, prefix + (v,), rest[adj[v, rest]], s)


def _batched(rows: Iterator[np.ndarray], width: int, batch: int) -> Iterator[np.ndarray]:
    buf: list[np.ndarray] = []
    count = 0
    for r in rows:
        if r.shape[1] < width:  # pad by repeating the last entry
            r = np.column_stack([r] + [r[:, -1]] * (width - r.shape[1]))
        buf.append(r)
        count += r.shape[0]
        if count >= batch:
            yield np.concatenate(buf)
            buf, count = [], 0
    if buf:
        yield np.concatenate(buf)


def exhaustive_self_distance(
    values: Sequence, max_age: int = 3, max_length: int = 3,
    sample: int = 2000, seed: int = 0, batch: int = 1 << 19,
    only_permissible: bool = True,
) -> ExhaustiveReport:
    """Check ``d(a, a) = 0`` and ``d(a, a_i) = alpha_i`` for all permissible entry sets.

    Covers every tuple of age at most ``max_age`` and length at most
    ``max_length`` with distances from ``values``. With
    ``only_permissible=False`` the top level also includes non-permissible
    sets, which should then show up as failures.
    """
    if max_age < 1 or max_length < 1:
        raise DomainError("max_age and max_length must be positive")
    start = time.perf_counter()
    values = sorted({Fraction(v) for v in values})
    if any(v < 0 for v in values):
        raise DomainError("distances must be nonnegative")
    rep = ExhaustiveReport()
    pool = permissible_sets(values, max_age, max_length)
    rep.pool_size = len(pool)
    index = {id(p): i for i, p in enumerate(pool)}

    # exact pool distances on a common integer scale
    P = len(pool)
    dist = [[w_distance(a, b) for b in pool] for a in pool]
    scale = 1
    for row in dist:
        for q in row:
            scale = math.lcm(scale, q.denominator)
    for v in values:
        scale = math.lcm(scale, v.denominator)
    top = max(max(max(r) for r in dist), max(values))
    if top * scale * 4 >= 2**31:
        raise DomainError("values too large for the integer evaluation")
    D = np.array([[int(q * scale) for q in row] for row in dist], dtype=np.int64)

    options = [(p, v) for p in pool for v in values]
    opt_pred = np.array([index[id(p)] for p, _ in options], dtype=np.int64)
    opt_val = np.array([int(v * scale) for _, v in options], dtype=np.int64)
    Dopt = D[np.ix_(opt_pred, opt_pred)]
    va, vb = opt_val[:, None], opt_val[None, :]
    adj = (np.abs(va - vb) <= Dopt) & (Dopt <= va + vb)
    if not only_permissible:
        adj[:] = True
    np.fill_diagonal(adj, False)

    # |d(x, p) - alpha| for every pool tuple x and option (p, alpha)
    dtype = np.int16 if top * scale * 4 < 2**15 else np.int32
    M = np.abs(D[:, opt_pred] - opt_val[None, :]).astype(dtype)

    # tuples young enough to occur below a predecessor are evaluated for every row
    inner = [i for i, t in enumerate(pool) if t.age < max_age - 1]
    inner_pos = {i: k for k, i in enumerate(inner)}
    E = max(1, max(t.length for t in pool))
    child = np.zeros((P, E), dtype=np.int64)
    gamma = np.zeros((P, E), dtype=dtype)
    has = np.array([bool(t.entries) for t in pool])
    for pi, t in enumerate(pool):
        ents = list(t.entries) + [t.entries[-1]] * (E - t.length) if t.entries else []
        for e_i, (c, gm) in enumerate(ents):
            child[pi, e_i] = inner_pos[index[id(c)]]
            gamma[pi, e_i] = int(gm * scale)

    rng = np.random.default_rng(seed)
    for rows in _batched(_cliques(adj, max_length), max_length, batch):
        preds = opt_pred[rows]
        alphas = opt_val[rows].astype(dtype)
        B, L = rows.shape
        # distances from the young tuples to the row's tuple, oldest last
        g_in = np.zeros((B, len(inner)), dtype=dtype)
        for k, i in enumerate(inner):
            val = M[i][rows].max(axis=1)
            if has[i]:
                for e in range(E):
                    np.maximum(val, np.abs(g_in[:, child[i, e]] - gamma[i, e]), out=val)
            g_in[:, k] = val
        to_pred = M[preds[:, :, None], rows[:, None, :]].max(axis=2)
        for e in range(E):
            sub = np.abs(np.take_along_axis(g_in, child[preds, e], axis=1) - gamma[preds, e])
            np.maximum(to_pred, np.where(has[preds], sub, 0).astype(dtype), out=to_pred)
        self_d = np.abs(to_pred - alphas).max(axis=1)
        bad = np.nonzero((self_d != 0) | (to_pred != alphas).any(axis=1))[0]
        for b in bad[:20]:
            rep.failures.append(_describe(options, rows[b]))
        rep.checked += B

        # recompute a share of the sample with the recursive implementation
        take = min(B, max(1, sample * B // max(1, 20_000_000)))
        for b in rng.choice(B, size=take, replace=False):
            rep.sampled += 1
            a = make_tuple([options[o] for o in rows[b]], intern=False)
            memo: dict = {}
            ref = [w_distance(a, p, memo) for p, _ in a.entries]
            if any(Fraction(int(x), scale) != r for x, r in zip(to_pred[b], ref)):
                rep.failures.append(("bulk/recursive mismatch", _describe(options, rows[b])))
            if w_distance(a, a, memo) != Fraction(int(self_d[b]), scale):
                rep.failures.append(("bulk/recursive mismatch", _describe(options, rows[b])))
    rep.checked += 1  # the empty tuple, whose self-distance is an empty supremum
    rep.seconds = time.perf_counter() - start
    return rep


def _describe(options, row) -> str:
    from .urysohn import format_tuple

    uniq = list(dict.fromkeys(int(o) for o in row))
    return format_tuple(make_tuple([options[o] for o in uniq], intern=False))
