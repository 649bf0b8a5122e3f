"""Seeded random inputs: rational metrics, tuples, target lists, sequences.

Every generator takes a :class:`random.Random` so that a seed fixes the output.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .metric import FiniteRationalSpace, validate_matrix
from .urysohn import EMPTY, UPoint, UrysohnTuple, make_tuple, u_distance


def random_rational(rng: random.Random, max_num: int = 8, max_den: int = 4, positive: bool = False) -> Fraction:
    lo = 1 if positive else 0
    return Fraction(rng.randint(lo, max_num), rng.randint(1, max_den))


def random_metric(rng: random.Random, n: int, max_num: int = 8, max_den: int = 4) -> FiniteRationalSpace:
    """Random rational metric: positive random weights closed under shortest paths.

    Shortest-path closure keeps every distance positive and enforces the
    triangle inequality, so the result always validates.
    """
    d = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d[i][j] = d[j][i] = random_rational(rng, max_num, max_den, positive=True)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                via = d[i][k] + d[k][j]
                if via < d[i][j]:
                    d[i][j] = via
    return validate_matrix(d)


def random_tuple(
    rng: random.Random, max_age: int, max_length: int, values: Optional[list] = None
) -> UrysohnTuple:
    """A random tuple (usually not permissible) of age at most ``max_age``."""
    if values is None:
        values = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3, 2)]
    if max_age == 0:
        return EMPTY
    length = rng.randint(0, max_length)
    entries = [
        (random_tuple(rng, rng.randint(0, max_age - 1), max_length, values), rng.choice(values))
        for _ in range(length)
    ]
    return make_tuple(entries)


def feasible_interval(points: list, dists: list, x) -> tuple[Fraction, Fraction]:
    """Range of distances from ``x`` that keep the target list permissible."""
    lo, hi = Fraction(0), None
    for p, w in zip(points, dists):
        d = u_distance(p, x)
        lo = max(lo, d - w, w - d)
        hi = d + w if hi is None else min(hi, d + w)
    return lo, hi


def random_targets(rng: random.Random, pool: list, n: int, steps: int = 4) -> list:
    """Random permissible ``(UPoint, rational)`` list of length ``n`` over ``pool``.

    Each new distance is drawn from a grid on the interval allowed by the
    earlier targets, so the list is permissible by construction.
    """
    pts: list = []
    ws: list = []
    for _ in range(n):
        x = rng.choice(pool)
        lo, hi = feasible_interval(pts, ws, x)
        if hi is None:
            w = random_rational(rng)
        else:
            w = lo + (hi - lo) * Fraction(rng.randint(0, steps), steps)
        pts.append(x)
        ws.append(w)
    return list(zip(pts, ws))


def random_eventually_constant(rng: random.Random, alphabet: int = 3, max_prefix: int = 12) -> list:
    """A prefix whose last value repeats forever."""
    return [rng.randrange(alphabet) for _ in range(rng.randint(1, max_prefix))]


def random_upoint(rng: random.Random, pool: list) -> UPoint:
    return rng.choice(pool)
