"""Command-line interface over finite rational metric spaces.

Exit codes: 0 success, 1 domain or contract failure, 2 I/O or parse error,
3 internal invariant failure, 4 search bound exhausted.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, TextIO

from .canonical import format_sequence, parse_sequence
from .completion import embed_dense
from .errors import CMetricError, ContractError, DomainError, InvariantError, ParseError
from .metric import FiniteRationalSpace, as_separable, load_fms
from .numerics import format_rational, parse_rational
from .reals import render_at
from .representations import decode, encode, hilbert_embed, quotient_build
from .urysohn import extend_core, extend_finite_isometry, format_encoding, format_tuple, u_distance
from . import verify as verify_mod

PREC_ENV = "CMETRIC_PREC"


@dataclass
class CliConfig:
    seed: int = 0
    precision: int = 10
    stage_bound: int = 64
    digits: Optional[int] = None  # None: exact output where possible
    flat: bool = False

    def __post_init__(self):
        if self.precision < 1:
            raise DomainError("precision must be at least 1")
        if self.digits is not None and self.digits < 1:
            raise DomainError("digits must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit natural number")


def default_precision() -> int:
    raw = os.environ.get(PREC_ENV)
    if raw is None:
        return 10
    try:
        return int(raw)
    except ValueError as exc:
        raise ParseError(f"{PREC_ENV}={raw!r} is not an integer") from exc


def _load(path: str) -> FiniteRationalSpace:
    with open(path, encoding="utf-8") as fh:
        return load_fms(fh.read())


def _number(q: Fraction, cfg: CliConfig) -> str:
    if cfg.digits is None:
        return format_rational(q)
    return f"{float(q):.{cfg.digits}f}"


def _tuple_text(t, cfg: CliConfig) -> str:
    return format_encoding(t) if cfg.flat else format_tuple(t)


# ---------------------------------------------------------------------------
# commands


def cmd_validate(path: str, cfg: CliConfig, out: TextIO) -> int:
    fs = _load(path)
    out.write(f"OK n={fs.size} diameter={_number(fs.exact_diameter(), cfg)}\n")
    return 0


def cmd_dist(path: str, i: int, j: int, cfg: CliConfig, out: TextIO) -> int:
    fs = _load(path)
    out.write(_number(fs.dist(i, j), cfg) + "\n")
    return 0


def _embed_images(fs: FiniteRationalSpace) -> list:
    f = extend_finite_isometry(as_separable(fs), [])
    return [f.image(i) for i in range(fs.size)]


def cmd_urysohn_embed(path: str, cfg: CliConfig, out: TextIO) -> int:
    fs = _load(path)
    images = _embed_images(fs)
    for p in images:
        out.write(_tuple_text(p.rep, cfg) + "\n")
    pairs = 0
    for i in range(fs.size):
        for j in range(i + 1, fs.size):
            if u_distance(images[i], images[j]) != fs.dist(i, j):
                raise InvariantError(f"embedding distorts the pair ({i}, {j})")
            pairs += 1
    out.write(f"VERIFIED {pairs} pairs\n")
    return 0


def cmd_urysohn_extend(path: str, base: list[int], dists: list[Fraction], cfg: CliConfig, out: TextIO) -> int:
    fs = _load(path)
    if len(base) != len(dists):
        raise DomainError(f"{len(base)} base points but {len(dists)} distances")
    for b in base:
        if not 0 <= b < fs.size:
            raise DomainError(f"base index {b} out of range for a {fs.size}-point space")
    images = _embed_images(fs)
    targets = [(images[b], q) for b, q in zip(base, dists)]
    p = extend_core(targets)
    out.write(_tuple_text(p.rep, cfg) + "\n")
    for b, q in zip(base, dists):
        got = u_distance(p, images[b])
        if got != q:
            raise InvariantError(f"extension misses base point {b}")
        out.write(f"d(E, f(s_{b})) = {_number(got, cfg)}\n")
    return 0


def cmd_hilbert(path: str, point: int, coords: int, cfg: CliConfig, out: TextIO) -> int:
    fs = _load(path)
    if fs.size == 0:
        raise DomainError("the space is empty")
    if not 0 <= point < fs.size:
        raise DomainError(f"point {point} out of range for a {fs.size}-point space")
    if coords < 0:
        raise DomainError("coordinate count must be nonnegative")
    H = hilbert_embed(as_separable(fs))
    e = H.embed(point)
    if coords:
        out.write(", ".join(render_at(e(n), cfg.precision) for n in range(coords)) + "\n")
    return 0


def cmd_baire_encode(path: str, point: int, cfg: CliConfig, out: TextIO) -> int:
    fs = _load(path)
    if fs.size == 0:
        raise DomainError("the space is empty")
    if not 0 <= point < fs.size:
        raise DomainError(f"point {point} out of range for a {fs.size}-point space")
    bq = quotient_build(as_separable(fs))
    x = embed_dense(point)
    alpha = encode(bq, x)
    out.write(format_sequence(alpha, cfg.stage_bound) + "\n")
    bound = bq.space.dist(decode(bq, alpha), x).upper(cfg.precision)
    out.write(f"roundtrip <= {_number(bound, cfg)} (target 2^-{cfg.precision})\n")
    return 0


def cmd_baire_decode(path: str, literal: str, cfg: CliConfig, out: TextIO) -> int:
    fs = _load(path)
    if fs.size == 0:
        raise DomainError("the space is empty")
    bq = quotient_build(as_separable(fs))
    alpha = parse_sequence(literal)
    try:
        bad = bq.first_violation(alpha, cfg.stage_bound)
    except ContractError:
        raise
    except CMetricError as exc:
        raise DomainError(f"code refers outside the space: {exc}") from exc
    if bad is not None:
        err = ContractError(f"code fails the step test at index {bad}")
        err.index = bad  # type: ignore[attr-defined]
        raise err
    out.write(f"step test holds through index {cfg.stage_bound - 1}\n")
    p = decode(bq, alpha)
    best = None
    for i in range(fs.size):
        up = bq.space.dist(p, embed_dense(i)).upper(cfg.precision)
        if best is None or up < best[1]:
            best = (i, up)
    assert best is not None
    out.write(f"nearest {best[0]} distance <= {_number(best[1], cfg)}\n")
    return 0


def cmd_verify(suite: str, trials: int, seed: int, out: TextIO) -> int:
    results = verify_mod.run(suite, trials, seed)
    out.write(verify_mod.report(results) + "\n")
    return 0 if all(c.ok for _, c in results) else 1


# ---------------------------------------------------------------------------
# argument parsing


def _index_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an index list: {text!r}") from exc


def _rational_list(text: str) -> list[Fraction]:
    text = text.strip()
    if not text:
        return []
    try:
        return [parse_rational(t) for t in text.split(",")]
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=int, default=None, help=f"binary precision (default ${PREC_ENV} or 10)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--stage-bound", type=int, default=64, help="terms to print or check")
    common.add_argument("--digits", type=int, default=None, help="print decimals instead of exact rationals")
    common.add_argument("--flat", action="store_true", help="print tuples as flat rational encodings")

    p = argparse.ArgumentParser(prog="cmetric", description="Queries on finite rational metric spaces.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check a distance matrix")
    s.add_argument("file")

    s = sub.add_parser("dist", parents=[common], help="print one matrix entry")
    s.add_argument("file")
    s.add_argument("i", type=int)
    s.add_argument("j", type=int)

    s = sub.add_parser("urysohn-embed", parents=[common], help="embed the space isometrically")
    s.add_argument("file")

    s = sub.add_parser("urysohn-extend", parents=[common], help="add a point at given distances")
    s.add_argument("file")
    s.add_argument("--base", type=_index_list, default=[], help="comma-separated point indices")
    s.add_argument("--dists", type=_rational_list, default=[], help="comma-separated rationals")

    s = sub.add_parser("hilbert", parents=[common], help="cube coordinates of a point")
    s.add_argument("file")
    s.add_argument("point", type=int)
    s.add_argument("coords", type=int)

    s = sub.add_parser("baire", parents=[common], help="sequence codes of points")
    s.add_argument("file")
    s.add_argument("mode", choices=("encode", "decode"))
    s.add_argument("arg", help="point index (encode) or sequence literal (decode)")

    s = sub.add_parser("verify", parents=[common], help="run seeded property suites")
    s.add_argument("suite", choices=verify_mod.SUITES + ("all",))
    s.add_argument("trials", type=int, nargs="?", default=None)
    s.add_argument("seed_pos", type=int, nargs="?", default=None, metavar="seed")
    s.add_argument("--trials", dest="trials_flag", type=int, default=None)
    return p


def main(argv: Optional[list[str]] = None, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        prec = args.prec if args.prec is not None else default_precision()
        cfg = CliConfig(seed=args.seed, precision=prec, stage_bound=args.stage_bound,
                        digits=args.digits, flat=args.flat)
        if cfg.stage_bound < 1:
            raise DomainError("stage bound must be at least 1")
        cmd = args.command
        if cmd == "validate":
            return cmd_validate(args.file, cfg, out)
        if cmd == "dist":
            return cmd_dist(args.file, args.i, args.j, cfg, out)
        if cmd == "urysohn-embed":
            return cmd_urysohn_embed(args.file, cfg, out)
        if cmd == "urysohn-extend":
            return cmd_urysohn_extend(args.file, args.base, args.dists, cfg, out)
        if cmd == "hilbert":
            return cmd_hilbert(args.file, args.point, args.coords, cfg, out)
        if cmd == "baire":
            if args.mode == "encode":
                try:
                    point = int(args.arg)
                except ValueError as exc:
                    raise ParseError(f"not a point index: {args.arg!r}") from exc
                return cmd_baire_encode(args.file, point, cfg, out)
            return cmd_baire_decode(args.file, args.arg, cfg, out)
        if cmd == "verify":
            trials = args.trials_flag if args.trials_flag is not None else args.trials
            seed = args.seed_pos if args.seed_pos is not None else args.seed
            return cmd_verify(args.suite, 10 if trials is None else trials, seed, out)
        raise ParseError(f"unknown command {cmd!r}")  # pragma: no cover
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except CMetricError as exc:
        err.write(f"error: {exc}\n")
        return exc.exit_code
    except RecursionError:
        err.write("error: recursion limit reached\n")
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
