"""Command-line front end.

Subcommands::

    acf     closed-form convergence factor (and momentum parameters) of a shape
    oracle  Lawson minimax estimate for a shape, degree and grid
    rate    predicted and fitted rate of one method on one game
    solve   run one method and write its distance trace as CSV
    bench   full benchmark over dimensions, one CSV (plus JSON sidecar) each

Exit status is 0 on success, 1 on a usage error and 2 when a numeric
precondition fails.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bench, oracle, shapes
from .errors import SpectralGamesError
from .games import LinearGame, bilinear_with_singular_values, consensus_bounds, make_bilinear
from .methods import Family, derive_params, fit_rate, predicted_rate, run

SEED_ENV = "SPECTRAL_GAMES_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _add_shape_args(p):
    p.add_argument("--shape", required=True, choices=["segment", "disc", "ellipse", "imagcross"])
    for name in ("mu", "L", "a", "b", "c", "r"):
        p.add_argument(f"--{name}", type=float)


def _shape_from_args(args) -> shapes.SpectralShape:
    need = {"segment": ("mu", "L"), "disc": ("c", "r"), "ellipse": ("a", "b", "c"), "imagcross": ("a", "b")}[args.shape]
    missing = [n for n in need if getattr(args, n) is None]
    if missing:
        raise UsageError(f"--shape {args.shape} needs " + ", ".join(f"--{n}" for n in missing))
    vals = [getattr(args, n) for n in need]
    return {"segment": shapes.Segment, "disc": shapes.Disc, "ellipse": shapes.Ellipse,
            "imagcross": shapes.ImagCross}[args.shape](*vals)


def _fmt(x: float, digits: int) -> str:
    return f"{x:.{digits}g}"


def cmd_acf(args, out) -> int:
    K = _shape_from_args(args)
    print(f"rho={_fmt(shapes.acf(K), args.digits)}", file=out)
    if not isinstance(K, shapes.ImagCross):
        p = shapes.optimal_momentum(K)
        print(f"alpha={_fmt(p.alpha, args.digits)}", file=out)
        print(f"beta={_fmt(p.beta, args.digits)}", file=out)
    return 0


def cmd_oracle(args, out) -> int:
    K = _shape_from_args(args)
    n = oracle.default_grid(args.degree) if args.grid is None else args.grid
    res = oracle.lawson_minimax(oracle.sample_boundary(K, n), args.degree, max_iters=args.max_iters)
    print(f"acf_estimate={_fmt(res.acf_estimate, args.digits)}", file=out)
    print(f"max_abs={_fmt(res.max_abs, args.digits)}", file=out)
    print(f"grid_size={res.grid_size}", file=out)
    print(f"iterations_used={res.iterations_used}", file=out)
    print(f"converged={str(res.converged).lower()}", file=out)
    return 0


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in ("eta", "alpha", "beta", "tau") if getattr(args, k, None) is not None}


def _game_and_spec(args):
    """Game plus method spec from either explicit spectral bounds or a seeded bilinear game."""
    fam = Family(args.method)
    extra = _overrides(args)
    if args.a is not None and args.b is not None:
        game = bilinear_with_singular_values(np.linspace(args.a, args.b, args.dim // 2), seed=args.seed)
        return game, _spec_for_bilinear(fam, args.a, args.b, extra)
    if args.mu is not None and args.L is not None:
        d = args.dim
        game = LinearGame(np.diag(np.linspace(args.mu, args.L, d)),
                          np.random.default_rng(args.seed).standard_normal(d))
        if fam in (Family.CONSENSUS, Family.CONSENSUS_MOMENTUM):
            gamma, mu, L = consensus_bounds(game.A)
            return game, derive_params(fam, gamma=gamma, mu=mu, L=L, **extra)
        if fam in (Family.GRADIENT, Family.MOMENTUM):
            return game, derive_params(fam, mu=args.mu, L=args.L, **extra)
        return game, derive_params(fam, a=args.mu, b=args.L, **extra)
    game = make_bilinear(args.dim // 2, args.cond, args.seed)
    a, b = game.singular_bounds
    return game, _spec_for_bilinear(fam, a, b, extra)


def _spec_for_bilinear(fam, a, b, extra):
    if fam in (Family.CONSENSUS, Family.CONSENSUS_MOMENTUM):
        return derive_params(fam, gamma=a, mu=0.0, L=b, **extra)
    if fam in (Family.GRADIENT, Family.MOMENTUM):
        if "eta" not in extra and fam is Family.GRADIENT:
            extra = dict(extra, eta=1 / b)
        if fam is Family.MOMENTUM and not {"alpha", "beta"} <= extra.keys():
            raise UsageError("momentum on a bilinear game needs explicit --alpha and --beta")
        return derive_params(fam, **extra)
    return derive_params(fam, a=a, b=b, **extra)


def _omega0(game, seed):
    if getattr(game, "omega0", None) is not None:
        return game.omega0
    return np.random.default_rng(seed + 1).standard_normal(game.dim)


def cmd_rate(args, out) -> int:
    game, spec = _game_and_spec(args)
    rho = predicted_rate(spec, game)
    trace = run(spec, game, _omega0(game, args.seed), args.iters)
    print(f"predicted_rate={_fmt(rho, args.digits)}", file=out)
    if trace.diverged:
        print("fitted_rate=inf", file=out)
        print("diverged=true", file=out)
    else:
        # fit the second half of the decay, stopping before the rounding floor
        d = trace.distances
        end = int(np.flatnonzero(d > 1e-10 * d[0])[-1])
        end = max(end, 2)
        fitted = fit_rate(trace, (end // 2, end))
        print(f"fitted_rate={_fmt(fitted, args.digits)}", file=out)
    for k, v in spec.hyper.items():
        print(f"{k}={_fmt(v, args.digits)}", file=out)
    return 0


def cmd_solve(args, out) -> int:
    game, spec = _game_and_spec(args)
    trace = run(spec, game, _omega0(game, args.seed), args.iters)
    table = np.column_stack([np.arange(trace.distances.size), trace.distances])
    text = bench.format_csv(["iteration", "distance"], table)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        print(f"wrote {args.out} ({trace.distances.size} rows, diverged={str(trace.diverged).lower()})", file=out)
    else:
        out.write(text)
    return 0


def cmd_bench(args, out) -> int:
    values = {}
    if args.config:
        try:
            values.update(bench.parse_config(Path(args.config).read_text()))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    if "seed" not in values:
        values["seed"] = default_seed()
    for key in ("cond", "iters", "seed", "output_dir", "jobs"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    if args.dim:
        values["dims"] = args.dim
    if args.methods:
        values["methods"] = [m.strip() for m in args.methods.split(",") if m.strip()]
    if args.plot:
        values["emit_plot"] = True
    for item in args.set or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        values[key.strip()] = float(val)
    try:
        cfg = bench.config_from_mapping(values)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    if args.out and len(cfg.dims) != 1:
        raise UsageError("--out needs exactly one --dim")
    for dim in cfg.dims:
        result = bench._run_dim(dim, cfg)
        path = Path(args.out) if args.out else Path(cfg.output_dir) / f"xp-{dim}.csv"
        bench.write_result(result, path)
        msg = f"wrote {path}"
        if cfg.emit_plot:
            svg = bench.emit_plot(result, path.with_suffix(".svg"))
            msg += f" and {svg}"
        print(msg, file=out)
        for col, err in result.metadata["errors"].items():
            print(f"warning: {col} skipped: {err}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spectral-games", description="Spectral analysis and solvers for linear games.")
    parser.add_argument("--digits", type=int, default=6, help="significant digits in printed numbers")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("acf", help="closed-form convergence factor of a shape")
    _add_shape_args(p)
    p.set_defaults(func=cmd_acf)

    p = sub.add_parser("oracle", help="Lawson minimax estimate of the convergence factor")
    _add_shape_args(p)
    p.add_argument("--degree", "-t", type=int, required=True)
    p.add_argument("--grid", "-n", type=int)
    p.add_argument("--max-iters", type=int, default=500)
    p.set_defaults(func=cmd_oracle)

    for name, func, helptext in (("rate", cmd_rate, "predicted and fitted rate"),
                                 ("solve", cmd_solve, "run one method, write its trace")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--method", required=True, choices=[f.value for f in Family])
        p.add_argument("--dim", type=int, default=100)
        p.add_argument("--cond", type=float, default=100.0)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--iters", type=int, default=1000)
        for bound in ("a", "b", "mu", "L", "eta", "alpha", "beta", "tau"):
            p.add_argument(f"--{bound}", type=float)
        if name == "solve":
            p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("bench", help="benchmark all methods on seeded bilinear games")
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--dim", type=int, action="append", help="repeatable; default 100, 500, 1000")
    p.add_argument("--cond", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--methods", help="comma-separated columns: " + ",".join(bench.DEFAULT_METHODS))
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--out", help="CSV path (single --dim only)")
    p.add_argument("--plot", action="store_true", help="also write an SVG per dimension")
    p.add_argument("--jobs", type=int)
    p.add_argument("--set", action="append", metavar="METHOD.PARAM=VALUE", help="hyperparameter override")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", 0) is None and args.command in ("rate", "solve"):
            args.seed = default_seed()
        if args.command in ("rate", "solve") and args.dim % 2:
            raise UsageError("--dim must be even")
        return args.func(args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SpectralGamesError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
