"""Command-line entry point: ``poisson-predictive <command> [flags]``.

Every command writes CSV (with ``# key: value`` provenance comments) or
JSON (with a ``metadata`` object).  Exit codes: 0 success, 2 usage error,
3 guard refusal, 4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import json
import math
import shlex
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from functools import partial

from . import __version__
from .blyth import BlythConfig, bayes_risk_gap, gap_upper_bound
from .errors import DomainError, EvaluationError, GuardError, IntegrationError
from .model import MeanVector, ModelConfig, jeffreys, make_prior, shrinkage_s
from .numerics.poisson import poisson_expectation
from .numerics.rng import RngStream
from .numerics.special import log_gamma
from .numerics.tolerance import Tolerance
from .predictive import PredictivePmfSpec, predictive_table, sample_predictive
from .risk import (
    RiskEstimate,
    brute_full_risk,
    exact_total_risk,
    mc_full_risk,
    plugin_total_risk,
    risk_difference,
)

PROG = "poisson-predictive"
EXIT_USAGE = 2
EXIT_GUARD = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    pass


# ------------------------------------------------------------ flag parsing


def parse_floats(text: str) -> list[float]:
    try:
        return [_parse_real(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _parse_real(tok: str) -> float:
    tok = tok.strip()
    if tok == "e":
        return math.e
    return float(tok)


def parse_ints(text: str) -> list[int]:
    vals = parse_floats(text)
    if any(v != int(v) for v in vals):
        raise UsageError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def parse_grid(text: str) -> list[float]:
    """``lo:hi:step`` to an inclusive grid, each point computed as ``lo + i*step``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"grid must look like lo:hi:step, got {text!r}") from None
    if not step > 0 or hi < lo or lo < 0:
        raise UsageError(f"grid needs 0 <= lo <= hi and step > 0, got {text!r}")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [lo + i * step for i in range(n + 1)]


def parse_prior(text: str, d: int):
    if text == "jeffreys":
        return jeffreys(d)
    if text == "shrinkage":
        return shrinkage_s(d)
    if text.startswith("custom:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"custom prior must look like custom:<alpha>:<b1,...,bd>, got {text!r}")
        try:
            alpha = float(parts[1])
        except ValueError:
            raise UsageError(f"bad alpha in {text!r}") from None
        beta = parse_floats(parts[2])
        if len(beta) != d:
            raise UsageError(f"custom prior has {len(beta)} beta values but --d is {d}")
        return make_prior(alpha, beta)
    raise UsageError(f"unknown prior {text!r} (use jeffreys, shrinkage or custom:<alpha>:<betas>)")


# ------------------------------------------------------------------ output


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    return format(float(v), ".17g")


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render(fmt: str, meta: dict, header: list[str], rows: list[list], comments=(), result=None) -> str:
    if fmt == "json":
        body = result if result is not None else [dict(zip(header, r)) for r in rows]
        doc = {"metadata": {**meta, "notes": list(comments)}, "result": body}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    lines = [f"# {k}: {json.dumps(_jsonable(v), sort_keys=True) if isinstance(v, dict) else v}"
             for k, v in meta.items()]
    lines += [f"# {c}" for c in comments]
    lines.append(",".join(header))
    lines += [",".join(_fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def metadata(args, argv, **extra) -> dict:
    meta = {
        "command": " ".join(shlex.quote(a) for a in [PROG, *argv]),
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "tolerance": tolerance_from(args).as_dict(),
    }
    meta.update(extra)
    meta["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return meta


def tolerance_from(args) -> Tolerance:
    return Tolerance(abs_tol=args.abs_tol, rel_tol=args.rel_tol, tail_mass=args.tail_mass)


def grid_map(fn, items, jobs: int):
    # results come back in input order whatever the completion order
    if jobs <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- commands


def cmd_predict(args, argv) -> str:
    model = ModelConfig(args.d, args.a, args.b)
    prior = parse_prior(args.prior, args.d)
    x = parse_ints(args.x)
    spec = PredictivePmfSpec(prior, model, x)
    ycols = [f"y{i + 1}" for i in range(args.d)]
    if args.sample is not None:
        if args.sample < 0:
            raise UsageError("--sample must be >= 0")
        draws = sample_predictive(spec, args.sample, RngStream(args.seed))
        header = ["draw", *ycols]
        rows = [[i, *y.values] for i, y in enumerate(draws)]
    else:
        table = predictive_table(spec, args.table_coverage)
        header = [*ycols, "probability"]
        rows = [[*y.values, p] for y, p in table]
    meta = metadata(args, argv, d=args.d, a=args.a, b=args.b, prior=prior.label(), x=",".join(map(str, x)))
    return render(args.format, meta, header, rows)


def _figure1_row(item, a, b, tol):
    mu, d = item
    if d >= 3:
        return risk_difference(d / 2.0 - 1.0, a, b, mu, tol)
    # below d = 3 the difference can be zero or negative; use the 1-D route
    return exact_total_risk(jeffreys(d).c, a, b, mu, tol) - exact_total_risk(0.0, a, b, mu, tol)


def cmd_figure1(args, argv) -> str:
    ds = parse_ints(args.d)
    if any(d < 1 for d in ds):
        raise UsageError("--d entries must be >= 1")
    grid = parse_grid(args.mu_grid)
    tol = tolerance_from(args)
    items = [(mu, d) for d in ds for mu in grid]
    values = grid_map(partial(_figure1_row, a=args.a, b=args.b, tol=tol), items, args.jobs)
    notes = [f"advisory: d={d} < 3, domination is not guaranteed" for d in ds if d < 3]
    meta = metadata(args, argv, a=args.a, b=args.b, priors="jeffreys minus shrinkage",
                    exposures_note="a = b = 1 unless given")
    rows = [[mu, d, v] for (mu, d), v in zip(items, values)]
    return render(args.format, meta, ["mu", "d", "delta"], rows, notes)


def _risk_lambda(args) -> MeanVector:
    if args.lambda_ is not None:
        lam = parse_floats(args.lambda_)
        if len(lam) != args.d:
            raise UsageError(f"--lambda has {len(lam)} entries but --d is {args.d}")
        return MeanVector(lam)
    if args.mu is None:
        raise UsageError("give --lambda or --mu")
    return MeanVector([args.mu / args.d] * args.d)


def cmd_risk(args, argv) -> str:
    model = ModelConfig(args.d, args.a, args.b)
    prior = parse_prior(args.prior, args.d)
    lam = _risk_lambda(args)
    tol = tolerance_from(args)
    notes = []
    if args.lambda_ is None and args.method != "exact":
        notes.append("lambda taken as mu/d in every coordinate")
    if args.method == "exact":
        value = exact_total_risk(prior.c, model.a, model.b, lam.mu, tol)
        est = RiskEstimate(value, 0.0, "exact-1d", diagnostics={"quantity": "risk of the totals predictive"})
    elif args.method == "brute":
        est = RiskEstimate(brute_full_risk(prior, model, lam, tol), 0.0, "brute-force")
    else:
        if args.n < 1:
            raise UsageError("--n must be >= 1")
        est = mc_full_risk(prior, model, lam, args.n, RngStream(args.seed), tol)
    meta = metadata(args, argv, d=args.d, a=args.a, b=args.b, prior=prior.label(),
                    lambdas=",".join(_fmt(v) for v in lam.lambdas))
    rec = est.as_dict()
    header = ["value", "std_error", "method", "n_samples"]
    return render(args.format, meta, header, [[rec[k] for k in header]], notes, result=rec)


def _theorem5_row(mu, a, b, tol):
    plug = plugin_total_risk(a, b, mu, tol)
    bayes = exact_total_risk(0.0, a, b, mu, tol)
    return [mu, plug, bayes, plug - bayes]


def cmd_theorem5(args, argv) -> str:
    grid = parse_grid(args.mu_grid)
    rows = grid_map(partial(_theorem5_row, a=args.a, b=args.b, tol=tolerance_from(args)), grid, args.jobs)
    meta = metadata(args, argv, a=args.a, b=args.b)
    return render(args.format, meta, ["mu", "plugin_risk", "bayes_risk", "gap"], rows)


def _blyth_row(l, c, a, b, tol):
    cfg = BlythConfig(l, c, a, b, tol)
    gap = bayes_risk_gap(cfg)
    bound = gap_upper_bound(cfg)
    return [l, gap, bound, gap / bound]


def cmd_blyth(args, argv) -> str:
    if not 0.0 <= args.c < 1.0:
        raise UsageError(f"--c must lie in [0, 1), got {args.c!r}")
    ls = parse_floats(args.l)
    if any(not l > 1 for l in ls):
        raise UsageError("--l entries must be > 1")
    fn = partial(_blyth_row, c=args.c, a=args.a, b=args.b, tol=tolerance_from(args))
    rows = grid_map(fn, ls, args.jobs)
    meta = metadata(args, argv, c=args.c, a=args.a, b=args.b)
    return render(args.format, meta, ["l", "gap", "bound", "ratio"], rows)


def large_b_limit(d: int, a: float, mu: float, tol: Tolerance) -> float:
    """``E[log Gamma(X + d/2) - log Gamma(X + 1)] - (d/2 - 1) log(a mu)``, ``X ~ Poisson(a mu)``."""
    shift = d / 2.0 - 1.0
    mean = poisson_expectation(lambda k: log_gamma(k + 1.0 + shift) - log_gamma(k + 1.0),
                               a * mu, tol, vectorized=True)
    return mean - shift * math.log(a * mu)


def cmd_asymptotics(args, argv) -> str:
    if args.d < 3:
        raise UsageError("--d must be >= 3 for the large-b comparison")
    if args.mu < 0:
        raise UsageError("--mu must be >= 0")
    bs = parse_floats(args.b_grid)
    tol = tolerance_from(args)
    delta = args.d / 2.0 - 1.0
    rows = []
    notes = []
    if args.mu == 0.0:
        notes.append("mu = 0: the difference grows like log(b); no finite limit")
        for b in bs:
            v = risk_difference(delta, args.a, b, 0.0, tol)
            rows.append([b, v, v, "log-divergent"])
    else:
        limit = large_b_limit(args.d, args.a, args.mu, tol)
        for b in bs:
            v = risk_difference(delta, args.a, b, args.mu, tol)
            rows.append([b, v, limit, abs(v - limit)])
    meta = metadata(args, argv, d=args.d, a=args.a, mu=args.mu)
    return render(args.format, meta, ["b", "delta", "delta_limit", "abs_err"], rows, notes)


# ------------------------------------------------------------------ parser


def _common(p: argparse.ArgumentParser, default_format: str = "csv") -> None:
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--tail-mass", type=float, default=1e-12)


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--prior", required=True, help="jeffreys | shrinkage | custom:<alpha>:<b1,...,bd>")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="predictive pmf table or exact samples")
    _model_flags(p)
    p.add_argument("--x", required=True, help="observed counts, comma-separated")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--table-coverage", type=float)
    mode.add_argument("--sample", type=int)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(run=cmd_predict)

    p = sub.add_parser("figure1", help="risk difference of Jeffreys over shrinkage along mu")
    p.add_argument("--d", default="3,5,8,12")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--mu-grid", default="0:10:0.1")
    p.add_argument("--jobs", type=int, default=1)
    _common(p)
    p.set_defaults(run=cmd_figure1)

    p = sub.add_parser("risk", help="risk at one mean vector")
    _model_flags(p)
    p.add_argument("--method", choices=("exact", "mc", "brute"), default="exact")
    p.add_argument("--lambda", dest="lambda_")
    p.add_argument("--mu", type=float)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _common(p, default_format="json")
    p.set_defaults(run=cmd_risk)

    p = sub.add_parser("theorem5", help="plug-in versus shrinkage-Bayes totals risk")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--mu-grid", default="0:10:0.1")
    p.add_argument("--jobs", type=int, default=1)
    _common(p)
    p.set_defaults(run=cmd_theorem5)

    p = sub.add_parser("blyth", help="Bayes-risk gap against truncated priors")
    p.add_argument("--l", default="10,100,10000")
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--jobs", type=int, default=1)
    _common(p)
    p.set_defaults(run=cmd_blyth)

    p = sub.add_parser("asymptotics", help="risk difference as the future exposure grows")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--b-grid", default="1,10,100,1000,10000,100000,1000000")
    _common(p)
    p.set_defaults(run=cmd_asymptotics)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = args.run(args, argv)
        write(text, args.out)
    except (UsageError, DomainError) as exc:
        print(f"{PROG} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GuardError as exc:
        print(f"{PROG} {args.command}: refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (IntegrationError, EvaluationError) as exc:
        print(f"{PROG} {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0
