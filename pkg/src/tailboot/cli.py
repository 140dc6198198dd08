"""Command-line entry point.

Exit codes: 0 success, 2 input or config error, 3 fit error, 4 a coverage
setup produced no intervals at all (outputs kept with a .partial suffix).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .bootstrap import bootstrap_ci
from .config import ConfigError, resolve
from .distributions import (GPD, ConfigurationError, EmpiricalBody, MixedPowerLaw, PowerLaw,
                            SeverityParseError, read_severities)
from .fitting import FitError, fit, parse_mode
from .matcher import GridSpec, match_gpd
from .reporting import run_configured, write_outputs
from .tail_risk import CatastropheSpec, max_equivalence_gap, true_p

EXIT_INPUT, EXIT_FIT, EXIT_PARTIAL = 2, 3, 4

log = logging.getLogger("tailboot")


def _g(x) -> str:
    return f"{x:.6g}"


def _mode_from(args):
    return parse_mode("est" if args.estimate or args.xmin is None else args.xmin)


def _load(path):
    try:
        return read_severities(path)
    except SeverityParseError as exc:
        raise _InputError(str(exc)) from None
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror}") from None


class _InputError(Exception):
    pass


def cmd_fit(args) -> int:
    data = _load(args.input)
    if data.size < 2:
        raise _InputError(f"{args.input}: need at least 2 severities, found {data.size}")
    res = fit(data, _mode_from(args), args.tail_floor, args.min_distinct)
    print(f"x_min   {_g(res.x_min)} ({res.xmin_mode})")
    print(f"alpha   {_g(res.alpha)}")
    print(f"n_tail  {res.n_tail} of {res.n}")
    print(f"ks      {_g(res.ks)}")
    if args.json:
        Path(args.json).write_text(json.dumps(dict(asdict(res), p_tail=res.p_tail), indent=2) + "\n")
    return 0


def _model_from(args):
    try:
        if args.model == "pl":
            return PowerLaw(args.xmin, args.alpha)
        if args.model == "gpd":
            return GPD(args.u, args.sigma, args.xi if args.xi is not None else 1 / (args.alpha - 1))
        if args.body is None:
            raise _InputError("--model mix needs --body")
        return MixedPowerLaw(EmpiricalBody(_load(args.body)), PowerLaw(args.xmin, args.alpha))
    except ConfigurationError as exc:
        raise _InputError(str(exc)) from None


def cmd_true_p(args) -> int:
    model = _model_from(args)
    spec = CatastropheSpec(args.cat, args.n)
    gx = args.gpd_xmin if args.model == "gpd" else None
    print(f"p     {true_p(model, spec, gx):.6f}")
    print(f"gap   {max_equivalence_gap(model, spec, gx):.6f}")
    return 0


def cmd_bootstrap_ci(args) -> int:
    data = _load(args.input)
    spec = CatastropheSpec(args.cat, args.n, args.level)
    res = bootstrap_ci(data, _mode_from(args), spec, args.B, args.seed, args.tail_floor, args.min_distinct,
                       args.ci_method)
    f = res.base_fit
    print(f"x_min={_g(f.x_min)} alpha={_g(f.alpha)} [{_g(res.ci_alpha[0])}, {_g(res.ci_alpha[1])}] "
          f"p={_g(res.p_hat)} [{_g(res.ci_p[0])}, {_g(res.ci_p[1])}] "
          f"B={res.B} level={_g(res.level)} failures={res.failures} seed={args.seed}")
    if args.dump:
        with open(args.dump, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["b", "alpha", "p"])
            for b, (a, p) in enumerate(zip(res.alpha_reps, res.p_reps)):
                w.writerow([b, repr(float(a)), repr(float(p))])
    return 0


def cmd_match_gpd(args) -> int:
    grid = GridSpec(args.xmin_lo, args.xmin_hi, args.xmin_step, args.alpha_lo, args.alpha_hi, args.alpha_step,
                    args.points, args.span)
    g = GPD(args.u, args.sigma, args.xi)
    try:
        res = match_gpd(g, grid)
    except ConfigurationError as exc:
        raise _InputError(str(exc)) from None
    spec = CatastropheSpec(args.cat, args.n)
    print(f"x_min     {_g(res.x_min)}")
    print(f"alpha     {_g(res.alpha)}")
    print(f"distance  {_g(res.distance)}")
    print(f"grid      {res.grid}")
    print(f"true_p    {true_p(g, spec, res.x_min):.6f}")
    return 0


def cmd_coverage(args) -> int:
    overrides = {
        "profile": args.profile, "R": args.R, "B": args.B, "n": args.n, "level": args.level, "cat": args.cat,
        "master_seed": args.seed, "output_dir": args.output_dir, "workers": args.workers,
        "models": args.models, "modes": args.modes, "body_file": args.body, "ci_method": args.ci_method,
    }
    try:
        cfg = resolve(args.config, overrides)
    except ConfigError as exc:
        raise _InputError(str(exc)) from None
    try:
        outcome = run_configured(cfg)
    except (SeverityParseError, ConfigurationError) as exc:
        raise _InputError(str(exc)) from None
    written = write_outputs(cfg, outcome)
    print(f"{'model':8s} {'x_min':6s} {'bias_a%':>8s} {'bias_p%':>8s} {'w_alpha':>8s} {'w_p':>8s}")
    for r in outcome.reports:
        print(f"{r.setup.model_name:8s} {r.setup.xmin_label:6s} {_g(r.bias_alpha):>8s} {_g(r.bias_p):>8s} "
              f"{_g(r.median_width_alpha):>8s} {_g(r.median_width_p):>8s}")
    for p in written:
        print(f"wrote {p}")
    if outcome.aborted:
        print(f"setups with no successful runs: {', '.join(outcome.aborted)}", file=sys.stderr)
        return EXIT_PARTIAL
    return 0


def _fit_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--xmin", type=float, help="fixed lower cutoff")
    g.add_argument("--estimate", action="store_true", help="estimate x_min by KS scan (default)")
    p.add_argument("--tail-floor", type=int, default=10, help="minimum tail size for candidate cutoffs")
    p.add_argument("--min-distinct", type=int, default=10)


def _spec_flags(p):
    p.add_argument("--cat", type=float, default=2749.0, help="catastrophe size (default 2749)")
    p.add_argument("--n", type=int, default=1000, help="events per history (default 1000)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tailboot", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a power-law tail to a severity file")
    p.add_argument("input")
    _fit_flags(p)
    p.add_argument("--json", help="also write the fit as JSON")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("true-p", help="catastrophe probability under a known model")
    p.add_argument("--model", choices=["pl", "gpd", "mix"], default="pl")
    p.add_argument("--xmin", type=float, default=10.0)
    p.add_argument("--alpha", type=float, default=2.4)
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--xi", type=float, help="GPD shape (default 1/(alpha-1))")
    p.add_argument("--gpd-xmin", type=float, help="cutoff the GPD is conditioned on (default 13.44)")
    p.add_argument("--body", help="severity file for the mixture body")
    _spec_flags(p)
    p.set_defaults(func=cmd_true_p)

    p = sub.add_parser("bootstrap-ci", help="bootstrap intervals for alpha and p")
    p.add_argument("input")
    _fit_flags(p)
    _spec_flags(p)
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.90)
    p.add_argument("--seed", type=int, default=20131)
    p.add_argument("--ci-method", choices=["percentile", "basic"], default="percentile")
    p.add_argument("--dump", help="write replicates as CSV (b, alpha, p)")
    p.set_defaults(func=cmd_bootstrap_ci)

    p = sub.add_parser("match-gpd", help="grid search for the power law closest to a GPD tail")
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=1 / 1.4)
    d = GridSpec()
    for name in ("xmin_lo", "xmin_hi", "xmin_step", "alpha_lo", "alpha_hi", "alpha_step", "span"):
        p.add_argument("--" + name.replace("_", "-"), type=float, default=getattr(d, name))
    p.add_argument("--points", type=int, default=d.points)
    _spec_flags(p)
    p.set_defaults(func=cmd_match_gpd)

    p = sub.add_parser("coverage", help="run the coverage study")
    p.add_argument("config", nargs="?", help="INI study config")
    p.add_argument("--profile", choices=["full", "desk"])
    p.add_argument("--R", type=int)
    p.add_argument("--B", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--level", type=float)
    p.add_argument("--cat", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir")
    p.add_argument("--workers", type=int)
    p.add_argument("--models", help="comma list of PL, PL-Mix, GPD")
    p.add_argument("--modes", help="comma list of given, est")
    p.add_argument("--body", help="severity file for PL-Mix")
    p.add_argument("--ci-method", choices=["percentile", "basic"])
    p.set_defaults(func=cmd_coverage)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ConfigurationError) as exc:
        if isinstance(exc, FitError):
            print(f"fit failed: {exc}", file=sys.stderr)
            return EXIT_FIT
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
