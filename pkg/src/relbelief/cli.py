"""Command-line interface.

Exit codes: 0 success, 1 a ``--fail-on`` gate tripped, 2 input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__, kernels
from .bias import BiasSpec, bias_report, design_scan, write_design_csv
from .checks import check_prior
from .elicitation import ElicitationSpec, Hyperparameters, el4_residuals, elicit
from .errors import DomainError, NumericError, RelBeliefError
from .relative_belief import MODES, analyze, density_table, difference_laws, interval_hypothesis_rb, write_rb_csv
from .trial_data import check_model, qq_table, read_csv, sufficient_stats

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_GATE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("relbelief")


class InputError(RelBeliefError):
    pass


def _clean(obj):
    """Replace non-finite floats with None so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def load_prior(text) -> Hyperparameters:
    """Prior from a JSON file path, an inline JSON object, or ``mu0,tau0_sq,alpha0,beta0``."""
    p = Path(text)
    try:
        if p.suffix == ".json" or p.exists():
            return Hyperparameters.from_dict(json.loads(p.read_text()))
        if text.lstrip().startswith("{"):
            return Hyperparameters.from_dict(json.loads(text))
        parts = [float(v) for v in text.split(",")]
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise InputError(f"cannot read prior {text!r}: {exc}") from None
    if len(parts) != 4:
        raise InputError("inline prior needs four comma-separated numbers")
    return Hyperparameters(*parts)


def _load_data(path):
    if not Path(path).is_file():
        raise InputError(f"data file not found: {path}")
    return read_csv(path)


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _n_pair(text):
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sample size {text!r}") from None
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected N or N_E,N_R, got {text!r}")
    return tuple(vals)


# ---------------------------------------------------------------------------
# commands


def cmd_elicit(args):
    if args.spec:
        try:
            d = json.loads(Path(args.spec).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read elicitation spec: {exc}") from None
        spec = ElicitationSpec(d["m1"], d["m2"], d["s1_sq"], d["s2_sq"], d.get("gamma_vc", 0.999))
    else:
        missing = [f for f in ("m1", "m2", "s1_sq", "s2_sq") if getattr(args, f) is None]
        if missing:
            raise InputError(f"missing flags: {', '.join('--' + m.replace('_', '-') for m in missing)}")
        spec = ElicitationSpec(args.m1, args.m2, args.s1_sq, args.s2_sq, args.gamma_vc)
    try:
        hyper = elicit(spec)
    except NumericError as exc:
        raise InputError(f"elicitation failed: {exc}") from None
    r_hi, r_lo = el4_residuals(spec, hyper.alpha0, hyper.beta0)
    out = hyper.to_dict()
    out["quantile_residuals"] = {"upper": r_hi, "lower": r_lo}
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_check_model(args):
    data = _load_data(args.data)
    result = check_model(data)
    rows = qq_table(data)
    if args.qq_csv:
        Path(args.qq_csv).write_text(_qq_csv(rows))
    if args.format == "csv":
        _emit(_qq_csv(rows), args.out)
    else:
        _emit(dumps(result), args.out)
    if "model" in args.fail_on and result["p_value"] < args.threshold:
        return EXIT_GATE
    return EXIT_OK


def _qq_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["arm", "residual", "arm_quantile", "pooled_quantile"])
    for arm, r, q_arm, q_pool in rows:
        w.writerow([arm, repr(r), repr(q_arm), repr(q_pool)])
    return buf.getvalue()


def cmd_check_prior(args):
    data = _load_data(args.data)
    hyper = load_prior(args.prior)
    rep = check_prior(hyper, sufficient_stats(data), args.reps, args.threshold, args.seed)
    _emit(dumps(rep.to_dict()), args.out)
    if "conflict" in args.fail_on and rep.verdict != "no_conflict":
        return EXIT_GATE
    return EXIT_OK


def cmd_bias(args):
    hyper = load_prior(args.prior)
    spec = BiasSpec(hyper, args.n_e, args.n_r, args.delta, args.alternative_bin, args.reps,
                    args.seed, args.mode, workers=args.workers)
    _emit(dumps(bias_report(spec).to_dict()), args.out)
    return EXIT_OK


def cmd_design(args):
    if not args.n:
        raise InputError("at least one --n sample size is required")
    hyper = load_prior(args.prior)
    reports = design_scan(hyper, args.delta, args.n, args.reps, args.seed, args.alternative_bin,
                          args.mode, args.workers)
    if args.format == "json":
        _emit(dumps([r.to_dict() for r in reports]), args.out)
    else:
        buf = io.StringIO()
        write_design_csv(reports, buf)
        _emit(buf.getvalue(), args.out)
    return EXIT_OK


def build_report(data, hyper, delta, mode="paper_literal", gamma=0.95, reps=100_000, seed=0,
                 threshold=0.05, noninferiority=None, with_bias=False, alternative_bin=1,
                 small=0.05, large=0.95):
    stats = sufficient_stats(data)
    laws = difference_laws(hyper, stats, mode)
    res = analyze(laws, delta, gamma, small=small, large=large)
    conflict = check_prior(hyper, stats, reps, threshold, seed)
    report = {
        "schema_version": SCHEMA_VERSION,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "provenance": {"version": __version__, "backend": kernels.BACKEND, "seed": seed,
                       "mode": mode, "reps": reps},
        "sufficient_stats": stats.to_dict(),
        "model_check": check_model(data),
        "prior": hyper.to_dict(),
        "delta": delta,
        "laws": {
            "prior": {"center": laws.prior.center, "scale": laws.prior.scale, "df": laws.prior.df},
            "posterior": {"center": laws.posterior.center, "scale": laws.posterior.scale,
                          "df": laws.posterior.df},
        },
        "conflict": conflict.to_dict(),
        "relative_belief": dict(res.summary(), table=res.table.rows()),
    }
    if noninferiority is not None:
        report["noninferiority"] = interval_hypothesis_rb(laws, noninferiority, math.inf)
    if with_bias:
        spec = BiasSpec(hyper, stats.n_E, stats.n_R, delta, alternative_bin, reps, seed, mode)
        report["bias"] = bias_report(spec).to_dict()
    return report, res, laws


def cmd_analyze(args):
    data = _load_data(args.data)
    hyper = load_prior(args.prior)
    report, res, laws = build_report(
        data, hyper, args.delta, args.mode, args.gamma, args.reps, args.seed, args.threshold,
        args.noninferiority, args.bias, args.alternative_bin,
    )
    if args.table_csv:
        write_rb_csv(res.table, args.table_csv)
    if args.plot_csv:
        c, s = laws.posterior.center, laws.posterior.scale
        lo, hi = min(-6 * s, c - 6 * s), max(6 * s, c + 6 * s)
        rows = density_table(laws, lo, hi)
        with Path(args.plot_csv).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "prior_density", "posterior_density", "rb"])
            w.writerows([repr(float(v)) for v in row] for row in rows)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["bin_index", "lower", "upper", "prior_mass", "posterior_mass", "rb"])
        for r in res.table.rows():
            w.writerow([r["bin_index"], r["lower"], r["upper"], r["prior_mass"], r["posterior_mass"], r["rb"]])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(dumps(report), args.out)

    gate = False
    if "evidence_against" in args.fail_on and res.rb0 < 1:
        gate = True
    if "conflict" in args.fail_on and report["conflict"]["verdict"] != "no_conflict":
        gate = True
    if "model" in args.fail_on and report["model_check"]["p_value"] < args.threshold:
        gate = True
    return EXIT_GATE if gate else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p, seed=True, reps=True):
    p.add_argument("--out", "-o", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")
    if reps:
        p.add_argument("--reps", type=int, default=100_000, help="Monte Carlo replications")


def _prior_flag(p):
    p.add_argument("--prior", required=True,
                   help="prior JSON file, inline JSON, or mu0,tau0_sq,alpha0,beta0")


def _bias_flags(p):
    p.add_argument("--delta", type=float, default=0.5, help="equivalence margin / bin half-width")
    p.add_argument("--alternative-bin", type=int, default=1)
    p.add_argument("--mode", choices=MODES, default="paper_literal")
    p.add_argument("--workers", type=int, default=1)


def build_parser():
    ap = argparse.ArgumentParser(prog="relbelief", description=__doc__.splitlines()[0])
    ap.add_argument("--verbose", "-v", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("elicit", help="hyperparameters from virtual-certainty bounds")
    p.add_argument("--m1", type=float)
    p.add_argument("--m2", type=float)
    p.add_argument("--s1-sq", dest="s1_sq", type=float)
    p.add_argument("--s2-sq", dest="s2_sq", type=float)
    p.add_argument("--gamma-vc", type=float, default=0.999)
    p.add_argument("--spec", help="JSON file with m1, m2, s1_sq, s2_sq[, gamma_vc]")
    _common(p, seed=False, reps=False)
    p.set_defaults(func=cmd_elicit)

    p = sub.add_parser("check-model", help="Shapiro-Wilk normality check and QQ data")
    p.add_argument("--data", required=True)
    p.add_argument("--qq-csv")
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--fail-on", action="append", default=[], choices=("model",))
    _common(p, seed=False, reps=False)
    p.set_defaults(func=cmd_check_model)

    p = sub.add_parser("check-prior", help="sequential prior-data conflict check")
    p.add_argument("--data", required=True)
    _prior_flag(p)
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--fail-on", action="append", default=[], choices=("conflict",))
    _common(p)
    p.set_defaults(func=cmd_check_prior)

    p = sub.add_parser("bias", help="bias for/against equivalence by simulation")
    _prior_flag(p)
    p.add_argument("--n-e", type=int, default=12)
    p.add_argument("--n-r", type=int, default=12)
    _bias_flags(p)
    _common(p)
    p.set_defaults(func=cmd_bias)

    p = sub.add_parser("design", help="bias over a list of sample sizes (CSV)")
    _prior_flag(p)
    p.add_argument("--n", action="append", type=_n_pair, default=[],
                   help="sample size N or N_E,N_R; repeatable")
    _bias_flags(p)
    _common(p)
    p.set_defaults(func=cmd_design, format="csv")

    p = sub.add_parser("analyze", help="full relative belief analysis report")
    p.add_argument("--data", required=True)
    _prior_flag(p)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--mode", choices=MODES, default="paper_literal")
    p.add_argument("--gamma", type=float, default=0.95, help="credible region content")
    p.add_argument("--threshold", type=float, default=0.05, help="conflict / model-check cutoff")
    p.add_argument("--noninferiority", type=float, default=None, metavar="LOWER",
                   help="also assess the hypothesis (LOWER, inf), e.g. -0.5")
    p.add_argument("--bias", action="store_true", help="include the bias simulation")
    p.add_argument("--alternative-bin", type=int, default=1)
    p.add_argument("--table-csv", help="write the relative belief table here")
    p.add_argument("--plot-csv", help="write fine-grid densities and rb curve here")
    p.add_argument("--fail-on", action="append", default=[],
                   choices=("evidence_against", "conflict", "model"))
    _common(p)
    p.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, DomainError, KeyError, ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
