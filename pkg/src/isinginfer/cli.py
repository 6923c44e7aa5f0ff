"""Command line entry point: ``isinginfer <subcommand> [options]``.

Every subcommand writes UTF-8 CSV whose first lines are ``# key=value``
comments echoing the complete resolved configuration.  Exit status is 0 on
success, 2 for usage or input errors and 3 for numeric-domain errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .errors import CapacityError, DomainError, IsingError, NotApplicableError, ParseError
from .gibbs import ChainConfig
from .harness import (
    ENSEMBLES,
    load_network,
    make_ensemble,
    run_analyze,
    run_cw_power,
    run_errorbars,
    run_partition,
    run_power_heatmap,
    run_sample,
)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 2, 3

# options that do not influence results and are left out of the echoed header
_UNECHOED = {"out", "gnuplot", "jobs", "config", "slopes_out", "func"}


class UsageError(Exception):
    pass


def parse_grid(text: str) -> list:
    """``"0.1,0.5,2"`` or an inclusive range ``"start:stop:step"``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(x) for x in parts)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad number in range {text!r}") from None
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"range {text!r} is empty or has a non-positive step")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        # rounding keeps 0.1 * 3 from printing as 0.30000000000000004
        return [round(start + k * step, 12) for k in range(count)]
    try:
        vals = [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def parse_int_list(text: str) -> list:
    vals = parse_grid(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (list, tuple)):
        return ",".join(_fmt(v) for v in x)
    return str(x)


def _header(args) -> list:
    items = {k: v for k, v in vars(args).items() if k not in _UNECHOED}
    lines = [f"# isinginfer {__version__}"]
    lines += [f"# {k}={_fmt(items[k])}" for k in sorted(items)]
    return lines


def _table(header_lines, fieldnames, rows, footer=()):
    buf = io.StringIO()
    for line in header_lines:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fieldnames)
    for row in rows:
        w.writerow([_fmt(row[k]) for k in fieldnames])
    for line in footer:
        buf.write(line + "\n")
    return buf.getvalue()


def _emit(args, text):
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _chain_cfg(args) -> ChainConfig:
    return ChainConfig(burn_in_sweeps=args.burn_in, thin_sweeps=args.thin, scan=args.scan,
                       seed=args.seed, init=args.init)


def _ensemble_kw(args):
    return {"p": args.p, "p_exponent": args.p_exponent, "degree": args.degree,
            "degree_exponent": args.degree_exponent}


def _gnuplot(args, body):
    if not args.gnuplot:
        return
    if not args.out:
        raise UsageError("--gnuplot needs --out so the script can reference the data file")
    data = Path(args.out).name
    script = ["set datafile separator ','", "set datafile commentschars '#'",
              "set key autotitle columnhead"] + [line.replace("@DATA@", data) for line in body]
    Path(args.gnuplot).write_text("\n".join(script) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_errorbars(args):
    rows, fits = run_errorbars(args.ensemble, args.n, args.betas, args.reps, args.seed,
                               _chain_cfg(args), jobs=args.jobs, **_ensemble_kw(args))
    fields = ["ensemble", "n", "beta", "mean_beta_hat", "sd_beta_hat", "noninterior_fraction",
              "reps", "interior", "boundary_zero", "infinite", "degenerate"]
    footer = [f"# rate beta={_fmt(f.beta)} slope={_fmt(f.slope)} r2={_fmt(f.r2)} "
              f"sd_ratio={_fmt(f.sd_ratio)} n_min={f.n_min} n_max={f.n_max}" for f in fits]
    _emit(args, _table(_header(args), fields, [asdict(r) for r in rows], footer))
    if args.slopes_out:
        sfields = ["beta", "slope", "intercept", "r2", "sd_ratio", "n_min", "n_max", "points"]
        Path(args.slopes_out).write_text(
            _table(_header(args), sfields, [asdict(f) for f in fits]), encoding="utf-8")
    _gnuplot(args, ["set logscale xy", "set xlabel 'n'", "set ylabel 'sd of MPLE'",
                    "plot '@DATA@' using 2:5 with points pt 7 title 'sd(beta_hat)'"])


def cmd_power_heatmap(args):
    rows = run_power_heatmap(args.n, args.ps, args.betas, args.reps, args.alpha, args.seed,
                             _chain_cfg(args), args.law_count, args.offset, args.jobs)
    fields = ["p", "beta", "power", "limit", "threshold", "reps"]
    _emit(args, _table(_header(args), fields, [asdict(r) for r in rows]))
    _gnuplot(args, ["set xlabel 'p'", "set ylabel 'beta'", "set cbrange [0:1]",
                    "plot '@DATA@' using 1:2:3 with points pt 5 ps 2 palette title 'power', "
                    "1/x with lines lw 2 title 'beta = 1/p'"])


def cmd_cw_power(args):
    rows = run_cw_power(args.n, args.betas, args.reps, args.alpha, args.seed, _chain_cfg(args),
                        args.law_count, args.offset, args.jobs)
    fields = ["beta", "power", "limit", "threshold", "reps"]
    _emit(args, _table(_header(args), fields, [asdict(r) for r in rows]))
    _gnuplot(args, ["set xlabel 'beta'", "set ylabel 'power'", "set yrange [0:1.05]",
                    "plot '@DATA@' using 1:2 with points pt 7 title 'empirical', "
                    "'' using 1:3 with lines lw 2 title 'limit'"])


def cmd_partition(args):
    reports = run_partition(args.ensemble, args.n_single, args.betas, args.seed, **_ensemble_kw(args))
    fields = ["beta", "exact", "upper", "lower_rademacher", "lower_meanfield"]
    rows = [{"beta": r.beta, "exact": r.exact, "upper": r.gaussian_upper,
             "lower_rademacher": r.rademacher_lower, "lower_meanfield": r.mean_field_lower}
            for r in reports]
    _emit(args, _table(_header(args), fields, rows))
    _gnuplot(args, ["set xlabel 'beta'", "set ylabel 'log partition'",
                    "plot for [c=2:5] '@DATA@' using 1:c with linespoints"])


def cmd_analyze(args):
    graph = load_network(args.edges, args.labels)
    report = run_analyze(graph, args.b_boot, args.b_null, args.seed, _chain_cfg(args),
                         args.statistic)
    d = report.as_dict()
    fields = list(d)
    summary = ["# " + line for line in report.summary().splitlines()]
    if args.out:
        Path(args.out).write_text(_table(_header(args), fields, [d]), encoding="utf-8")
        sys.stdout.write(report.summary() + "\n")
    else:
        sys.stdout.write(_table(_header(args) + summary, fields, [d]))


def cmd_sample(args):
    if args.edges or args.labels:
        cmat = load_network(args.edges, args.labels).coupling()
    else:
        cmat = make_ensemble(args.ensemble, args.n_single, args.seed, **_ensemble_kw(args))
    spins = run_sample(cmat, args.beta, args.reps, args.seed, _chain_cfg(args), args.method)
    fields = [f"s{i}" for i in range(cmat.n)]
    rows = [dict(zip(fields, (int(v) for v in row))) for row in spins]
    _emit(args, _table(_header(args), fields, rows))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common(p, reps_default, burn_default=None):
    p.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    p.add_argument("--reps", type=int, default=reps_default, help=f"replicates per cell (default {reps_default})")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--burn-in", type=int, default=burn_default,
                   help="burn-in sweeps per chain (default %s)" % (burn_default or "max(1000, 20 ceil(log n))"))
    p.add_argument("--thin", type=int, default=5, help="sweeps between emitted draws (default 5)")
    p.add_argument("--alpha", type=float, default=0.05, help="test level (default 0.05)")
    p.add_argument("--scan", choices=("systematic", "random"), default="systematic")
    p.add_argument("--init", choices=("uniform_random", "all_plus"), default="uniform_random")
    p.add_argument("--jobs", type=int, default=1, help="worker threads; output does not depend on it")
    p.add_argument("--gnuplot", help="also write a gnuplot script for the CSV (needs --out)")
    p.add_argument("--config", help="file of key=value lines; command line flags override it")


def _ensemble_opts(p, default="cw"):
    p.add_argument("--ensemble", choices=ENSEMBLES, default=default)
    p.add_argument("--p", type=float, default=None, help="er edge probability (default n^-p_exponent)")
    p.add_argument("--p-exponent", type=float, default=1.0 / 3.0)
    p.add_argument("--degree", type=int, default=None, help="regular degree (default even int near n^degree_exponent)")
    p.add_argument("--degree-exponent", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isinginfer", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("errorbars", help="MPLE spread versus n and beta (rate table)")
    _common(p, reps_default=50)
    _ensemble_opts(p, default="er")
    p.add_argument("--n", type=parse_int_list, default=[200, 800], help="sizes, e.g. 200,800")
    p.add_argument("--betas", type=parse_grid, default=parse_grid("0.25:2:0.25"))
    p.add_argument("--slopes-out", help="also write the per-beta log-log fits as CSV")
    p.set_defaults(func=cmd_errorbars)

    p = sub.add_parser("power-heatmap", help="MP-test power over a (p, beta) grid on G(n, p)")
    _common(p, reps_default=200, burn_default=100)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--ps", type=parse_grid, default=parse_grid("0.05:1:0.05"))
    p.add_argument("--betas", type=parse_grid, default=parse_grid("0:2.85:0.15"))
    p.add_argument("--law-count", type=int, default=200_000, help="limit-law draws for the threshold")
    p.add_argument("--offset", type=float, default=0.0, help="subtracted from H before thresholding")
    p.set_defaults(func=cmd_power_heatmap)

    p = sub.add_parser("cw-power", help="Curie-Weiss power curve with its limit")
    _common(p, reps_default=1000, burn_default=200)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--betas", type=parse_grid, default=parse_grid("0:2:0.1"))
    p.add_argument("--law-count", type=int, default=200_000)
    p.add_argument("--offset", type=float, default=0.0)
    p.set_defaults(func=cmd_cw_power)

    p = sub.add_parser("partition", help="exact log partition function and its bounds")
    _common(p, reps_default=1)
    _ensemble_opts(p)
    p.add_argument("--n", dest="n_single", type=int, default=12)
    p.add_argument("--betas", type=parse_grid, default=parse_grid("0:0.9:0.1"))
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("analyze", help="fit a labeled network (bundled toy network by default)")
    _common(p, reps_default=1)
    p.add_argument("--edges", help="edge list: one 'u v' pair per line")
    p.add_argument("--labels", help="labels: one 'id value' pair per line, values +-1 or 0/1")
    p.add_argument("--b-boot", type=int, default=2000)
    p.add_argument("--b-null", type=int, default=999)
    p.add_argument("--statistic", choices=("H", "mple"), default="H")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sample", help="draw configurations (one per --reps) at a given beta")
    _common(p, reps_default=10)
    _ensemble_opts(p)
    p.add_argument("--n", dest="n_single", type=int, default=20)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--edges")
    p.add_argument("--labels")
    p.add_argument("--method", choices=("auto", "exact", "glauber"), default="auto")
    p.set_defaults(func=cmd_sample)
    return parser


def read_config(path) -> list:
    """Turn ``key=value`` lines into command line tokens."""
    tokens = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError("expected key=value", lineno, str(path))
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError("empty key", lineno, str(path))
        tokens += [f"--{key.replace('_', '-')}", value]
    return tokens


def _expand_config(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    extra = read_config(known.config)
    # config tokens go right after the subcommand so explicit flags win
    for k, tok in enumerate(argv):
        if not tok.startswith("-") and (k == 0 or argv[k - 1] != "--config"):
            return argv[:k + 1] + extra + argv[k + 1:]
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, ParseError) as exc:
        print(f"isinginfer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args.func(args)
    except (DomainError, CapacityError, NotApplicableError) as exc:
        print(f"isinginfer: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (UsageError, IsingError, ValueError, OSError) as exc:
        print(f"isinginfer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
