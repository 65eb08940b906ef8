"""Command line entry point: ``obsvol analyze | synth | selftest``.

Exit codes: 0 ok, 1 self-test failure, 2 input error, 3 statistical
precondition failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from .errors import InputError, StatisticalError

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_INPUT = 2
EXIT_STATS = 3


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _weights(text):
    if text in ("equal", "price") or (text.startswith("explicit:") and len(text) > 9):
        return text
    raise argparse.ArgumentTypeError("expected equal, price or explicit:<csv>")


def build_parser():
    p = argparse.ArgumentParser(prog="obsvol", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="estimate volatility and run the verification battery")
    a.add_argument("--input", required=True, help="long-format price CSV (date,ticker,close)")
    a.add_argument("--out", required=True, help="output directory")
    a.add_argument("--weights", type=_weights, default="equal", help="equal | price | explicit:<csv>")
    a.add_argument("--missing", choices=("intersect", "ffill"), default="intersect")
    a.add_argument("--tau-max", type=int, default=250)
    a.add_argument("--block-len", type=int, default=25)
    a.add_argument("--n-boot", type=int, default=1000)
    a.add_argument("--bins", type=int, default=20)
    a.add_argument("--demean", choices=("full", "lag"), default="full")
    a.add_argument("--seed", type=_u64, default=0)
    a.add_argument("--date-col", default="date")
    a.add_argument("--ticker-col", default="ticker")
    a.add_argument("--close-col", default="close")

    s = sub.add_parser("synth", help="write a synthetic price panel and its true volatility")
    s.add_argument("--out", required=True)
    s.add_argument("--n-stocks", type=int, default=65)
    s.add_argument("--n-days", type=int, default=10000)
    s.add_argument("--vol-model", choices=("lognormal", "constant"), default="lognormal")
    s.add_argument("--phi", type=float, default=0.98)
    s.add_argument("--vol-scale", type=float, default=None, help="log-volatility innovation sd")
    s.add_argument("--vol-mu", type=float, default=None, help="mean of log volatility")
    s.add_argument("--vol-level", type=float, default=0.01, help="level for --vol-model constant")
    s.add_argument("--residual", choices=("uniform", "gaussian"), default="uniform")
    s.add_argument("--idio-scale", type=float, default=0.0)
    s.add_argument("--coupling", choices=("market", "independent"), default="market")
    s.add_argument("--seed", type=_u64, default=0)

    t = sub.add_parser("selftest", help="end-to-end oracle check on synthetic data")
    mode = t.add_mutually_exclusive_group()
    mode.add_argument("--quick", dest="mode", action="store_const", const="quick")
    mode.add_argument("--full", dest="mode", action="store_const", const="full")
    t.set_defaults(mode="quick")
    t.add_argument("--seed", type=_u64, default=20240101)
    return p


def cmd_analyze(args):
    from .report import AnalysisConfig, analyze_file, write_report

    cfg = AnalysisConfig(
        weights=args.weights,
        missing=args.missing,
        tau_max=args.tau_max,
        block_len=args.block_len,
        n_boot=args.n_boot,
        bins=args.bins,
        seed=args.seed,
        demean=args.demean,
    )
    columns = {"date_col": args.date_col, "ticker_col": args.ticker_col, "close_col": args.close_col}
    report = analyze_file(args.input, cfg, columns)
    write_report(report, args.out)
    u = report.uniformity
    print(f"k = {report.k:.6f}  (1/k = {1 / report.k:.3f})")
    print(f"<|omega|> = {u.mean_abs_omega:.4f}  <omega^2> = {u.mean_sq_omega:.4f}  KS = {u.ks_statistic:.4f}"
          + ("  [degenerate residual]" if u.degenerate else ""))
    print(f"rescale max discrepancy = {report.rescale.max_discrepancy:.4f}")
    for label, reason in report.skipped.items():
        print(f"skipped {label}: {reason}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_synth(args):
    from .synth import DEFAULT_VOL_MU, DEFAULT_VOL_SCALE, SynthConfig, gen_market, write_synth

    cfg = SynthConfig(
        n_stocks=args.n_stocks,
        n_days=args.n_days,
        vol_model=args.vol_model,
        vol_mu=DEFAULT_VOL_MU if args.vol_mu is None else args.vol_mu,
        vol_phi=args.phi,
        vol_scale=DEFAULT_VOL_SCALE if args.vol_scale is None else args.vol_scale,
        vol_level=args.vol_level,
        residual=args.residual,
        idio_scale=args.idio_scale,
        coupling=args.coupling,
        seed=args.seed,
    )
    paths = write_synth(gen_market(cfg), args.out)
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_selftest(args):
    from .selftest import run_selftest

    start = time.perf_counter()
    checks = run_selftest(args.mode, args.seed)
    for c in checks:
        print(c.line())
    failed = [c.name for c in checks if not c.passed]
    elapsed = time.perf_counter() - start
    if failed:
        print(f"selftest ({args.mode}) FAILED {len(failed)}/{len(checks)} in {elapsed:.1f}s: {'; '.join(failed)}")
        return EXIT_SELFTEST
    print(f"selftest ({args.mode}) passed {len(checks)} checks in {elapsed:.1f}s")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "synth": cmd_synth, "selftest": cmd_selftest}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StatisticalError as exc:
        print(f"statistical precondition failed: {exc}", file=sys.stderr)
        return EXIT_STATS


if __name__ == "__main__":
    sys.exit(main())
