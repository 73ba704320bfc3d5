"""Command-line interface.

Subcommands: generate, estimate, simulate, fisher, scan.  Every output file
starts with the fully resolved configuration as ``#`` comment lines.

Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 estimation failure.
Defaults may come from ``--config FILE`` (``key = value`` lines, ``#``
comments); explicit flags win.  FRANKFIT_SEED sets the default seed.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import estimators as est
from .copula import THETA_MAX, BivariateSample
from .errors import BoundaryValue, EstimationError, FrankFitError, InvalidParameter, OverflowGuard
from .fisher import FisherMethod, asymptotic_variance, fisher_information, write_fisher_csv
from .sampler import SeedSpec, sample_n, write_sample_csv
from .simstudy import METRICS_HEADER, SimulationCell, run_grid, write_metrics_csv, write_rd_csv

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_ESTIMATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("FRANKFIT_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"FRANKFIT_SEED must be an integer, got {raw!r}") from None


def parse_number_list(text: str, kind=float) -> list:
    """Comma list of values or ``start:stop:step`` (stop inclusive)."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [kind(round(start + i * step, 12)) for i in range(count)]
        out = [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed list {text!r}") from None
    if not out:
        raise UsageError("empty list")
    return out


def read_config(path) -> dict:
    cfg = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        cfg[k.replace("-", "_")] = v
    return cfg


def read_pairs(path) -> tuple[np.ndarray, np.ndarray]:
    """Two numeric columns; ``#`` lines and one non-numeric header row are skipped."""
    try:
        text = sys.stdin.read() if str(path) == "-" else Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    rows = []
    for rec in csv.reader(io.StringIO(text)):
        if not rec or not "".join(rec).strip() or rec[0].lstrip().startswith("#"):
            continue
        if len(rec) < 2:
            raise UsageError(f"expected two columns, got {rec!r}")
        try:
            rows.append((float(rec[0]), float(rec[1])))
        except ValueError:
            if rows:
                raise UsageError(f"non-numeric row {rec!r}") from None
    if not rows:
        raise UsageError(f"{path}: no data rows")
    a = np.array(rows)
    return a[:, 0], a[:, 1]


@contextlib.contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _config_lines(args) -> list[str]:
    skip = {"func", "config"}
    lines = [f"frankfit {args.command}"]
    for k in sorted(vars(args)):
        if k not in skip and k != "command":
            lines.append(f"{k} = {getattr(args, k)}")
    return lines


def _write_header(fh, args):
    for line in _config_lines(args):
        fh.write(f"# {line}\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be positive")
    sample = sample_n(args.theta, args.n, SeedSpec(args.seed))
    if args.out in (None, "-"):
        _write_header(sys.stdout, args)
        sys.stdout.write("u1,u2\n")
        for a, b in zip(sample.u1, sample.u2):
            sys.stdout.write(f"{a:.17g},{b:.17g}\n")
    else:
        write_sample_csv(sample, args.out, _config_lines(args))
    return EXIT_OK


def _sample_from_input(args) -> BivariateSample:
    x1, x2 = read_pairs(args.input)
    if x1.size < 2:
        raise UsageError("estimation needs at least two rows")
    if args.pseudo == "none":
        if not (np.all((x1 > 0) & (x1 < 1)) and np.all((x2 > 0) & (x2 < 1))):
            raise UsageError("--pseudo none requires every value in (0, 1)")
        return BivariateSample(x1, x2)
    return est.pseudo_observations(est.RawBivariateData(x1, x2), args.pseudo)


def cmd_estimate(args) -> int:
    methods = [m.strip().upper() for m in args.methods.split(",") if m.strip()]
    try:
        methods = [est.Method(m) for m in methods]
    except ValueError:
        raise UsageError(f"--methods must be a subset of ml,mm1,mm2, got {args.methods!r}") from None
    if not methods:
        raise UsageError("--methods is empty")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    sample = _sample_from_input(args)
    status = EXIT_OK
    with _open_out(args.out) as fh:
        _write_header(fh, args)
        fh.write("method,theta_hat,residual,iterations,flags\n")
        for m in methods:
            try:
                r = est.ESTIMATORS[m](sample, args.tol)
                fh.write(f"{m.value},{r.theta_hat:.17g},{r.residual:.17g},{r.iterations},{r.flags}\n")
            except EstimationError as exc:
                status = EXIT_ESTIMATION
                fh.write(f"{m.value},{exc.boundary_estimate:.17g},nan,0,failed:{type(exc).__name__}\n")
                print(f"{m.value}: {exc}", file=sys.stderr)
    return status


def cmd_simulate(args) -> int:
    ns = parse_number_list(args.n, int)
    thetas = parse_number_list(args.theta)
    if args.L < 1 or args.parallelism < 1:
        raise UsageError("--L and --parallelism must be positive")
    cells = [SimulationCell(n, t, args.L, SeedSpec(args.seed)) for n in ns for t in thetas]
    rows = run_grid(cells, args.parallelism)
    header = _config_lines(args)
    if args.out in (None, "-"):
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        w.writerows(r.csv_row() for r in rows)
        sys.stdout.write(buf.getvalue())
    else:
        write_metrics_csv(rows, args.out, header)
    if args.with_rd:
        rd_out = args.rd_out or (str(Path(args.out).with_suffix("")) + "_rd.csv" if args.out not in (None, "-") else None)
        if rd_out is None:
            raise UsageError("--with-rd with stdout output needs --rd-out")
        write_rd_csv([r for r in rows if r.theta != 0], rd_out, asymptotic_variance, header)
    return EXIT_OK


def cmd_fisher(args) -> int:
    thetas = parse_number_list(args.theta)
    method = FisherMethod.MONTE_CARLO if args.method == "mc" else FisherMethod.QUADRATURE
    if method is FisherMethod.MONTE_CARLO and args.M < 1000:
        raise UsageError("--M must be at least 1000")
    rows = [
        fisher_information(t, method, m=args.M, seed=SeedSpec(args.seed, i))
        for i, t in enumerate(thetas)
    ]
    if args.out in (None, "-"):
        _write_header(sys.stdout, args)
        sys.stdout.write("theta,i1,i2,i_total,inv_i,method,mc_se\n")
        for r in rows:
            sys.stdout.write(",".join(r.csv_row()) + "\n")
    else:
        write_fisher_csv(rows, args.out, _config_lines(args))
    return EXIT_OK


def scan_grid(bounds, step: float, exclude: float) -> np.ndarray:
    lo, hi = (float(v) for v in bounds)
    if not (lo < hi) or not step > 0 or step > hi - lo:
        raise UsageError("--range needs lo < hi and 0 < step <= hi - lo")
    if max(abs(lo), abs(hi)) > THETA_MAX:
        raise UsageError(f"--range must lie within +-{THETA_MAX:g}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = np.round(lo + step * np.arange(count), 12)
    return grid[np.abs(grid) >= exclude] if exclude > 0 else grid[grid != 0]


def cmd_scan(args) -> int:
    grid = scan_grid(args.range, args.step, args.exclude)
    sample = _sample_from_input(args)
    fn = est.h_of_theta if args.what == "h" else est.log_likelihood
    with _open_out(args.out) as fh:
        _write_header(fh, args)
        fh.write("theta,value\n")
        for t in grid:
            fh.write(f"{t:.17g},{fn(sample, float(t)):.17g}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser(seed_default: int) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frankfit", description="Frank copula toolkit")
    p.add_argument("--config", help="key = value file supplying default flag values")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="draw a sample")
    g.add_argument("--theta", type=float, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=seed_default)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_generate)

    def data_args(sp):
        sp.add_argument("input", help="CSV with two numeric columns, or - for stdin")
        sp.add_argument("--pseudo", choices=("none", "raw", "adjusted"), default="none")
        sp.add_argument("--out", default="-")

    e = sub.add_parser("estimate", help="estimate theta from data")
    data_args(e)
    e.add_argument("--methods", default="ml,mm1,mm2")
    e.add_argument("--tol", type=float, default=est.DEFAULT_TOL)
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", help="Monte Carlo bias/MSE study")
    s.add_argument("--n", default="5,10,15,20,25,50,75,100")
    s.add_argument("--theta", default="0.1,0.5,0.75,1,1.5,2,3,4,5,6,7,8,9,10")
    s.add_argument("--L", type=int, default=20_000)
    s.add_argument("--seed", type=int, default=seed_default)
    s.add_argument("--parallelism", type=int, default=1)
    s.add_argument("--with-rd", action="store_true")
    s.add_argument("--rd-out")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fisher", help="Fisher information table")
    f.add_argument("--theta", required=True)
    f.add_argument("--method", choices=("quadrature", "mc"), default="quadrature")
    f.add_argument("--M", type=int, default=1_000_000)
    f.add_argument("--seed", type=int, default=seed_default)
    f.add_argument("--out", default="-")
    f.set_defaults(func=cmd_fisher)

    c = sub.add_parser("scan", help="log-likelihood or H(theta) on a grid")
    data_args(c)
    c.add_argument("--what", choices=("loglik", "h"), default="h")
    c.add_argument("--range", nargs=2, type=float, default=[-10.0, 10.0], metavar=("LO", "HI"))
    c.add_argument("--step", type=float, default=0.05)
    c.add_argument("--exclude", type=float, default=0.01, help="drop |theta| below this")
    c.set_defaults(func=cmd_scan)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cfg = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    for k, v in cfg.items():
        if k not in known:
            raise UsageError(f"unknown config key {k!r} for {args.command}")
        act = known[k]
        if isinstance(act, argparse._StoreTrueAction):
            v = v.lower() in ("1", "true", "yes", "on")
        elif act.nargs == 2:
            v = [act.type(x) for x in v.replace(",", " ").split()]
        elif act.type is not None:
            v = act.type(v)
        act.default = v
        act.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    try:
        parser = build_parser(_default_seed())
        try:
            args = _apply_config(parser, argv)
        except SystemExit as exc:
            return EXIT_USAGE if exc.code else EXIT_OK
        return args.func(args)
    except (UsageError, BoundaryValue, InvalidParameter, OverflowGuard, ValueError) as exc:
        print(f"frankfit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"frankfit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EstimationError as exc:
        print(f"frankfit: estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except FrankFitError as exc:
        print(f"frankfit: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
