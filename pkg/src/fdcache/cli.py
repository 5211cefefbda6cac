"""Command-line front end: validate, analytic, simulate, sweep.

Exit codes: 0 ok, 1 usage/validation error, 2 I/O error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures as cf
import csv
import dataclasses
import io
import math
import sys

import numpy as np

from . import analytics, montecarlo
from .core import (CorrelationMode, ScenarioConfig, ScenarioFileError, load_scenario, soft_warnings,
                   validate)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3

SCENARIO_COLUMNS = [f.name for f in dataclasses.fields(ScenarioConfig)]
REPORT_COLUMNS = [f.name for f in dataclasses.fields(analytics.AnalyticReport)]
SIM_COLUMNS = ["mode", "seed", "n", "p_hit", "p_suc_mc", "ci_halfwidth", "outage", "ase", "tg_fd"]
SWEEP_KEYS = ("lambda_sbs", "eta_files", "theta_db", "kappa")
SWEEP_COLUMNS = ["parameter", "value", "engine", "status", "p_hit", "p_suc", "ci_halfwidth", "n",
                 "outage", "ase", "tg_fd", "lambda_sbs", "eta_files", "theta_db", "catalog_size",
                 "storage_size"]


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "value"):
        return v.value
    return v


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r.get(h, "")) for h in header])
    text = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _load(path):
    """Load and validate; returns (config, exit_code)."""
    try:
        cfg = load_scenario(path)
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return None, EXIT_IO
    except ScenarioFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    problems = validate(cfg)
    for p in problems:
        print(f"invalid: {p}", file=sys.stderr)
    for w in soft_warnings(cfg):
        print(f"warning: {w}", file=sys.stderr)
    return cfg, (EXIT_USAGE if problems else EXIT_OK)


def cmd_validate(args):
    cfg, code = _load(args.scenario)
    if code == EXIT_OK:
        print("ok")
    return code


def cmd_analytic(args):
    cfg, code = _load(args.scenario)
    if code:
        return code
    try:
        rep = analytics.analyze(cfg)
    except analytics.QuadratureError as exc:
        print(f"numeric failure in {exc.component}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    row = {k: getattr(cfg, k) for k in SCENARIO_COLUMNS} | rep.as_dict()
    return _write_out(args.out, SCENARIO_COLUMNS + REPORT_COLUMNS, [row])


def _write_out(path, header, rows):
    try:
        _write_csv(path, header, rows)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _sim_row(cfg, mode, seed, n, workers, samples_path=None):
    p_hit = analytics.p_hit_of(cfg)
    res = montecarlo.simulate(cfg, p_hit, mode, seed, n, workers)
    est = montecarlo.mc_estimate(res["success"], seed)
    if samples_path:
        montecarlo.write_samples_csv(samples_path, res)
    c = cfg
    return dict(
        mode=CorrelationMode(mode), seed=seed, n=est.n, p_hit=p_hit, p_suc_mc=est.mean,
        ci_halfwidth=est.ci_halfwidth, outage=analytics.outage(est.mean),
        ase=analytics.ase(c.theta, c.lambda_sbs, est.mean),
        tg_fd=analytics.fd_throughput_gain(c.theta, c.lambda_sbs, est.mean, c.r_ul, c.r_dl, c.alpha1),
    )


def cmd_simulate(args):
    cfg, code = _load(args.scenario)
    if code:
        return code
    n = args.snapshots if args.snapshots is not None else cfg.n_snapshots
    if n < montecarlo.MIN_SNAPSHOTS:
        print(f"error: --snapshots must be >= {montecarlo.MIN_SNAPSHOTS}", file=sys.stderr)
        return EXIT_USAGE
    seed = args.seed if args.seed is not None else cfg.seed
    mode = args.mode or cfg.correlation_mode
    try:
        row = _sim_row(cfg, mode, seed, n, args.workers, args.samples)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return _write_out(args.out, SIM_COLUMNS, [row])


def parse_sweep(text):
    """``KEY=v1,v2,...`` or ``KEY=log:start:stop:num`` (log10-spaced)."""
    if "=" not in text:
        raise UsageError("--sweep expects KEY=VALUES")
    key, spec = (s.strip() for s in text.split("=", 1))
    if key not in SWEEP_KEYS:
        raise UsageError(f"--sweep key must be one of {', '.join(SWEEP_KEYS)}")
    try:
        if spec.startswith("log:"):
            a, b, num = spec[4:].split(":")
            values = list(np.logspace(math.log10(float(a)), math.log10(float(b)), int(num)))
        else:
            values = [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse sweep values {spec!r}") from None
    if not values:
        raise UsageError("sweep values must be non-empty")
    if key == "kappa" and any(not 0 <= v < 1 for v in values):
        raise UsageError("kappa values must lie in [0, 1)")
    return key, [float(v) for v in values]


def _point_config(cfg, key, value):
    if key == "kappa":
        return cfg.with_kappa(value)
    return cfg.replace(**{key: value})


def _sweep_point(cfg, key, value, engine, args):
    pc = _point_config(cfg, key, value)
    row = dict(parameter=key, value=value, engine=engine, lambda_sbs=pc.lambda_sbs,
               eta_files=pc.eta_files, theta_db=pc.theta_db, catalog_size=pc.catalog_size,
               storage_size=pc.storage_size)
    problems = validate(pc)
    if problems:
        return row | dict(status="invalid: " + "; ".join(problems))
    try:
        if engine == "analytic":
            rep = analytics.analyze(pc)
            row |= dict(p_hit=rep.p_hit, p_suc=rep.p_suc_lower, outage=rep.outage, ase=rep.ase,
                        tg_fd=rep.tg_fd)
        else:
            n = args.snapshots if args.snapshots is not None else pc.n_snapshots
            seed = args.seed if args.seed is not None else pc.seed
            sim = _sim_row(pc, args.mode or pc.correlation_mode, seed, n, 1)
            row |= dict(p_hit=sim["p_hit"], p_suc=sim["p_suc_mc"], ci_halfwidth=sim["ci_halfwidth"],
                        n=sim["n"], outage=sim["outage"], ase=sim["ase"], tg_fd=sim["tg_fd"])
        row["status"] = "ok"
    except (analytics.QuadratureError, ValueError, ArithmeticError) as exc:
        row["status"] = f"error: {exc}"
    return row


def cmd_sweep(args):
    cfg, code = _load(args.scenario)
    if code:
        return code
    try:
        key, values = parse_sweep(args.sweep)
        engines = [e.strip() for e in args.engines.split(",") if e.strip()]
        if not engines or any(e not in ("analytic", "montecarlo") for e in engines):
            raise UsageError("--engines must be a subset of analytic,montecarlo")
        if "montecarlo" in engines:
            n = args.snapshots if args.snapshots is not None else cfg.n_snapshots
            if n < montecarlo.MIN_SNAPSHOTS:
                raise UsageError(f"--snapshots must be >= {montecarlo.MIN_SNAPSHOTS}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    jobs = [(v, e) for v in values for e in engines]
    if args.workers > 1:
        with cf.ThreadPoolExecutor(args.workers) as ex:
            rows = list(ex.map(lambda j: _sweep_point(cfg, key, j[0], j[1], args), jobs))
    else:
        rows = [_sweep_point(cfg, key, v, e, args) for v, e in jobs]
    return _write_out(args.out, SWEEP_COLUMNS, rows)


def build_parser():
    p = argparse.ArgumentParser(prog="fdcache", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--scenario", required=True, metavar="PATH")
        if out:
            sp.add_argument("--out", default="-", metavar="PATH", help="CSV output (default stdout)")

    sp = sub.add_parser("validate", help="check a scenario file")
    common(sp, out=False)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("analytic", help="evaluate the analytic metrics")
    common(sp)
    sp.set_defaults(func=cmd_analytic)

    def mc_flags(sp):
        sp.add_argument("--seed", type=int, metavar="U64")
        sp.add_argument("--snapshots", type=int, metavar="N")
        sp.add_argument("--mode", choices=[m.value for m in CorrelationMode])
        sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("simulate", help="Monte Carlo success probability")
    common(sp)
    mc_flags(sp)
    sp.add_argument("--samples", metavar="PATH", help="also dump per-snapshot samples")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="sweep one parameter")
    common(sp)
    mc_flags(sp)
    sp.add_argument("--sweep", required=True, metavar="KEY=v1,v2,...")
    sp.add_argument("--engines", default="analytic", metavar="LIST")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
