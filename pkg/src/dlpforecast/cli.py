"""Command-line interface: simulate, ingest, fit, forecast, report.

Exit codes: 0 success, 2 usage or I/O error, 3 every requested fit failed,
4 a requested model is missing. Settings resolve as command-line flag, then
the store's config.json, then the built-in default.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import date
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .bands import BandConfig, BandMode
from .errors import DLPError, InvalidConfig, NotFound, StoreError
from .ingest import Granularity, parse_records
from .pipeline import fit_records, judge, training_series
from .policy import DecisionMode, Thresholds, training_ceiling
from .report import (decisions_csv, parse_decisions, ranking, ranking_csv, report_csv,
                     report_rows)
from .store import Store, atomic_write
from .syngen import ScenarioConfig, generate, to_csv
from .trendfit import FitConfig

log = logging.getLogger("dlpforecast")

EXIT_OK, EXIT_USAGE, EXIT_FIT, EXIT_MISSING = 0, 2, 3, 4

DEFAULTS: dict[str, Any] = {
    "granularity": "ANNUAL",
    "changepoints": 25,
    "cp_range": 0.8,
    "lambda": 0.01,
    "alpha": 0.0,
    "varsigma": 2.0,
    "band_mode": "literal",
    "horizon": 1,
    "basis": "both",
    "alert": 0.0,
    "restrict": 1.0,
    "block": 3.0,
    "top": 10,
}


class UsageError(Exception):
    pass


def resolve(args: argparse.Namespace, config: dict[str, Any], key: str, attr: Optional[str] = None):
    value = getattr(args, attr or key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return DEFAULTS[key]


def _iso(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a YYYY-MM-DD date: {text!r}") from None


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _open_store(path: str, must_exist: bool = True) -> Store:
    store = Store(path)
    if must_exist and not store.exists():
        raise UsageError(f"store {path} does not exist")
    return store


def cmd_ingest(args: argparse.Namespace) -> int:
    src = Path(args.input)
    if not src.is_file():
        _err(f"input file {src} not found")
        return EXIT_USAGE
    result = parse_records(src.read_bytes(), args.format)
    for bad in result.rejected:
        print(f"warning: rejected {src}:{bad}", file=sys.stderr)
    store = Store(args.store)
    with store.lock():
        store.init()
        store.append_records(result.records)
    print(f"accepted={len(result.records)} rejected={len(result.rejected)}")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    store = _open_store(args.store)
    cfg = store.load_config()
    granularity = Granularity.parse(resolve(args, cfg, "granularity"))
    fit_cfg = FitConfig(n_changepoints=int(resolve(args, cfg, "changepoints")),
                        cp_range=float(resolve(args, cfg, "cp_range")),
                        lam=float(resolve(args, cfg, "lambda", "lam")))
    band = BandConfig(alpha=float(resolve(args, cfg, "alpha")),
                      varsigma=float(resolve(args, cfg, "varsigma")),
                      band_mode=BandMode(resolve(args, cfg, "band_mode")))
    with store.lock():
        records = store.read_records()
        if not records:
            _err("store holds no records")
            return EXIT_FIT
        outcomes = fit_records(records, granularity, fit_cfg, band, users=[args.user] if args.user else None)
        ok = 0
        print("user k m_offset mu sigma")
        for out in outcomes:
            if out.error is not None:
                _err(f"{out.user_id}: {out.error}")
                continue
            store.save_model(out.model, out.stats, band)
            ok += 1
            print(f"{out.user_id} {out.model.k:.6g} {out.model.m_offset:.6g} {out.stats.mu:.6g} {out.stats.sigma:.6g}")
    return EXIT_OK if ok else EXIT_FIT


def cmd_forecast(args: argparse.Namespace) -> int:
    store = _open_store(args.store)
    cfg = store.load_config()
    horizon = int(resolve(args, cfg, "horizon"))
    if horizon < 1:
        raise UsageError("--horizon must be >= 1")
    mode = DecisionMode(resolve(args, cfg, "basis"))
    thresholds = Thresholds(float(resolve(args, cfg, "alert")), float(resolve(args, cfg, "restrict")),
                            float(resolve(args, cfg, "block")))
    with store.lock():
        users = [args.user] if args.user else store.model_users()
        try:
            loaded = [store.load_model(u) for u in users]
        except NotFound as exc:
            _err(str(exc))
            return EXIT_MISSING
        records = store.read_records()
        all_rows, all_decisions, per_user = [], [], []
        for model, stats, band in loaded:
            actuals = training_series(records, model)
            banded, decisions = judge(model, stats, band, horizon, actuals, mode, thresholds)
            rows = report_rows(banded, decisions, model.origin, model.granularity)
            all_rows.extend(rows)
            all_decisions.extend(decisions)
            per_user.append((model, banded, rows))
            worst = max(d.action for d in decisions)
            n_breach = sum(d.breach for d in decisions)
            print(f"{model.user_id} breaches={n_breach} worst={worst.name}")
        atomic_write(Path(args.out), report_csv(all_rows).encode("utf-8"))
        previous = []
        if store.decisions_path.exists():
            previous = parse_decisions(store.decisions_path.read_text(encoding="utf-8"))
        done = {m.user_id for m, _, _ in loaded}
        merged = sorted([d for d in previous if d.user_id not in done] + all_decisions,
                        key=lambda d: (d.user_id, d.period))
        atomic_write(store.decisions_path, decisions_csv(merged).encode("utf-8"))
    if args.plot_dir:
        from .plotting import figure_path, plot_overall, plot_user

        for model, banded, rows in per_user:
            plot_user(rows, banded.horizon_start, training_ceiling(banded)[1],
                      figure_path(args.plot_dir, model.user_id))
        if all_rows:
            plot_overall(all_rows, Path(args.plot_dir) / "_overall.png")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    store = _open_store(args.store)
    cfg = store.load_config()
    top = int(resolve(args, cfg, "top"))
    decisions = []
    if store.decisions_path.exists():
        decisions = parse_decisions(store.decisions_path.read_text(encoding="utf-8"))
    ranked = ranking(decisions)
    atomic_write(Path(args.out), ranking_csv(ranked).encode("utf-8"))
    print("rank user_id max_severity action")
    for rank, (uid, sev, act) in enumerate(ranked[:top], start=1):
        print(f"{rank} {uid} {sev:.6g} {act.name}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    defaults = ScenarioConfig()
    scenario = ScenarioConfig(
        n_users=args.users if args.users is not None else defaults.n_users,
        start=args.date_from or defaults.start,
        end=args.date_to or defaults.end,
        granularity=Granularity.parse(args.granularity) if args.granularity else defaults.granularity,
        normal_cap=args.cap if args.cap is not None else defaults.normal_cap,
        leaker_id=args.leaker,
        leak_start=args.leak_start,
        leak_slope=args.leak_slope if args.leak_slope is not None else defaults.leak_slope,
        noise_scale=args.noise if args.noise is not None else defaults.noise_scale,
        seed=args.seed if args.seed is not None else defaults.seed,
    )
    records = generate(scenario)
    atomic_write(Path(args.out), to_csv(records).encode("utf-8"))
    print(f"records={len(records)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dlpforecast", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an access log and append it to the store")
    p.add_argument("--store", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fit", help="fit one trend model per user")
    p.add_argument("--store", required=True)
    who = p.add_mutually_exclusive_group()
    who.add_argument("--user")
    who.add_argument("--all", action="store_true", help="fit every user (default)")
    p.add_argument("--granularity", type=str.upper,
                   choices=[g.value for g in Granularity])
    p.add_argument("--changepoints", type=int)
    p.add_argument("--cp-range", dest="cp_range", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--varsigma", type=float)
    p.add_argument("--band-mode", dest="band_mode", choices=[m.value for m in BandMode])
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("forecast", help="band, forecast and judge fitted users")
    p.add_argument("--store", required=True)
    who = p.add_mutually_exclusive_group()
    who.add_argument("--user")
    who.add_argument("--all", action="store_true", help="every fitted user (default)")
    p.add_argument("--horizon", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--basis", choices=[m.value for m in DecisionMode])
    p.add_argument("--alert", type=float)
    p.add_argument("--restrict", type=float)
    p.add_argument("--block", type=float)
    p.add_argument("--plot-dir", dest="plot_dir", help="also write one PNG chart per user here")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("report", help="rank users by worst severity")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top", type=int)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("simulate", help="write a synthetic access log")
    p.add_argument("--out", required=True)
    p.add_argument("--users", type=int)
    p.add_argument("--from", dest="date_from", type=_iso)
    p.add_argument("--to", dest="date_to", type=_iso)
    p.add_argument("--granularity", type=str.upper, choices=[g.value for g in Granularity])
    p.add_argument("--cap", type=float, help="normal users stay below this many minutes per period")
    p.add_argument("--leaker")
    p.add_argument("--leak-start", dest="leak_start", type=_iso)
    p.add_argument("--leak-slope", dest="leak_slope", type=float)
    p.add_argument("--noise", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, InvalidConfig, StoreError, ValueError, OSError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except DLPError as exc:
        _err(str(exc))
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())
