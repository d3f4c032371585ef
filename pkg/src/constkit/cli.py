"""``constkit`` command-line interface.

Exit codes: 0 success, 2 usage, 3 data error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as dt
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np

from constkit import __version__
from constkit.channel import SweepConfig, read_sweep_csv, run_sweep, write_sweep_csv
from constkit.constellation import read_constellation_csv, write_constellation_csv
from constkit.designs import DESIGNS, catalog, parse_spec, resolve
from constkit.energy import ScoreWeights, rank_designs, write_ranking_csv
from constkit.errors import ConstkitError, InvalidInput, SchemaError, UnsupportedScheme
from constkit.metrics import mean_distance, min_distance, papr_db
from constkit.optimize import (FitnessWeights, GaConfig, PsoConfig, ga_optimize,
                               pso_optimize, write_trace_csv)
from constkit.rng import derive_stream
from constkit.svgplot import cdf_steps, power_cdf_svg, scatter_svg, ser_curves_svg

log = logging.getLogger("constkit")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 2, 3, 4

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "schemes": ",".join(DESIGNS),
    "channels": "AWGN,Rayleigh",
    "snr": "-5:50:1",
    "symbols": 1_000_000,
    "chunk_size": 10_000,
    "workers": 1,
}

METRICS_COLUMNS = ["label", "M", "d_min", "mean_dist", "papr_db"]


class UsageError(Exception):
    pass


# -- configuration ------------------------------------------------------------

def load_config(path: str | None) -> dict[str, str]:
    """Flat ``key = value`` file; section headers are optional and ignored."""
    if not path:
        return {}
    text = Path(path).read_text()
    if not text.lstrip().startswith("["):
        text = "[constkit]\n" + text
    cp = configparser.ConfigParser()
    cp.read_string(text)
    out: dict[str, str] = {}
    for section in cp.sections():
        out.update({k.replace("-", "_"): v for k, v in cp[section].items()})
    return out


def resolve_option(args: argparse.Namespace, cfg: dict[str, str], name: str, cast=str):
    """Flag, then config file, then CONSTKIT_SEED (seed only), then default."""
    val = getattr(args, name, None)
    if val is not None:
        return val
    if name in cfg:
        try:
            return cast(cfg[name])
        except ValueError as exc:
            raise UsageError(f"config key {name}: {exc}") from None
    if name == "seed" and os.environ.get("CONSTKIT_SEED"):
        return int(os.environ["CONSTKIT_SEED"])
    return DEFAULTS.get(name)


def parse_snr_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--snr expects start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--snr expects numbers, got {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError("--snr needs step > 0 and stop >= start")
    return start, stop, step


def parse_params(items: list[str] | None) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        out[key] = json.loads(val) if val[:1] in "[{" else _number(val)
    return out


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        try:
            return float(text)
        except ValueError:
            return text


# -- manifest ---------------------------------------------------------------

def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(target: Path, argv: list[str], config: dict, seed: int | None,
                   started: str, outputs: list[Path]) -> Path:
    manifest = {
        "tool_version": __version__,
        "command_line": ["constkit"] + argv,
        "resolved_config": config,
        "master_seed": seed,
        "start_time": started,
        "end_time": _now(),
        "output_digests": {str(p): _digest(p) for p in outputs},
    }
    target.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return target


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def _manifest_path(out: Path) -> Path:
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


# -- commands ---------------------------------------------------------------

def cmd_list(args, cfg, argv) -> int:
    entries = catalog()
    if args.json:
        print(json.dumps({"schemes": entries, "designs": list(DESIGNS)}, indent=2))
        return EXIT_OK
    for e in entries:
        params = ", ".join(f"{k}={v}" for k, v in e["params"].items()) or "-"
        print(f"{e['id']:<20} M: {e['orders']:<18} params: {params}")
    print("\nnamed designs (M=16): " + ", ".join(DESIGNS))
    return EXIT_OK


def metrics_rows(items: list[str], params: dict[str, Any], order: int | None) -> list[dict]:
    rows = []
    for item in items:
        if order is not None or params:
            spec = parse_spec(item, params)
            if order is not None:
                spec = type(spec)(spec.scheme, order, spec.params)
            c = resolve(spec)
        else:
            c = resolve(item)
        rows.append({"label": c.label, "M": c.M, "d_min": min_distance(c),
                     "mean_dist": mean_distance(c), "papr_db": papr_db(c)})
    return rows


def cmd_metrics(args, cfg, argv) -> int:
    started = _now()
    items = list(args.scheme or [])
    if args.all_designs:
        items += list(DESIGNS)
    if not items:
        raise UsageError("metrics needs --scheme or --all-designs")
    rows = metrics_rows(items, parse_params(args.param), args.M)
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'label':<22} {'M':>3} {'d_min':>8} {'mean':>8} {'PAPR dB':>8}")
        for r in rows:
            print(f"{r['label']:<22} {r['M']:>3} {r['d_min']:8.4f} {r['mean_dist']:8.4f} {r['papr_db']:8.3f}")
    if args.out:
        out = Path(args.out)
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(METRICS_COLUMNS)
            for r in rows:
                w.writerow([r["label"], r["M"]] + [f"{r[k]:.9g}" for k in METRICS_COLUMNS[2:]])
        write_manifest(_manifest_path(out), argv, {"items": items}, None, started, [out])
    return EXIT_OK


def cmd_sweep(args, cfg, argv) -> int:
    started = _now()
    seed = int(resolve_option(args, cfg, "seed", int))
    schemes = [s.strip() for s in str(resolve_option(args, cfg, "schemes")).split(",") if s.strip()]
    channels = [s.strip() for s in str(resolve_option(args, cfg, "channels")).split(",") if s.strip()]
    start, stop, step = parse_snr_range(str(resolve_option(args, cfg, "snr")))
    symbols = int(resolve_option(args, cfg, "symbols", int))
    chunk = int(resolve_option(args, cfg, "chunk_size", int))
    workers = int(resolve_option(args, cfg, "workers", int))
    if symbols < 1000 or chunk < 1 or workers < 1:
        raise UsageError("need symbols >= 1000, chunk-size >= 1, workers >= 1")
    try:
        sc = SweepConfig(schemes, channels, start, stop, step, symbols, seed, chunk, workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = run_sweep(sc)
    out = Path(args.out or "sweep.csv")
    write_sweep_csv(result, out)
    resolved = {"schemes": schemes, "channels": channels, "snr": [start, stop, step],
                "symbols": symbols, "chunk_size": chunk, "workers": workers, "seed": seed}
    write_manifest(_manifest_path(out), argv, resolved, seed, started, [out])
    for r in result.failures:
        print(f"warning: {r.scheme} ({r.channel}): {r.status}", file=sys.stderr)
    print(f"wrote {out} ({len(result.rows)} rows)")
    return EXIT_OK


def cmd_optimize(args, cfg, argv) -> int:
    started = _now()
    seed = int(resolve_option(args, cfg, "seed", int))
    try:
        w = FitnessWeights(tau=args.tau, alpha=args.alpha, papr_cap_db=args.papr_cap, beta=args.beta,
                           gamma=args.gamma, lambda_papr=args.lambda_papr, snr_db=args.snr_db)
        if args.method == "pso":
            kw = {k: v for k, v in (("particles", args.size), ("iterations", args.iterations)) if v}
            trace = pso_optimize(args.M, PsoConfig(seed=seed, **kw), w)
        else:
            kw = {k: v for k, v in (("population", args.size), ("generations", args.iterations)) if v}
            trace = ga_optimize(args.M, GaConfig(seed=seed, **kw), w)
    except InvalidInput as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out or f"{args.method}-M{args.M}-seed{seed}")
    out.mkdir(parents=True, exist_ok=True)
    cpath, tpath = out / "constellation.csv", out / "trace.csv"
    write_constellation_csv(trace.constellation, cpath)
    write_trace_csv(trace, tpath)
    write_manifest(out / "manifest.json", argv, trace.config, seed, started, [cpath, tpath])
    c = trace.constellation
    print(f"{args.method} M={args.M} seed={seed}: best cost {trace.best_cost:.6g}, "
          f"d_min {min_distance(c):.4f}, PAPR {papr_db(c):.3f} dB -> {out}")
    return EXIT_OK


def _read_metrics_csv(path: Path) -> dict[str, dict[str, float]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if not {"label", "d_min", "papr_db"} <= set(cols):
            raise SchemaError(f"{path}: metrics CSV needs label,d_min,papr_db columns")
        try:
            return {r["label"]: {"d_min": float(r["d_min"]), "papr_db": float(r["papr_db"])}
                    for r in reader}
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}") from None


def _read_ser_table(path: Path, snr: float, channel: str) -> dict[str, float]:
    """SER per label from either a sweep CSV or a plain ``label,ser_10db`` table."""
    with open(path, newline="") as fh:
        cols = next(csv.reader(fh), [])
    if "ser_10db" in cols:
        with open(path, newline="") as fh:
            try:
                return {r["label"]: float(r["ser_10db"]) for r in csv.DictReader(fh)}
            except (KeyError, ValueError) as exc:
                raise SchemaError(f"{path}: {exc}") from None
    table = {}
    for r in read_sweep_csv(path):
        if r.point and r.channel.lower() == channel.lower() and math.isclose(r.point.snr_db, snr):
            table[r.scheme] = r.point.ser
    return table


def cmd_score(args, cfg, argv) -> int:
    started = _now()
    metrics = _read_metrics_csv(Path(args.metrics))
    sers = _read_ser_table(Path(args.ser), args.snr, args.channel)
    for label in metrics:
        if label not in sers:
            raise SchemaError(f"label {label!r} missing from SER input {args.ser}")
    for label in sers:
        if label not in metrics:
            raise SchemaError(f"label {label!r} missing from metrics input {args.metrics}")
    try:
        w = ScoreWeights.renormalized(args.w_dmin, args.w_power, args.w_ser, args.d_ref)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid weights: {exc}") from None
    entries = [(k, v["d_min"], v["papr_db"], sers[k]) for k, v in metrics.items()]
    report = rank_designs(entries, w)
    out = Path(args.out or "ranking.csv")
    write_ranking_csv(report, out)
    write_manifest(_manifest_path(out), argv,
                   {"weights": [w.w_dmin, w.w_power, w.w_ser], "d_ref": args.d_ref,
                    "snr": args.snr, "channel": args.channel}, None, started, [out])
    for r in report:
        print(f"{r.rank:>2}. {r.label:<22} {r.composite:.4f}")
    return EXIT_OK


def cmd_plot(args, cfg, argv) -> int:
    started = _now()
    inputs = [Path(p) for p in args.input]
    if args.kind == "scatter":
        c = read_constellation_csv(inputs[0])
        svg = scatter_svg(np.asarray(c.points), title=c.label)
    elif args.kind == "ser-curves":
        series: dict[str, tuple[list[float], list[float]]] = {}
        for p in inputs:
            for r in read_sweep_csv(p):
                if r.point is None or (args.channel and r.channel.lower() != args.channel.lower()):
                    continue
                snr, ser = series.setdefault(f"{r.scheme} ({r.channel})", ([], []))
                snr.append(r.point.snr_db)
                ser.append(r.point.ser)
        if not series:
            raise SchemaError("no SER rows to plot")
        svg = ser_curves_svg(series)
    else:
        seed = int(resolve_option(args, cfg, "seed", int))
        cdfs = {}
        for p in inputs:
            c = read_constellation_csv(p)
            s = derive_stream(seed, ("papr-cdf", c.label))
            x = np.asarray(c.points)[s.choice(np.asarray(c.probs), args.draws)]
            power = np.abs(x) ** 2 / c.energy
            with np.errstate(divide="ignore"):
                db = 10.0 * np.log10(power)
            # CSV coordinates carry 9 significant digits; 1e-6 dB absorbs that jitter
            cdfs[c.label] = cdf_steps(np.round(np.maximum(db, -20.0), 6) + 0.0)
        svg = power_cdf_svg(cdfs)
    out = Path(args.out or f"{args.kind}.svg")
    out.write_text(svg)
    write_manifest(_manifest_path(out), argv, {"kind": args.kind, "inputs": [str(p) for p in inputs]},
                   None, started, [out])
    print(f"wrote {out}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    common.add_argument("--out", default=None, help="output path")
    common.add_argument("--config", default=None, help="flat key=value config file")
    common.add_argument("--json", action="store_true", help="machine-readable stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="constkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"constkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("list", parents=[common], help="list scheme ids and named designs")

    m = sub.add_parser("metrics", parents=[common], help="geometry metrics of constellations")
    m.add_argument("--scheme", action="append", help="design name, Scheme[:M], or CSV path")
    m.add_argument("-M", type=int, default=None, help="order for a scheme id")
    m.add_argument("--param", action="append", help="scheme parameter key=value")
    m.add_argument("--all-designs", action="store_true", help="include every named design")

    s = sub.add_parser("sweep", parents=[common], help="Monte Carlo SER sweep")
    s.add_argument("--schemes", default=None, help="comma list (default: all named designs)")
    s.add_argument("--channels", default=None, help="comma list of AWGN,Rayleigh")
    s.add_argument("--snr", default=None, help="start:stop:step in dB (default -5:50:1)")
    s.add_argument("--symbols", type=int, default=None, help="symbols per SNR point")
    s.add_argument("--chunk-size", dest="chunk_size", type=int, default=None)
    s.add_argument("--workers", type=int, default=None)

    o = sub.add_parser("optimize", parents=[common], help="PSO/GA constellation search")
    o.add_argument("method", choices=["pso", "ga"])
    o.add_argument("-M", type=int, default=16)
    o.add_argument("--iterations", type=int, default=None, help="iterations/generations")
    o.add_argument("--size", type=int, default=None, help="particles/population")
    o.add_argument("--tau", type=float, default=0.3)
    o.add_argument("--alpha", type=float, default=1.0)
    o.add_argument("--beta", type=float, default=0.05)
    o.add_argument("--gamma", type=float, default=1.0)
    o.add_argument("--papr-cap", dest="papr_cap", type=float, default=3.0)
    o.add_argument("--lambda-papr", dest="lambda_papr", type=float, default=None,
                   help="switch to the energy-aware objective")
    o.add_argument("--snr-db", dest="snr_db", type=float, default=10.0)

    sc = sub.add_parser("score", parents=[common], help="composite ranking")
    sc.add_argument("--metrics", required=True, help="metrics CSV")
    sc.add_argument("--ser", required=True, help="sweep CSV or label,ser_10db CSV")
    sc.add_argument("--snr", type=float, default=10.0)
    sc.add_argument("--channel", default="AWGN")
    sc.add_argument("--w-dmin", dest="w_dmin", type=float, default=0.35)
    sc.add_argument("--w-power", dest="w_power", type=float, default=0.25)
    sc.add_argument("--w-ser", dest="w_ser", type=float, default=0.40)
    sc.add_argument("--d-ref", dest="d_ref", type=float, default=None)

    pl = sub.add_parser("plot", parents=[common], help="SVG figures")
    pl.add_argument("kind", choices=["scatter", "ser-curves", "papr-cdf"])
    pl.add_argument("--input", action="append", required=True)
    pl.add_argument("--channel", default=None, help="ser-curves: keep one channel")
    pl.add_argument("--draws", type=int, default=100_000, help="papr-cdf: symbol draws")
    return p


COMMANDS = {"list": cmd_list, "metrics": cmd_metrics, "sweep": cmd_sweep,
            "optimize": cmd_optimize, "score": cmd_score, "plot": cmd_plot}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg, argv)
    except UsageError as exc:
        print(f"constkit: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConstkitError, UnsupportedScheme, KeyError) as exc:
        print(f"constkit: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"constkit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except configparser.Error as exc:
        print(f"constkit: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
