"""Command-line driver: ``lazykron verify|counts|bench|hinted-mv``.

Exit status is 0 on success, 1 when a check fails, 2 on a usage or
configuration error.  Grid flags take comma-separated lists.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import fields

from . import bench
from .hinted_mv import PhaseReport, hmv_sweep
from .lazy import LazyParams
from .semiring import BOOL, REAL

log = logging.getLogger("lazykron")

OUT_DIR_ENV = "LAZYKRON_OUT_DIR"

DEFAULTS = {
    "verify": dict(n=[2, 3], k=[1, 2, 3, 4], s=None, K=[1, 2, 3, 5], a=None, T=[25], trials=50),
    "counts": dict(n=[2], k=[2], s=[1], K=[3], a=None, T=None, trials=None),
    "bench": dict(n=[4], k=[2, 3], s=[1], K=[4, 8], a=None, T=[32], trials=None),
    "hinted-mv": dict(n=[3], k=[2, 3], s=[1], K=None, a=[1.0], T=None, trials=None),
}
COMMON_DEFAULTS = dict(seed=0, scalar="real", kernel="naive", out=None, format="csv", no_wall=False)
CONFIG_KEYS = set(COMMON_DEFAULTS) | {"n", "k", "s", "K", "a", "T", "trials", "config"}


class ConfigError(Exception):
    pass


def int_list(text):
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def float_list(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _flag_type(key):
    return {
        "n": int_list, "k": int_list, "s": int_list, "K": int_list, "T": int_list,
        "a": float_list, "trials": int, "seed": int,
    }.get(key, str)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so explicit flags can be told apart from config values
    common.add_argument("--n", type=int_list, default=None, help="mode size(s)")
    common.add_argument("--k", type=int_list, default=None, help="tensor order(s)")
    common.add_argument("--s", type=int_list, default=None, help="number of fixed modes per query")
    common.add_argument("--K", type=int_list, default=None, help="buffer capacity")
    common.add_argument("--a", type=float_list, default=None,
                        help="exponent with K = ceil(n**a); the sparsity exponent for hinted-mv")
    common.add_argument("--T", type=int_list, default=None, help="stream length(s)")
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--scalar", choices=["real", "bool", "counting"], default=None)
    common.add_argument("--kernel", choices=["naive", "blocked"], default=None)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--no-wall", dest="no_wall", action="store_const", const=True, default=None,
                        help="write 0 in wall-clock columns (byte-stable output)")
    common.add_argument("--config", default=None, help="key=value file; flags take precedence")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lazykron", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="lazy vs. eager equivalence suite")
    sub.add_parser("counts", parents=[common], help="audit multiplication counts against formulas")
    sub.add_parser("bench", parents=[common], help="amortized update / worst query sweep")
    sub.add_parser("hinted-mv", parents=[common], help="three-phase hinted Mv reduction sweep")
    return parser


def read_config(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in CONFIG_KEYS or key == "config":
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key == "no_wall":
            values[key] = value.lower() in ("1", "true", "yes")
            continue
        try:
            values[key] = _flag_type(key)(value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}")
    return values


def resolve_config(args):
    """Merge defaults < config file < explicit flags, then validate ranges."""
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(DEFAULTS[args.command])
    if args.config:
        cfg.update(read_config(args.config))
    for key in CONFIG_KEYS - {"config"}:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg["command"] = args.command
    validate(cfg)
    return cfg


def validate(cfg):
    def positive(key):
        for v in cfg.get(key) or []:
            if v < 1:
                raise ConfigError(f"--{key} values must be >= 1, got {v}")

    for key in ("n", "k", "s", "K", "T"):
        positive(key)
    if cfg.get("trials") is not None and cfg["trials"] < 0:
        raise ConfigError("--trials must be >= 0")
    for v in cfg.get("a") or []:
        if v < 0:
            raise ConfigError(f"--a values must be >= 0, got {v}")
    if cfg["s"] and cfg["k"] and min(cfg["s"]) > max(cfg["k"]):
        raise ConfigError("every --s value exceeds every --k value")
    if cfg["command"] in ("counts", "bench"):
        if not cfg["K"] and not cfg["a"]:
            raise ConfigError("give --K or --a")
        if cfg["command"] == "counts" and (cfg["scalar"] == "bool" or cfg["kernel"] != "naive"):
            raise ConfigError("counts audits the counting real semiring with the naive kernel")


def capacities(cfg, n):
    if cfg["K"]:
        return cfg["K"]
    return [LazyParams.from_exponent(n, 1, a).K for a in cfg["a"]]


def base_semiring(cfg):
    return BOOL if cfg["scalar"] == "bool" else REAL


def render(rows, names, fmt):
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def output_path(cfg):
    if cfg["out"]:
        return cfg["out"]
    out_dir = os.environ.get(OUT_DIR_ENV)
    if out_dir:
        return os.path.join(out_dir, f"{cfg['command']}.{cfg['format']}")
    return None


def emit(cfg, rows, names):
    text = render(rows, names, cfg["format"])
    path = output_path(cfg)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror or exc}")
    log.info("wrote %d rows to %s", len(rows), path)


def zero_walls(rows):
    for row in rows:
        for key in row:
            if key.endswith("_wall"):
                row[key] = 0.0
    return rows


def cmd_verify(cfg):
    K_values = sorted({K for n in cfg["n"] for K in capacities(cfg, n)})
    sr = base_semiring(cfg)
    result = bench.verify_equivalence(
        ks=cfg["k"], ns=cfg["n"], Ks=K_values, T=max(cfg["T"]), trials=cfg["trials"],
        seed=cfg["seed"], semiring=sr, kernel=cfg["kernel"])
    if not result.ok:
        print(result.failure.describe())
        print(f"FAIL after {result.checks} checks on {result.streams} streams")
        return 1
    print(f"OK {result.checks} checks on {result.streams} streams")
    return 0


def cmd_counts(cfg):
    rows = []
    for n in cfg["n"]:
        for k in cfg["k"]:
            for s in cfg["s"]:
                if s > k:
                    continue
                for K in capacities(cfg, n):
                    rows.extend(bench.audit_counts(n, k, s, K, seed=cfg["seed"]))
    emit(cfg, bench.row_dicts(rows), [f.name for f in fields(bench.CountRow)])
    bad = [r for r in rows if not r.ok]
    for r in bad:
        print(f"count mismatch: {r.check} n={r.n} k={r.k} s={r.s} K={r.K} fill={r.fill} "
              f"expected {r.expected}, measured {r.measured}", file=sys.stderr)
    return 1 if bad else 0


def cmd_bench(cfg):
    rows = []
    n_list = cfg["n"]
    points = [(n, k, s, K, T) for n in n_list for k in cfg["k"] for s in cfg["s"]
              for K in capacities(cfg, n) for T in cfg["T"] if s <= k]
    for (n, k, s, K, T), rng in zip(points, bench.point_rngs(cfg["seed"], len(points))):
        row, _ = bench.bench_point(n, k, s, K, T, rng, base_semiring(cfg), cfg["kernel"])
        rows.append(row)
    dicts = bench.row_dicts(rows)
    if cfg["no_wall"]:
        zero_walls(dicts)
    emit(cfg, dicts, bench.BENCH_FIELDS)
    return 0


def cmd_hinted_mv(cfg):
    taus = cfg["a"] or [1.0]
    rows = hmv_sweep(cfg["n"], cfg["k"], cfg["s"], taus, seed=cfg["seed"],
                     semiring=base_semiring(cfg), kernel=cfg["kernel"],
                     K=cfg["K"][0] if cfg["K"] else None)
    dicts = [r.as_dict() for r in rows]
    if cfg["no_wall"]:
        zero_walls(dicts)
    emit(cfg, dicts, [f.name for f in fields(PhaseReport)])
    return 0


COMMANDS = {
    "verify": cmd_verify,
    "counts": cmd_counts,
    "bench": cmd_bench,
    "hinted-mv": cmd_hinted_mv,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"lazykron: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
