"""Command-line front end: train, rd-curve, fer, patterns.

Exit status: 0 success, 2 configuration error, 3 I/O error.
"""

import argparse
import csv
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import patterns as pt
from .channel import ChannelConfig
from .gf import DEFAULT_POLY, Field
from .pipeline import (TRAIN_STREAM, TrainedProfile, default_threads, fer_experiment,
                       frame_rng, train, write_frame_log)
from .rdengine import default_slopes, factored_rd, rate_zero_point
from .rscodec import RsCode
from .schemes import SchemeError, parse_scheme

log = logging.getLogger("rsrd")

EXIT_CONFIG = 2
EXIT_IO = 3

CURVE_SCHEMES = ["mBM-1", "mBM-2", "mBM-3", "m-b-ASD", "mASD-2", "mASD-2a", "mASD-3", "EO-2"]

DEFAULTS = {
    "n": 255,
    "k": 239,
    "q": 8,
    "primitive_poly": None,
    "ebno_db": [round(4.6 + 0.2 * i, 1) for i in range(9)],
    "schemes": ["GMD", "SED(12,12)",
                "mBM-1(4)", "mBM-1(7)", "mBM-1(11)",
                "mBM-2(4)", "mBM-2(7)", "mBM-2(11)",
                "mBM-3(4)", "mBM-3(7)", "mBM-3(11)",
                "mBM-HM74(4)", "mBM-HM74(11)",
                "m-b-ASD(11)", "mASD-2(11)", "mASD-2a(11)", "mASD-3(11)"],
    "curve_schemes": CURVE_SCHEMES,
    "slopes": 120,
    "tau": 1000,
    "frames": 1000,
    "seed": 0,
    "oracle": False,
    "include_hd": True,
    "fixed_patterns": False,
}

SMALL = {
    "n": 15,
    "k": 11,
    "q": 4,
    "ebno_db": [3.0, 4.0, 5.0],
    "schemes": ["BM", "GMD", "SED(4,4)", "mBM-1(2)", "mBM-1(4)", "mBM-2(2)", "mBM-2(4)",
                "mBM-HM74(4)", "m-b-ASD(4)"],
    "curve_schemes": ["mBM-1", "mBM-2", "mBM-3", "m-b-ASD", "EO-2"],
    "slopes": 40,
    "tau": 200,
    "frames": 200,
}

# keys that do not change any numerical output
_UNHASHED = {"out", "threads"}


class ConfigError(Exception):
    pass


class Context:
    def __init__(self, cfg):
        self.cfg = cfg
        poly = cfg["primitive_poly"] or DEFAULT_POLY[cfg["q"]]
        try:
            self.field = Field(cfg["q"], poly)
            self.code = RsCode(self.field, cfg["k"], cfg["n"])
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        self.out = cfg["out"]
        self.digest = config_hash(cfg)

    def channel(self, ebno):
        return ChannelConfig(float(ebno), self.code.rate, self.field.q)

    def profile_path(self, ebno):
        c = self.cfg
        return os.path.join(self.out, f"profile_n{c['n']}_k{c['k']}_eb{float(ebno):.2f}"
                                      f"_tau{c['tau']}_seed{c['seed']}.json")

    def header(self):
        return [f"config_sha256={self.digest}", f"seed={self.cfg['seed']}"]

    def load_profile(self, ebno):
        path = self.profile_path(ebno)
        if not os.path.exists(path):
            raise FileNotFoundError(f"no trained profile at {path}; run 'train' first")
        return TrainedProfile.load(path)

    def train_profile(self, ebno):
        path = self.profile_path(ebno)
        if os.path.exists(path):
            return TrainedProfile.load(path), path, False
        rng = frame_rng(self.cfg["seed"], int(round(float(ebno) * 100)), TRAIN_STREAM)
        prof = train(self.code, self.channel(ebno), self.cfg["tau"], rng, seed=self.cfg["seed"])
        prof.save(path)
        return prof, path, True


def config_hash(cfg):
    body = {k: v for k, v in cfg.items() if k not in _UNHASHED}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def load_config(args):
    cfg = dict(DEFAULTS)
    if args.small:
        cfg.update(SMALL)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(user) - set(DEFAULTS) - {"out"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.oracle:
        cfg["oracle"] = True
    cfg["out"] = args.out or cfg.get("out") or "."
    return validate(cfg)


def validate(cfg):
    for key in ("n", "k", "q", "tau", "frames", "seed", "slopes"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool):
            raise ConfigError(f"{key} must be an integer")
    if cfg["tau"] < 1 or cfg["frames"] < 1 or cfg["slopes"] < 2:
        raise ConfigError("tau and frames must be >= 1 and slopes >= 2")
    if not 1 <= cfg["q"] <= 8:
        raise ConfigError("q must be in 1..8")
    eb = cfg["ebno_db"]
    if isinstance(eb, (int, float)):
        eb = [eb]
    if not eb or not all(isinstance(v, (int, float)) and np.isfinite(v) for v in eb):
        raise ConfigError("ebno_db must be a non-empty list of finite numbers")
    cfg["ebno_db"] = [float(v) for v in eb]
    n, k = cfg["n"], cfg["k"]
    for key in ("schemes", "curve_schemes"):
        names = cfg[key]
        if not isinstance(names, list):
            raise ConfigError(f"{key} must be a list")
        for name in names:
            try:
                sc = parse_scheme(name)
                sc.check(n, k)
            except SchemeError as exc:
                raise ConfigError(str(exc)) from exc
            if key == "schemes" and sc.uses_rd and sc.R is None:
                raise ConfigError(f"scheme {name} needs a rate for FER runs")
    return cfg


# subcommands

def cmd_train(ctx, args):
    if ctx.cfg["tau"] == 1:
        log.warning("tau=1: the trained profile is a single frame")
    for eb in ctx.cfg["ebno_db"]:
        _, path, fresh = ctx.train_profile(eb)
        log.info("%s profile %s", "wrote" if fresh else "kept", path)
    return 0


def cmd_rd_curve(ctx, args):
    n, k = ctx.code.n, ctx.code.k
    slopes = default_slopes(ctx.cfg["slopes"])
    path = os.path.join(ctx.out, "rd_curve.csv")
    rows = []
    for eb in ctx.cfg["ebno_db"]:
        prof = ctx.load_profile(eb)
        for name in ctx.cfg["curve_schemes"]:
            sc = parse_scheme(name)
            src, dm = sc.source(prof), sc.measure(n, k)
            z = rate_zero_point(src, dm)
            rows.append([eb, sc.name, 0.0, 0.0, z.distortion])
            for s in slopes:
                p = factored_rd(src, dm, float(s))
                rows.append([eb, sc.name, float(s), p.rate, p.distortion])
            log.info("rd-curve %s at %.2f dB done", sc.name, eb)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in ctx.header():
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ebno_db", "scheme", "s", "R_bits", "D"])
        w.writerows(rows)
    return 0


def cmd_fer(ctx, args):
    c = ctx.cfg
    schemes = [parse_scheme(s) for s in c["schemes"]]
    path = os.path.join(ctx.out, "fer.csv")
    rows = []
    for eb in c["ebno_db"]:
        prof, _, _ = ctx.train_profile(eb)
        results, records = fer_experiment(
            ctx.code, ctx.channel(eb), schemes, c["frames"], c["seed"], prof,
            oracle=c["oracle"], include_hd=c["include_hd"],
            fixed_patterns=c["fixed_patterns"], threads=args.threads)
        for r in results:
            lo, hi = r.ci95
            rows.append([eb, r.scheme, r.frames, r.errors, r.failures, r.miscorrections,
                         r.fer, lo, hi])
            log.info("%.2f dB %-14s FER %.4g (%d/%d)", eb, r.scheme, r.fer, r.errors, r.frames)
        write_frame_log(os.path.join(ctx.out, f"frames_eb{eb:.2f}.csv"), records, ctx.header())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in ctx.header():
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ebno_db", "scheme", "frames", "errors", "failures", "miscorrections",
                    "fer", "ci_low", "ci_high"])
        w.writerows(rows)
    return 0


def cmd_patterns(ctx, args):
    c = ctx.cfg
    n, k = ctx.code.n, ctx.code.k
    eb = c["ebno_db"][0]
    prof = ctx.load_profile(eb)
    for j, name in enumerate(c["schemes"]):
        sc = parse_scheme(name)
        design = sc.design(prof, n, k) if sc.uses_rd else None
        pset = sc.pattern_set(n, k, design, frame_rng(c["seed"], 0, 1 + j), c["include_hd"])
        fname = "patterns_" + "".join(ch if ch.isalnum() else "_" for ch in sc.label) + ".txt"
        with open(os.path.join(ctx.out, fname), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# config_sha256={ctx.digest} ebno_db={eb}\n")
            fh.write(pt.dump_patterns(pset, seed=c["seed"]))
    return 0


COMMANDS = {"train": cmd_train, "rd-curve": cmd_rd_curve, "fer": cmd_fer,
            "patterns": cmd_patterns}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON experiment config")
    common.add_argument("--seed", type=int, help="master seed (overrides config)")
    common.add_argument("--threads", type=int, default=default_threads(),
                        help="worker processes for FER runs")
    common.add_argument("--oracle", action="store_true",
                        help="genie distortion test instead of running BM trials")
    common.add_argument("--small", action="store_true",
                        help="(15,11) code over GF(16) preset")
    common.add_argument("--out", help="output directory (default: current directory)")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="rsrd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        ctx = Context(load_config(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        os.makedirs(ctx.out, exist_ok=True)
        return COMMANDS[args.command](ctx, args)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
