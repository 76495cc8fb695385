"""Training (average sorted APP matrices) and multi-trial decoding of frames.

Random streams: every frame draws from its own generator seeded by
``SeedSequence(seed, spawn_key=(stream, frame))``; stream 0 is the channel,
stream ``1 + j`` the pattern sampling of the j-th scheme.  Results therefore do
not depend on how frames are split across workers.
"""

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from . import channel as ch
from .patterns import PatternSet, to_codeword_coords
from .rdengine import SourceModel
from .rscodec import HardDecisionWord, RsCode

log = logging.getLogger(__name__)

TRAIN_STREAM = 0x7A11


def frame_rng(seed, frame, stream=0):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, frame)))


# training

@dataclass(frozen=True, eq=False)
class TrainedProfile:
    """Averages of reliability-sorted APP matrices and sorted bit posteriors.

    ``p_bar[j, i]`` is the mean probability of the (j+1)-th most likely symbol
    at the (i+1)-th least reliable position.
    """

    p_bar: np.ndarray
    bit_bar: np.ndarray
    tau: int
    ebno_db: float
    n: int
    k: int
    q: int
    seed: int | None = None

    def symbol_source(self, l):
        top = self.p_bar[:l].T
        rest = np.clip(1.0 - top.sum(axis=1), 0.0, None)
        d = np.column_stack([rest, top])
        return SourceModel(d / d.sum(axis=1, keepdims=True))

    def bit_source(self):
        b = np.clip(self.bit_bar, 0.0, 1.0)
        return SourceModel(np.column_stack([1.0 - b, b]))

    def to_json(self):
        body = {
            "n": self.n, "k": self.k, "q": self.q, "ebno_db": self.ebno_db,
            "tau": self.tau, "seed": self.seed,
            "p_bar": [[float(v) for v in row] for row in self.p_bar],
            "bit_bar": [float(v) for v in self.bit_bar],
        }
        return json.dumps(body, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(p_bar=np.array(d["p_bar"]), bit_bar=np.array(d["bit_bar"]),
                   tau=int(d["tau"]), ebno_db=float(d["ebno_db"]), n=int(d["n"]),
                   k=int(d["k"]), q=int(d["q"]), seed=d.get("seed"))

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


@dataclass(frozen=True, eq=False)
class Frame:
    codeword: np.ndarray
    received: np.ndarray
    view: ch.ReliabilityView


def make_frame(code: RsCode, cfg: ch.ChannelConfig, rng, noise_var=None):
    cw = code.random_codeword(rng)
    r = ch.transmit(cfg, cw, rng, noise_var)
    app = ch.symbol_app(cfg, r, noise_var)
    post, _ = ch.bit_app(cfg, r, noise_var)
    return Frame(cw, r, ch.reliability(app, post))


def train(code: RsCode, cfg: ch.ChannelConfig, tau, rng, noise_var=None, seed=None):
    if tau < 1:
        raise ValueError("need at least one training frame")
    p_sum = np.zeros((code.field.size, code.n))
    b_sum = np.zeros(code.n * code.field.q)
    for _ in range(tau):
        cw = code.random_codeword(rng)
        r = ch.transmit(cfg, cw, rng, noise_var)
        app = ch.symbol_app(cfg, r, noise_var)
        col_sorted = -np.sort(-app, axis=0)
        p_sum += col_sorted[:, np.argsort(col_sorted[0], kind="stable")]
        post, _ = ch.bit_app(cfg, r, noise_var)
        b_sum += np.sort(post)
    return TrainedProfile(p_bar=p_sum / tau, bit_bar=b_sum / tau, tau=int(tau),
                          ebno_db=float(cfg.ebno_db), n=code.n, k=code.k,
                          q=code.field.q, seed=seed)


# decoding

@dataclass(frozen=True, eq=False)
class DecodeResult:
    chosen: np.ndarray | None
    candidates: list = field(default_factory=list)
    trials_run: int = 0

    @property
    def frame_error(self):
        return self.chosen is None


def materialize(pattern, view: ch.ReliabilityView):
    """Hard-decision word for a pattern in codeword coordinates.

    Letter 0 erases; letter j uses the j-th most likely symbol.
    """
    pattern = np.asarray(pattern, dtype=np.int64)
    erased = pattern == 0
    rank = np.where(erased, 0, pattern - 1)
    if rank.max(initial=0) >= view.pi.shape[1]:
        raise ValueError("pattern letter exceeds the symbol alphabet")
    symbols = view.pi[np.arange(len(pattern)), rank]
    return HardDecisionWord(symbols.astype(np.int64), erased)


def ml_select(candidates, received, q):
    """Candidate whose BPSK image is closest to ``received``; first wins ties."""
    if not candidates:
        raise ValueError("no candidates to choose from")
    r = np.asarray(received, dtype=float)
    dists = [float(((ch.modulate(c, q) - r) ** 2).sum()) for c in candidates]
    return candidates[int(np.argmin(dists))]


def decode_frame(code: RsCode, received, view, pset: PatternSet):
    """Run BM once per distinct pattern and ML-select among the codewords found."""
    pats = np.unique(to_codeword_coords(pset.patterns, view.sigma), axis=0)
    seen = {}
    for p in pats:
        c = code.decode_ee(materialize(p, view))
        if c is not None and code.is_codeword(c):
            seen.setdefault(c.tobytes(), c)
    cands = list(seen.values())
    chosen = ml_select(cands, received, code.field.q) if cands else None
    return DecodeResult(chosen, cands, len(pats))


def min_distortion_scaled(x, pset: PatternSet, dm, chunk=4096):
    """Smallest scaled distortion between ``x`` and any pattern of the set."""
    x = np.asarray(x, dtype=np.int64)
    table = dm.delta_scaled[x].astype(np.int32)  # (n, K)
    pos = np.arange(len(x))
    best = None
    for start in range(0, len(pset), chunk):
        cols = dm.columns(pset.patterns[start:start + chunk])
        d = int(table[pos, cols].sum(axis=1).min())
        best = d if best is None else min(best, d)
    return best


def oracle_decode(x, pset: PatternSet, dm):
    """Genie check: some pattern meets the distortion threshold for ``x``."""
    return min_distortion_scaled(x, pset, dm) < dm.threshold_scaled


def wilson_interval(errors, frames):
    if frames == 0:
        return (0.0, 1.0)
    ci = binomtest(int(errors), int(frames)).proportion_ci(0.95, method="wilson")
    return (float(ci.low), float(ci.high))


# FER experiments

@dataclass(frozen=True, eq=False)
class FerResult:
    scheme: str
    frames: int
    errors: int
    failures: int
    miscorrections: int

    @property
    def fer(self):
        return self.errors / self.frames if self.frames else float("nan")

    @property
    def ci95(self):
        return wilson_interval(self.errors, self.frames)


LOG_FIELDS = ["frame", "scheme", "R", "min_distortion", "candidates", "success", "outcome"]


def _frame_records(code, cfg, plan, frame_idx, seed, oracle, include_hd, noise_var):
    frame = make_frame(code, cfg, frame_rng(seed, frame_idx, 0), noise_var)
    n, k, q = code.n, code.k, code.field.q
    out = []
    for j, (scheme, dm, design, fixed) in enumerate(plan):
        if fixed is not None:
            pset = fixed
        else:
            pset = scheme.pattern_set(n, k, design, frame_rng(seed, frame_idx, 1 + j),
                                      include_hd)
        x = scheme.error_pattern(frame, q)
        dmin = min_distortion_scaled(x, pset, dm)
        cands = ""
        if oracle or not scheme.bm_decodable:
            ok = dmin < dm.threshold_scaled
            outcome = "ok" if ok else "failure"
        else:
            res = decode_frame(code, frame.received, frame.view, pset)
            cands = len(res.candidates)
            ok = res.chosen is not None and np.array_equal(res.chosen, frame.codeword)
            outcome = "ok" if ok else ("failure" if res.chosen is None else "miscorrection")
        out.append({"frame": frame_idx, "scheme": scheme.label, "R": scheme.R,
                    "min_distortion": dmin / dm.scale, "candidates": cands,
                    "success": int(ok), "outcome": outcome})
    return out


def _run_chunk(args):
    code, cfg, plan, frames, seed, oracle, include_hd, noise_var = args
    recs = []
    for f in frames:
        recs.extend(_frame_records(code, cfg, plan, f, seed, oracle, include_hd, noise_var))
    return recs


def build_plan(code: RsCode, profile, schemes, fixed_patterns=False, seed=0,
               include_hd=True):
    """(scheme, measure, design point, fixed pattern set or None) per scheme."""
    plan = []
    for j, sc in enumerate(schemes):
        dm = sc.measure(code.n, code.k)
        design = sc.design(profile, code.n, code.k) if sc.uses_rd else None
        fixed = None
        if not sc.uses_rd or fixed_patterns:
            fixed = sc.pattern_set(code.n, code.k, design, frame_rng(seed, 0, 1 + j),
                                   include_hd)
        plan.append((sc, dm, design, fixed))
    return plan


def fer_experiment(code: RsCode, cfg: ch.ChannelConfig, schemes, frames, seed, profile,
                   oracle=False, include_hd=True, fixed_patterns=False, threads=1,
                   noise_var=None, plan=None):
    """FER of several schemes on one shared stream of frames.

    Returns ``(results, records)``: one FerResult per scheme and the per-frame
    log rows.
    """
    if frames < 1:
        raise ValueError("need at least one frame")
    if plan is None:
        plan = build_plan(code, profile, schemes, fixed_patterns, seed, include_hd)
    idx = list(range(frames))
    threads = max(1, int(threads or 1))
    if threads == 1:
        records = _run_chunk((code, cfg, plan, idx, seed, oracle, include_hd, noise_var))
    else:
        size = math.ceil(frames / (4 * threads))
        chunks = [idx[i:i + size] for i in range(0, frames, size)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = pool.map(_run_chunk, [(code, cfg, plan, c, seed, oracle, include_hd,
                                           noise_var) for c in chunks])
            records = [r for part in parts for r in part]
    records.sort(key=lambda r: (r["frame"], [p[0].label for p in plan].index(r["scheme"])))
    results = []
    for sc, *_ in plan:
        mine = [r for r in records if r["scheme"] == sc.label]
        fails = sum(r["outcome"] == "failure" for r in mine)
        mis = sum(r["outcome"] == "miscorrection" for r in mine)
        results.append(FerResult(sc.label, len(mine), fails + mis, fails, mis))
    return results, records


def write_frame_log(path, records, header_lines=()):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.DictWriter(fh, fieldnames=LOG_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(records)


def default_threads():
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1
