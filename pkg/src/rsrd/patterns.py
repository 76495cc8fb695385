"""Erasure-pattern sets in reliability-sorted coordinates.

Row ``r`` of a pattern array is one pattern; column ``i`` is the i-th least
reliable position.  Letters follow the distortion measure the set is built
for: 0 = erase and j = use the j-th most likely symbol for the BM measures,
a multiplicity-type index for ASD measures, keep/erase for bit patterns.
"""

import io
import itertools
from dataclasses import dataclass, field

import numpy as np

from .rdengine import RdPoint


@dataclass(frozen=True, eq=False)
class PatternSet:
    patterns: np.ndarray
    scheme: str
    rate_bits: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.patterns, dtype=np.int16))
        p.flags.writeable = False
        object.__setattr__(self, "patterns", p)

    def __len__(self):
        return self.patterns.shape[0]

    @property
    def length(self):
        return self.patterns.shape[1]


@dataclass(frozen=True, eq=False)
class CoveringCode:
    n_c: int
    k_c: int
    t_c: int
    codewords: np.ndarray  # letters over {1..l}
    l: int = 2

    def covering_radius(self):
        """Brute-force covering radius over all of {1..l}^n_c."""
        words = np.array(list(itertools.product(range(1, self.l + 1), repeat=self.n_c)))
        dist = (words[:, None, :] != self.codewords[None, :, :]).sum(axis=2)
        return int(dist.min(axis=1).max())


def _set(rows, scheme, rate_bits, **meta):
    return PatternSet(np.asarray(rows), scheme, rate_bits, dict(meta))


def hd_pattern(n, hd_letter=1):
    return np.full(n, hd_letter, dtype=np.int16)


def gmd_set(n, d_min):
    """Erase 0, 2, ..., d_min-1 least reliable positions."""
    if d_min % 2 == 0:
        raise ValueError("GMD pattern set assumes an odd minimum distance")
    rows = []
    for e in range(0, d_min, 2):
        p = hd_pattern(n)
        p[:e] = 0
        rows.append(p)
    return _set(rows, "GMD", float(np.log2(len(rows))))


def sed_set(l, f, n):
    """Every even-size erasure set of size <= f within the l least reliable positions."""
    if not 0 <= f <= l <= n:
        raise ValueError(f"need 0 <= f <= l <= n, got l={l}, f={f}, n={n}")
    rows = []
    for e in range(0, f + 1, 2):
        for where in itertools.combinations(range(l), e):
            p = hd_pattern(n)
            p[list(where)] = 0
            rows.append(p)
    return _set(rows, f"SED({l},{f})", float(np.log2(len(rows))))


def sample_patterns(q_dists, count, rng, letters=None):
    """``count`` patterns drawn independently per position from ``q_dists``.

    Returns column indices unless ``letters`` maps them to erasure letters.
    """
    q = np.asarray(q_dists, dtype=float)
    cdf = np.cumsum(q, axis=1)
    u = rng.random((count, q.shape[0]))
    # index = number of interior cdf steps at or below u
    cols = np.zeros((count, q.shape[0]), dtype=np.int16)
    for j in range(q.shape[1] - 1):
        cols += u >= cdf[:, j]
    if letters is None:
        return cols
    return np.asarray(letters, dtype=np.int16)[cols]


def random_set(rd: RdPoint, R, rng, dm, include_hd=True):
    """2^R patterns sampled from the test-channel input distributions of ``rd``.

    With ``include_hd`` the first pattern is the all-hard-decision pattern and
    only 2^R - 1 are sampled.
    """
    if int(R) != R or R < 0:
        raise ValueError("pattern-set rate must be a nonnegative integer")
    total = 1 << int(R)
    n = rd.q_dists.shape[0]
    drawn = sample_patterns(rd.q_dists, total - include_hd, rng, dm.era_letters)
    if include_hd:
        drawn = np.vstack([hd_pattern(n, dm.hd_letter)[None, :], drawn])
    return _set(drawn, dm.name, float(R), include_hd=bool(include_hd))


def hamming74():
    """(7,4) binary Hamming code; bit 0 -> letter 1, bit 1 -> letter 2."""
    G = np.array([[1, 0, 0, 0, 1, 1, 0],
                  [0, 1, 0, 0, 0, 1, 1],
                  [0, 0, 1, 0, 1, 0, 1],
                  [0, 0, 0, 1, 1, 1, 1]])
    msgs = np.array(list(itertools.product((0, 1), repeat=4)))
    bits = msgs @ G % 2
    return CoveringCode(n_c=7, k_c=4, t_c=1, codewords=bits + 1, l=2)


def covering_hybrid_set(cov: CoveringCode, rd_tail: RdPoint, R, rng, dm, include_hd=True):
    """Covering codewords on the ``n_c`` least reliable positions, paired with
    every one of 2^(R - k_c log2 l) random tails."""
    base = cov.k_c * np.log2(cov.l)
    if R < base:
        raise ValueError(f"rate {R} is below the covering-code rate {base}")
    tail_rate = R - base
    if abs(tail_rate - round(tail_rate)) > 1e-9:
        raise ValueError("tail rate must be an integer number of bits")
    tails = random_set(rd_tail, int(round(tail_rate)), rng, dm, include_hd).patterns
    heads = np.asarray(cov.codewords, dtype=np.int16)
    rows = np.concatenate([np.repeat(heads, len(tails), axis=0),
                           np.tile(tails, (len(heads), 1))], axis=1)
    return _set(rows, f"{dm.name}-covering", float(R), include_hd=bool(include_hd))


def to_codeword_coords(patterns, sigma):
    """``out[..., sigma[i]] = patterns[..., i]``."""
    patterns = np.asarray(patterns)
    out = np.empty_like(patterns)
    out[..., np.asarray(sigma)] = patterns
    return out


_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def dump_patterns(pset: PatternSet, seed=None):
    """Text dump: '#' header lines, then one pattern per line (base-36 letters)."""
    if pset.patterns.size and pset.patterns.max() >= len(_DIGITS):
        raise ValueError("letters too large for the text dump")
    buf = io.StringIO()
    buf.write(f"# scheme={pset.scheme}\n# R={pset.rate_bits:g}\n# seed={seed}\n")
    buf.write(f"# count={len(pset)} length={pset.length}\n")
    for row in pset.patterns:
        buf.write("".join(_DIGITS[v] for v in row))
        buf.write("\n")
    return buf.getvalue()


def load_patterns(text):
    rows, meta = [], {}
    for line in text.splitlines():
        if line.startswith("#"):
            for tok in line[1:].split():
                k, _, v = tok.partition("=")
                meta[k] = v
        elif line:
            rows.append([_DIGITS.index(c) for c in line])
    scheme = meta.pop("scheme", "")
    rate = float(meta.pop("R", "nan"))
    return _set(np.array(rows), scheme, rate, **meta)
