"""Distortion measures between error patterns and erasure patterns.

Every measure turns the success condition of one decoding attempt into
``sum_i delta[x_i, xh_i] < threshold``.  Entries are stored as integers scaled
by ``scale`` (1 for the BM measures, 2 for the half-threshold measures,
``m(m+1)`` for multiplicity-type measures) so the strict comparison is exact.

Error letters index rows directly.  Erasure letters are mapped to columns via
``era_letters``; e.g. the error-only measure uses letters ``1..l``.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


@dataclass(frozen=True, eq=False)
class DistortionMeasure:
    name: str
    delta_scaled: np.ndarray
    scale: int
    threshold_scaled: int
    era_letters: tuple
    hd_letter: int
    level: str = "symbol"
    types: tuple | None = None
    m: int | None = None
    _col: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        d = np.asarray(self.delta_scaled, dtype=np.int64)
        if d.ndim != 2 or (d < 0).any():
            raise ValueError("distortion matrix must be 2-D and nonnegative")
        if self.threshold_scaled <= 0:
            raise ValueError("threshold must be positive")
        if len(self.era_letters) != d.shape[1]:
            raise ValueError("one erasure letter per column required")
        d.flags.writeable = False
        object.__setattr__(self, "delta_scaled", d)
        col = np.full(max(self.era_letters) + 1, -1, dtype=np.int64)
        col[list(self.era_letters)] = np.arange(len(self.era_letters))
        object.__setattr__(self, "_col", col)

    @property
    def delta(self):
        return self.delta_scaled / self.scale

    @property
    def threshold(self):
        return self.threshold_scaled / self.scale

    @property
    def err_alphabet(self):
        return self.delta_scaled.shape[0]

    @property
    def era_alphabet(self):
        return self.delta_scaled.shape[1]

    def columns(self, letters):
        """Column indices for an array of erasure letters."""
        letters = np.asarray(letters, dtype=np.int64)
        if letters.size and (letters.min() < 0 or letters.max() >= len(self._col)):
            raise ValueError(f"erasure letter outside the alphabet of {self.name}")
        cols = self._col[letters]
        if (cols < 0).any():
            raise ValueError(f"erasure letter outside the alphabet of {self.name}")
        return cols

    def letters(self, columns):
        return np.asarray(self.era_letters, dtype=np.int64)[np.asarray(columns)]


def _thr(n, k):
    return n - k + 1


def conventional_measure(n, k):
    return DistortionMeasure("conventional", np.array([[1, 2], [1, 0]]), 1,
                             _thr(n, k), (0, 1), hd_letter=1)


def mbm_measure(n, k, l):
    if l < 1:
        raise ValueError("mBM needs l >= 1")
    d = np.full((l + 1, l + 1), 2, dtype=np.int64)
    d[:, 0] = 1
    for j in range(1, l + 1):
        d[j, j] = 0
    return DistortionMeasure(f"mBM-{l}", d, 1, _thr(n, k), tuple(range(l + 1)), hd_letter=1)


def bitlevel_measure(n, k):
    # k/n >= 2/3 + 1/n  <=>  3k >= 2n + 3
    if 3 * k < 2 * n + 3:
        raise ValueError(f"bit-level ASD needs rate >= 2/3 + 1/n; ({n},{k}) is too low")
    return DistortionMeasure("m-b-ASD", np.array([[2, 6], [2, 0]]), 2, _thr(n, k),
                             (0, 1), hd_letter=1, level="bit")


def error_only_measure(n, k, l):
    if l < 1:
        raise ValueError("error-only decoding needs l >= 1")
    d = np.ones((l + 1, l), dtype=np.int64)
    for j in range(1, l + 1):
        d[j, j - 1] = 0
    return DistortionMeasure(f"EO-{l}", 2 * d, 2, _thr(n, k), tuple(range(1, l + 1)),
                             hd_letter=1)


def _allowable(t, m):
    if sum(t) > m:
        return False
    nonzero = [v for v in t if v]
    smallest = min(nonzero) if nonzero else 0
    lhs = sum(v * (m - v) for v in t)
    return lhs <= (m + 1) * (len(nonzero) - 1) * smallest


def allowable_types(m, l):
    """All multiplicity types of length ``l`` allowed at maximum multiplicity ``m``.

    Returned in descending lexicographic order.
    """
    if m < 1 or l < 1:
        raise ValueError("need m >= 1 and l >= 1")
    return [t for t in itertools.product(range(m, -1, -1), repeat=l) if _allowable(t, m)]


def asd_rate_ok(n, k, m):
    return Fraction(k, n) >= Fraction(1, n) + Fraction(m * (m + 3), (m + 1) * (m + 2))


def type_mu(t, m):
    return 1 + Fraction(sum(v * (v + 1) for v in t), m * (m + 1))


def asd_measure(n, k, m, types, name=None):
    """Distortion matrix whose threshold test is the ASD score/cost condition."""
    types = [tuple(int(v) for v in t) for t in types]
    if not types:
        raise ValueError("need at least one multiplicity type")
    l = len(types[0])
    if any(len(t) != l for t in types):
        raise ValueError("multiplicity types must share one length")
    if not asd_rate_ok(n, k, m):
        raise ValueError(
            f"({n},{k}) is below the rate 1/n + m(m+3)/((m+1)(m+2)) needed at m={m}")
    for t in types:
        if not _allowable(t, m):
            raise ValueError(f"multiplicity type {t} is not allowable for m={m}")
    scale = m * (m + 1)
    d = np.zeros((l + 1, len(types)), dtype=np.int64)
    for col, t in enumerate(types):
        mu = scale + sum(v * (v + 1) for v in t)
        d[0, col] = mu
        for j in range(1, l + 1):
            d[j, col] = mu - 2 * t[j - 1] * (m + 1)
    hd = (m,) + (0,) * (l - 1)
    hd_letter = types.index(hd) if hd in types else 0
    return DistortionMeasure(name or f"mASD-{m}", d, scale, _thr(n, k) * scale,
                             tuple(range(len(types))), hd_letter=hd_letter,
                             types=tuple(types), m=m)


# error patterns

def extract_error_pattern(codeword, view, l):
    """Rank of the transmitted symbol at each LRP rank (0 if outside the top ``l``)."""
    codeword = np.asarray(codeword, dtype=np.int64)
    pi_sorted = view.pi[view.sigma]
    hits = pi_sorted[:, :l] == codeword[view.sigma][:, None]
    found = hits.any(axis=1)
    return np.where(found, hits.argmax(axis=1) + 1, 0)


def extract_bit_error_pattern(codeword, received, bit_sigma, q):
    """1 where the bit hard decision is right, in ascending bit-reliability order."""
    from .channel import bit_hard_decisions, symbol_bits

    sent = symbol_bits(q)[np.asarray(codeword, dtype=np.int64)].reshape(-1)
    ok = (bit_hard_decisions(received) == sent).astype(np.int64)
    return ok[bit_sigma]


# distortion and success

def distortion_scaled(x, xh, dm: DistortionMeasure):
    x = np.asarray(x, dtype=np.int64)
    xh = np.asarray(xh, dtype=np.int64)
    if x.shape[-1] != xh.shape[-1]:
        raise ValueError("error and erasure patterns differ in length")
    if x.size and (x.min() < 0 or x.max() >= dm.err_alphabet):
        raise ValueError(f"error letter outside the alphabet of {dm.name}")
    return dm.delta_scaled[x, dm.columns(xh)].sum(axis=-1)


def distortion(x, xh, dm: DistortionMeasure):
    d = distortion_scaled(x, xh, dm)
    return d / dm.scale


def succeeds(x, xh, dm: DistortionMeasure):
    return bool(distortion_scaled(x, xh, dm) < dm.threshold_scaled)


# multiplicity matrices and the ASD score/cost test

def build_multiplicity_matrix(xh, view, types, q):
    """(2^q, n) multiplicity matrix from a type pattern in LRP-rank order."""
    types = np.asarray(types, dtype=np.int64)
    xh = np.asarray(xh, dtype=np.int64)
    n = view.n
    l = types.shape[1]
    M = np.zeros((1 << q, n), dtype=np.int64)
    pos = view.sigma
    for j in range(l):
        M[view.pi[pos, j], pos] = types[xh, j]
    return M


def build_bitlevel_multiplicity_matrix(bxh, view, received, q):
    """Bit-level MAS: 2 on the hard-decision symbol, 1 on both candidates if one
    bit is erased, nothing if two or more bits are erased."""
    bxh = np.asarray(bxh, dtype=np.int64)
    n = view.n
    erased = np.zeros(n * q, dtype=bool)
    erased[view.bit_sigma] = bxh == 0
    erased = erased.reshape(n, q)
    hd_bits = (np.asarray(received) < 0).astype(np.int64).reshape(n, q)
    hd = (hd_bits << np.arange(q)).sum(axis=1)
    M = np.zeros((1 << q, n), dtype=np.int64)
    count = erased.sum(axis=1)
    cols = np.arange(n)
    clean = count == 0
    M[hd[clean], cols[clean]] = 2
    one = np.flatnonzero(count == 1)
    flip = erased[one].argmax(axis=1)
    M[hd[one], one] = 1
    M[hd[one] ^ (1 << flip), one] = 1
    return M


def score(M, codeword):
    codeword = np.asarray(codeword, dtype=np.int64)
    return int(M[codeword, np.arange(M.shape[1])].sum())


def cost(M):
    M = np.asarray(M, dtype=np.int64)
    return int((M * (M + 1)).sum() // 2)


def asd_condition2(S, C, k):
    """True iff (a+1)(S - a(k-1)/2) > C for the a with a(k-1) < S <= (a+1)(k-1)."""
    if S <= 0 or k <= 1:
        return False
    a = (S - 1) // (k - 1)
    return (a + 1) * (2 * S - a * (k - 1)) > 2 * C
