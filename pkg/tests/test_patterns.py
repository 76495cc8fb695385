import itertools
from math import comb

import numpy as np
import pytest

from rsrd import patterns as pt
from rsrd.measures import error_only_measure, mbm_measure
from rsrd.rdengine import RdPoint

MBM2 = mbm_measure(255, 239, 2)
EO2 = error_only_measure(255, 239, 2)


def point(q):
    q = np.asarray(q, dtype=float)
    return RdPoint(s=-1.0, rate=0.0, distortion=0.0, q_dists=q)


def test_gmd_set():
    g = pt.gmd_set(255, 17)
    assert len(g) == 9
    assert (g.patterns[0] == 1).all()
    assert g.patterns[1, :2].tolist() == [0, 0] and (g.patterns[1, 2:] == 1).all()
    for j, row in enumerate(g.patterns):
        assert (row == 0).sum() == 2 * j
    with pytest.raises(ValueError):
        pt.gmd_set(255, 16)


def test_sed_example():
    s = pt.sed_set(3, 2, 6)
    rows = ["".join(map(str, r)) for r in s.patterns]
    assert rows == ["111111", "001111", "010111", "100111"]


def test_sed_sizes():
    assert len(pt.sed_set(12, 12, 255)) == sum(comb(12, e) for e in range(0, 13, 2)) == 2**11
    assert len(pt.sed_set(5, 0, 255)) == 1
    with pytest.raises(ValueError):
        pt.sed_set(3, 4, 10)


def test_random_set_degenerate():
    q = np.tile([0.0, 1.0, 0.0], (20, 1))
    s = pt.random_set(point(q), 5, np.random.default_rng(0), MBM2)
    assert len(s) == 32 and (s.patterns == 1).all()


def test_random_set_rate_zero():
    q = np.tile([0.3, 0.4, 0.3], (10, 1))
    s = pt.random_set(point(q), 0, np.random.default_rng(0), MBM2)
    assert len(s) == 1 and (s.patterns == 1).all()


def test_random_set_without_hd():
    q = np.tile([0.5, 0.5, 0.0], (10, 1))
    s = pt.random_set(point(q), 3, np.random.default_rng(0), MBM2, include_hd=False)
    assert len(s) == 8 and not s.meta["include_hd"]


def test_random_set_frequencies():
    rng = np.random.default_rng(1)
    q = rng.dirichlet(np.ones(3), size=6)
    s = pt.random_set(point(q), 14, np.random.default_rng(2), MBM2, include_hd=False)
    N = len(s)
    for i in range(6):
        for letter in range(3):
            f = (s.patterns[:, i] == letter).mean()
            sd = np.sqrt(q[i, letter] * (1 - q[i, letter]) / N)
            assert abs(f - q[i, letter]) <= 3 * sd + 1e-12


def test_random_set_maps_letters():
    q = np.tile([0.0, 1.0], (4, 1))
    s = pt.random_set(point(q), 2, np.random.default_rng(0), EO2, include_hd=False)
    assert (s.patterns == 2).all()


def test_random_set_deterministic():
    q = np.random.default_rng(3).dirichlet(np.ones(3), size=30)
    a = pt.random_set(point(q), 6, np.random.default_rng(9), MBM2)
    b = pt.random_set(point(q), 6, np.random.default_rng(9), MBM2)
    assert np.array_equal(a.patterns, b.patterns)


def test_random_set_rejects_fractional_rate():
    with pytest.raises(ValueError):
        pt.random_set(point(np.ones((3, 1))), 2.5, np.random.default_rng(0), MBM2)


def test_hamming74():
    h = pt.hamming74()
    assert h.codewords.shape == (16, 7)
    words = {tuple(w) for w in (h.codewords - 1)}
    assert (1, 0, 0, 1, 0, 0, 1) in words
    d = [(a != b).sum() for a, b in itertools.combinations(h.codewords, 2)]
    assert min(d) == 3
    assert h.covering_radius() == 1


def test_covering_hybrid_rate4_tail_is_hd():
    q = np.tile([0.0, 1.0], (248, 1))
    s = pt.covering_hybrid_set(pt.hamming74(), point(q), 4, np.random.default_rng(0), EO2)
    assert len(s) == 16
    assert (s.patterns[:, 7:] == 1).all()
    assert {tuple(r) for r in s.patterns[:, :7]} == {tuple(w) for w in pt.hamming74().codewords}


def test_covering_hybrid_rate11_size():
    q = np.tile([0.6, 0.4], (248, 1))
    s = pt.covering_hybrid_set(pt.hamming74(), point(q), 11, np.random.default_rng(0), EO2)
    assert len(s) == 16 * 2**7
    # every codeword meets every tail exactly once
    heads = s.patterns[:, :7]
    assert all((heads == w).all(axis=1).sum() == 128 for w in pt.hamming74().codewords)
    with pytest.raises(ValueError):
        pt.covering_hybrid_set(pt.hamming74(), point(q), 3, np.random.default_rng(0), EO2)


def test_split_covering_bound():
    rng = np.random.default_rng(4)
    heads = pt.hamming74().codewords
    for _ in range(2000):
        x = rng.integers(0, 3, 7)
        z = int((x == 0).sum())
        best = min(int((x != w).sum()) for w in heads)
        assert best <= 1 + z


def test_to_codeword_coords():
    p = np.array([[3, 1, 2, 0]])
    assert np.array_equal(pt.to_codeword_coords(p, np.arange(4)), p)
    sigma = np.array([2, 0, 3, 1])
    out = pt.to_codeword_coords(p, sigma)
    assert np.array_equal(out[:, sigma], p)
    # example ordering sigma = (2, 3, 1) in 1-indexed form
    ex = pt.to_codeword_coords(np.array([0, 1, 1]), np.array([1, 2, 0]))
    assert ex.tolist() == [1, 0, 1]


def test_dump_roundtrip():
    s = pt.sed_set(4, 2, 9)
    text = pt.dump_patterns(s, seed=5)
    body = [l for l in text.splitlines() if not l.startswith("#")]
    assert len(body) == len(s) == 7
    back = pt.load_patterns(text)
    assert np.array_equal(back.patterns, s.patterns)
    assert back.scheme == "SED(4,2)"
