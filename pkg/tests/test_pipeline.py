import math

import numpy as np
import pytest
from scipy.stats import binom, norm

from rsrd import pipeline as pl
from rsrd.channel import ChannelConfig, modulate, reliability, symbol_app
from rsrd.gf import Field
from rsrd.measures import conventional_measure, error_only_measure
from rsrd.patterns import PatternSet, hd_pattern
from rsrd.rscodec import HardDecisionWord, RsCode
from rsrd.schemes import parse_scheme

C15 = RsCode(Field(4), 11)
C255 = RsCode(Field(8), 239)
CFG15 = ChannelConfig(4.0, 11 / 15, 4)
CFG255 = ChannelConfig(5.6, 239 / 255, 8)


@pytest.fixture(scope="module")
def profile255():
    return pl.train(C255, CFG255, 300, pl.frame_rng(3, 0, pl.TRAIN_STREAM))


def test_train_zero_noise():
    prof = pl.train(C15, CFG15, 5, np.random.default_rng(0), noise_var=0.0)
    assert np.allclose(prof.p_bar[0], 1.0)
    assert np.allclose(prof.symbol_source(1).dists[:, 1], 1.0)
    assert np.allclose(prof.bit_bar, 1.0)


def test_train_invariants():
    prof = pl.train(C15, CFG15, 50, np.random.default_rng(1))
    assert np.allclose(prof.p_bar.sum(axis=0), 1.0, atol=1e-6)
    assert (np.diff(prof.p_bar, axis=0) <= 1e-12).all()
    assert prof.p_bar[0, 0] == prof.p_bar[0].min()
    assert (np.diff(prof.bit_bar) >= -1e-12).all()
    src = prof.symbol_source(2)
    assert src.dists.shape == (15, 3)
    assert np.allclose(src.dists[:, 1:], prof.p_bar[:2].T)


def test_profile_json_roundtrip_and_determinism(tmp_path):
    a = pl.train(C15, CFG15, 20, np.random.default_rng(5), seed=5)
    b = pl.train(C15, CFG15, 20, np.random.default_rng(5), seed=5)
    assert a.to_json() == b.to_json()
    path = tmp_path / "p.json"
    a.save(path)
    back = pl.TrainedProfile.load(path)
    assert back.to_json() == a.to_json()
    assert np.array_equal(back.p_bar, a.p_bar)


def test_train_rejects_zero_frames():
    with pytest.raises(ValueError):
        pl.train(C15, CFG15, 0, np.random.default_rng(0))


def test_materialize():
    P = np.array([[0.01, 0.01, 0.93],
                  [0.94, 0.03, 0.04],
                  [0.03, 0.49, 0.01],
                  [0.02, 0.47, 0.02]])
    view = reliability(P)
    w = pl.materialize([1, 2, 0], view)
    assert w.symbols[:2].tolist() == [1, 3]
    assert w.erased.tolist() == [False, False, True]


def _word_frame(code, symbols):
    """Frame whose hard decisions are ``symbols``; ties keep sigma the identity."""
    q = code.field.q
    r = modulate(symbols, q)
    cfg = ChannelConfig(6.0, code.rate, q)
    return r, reliability(symbol_app(cfg, r, noise_var=0.0))


def test_decode_frame_noiseless():
    rng = np.random.default_rng(2)
    cw = C255.random_codeword(rng)
    r, view = _word_frame(C255, cw)
    res = pl.decode_frame(C255, r, view, PatternSet(hd_pattern(255)[None, :], "BM", 0))
    assert np.array_equal(res.chosen, cw) and res.trials_run == 1


def test_nine_errors_need_erasures():
    rng = np.random.default_rng(3)
    cw = C255.random_codeword(rng)
    bad = cw.copy()
    where = rng.choice(255, 9, replace=False)
    bad[where] ^= rng.integers(1, 256, 9)
    r, view = _word_frame(C255, bad)
    assert np.array_equal(view.sigma, np.arange(255))
    hd_only = PatternSet(hd_pattern(255)[None, :], "BM", 0)
    res = pl.decode_frame(C255, r, view, hd_only)
    assert res.chosen is None or not np.array_equal(res.chosen, cw)
    p = hd_pattern(255)
    p[where[:2]] = 0  # 2 * 7 + 2 = 16 < 17
    res = pl.decode_frame(C255, r, view, PatternSet(np.vstack([hd_pattern(255), p]), "x", 1))
    assert any(np.array_equal(c, cw) for c in res.candidates)


def test_ml_select():
    rng = np.random.default_rng(4)
    a, b = C15.random_codeword(rng), C15.random_codeword(rng)
    r = modulate(a, 4) + 0.1 * rng.normal(size=60)
    assert np.array_equal(pl.ml_select([b], r, 4), b)
    assert np.array_equal(pl.ml_select([b, a], r, 4), a)
    assert np.array_equal(pl.ml_select([b, a, a, b], r, 4), pl.ml_select([b, a], r, 4))
    with pytest.raises(ValueError):
        pl.ml_select([], r, 4)


def test_oracle_decode_examples():
    eo = error_only_measure(255, 239, 2)
    x = np.random.default_rng(5).integers(1, 3, 255)
    assert pl.oracle_decode(x, PatternSet(x[None, :], "x", 0), eo)
    conv = conventional_measure(255, 239)
    hd = PatternSet(hd_pattern(255)[None, :], "BM", 0)
    for t in range(0, 12):
        x = np.ones(255, dtype=int)
        x[:t] = 0
        assert pl.oracle_decode(x, hd, conv) == (2 * t < 17)


def test_hd_only_equals_plain_bm():
    sc = parse_scheme("BM")
    for f in range(60):
        frame = pl.make_frame(C15, CFG15, pl.frame_rng(8, f))
        pset = sc.pattern_set(15, 11, None, None)
        res = pl.decode_frame(C15, frame.received, frame.view, pset)
        plain = C15.decode_ee(HardDecisionWord.plain(frame.view.hard_decision()))
        assert (res.chosen is None) == (plain is None)
        if plain is not None:
            assert np.array_equal(res.chosen, plain)


@pytest.mark.parametrize("name", ["mBM-1(4)", "mBM-2(4)", "mBM-HM74(4)"])
def test_oracle_agrees_with_decoder_list(profile255, name):
    sc = parse_scheme(name)
    dm = sc.measure(255, 239)
    design = sc.design(profile255, 255, 239)
    seen = set()
    for f in range(170):
        frame = pl.make_frame(C255, CFG255, pl.frame_rng(9, f))
        pset = sc.pattern_set(255, 239, design, pl.frame_rng(9, f, 1))
        res = pl.decode_frame(C255, frame.received, frame.view, pset)
        on_list = any(np.array_equal(c, frame.codeword) for c in res.candidates)
        x = sc.error_pattern(frame, 8)
        assert pl.oracle_decode(x, pset, dm) == on_list
        seen.add(on_list)
    assert seen == {True, False}


def test_zero_noise_fer():
    prof = pl.train(C15, CFG15, 20, np.random.default_rng(0))
    schemes = [parse_scheme(s) for s in ("BM", "GMD", "mBM-2(2)")]
    res, _ = pl.fer_experiment(C15, CFG15, schemes, 30, 1, prof, noise_var=0.0)
    assert all(r.errors == 0 for r in res)


def test_nested_sets_monotone(profile255):
    sc = parse_scheme("mBM-2(8)")
    dm = sc.measure(255, 239)
    design = sc.design(profile255, 255, 239)
    for f in range(40):
        frame = pl.make_frame(C255, CFG255, pl.frame_rng(10, f))
        big = sc.pattern_set(255, 239, design, pl.frame_rng(10, f, 1))
        small = PatternSet(big.patterns[:16], "x", 4)
        x = sc.error_pattern(frame, 8)
        assert pl.min_distortion_scaled(x, big, dm) <= pl.min_distortion_scaled(x, small, dm)


def test_fer_records_and_threads():
    prof = pl.train(C15, CFG15, 30, np.random.default_rng(0))
    schemes = [parse_scheme(s) for s in ("GMD", "mBM-2(2)", "m-b-ASD(2)")]
    r1, log1 = pl.fer_experiment(C15, CFG15, schemes, 24, 3, prof, threads=1)
    r2, log2 = pl.fer_experiment(C15, CFG15, schemes, 24, 3, prof, threads=2)
    assert log1 == log2
    assert [r.errors for r in r1] == [r.errors for r in r2]
    assert set(log1[0]) == set(pl.LOG_FIELDS)
    for r in r1:
        assert r.errors == r.failures + r.miscorrections


def test_wilson_interval():
    # independent evaluation of the Wilson score formula
    k, n, z = 7, 300, 1.959963984540054
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    lo, hi = pl.wilson_interval(k, n)
    assert lo == pytest.approx(centre - half, abs=1e-9)
    assert hi == pytest.approx(centre + half, abs=1e-9)


def test_frame_log_csv(tmp_path):
    recs = [{"frame": 0, "scheme": "BM", "R": None, "min_distortion": 3.0, "candidates": 1,
             "success": 1, "outcome": "ok"}]
    path = tmp_path / "log.csv"
    pl.write_frame_log(path, recs, ["config_sha256=abc", "seed=1"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_sha256=abc" and lines[2].startswith("frame,scheme")


def test_single_bm_fer_matches_binomial_tail():
    """Bitwise hard decisions make symbol errors i.i.d., so plain BM fails
    exactly when a Binomial(n, p_sym) count reaches (d_min + 1) / 2."""
    cfg = ChannelConfig(5.2, 239 / 255, 8)
    bit_err = norm.sf(math.sqrt(1.0 / cfg.noise_var))
    p_sym = 1 - (1 - bit_err) ** 8
    expect = binom.sf(8, 255, p_sym)
    frames = 500
    res, _ = pl.fer_experiment(C255, cfg, [parse_scheme("BM")], frames, 31, None, oracle=True)
    print(f"\nBM FER {res[0].fer:.3f}, binomial tail {expect:.3f}")
    assert res[0].fer > 0.8  # close to 1
    assert abs(res[0].fer - expect) <= 4 * math.sqrt(expect * (1 - expect) / frames)


@pytest.mark.slow
def test_fer_with_2pow16_patterns_near_half():
    cfg = ChannelConfig(5.2, 239 / 255, 8)
    prof = pl.train(C255, cfg, 1000, pl.frame_rng(21, 0, pl.TRAIN_STREAM))
    res, _ = pl.fer_experiment(C255, cfg, [parse_scheme("mBM-1(16)")], 500, 22, prof,
                               oracle=True)
    print(f"\nmBM-1(16) FER {res[0].fer:.3f}")
    assert abs(res[0].fer - 0.5) <= 0.15
