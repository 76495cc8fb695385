import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rsrd.gf import Field, clmul_reduce


def cycle_length(q, poly):
    """Order of x modulo poly, by repeated shift-and-reduce (no tables)."""
    x, i = 1, 0
    while True:
        x = clmul_reduce(x, 2, q, poly)
        i += 1
        if x == 1 or i > (1 << q):
            return i


@pytest.mark.parametrize("q,poly,length", [(4, 0b10011, 15), (8, 0x11D, 255)])
def test_primitive_polynomials(q, poly, length):
    assert cycle_length(q, poly) == length
    f = Field(q, poly)
    assert f.order == length


def test_non_primitive_rejected():
    assert cycle_length(4, 0b11111) != 15
    with pytest.raises(ValueError):
        Field(4, 0b11111)


def test_wrong_degree_rejected():
    with pytest.raises(ValueError):
        Field(4, 0x11D)


@pytest.mark.parametrize("q", [4, 8])
def test_tables_roundtrip_and_period(q):
    f = Field(q)
    nz = np.arange(1, f.size)
    assert np.array_equal(f.exp_table[f.log_table[nz]], nz)
    i = np.arange(len(f.exp_table))
    assert np.array_equal(f.exp_table, f.exp_table[i % f.order])


def test_mul_example_gf16():
    f = Field(4, 0b10011)
    assert f.mul(2, 8) == 3


@pytest.mark.parametrize("q", [1, 2, 3, 4])
def test_mul_matches_clmul_oracle_exhaustively(q):
    f = Field(q)
    for a, b in itertools.product(range(f.size), repeat=2):
        assert f.mul(a, b) == clmul_reduce(a, b, q, f.primitive_poly)


def test_distributive_exhaustive_gf16():
    f = Field(4)
    for a, b, c in itertools.product(range(16), repeat=3):
        assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))


GF256 = Field(8)
elem = st.integers(0, 255)


@given(elem, elem, elem)
def test_distributive_gf256(a, b, c):
    f = GF256
    assert f.mul(a, b ^ c) == f.mul(a, b) ^ f.mul(a, c)


@given(elem, elem)
def test_mul_matches_oracle_gf256(a, b):
    assert GF256.mul(a, b) == clmul_reduce(a, b, 8, 0x11D)


@given(elem)
def test_add_self_is_zero(a):
    assert GF256.add(a, a) == 0


@given(st.integers(1, 255))
def test_inverse(a):
    assert GF256.mul(a, GF256.inv(a)) == 1
    assert GF256.div(1, a) == GF256.inv(a)


@given(st.integers(1, 255), st.integers(-600, 600))
def test_pow_matches_repeated_multiplication(a, e):
    f = GF256
    ref = 1
    base = a if e >= 0 else f.inv(a)
    for _ in range(abs(e)):
        ref = f.mul(ref, base)
    assert f.pow(a, e) == ref


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        GF256.inv(0)
    with pytest.raises(ZeroDivisionError):
        GF256.div(3, 0)


def test_element_range():
    assert GF256.element(255) == 255
    with pytest.raises(ValueError):
        GF256.element(256)


def test_mul_vec_matches_scalar():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 256, 500)
    b = rng.integers(0, 256, 500)
    ref = [GF256.mul(int(x), int(y)) for x, y in zip(a, b)]
    assert GF256.mul_vec(a, b).tolist() == ref


def test_poly_eval_and_mul():
    f = Field(4)
    p, r = [3, 0, 7], [1, 5]
    x = 9
    assert f.poly_eval(f.poly_mul(p, r), x) == f.mul(f.poly_eval(p, x), f.poly_eval(r, x))
