"""Arithmetic in GF(2^q) for q <= 8 using log/antilog tables.

Elements are plain ints in ``[0, 2^q)`` holding the polynomial-basis bit
vector of the element (bit ``b`` is the coefficient of ``x^b``).  The same
integer is used as the row index of a symbol in an APP matrix.
"""

import numpy as np

DEFAULT_POLY = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11D,
}


class Field:
    """GF(2^q) defined by a primitive polynomial, generator element x (= 2)."""

    def __init__(self, q=8, primitive_poly=None):
        if not 1 <= q <= 8:
            raise ValueError(f"field bit-width must be in 1..8, got {q}")
        if primitive_poly is None:
            primitive_poly = DEFAULT_POLY[q]
        if primitive_poly >> q != 1:
            raise ValueError(f"polynomial {primitive_poly:#x} does not have degree {q}")
        self.q = q
        self.size = 1 << q
        self.order = self.size - 1
        self.primitive_poly = primitive_poly

        exp = [0] * (2 * self.order)
        log = [-1] * self.size
        x = 1
        for i in range(self.order):
            if i > 0 and x == 1:
                raise ValueError(
                    f"polynomial {primitive_poly:#x} is not primitive (cycle length {i})")
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.size:
                x ^= primitive_poly
        if x != 1:
            raise ValueError(f"polynomial {primitive_poly:#x} is not primitive")
        for i in range(self.order, 2 * self.order):
            exp[i] = exp[i - self.order]

        self._exp = exp
        self._log = log
        self.exp_table = np.array(exp, dtype=np.int64)
        self.exp_table.flags.writeable = False
        self.log_table = np.array(log, dtype=np.int64)
        self.log_table.flags.writeable = False

    def __repr__(self):
        return f"Field(q={self.q}, primitive_poly={self.primitive_poly:#x})"

    def __eq__(self, other):
        return (isinstance(other, Field) and self.q == other.q
                and self.primitive_poly == other.primitive_poly)

    def __hash__(self):
        return hash((self.q, self.primitive_poly))

    def element(self, value):
        value = int(value)
        if not 0 <= value < self.size:
            raise ValueError(f"{value} is not an element of GF(2^{self.q})")
        return value

    @staticmethod
    def add(a, b):
        return a ^ b

    sub = add

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero in GF(2^q)")
        if a == 0:
            return 0
        return self._exp[(self._log[a] - self._log[b]) % self.order]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return self._exp[(self.order - self._log[a]) % self.order]

    def pow(self, a, e):
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("zero to a negative power")
            return 1 if e == 0 else 0
        return self._exp[(self._log[a] * e) % self.order]

    def alpha_pow(self, e):
        """alpha^e for any integer e."""
        return self._exp[e % self.order]

    def log(self, a):
        if a == 0:
            raise ValueError("log of zero")
        return self._log[a]

    # vectorised helpers

    def mul_vec(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp_table[(self.log_table[a] + self.log_table[b]) % self.order]
        return np.where((a == 0) | (b == 0), 0, out)

    # polynomials: coefficient lists, lowest degree first

    def poly_mul(self, p, r):
        out = [0] * (len(p) + len(r) - 1)
        for i, a in enumerate(p):
            if a == 0:
                continue
            for j, b in enumerate(r):
                if b:
                    out[i + j] ^= self.mul(a, b)
        return out

    def poly_eval(self, p, x):
        acc = 0
        for c in reversed(p):
            acc = self.mul(acc, x) ^ c
        return acc


def clmul_reduce(a, b, q, poly):
    """Carry-less multiply then reduce modulo ``poly``; independent of the tables."""
    prod = 0
    for bit in range(q):
        if (b >> bit) & 1:
            prod ^= a << bit
    for deg in range(2 * q - 2, q - 1, -1):
        if (prod >> deg) & 1:
            prod ^= poly << (deg - q)
    return prod
