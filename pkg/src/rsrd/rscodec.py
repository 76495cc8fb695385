"""Reed-Solomon encoding and bounded-distance error-and-erasure decoding.

Codeword ``c = (c_0, ..., c_{n-1})`` is identified with ``c(x) = sum c_i x^i``.
The code is narrow-sense: the generator has roots ``alpha^1 .. alpha^(n-k)``.
Encoding is systematic with the message in the last ``k`` positions.
"""

from dataclasses import dataclass

import numpy as np

from .gf import Field


@dataclass(frozen=True)
class HardDecisionWord:
    symbols: np.ndarray
    erased: np.ndarray

    @classmethod
    def plain(cls, symbols):
        symbols = np.asarray(symbols, dtype=np.int64)
        return cls(symbols, np.zeros(len(symbols), dtype=bool))


class RsCode:
    def __init__(self, field: Field, k: int, n: int | None = None):
        n = field.order if n is None else n
        if n != field.order:
            raise ValueError(f"only full-length codes are supported (n = {field.order})")
        if not 1 <= k < n:
            raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
        self.field = field
        self.n = n
        self.k = k
        self.nsym = n - k
        self.d_min = n - k + 1

        g = [1]
        for j in range(1, self.nsym + 1):
            g = field.poly_mul(g, [field.alpha_pow(j), 1])
        self.generator_poly = tuple(g)

        # row i holds x^(nsym+i) mod g(x), so parity = sum_i m_i * row_i
        rows = np.zeros((k, self.nsym), dtype=np.int64)
        cur_full = list(g[:-1])  # x^nsym mod g == g minus its leading term
        for i in range(k):
            rows[i] = cur_full
            top = cur_full[-1]
            cur = [0] + cur_full[:-1]
            if top:
                for t in range(self.nsym):
                    cur[t] ^= field.mul(top, g[t])
            cur_full = cur
        self._parity_rows = rows
        self._parity_log = np.where(rows > 0, field.log_table[rows], -1)

        # exponent of alpha^(i*j) for syndrome j+1 and position i
        j = np.arange(1, self.nsym + 1)[:, None]
        i = np.arange(n)[None, :]
        self._syn_exp = (i * j) % field.order
        self._chien_i = np.arange(n)

    def __repr__(self):
        return f"RsCode(n={self.n}, k={self.k}, q={self.field.q})"

    @property
    def rate(self):
        return self.k / self.n

    def encode(self, message):
        message = np.asarray(message, dtype=np.int64)
        if message.shape != (self.k,):
            raise ValueError(f"message must have {self.k} symbols, got shape {message.shape}")
        if message.min(initial=0) < 0 or message.max(initial=0) >= self.field.size:
            raise ValueError("message symbols out of field range")
        f = self.field
        nz = np.flatnonzero(message)
        logs = f.log_table[message[nz]][:, None] + self._parity_log[nz]
        terms = np.where(self._parity_log[nz] >= 0, f.exp_table[logs % f.order], 0)
        parity = np.bitwise_xor.reduce(terms, axis=0) if len(nz) else np.zeros(self.nsym, np.int64)
        return np.concatenate([parity, message])

    def encode_lfsr(self, message):
        """Shift-register encoder; slow reference used to cross-check ``encode``."""
        message = [int(m) for m in message]
        f = self.field
        g = self.generator_poly
        nsym = self.nsym
        rem = [0] * nsym
        for m in reversed(message):
            fb = m ^ rem[nsym - 1]
            for t in range(nsym - 1, 0, -1):
                rem[t] = rem[t - 1] ^ f.mul(fb, g[t])
            rem[0] = f.mul(fb, g[0])
        return np.array(rem + message, dtype=np.int64)

    def random_codeword(self, rng):
        return self.encode(rng.integers(0, self.field.size, self.k))

    def syndromes(self, symbols):
        """S_1..S_{n-k} as an int array."""
        f = self.field
        r = np.asarray(symbols, dtype=np.int64)
        nz = r != 0
        if not nz.any():
            return np.zeros(self.nsym, dtype=np.int64)
        terms = f.exp_table[(f.log_table[r[nz]][None, :] + self._syn_exp[:, nz]) % f.order]
        return np.bitwise_xor.reduce(terms, axis=1)

    def is_codeword(self, symbols):
        symbols = np.asarray(symbols)
        if symbols.shape != (self.n,):
            raise ValueError(f"expected {self.n} symbols, got shape {symbols.shape}")
        return not self.syndromes(symbols).any()

    def decode_ee(self, word: HardDecisionWord):
        """Bounded-distance error-and-erasure decoding.

        Returns the unique codeword ``c`` with ``2*nu + e < n-k+1`` (``nu``
        counting disagreements at unerased positions), or None if there is none.
        """
        f = self.field
        erased = np.asarray(word.erased, dtype=bool)
        e = int(erased.sum())
        if e > self.nsym:
            return None
        r = np.where(erased, 0, np.asarray(word.symbols, dtype=np.int64))
        synd = self.syndromes(r)
        if not synd.any():
            return r

        erasure_pos = np.flatnonzero(erased).tolist()
        S = [0] + synd.tolist()  # 1-indexed
        nsym = self.nsym

        # erasure locator Gamma(x) = prod (1 - X_l x)
        gamma = [1]
        for pos in erasure_pos:
            gamma = f.poly_mul(gamma, [1, f.alpha_pow(pos)])

        # Berlekamp-Massey seeded with the erasure locator
        lam = list(gamma)
        b = list(gamma)
        L = e
        for r_step in range(e + 1, nsym + 1):
            delta = 0
            for j, lj in enumerate(lam):
                if lj and r_step - j >= 1:
                    delta ^= f.mul(lj, S[r_step - j])
            xb = [0] + b
            if delta == 0:
                b = xb
                continue
            t = lam + [0] * (len(xb) - len(lam))
            for j, bj in enumerate(xb):
                if bj:
                    t[j] ^= f.mul(delta, bj)
            if 2 * L <= r_step + e - 1:
                inv_d = f.inv(delta)
                b = [f.mul(inv_d, c) for c in lam]
                L = r_step + e - L
            else:
                b = xb
            lam = t

        while len(lam) > 1 and lam[-1] == 0:
            lam.pop()
        deg = len(lam) - 1
        if deg != L or 2 * (L - e) + e >= self.d_min:
            return None

        # Chien search: Lambda(alpha^-i) == 0 marks position i
        coeffs = np.array(lam, dtype=np.int64)
        nzc = np.flatnonzero(coeffs)
        expo = (f.log_table[coeffs[nzc]][:, None]
                - nzc[:, None] * self._chien_i[None, :]) % f.order
        vals = np.bitwise_xor.reduce(f.exp_table[expo], axis=0)
        positions = np.flatnonzero(vals == 0).tolist()
        if len(positions) != deg:
            return None

        # Forney: Omega = S(x) Lambda(x) mod x^nsym ; Y = Omega(X^-1) / Lambda'(X^-1)
        s_poly = S[1:]
        omega = f.poly_mul(s_poly, lam)[:nsym]
        dlam = [lam[j] if j % 2 == 1 else 0 for j in range(1, len(lam))]
        c = r.copy()
        for pos in positions:
            xinv = f.alpha_pow(-pos)
            den = f.poly_eval(dlam, xinv)
            if den == 0:
                return None
            c[pos] ^= f.div(f.poly_eval(omega, xinv), den)

        if self.syndromes(c).any():
            return None
        nu = int(np.count_nonzero((c != r) & ~erased))
        if 2 * nu + e >= self.d_min:
            return None
        return c
