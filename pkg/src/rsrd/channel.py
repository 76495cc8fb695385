"""BPSK over AWGN, a-posteriori symbol/bit probabilities and reliability order.

Bit ``b`` of symbol ``v`` is ``(v >> b) & 1``; bits go out in order
``b = 0..q-1`` for each symbol, symbol by symbol.  Bit 0 maps to +1, bit 1
to -1, with unit energy per coded bit.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelConfig:
    ebno_db: float
    code_rate: float
    q: int

    def __post_init__(self):
        if not math.isfinite(self.ebno_db):
            raise ValueError("Eb/N0 must be finite")
        if not 0 < self.code_rate < 1:
            raise ValueError(f"code rate must lie in (0, 1), got {self.code_rate}")

    @property
    def noise_var(self):
        """Per-dimension noise variance N0/2 for unit coded-bit energy."""
        ebno = 10.0 ** (self.ebno_db / 10.0)
        return 1.0 / (2.0 * self.code_rate * ebno)


@dataclass(frozen=True)
class ReliabilityView:
    """Per-column rank order ``pi`` and position order ``sigma`` (0-based).

    ``pi[i, j]`` is the symbol with the (j+1)-th largest posterior at codeword
    position i; ``sigma[r]`` is the codeword position of the (r+1)-th least
    reliable position.
    """

    pi: np.ndarray
    sigma: np.ndarray
    bit_sigma: np.ndarray | None = None

    @property
    def n(self):
        return len(self.sigma)

    def hard_decision(self):
        return self.pi[:, 0]


def symbol_bits(q):
    """(2^q, q) matrix of the bits of every symbol."""
    v = np.arange(1 << q)
    return (v[:, None] >> np.arange(q)[None, :]) & 1


def modulate(codeword, q):
    bits = symbol_bits(q)[np.asarray(codeword, dtype=np.int64)]
    return (1.0 - 2.0 * bits).reshape(-1)


def transmit(cfg: ChannelConfig, codeword, rng, noise_var=None):
    signal = modulate(codeword, cfg.q)
    var = cfg.noise_var if noise_var is None else noise_var
    if var == 0:
        return signal
    return signal + rng.normal(0.0, math.sqrt(var), size=signal.shape)


_VAR_FLOOR = 1e-12


def _noise_var(cfg, noise_var):
    return cfg.noise_var if noise_var is None else noise_var


def symbol_app(cfg: ChannelConfig, received, noise_var=None):
    """APP matrix ``p[j, i] = Pr(c_i = j | r)`` of shape (2^q, n)."""
    q = cfg.q
    r = np.asarray(received, dtype=float).reshape(-1, q)
    var = _noise_var(cfg, noise_var)
    signs = 1.0 - 2.0 * symbol_bits(q)
    # var -> 0 is the hard-decision limit; a floor keeps the softmax finite
    logits = (signs @ r.T) / max(var, _VAR_FLOOR)
    logits = logits - logits.max(axis=0, keepdims=True)
    p = np.exp(logits)
    return p / p.sum(axis=0, keepdims=True)


def reliability(app, bit_posteriors=None):
    """Sort each column descending (``pi``) and columns by top probability (``sigma``).

    Ties are broken by the lower index in both orders.
    """
    app = np.asarray(app)
    pi = np.argsort(-app, axis=0, kind="stable").T
    top = app[pi[:, 0], np.arange(app.shape[1])]
    sigma = np.argsort(top, kind="stable")
    bit_sigma = None
    if bit_posteriors is not None:
        bit_sigma = np.argsort(np.asarray(bit_posteriors), kind="stable")
    return ReliabilityView(pi=pi, sigma=sigma, bit_sigma=bit_sigma)


def bit_app(cfg: ChannelConfig, received, noise_var=None):
    """Posterior that each bit's hard decision is correct, and its ascending order."""
    r = np.asarray(received, dtype=float)
    var = _noise_var(cfg, noise_var)
    # 1 / (1 + exp(-|LLR|)) with LLR = 2 r / var
    post = 1.0 / (1.0 + np.exp(-2.0 * np.abs(r) / max(var, _VAR_FLOOR)))
    return post, np.argsort(post, kind="stable")


def bit_hard_decisions(received):
    return (np.asarray(received) < 0).astype(np.int64)
