"""Rate-distortion functions of independent, non-identical discrete sources.

Rates are reported in bits.  The slope parameter ``s < 0`` is the B-A
multiplier in ``exp(s * delta)``, i.e. the slope of the curve with the rate
measured in nats.

A source with ``n`` components is handled by running Blahut-Arimoto on every
component at the same slope and summing; all components are iterated together
as one batched array computation.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)
_CLIP = 1e-12


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SourceModel:
    """``dists[i]`` is the letter distribution of the component at LRP rank i."""

    dists: np.ndarray

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.dists, dtype=float))
        if (d < 0).any():
            raise ValueError("source probabilities must be nonnegative")
        if not np.allclose(d.sum(axis=1), 1.0, atol=1e-9, rtol=0):
            raise ValueError("each source component must sum to 1")
        object.__setattr__(self, "dists", d)

    @property
    def n(self):
        return self.dists.shape[0]

    def restrict(self, start, stop=None):
        return SourceModel(self.dists[start:stop])


@dataclass(frozen=True, eq=False)
class RdPoint:
    s: float
    rate: float
    distortion: float
    q_dists: np.ndarray
    rates: np.ndarray | None = None
    distortions: np.ndarray | None = None
    iterations: int = 0


def _delta(dm):
    return dm.delta if hasattr(dm, "delta_scaled") else np.asarray(dm, dtype=float)


def _ba_step(P, W, q):
    """One B-A sweep: test channel Q from q, then the new output marginal."""
    A = q[:, None, :] * W[None, :, :]
    Q = A / A.sum(axis=2, keepdims=True)
    q_new = np.einsum("ij,ijk->ik", P, Q)
    return Q, q_new


def _rate_distortion(P, delta, Q, q_new):
    joint = P[:, :, None] * Q
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(Q > 0, Q / q_new[:, None, :], 1.0)
        terms = np.where(joint > 0, joint * np.log(ratio), 0.0)
    rates = terms.sum(axis=(1, 2)) / LN2
    dists = (joint * delta[None, :, :]).sum(axis=(1, 2))
    return np.maximum(rates, 0.0), dists


def _q_step(P, W, q):
    """Output-marginal update without materialising the test channel."""
    Z = q @ W.T
    return q * ((P / Z) @ W)


def _loglik(P, W, q):
    """Per-component ``sum_x p(x) log sum_y q(y) W(x, y)``; each q-step raises it."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(q @ W.T), 0.0)
    return terms.sum(axis=1)


def _squarem_step(P, W, q):
    """Squared extrapolation over two q-steps, falling back to the plain second
    step wherever the jump leaves the simplex or lowers the likelihood.

    Plain steps crawl when an output letter is heading to zero; the
    extrapolation removes most of that geometric tail.
    """
    q1 = _q_step(P, W, q)
    q2 = _q_step(P, W, q1)
    r = q1 - q
    v = q2 - q1 - r
    rn = np.sqrt((r * r).sum(axis=1))
    vn = np.sqrt((v * v).sum(axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(vn > 0, -rn / vn, -1.0)
    alpha = np.minimum(alpha, -1.0)[:, None]
    jump = q - 2 * alpha * r + alpha * alpha * v
    ok = (jump >= 0).all(axis=1) & np.isfinite(jump).all(axis=1)
    jump = np.where(ok[:, None], jump, q2)
    jump /= jump.sum(axis=1, keepdims=True)
    jump = _q_step(P, W, jump)
    better = _loglik(P, W, jump) >= _loglik(P, W, q2)
    return np.where(better[:, None], jump, q2)


def blahut_arimoto(P, delta, s, max_iters=50_000, tol=1e-10, q0=None, strict=False,
                   check_every=8):
    """Batched B-A over the rows of ``P`` (components) at a common slope.

    Returns ``(rates, distortions, q, iterations)``.  A component stops once
    its rate (bits) and distortion both move by less than ``tol`` between two
    successive sweeps; the test is made every ``check_every`` sweeps.
    """
    if s >= 0:
        raise ValueError(f"slope must be negative, got {s}")
    P = np.atleast_2d(np.asarray(P, dtype=float))
    delta = _delta(delta)
    n = P.shape[0]
    K = delta.shape[1]
    if P.shape[1] != delta.shape[0]:
        raise ValueError("source alphabet does not match the distortion matrix")
    W = np.exp(s * delta)
    q = np.full((n, K), 1.0 / K) if q0 is None else np.array(q0, dtype=float, ndmin=2)

    rates = np.zeros(n)
    dists = np.zeros(n)
    live = np.arange(n)
    Pl, ql = P, q.copy()
    it = 0
    while live.size and it < max_iters:
        for _ in range(max(min(check_every, max_iters - it) - 2, 0) // 3):
            ql = _squarem_step(Pl, W, ql)
            it += 3
        Q, ql = _ba_step(Pl, W, ql)
        r_prev, d_prev = _rate_distortion(Pl, delta, Q, ql)
        Q, ql = _ba_step(Pl, W, ql)
        r, d = _rate_distortion(Pl, delta, Q, ql)
        it += 2
        rates[live] = r
        dists[live] = d
        q[live] = ql
        keep = (np.abs(r - r_prev) >= tol) | (np.abs(d - d_prev) >= tol)
        if not keep.all():
            live, Pl, ql = live[keep], Pl[keep], ql[keep]
    if live.size and strict:
        raise ConvergenceError(
            f"Blahut-Arimoto did not converge for {live.size} component(s) "
            f"after {max_iters} iterations at s={s}")
    return rates, dists, q, it


def ba_component(p, dm, s, max_iters=50_000, tol=1e-10, strict=True):
    """(rate in bits, distortion, output distribution) of one component."""
    r, d, q, _ = blahut_arimoto(np.asarray(p, dtype=float)[None, :], dm, s,
                                max_iters=max_iters, tol=tol, strict=strict)
    return float(r[0]), float(d[0]), q[0]


def factored_rd(src: SourceModel, dm, s, max_iters=50_000, tol=1e-10, strict=False):
    rates, dists, q, it = blahut_arimoto(src.dists, dm, s, max_iters=max_iters,
                                         tol=tol, strict=strict)
    return RdPoint(s=float(s), rate=float(rates.sum()), distortion=float(dists.sum()),
                   q_dists=q, rates=rates, distortions=dists, iterations=it)


def super_source(src: SourceModel, dm, limit=10_000):
    """Product alphabet source and additive product distortion matrix."""
    delta = _delta(dm)
    J, K = delta.shape
    n = src.n
    if src.dists.shape[1] != J:
        raise ValueError("source alphabet does not match the distortion matrix")
    if J ** n > limit or K ** n > limit:
        raise ValueError(f"super-alphabet too large ({J}^{n} x {K}^{n})")
    pJ = np.ones(1)
    for i in range(n):
        pJ = np.outer(pJ, src.dists[i]).reshape(-1)
    src_words = np.array(list(itertools.product(range(J), repeat=n)))
    rep_words = np.array(list(itertools.product(range(K), repeat=n)))
    big = np.zeros((len(src_words), len(rep_words)))
    for i in range(n):
        big += delta[src_words[:, i][:, None], rep_words[:, i][None, :]]
    return pJ, big


def ba_direct_super(src: SourceModel, dm, s, max_iters=20000, tol=1e-13):
    """Plain B-A on the product source; a brute-force check for tiny ``n``."""
    pJ, big = super_source(src, dm)
    r, d, q, it = blahut_arimoto(pJ[None, :], big, s, max_iters=max_iters, tol=tol)
    return RdPoint(s=float(s), rate=float(r[0]), distortion=float(d[0]), q_dists=q,
                   iterations=it)


def ba_trace(p, delta, s, q0, steps):
    """Successive (Q, q) iterates of B-A for a single source, for inspection."""
    W = np.exp(s * _delta(delta))
    q = np.array(q0, dtype=float)[None, :]
    P = np.asarray(p, dtype=float)[None, :]
    out = []
    for _ in range(steps):
        Q, q = _ba_step(P, W, q)
        out.append((Q[0], q[0]))
    return out


def rate_zero_point(src: SourceModel, dm):
    """Rate 0: every component uses its single best reproduction letter.

    Ties go to the hard-decision letter.
    """
    delta = _delta(dm)
    exp_d = src.dists @ delta  # (n, K)
    best = exp_d.min(axis=1, keepdims=True)
    hd_col = int(dm.columns([dm.hd_letter])[0]) if hasattr(dm, "columns") else 0
    tied = np.isclose(exp_d, best, rtol=0, atol=1e-12)
    choice = np.where(tied[:, hd_col], hd_col, exp_d.argmin(axis=1))
    q = np.zeros_like(exp_d)
    q[np.arange(src.n), choice] = 1.0
    dists = exp_d[np.arange(src.n), choice]
    return RdPoint(s=0.0, rate=0.0, distortion=float(dists.sum()), q_dists=q,
                   rates=np.zeros(src.n), distortions=dists)


def default_slopes(count=120, lo=-12.0, hi=-0.05):
    """Log-spaced slopes from ``hi`` (rate near 0) down to ``lo``."""
    return -np.logspace(math.log10(-hi), math.log10(-lo), count)


def rd_curve(src: SourceModel, dm, slopes=None, **kw):
    slopes = default_slopes() if slopes is None else slopes
    return [factored_rd(src, dm, float(s), **kw) for s in slopes]


def _search_slope(src, dm, key, target, tol, increasing_with_magnitude, max_steps=200):
    """Bisection on log|s| until ``key(point)`` is within ``tol`` of ``target``."""
    lo, hi = math.log(0.05), math.log(1.0)
    f = lambda u: factored_rd(src, dm, -math.exp(u))

    def below(pt):
        v = key(pt)
        return v < target if increasing_with_magnitude else v > target

    p_lo = f(lo)
    while not below(p_lo):
        lo -= 2.0
        if lo < math.log(1e-9):
            return p_lo
        p_lo = f(lo)
    p_hi = f(hi)
    while below(p_hi):
        hi += 0.7
        if hi > math.log(500.0):
            raise ValueError(f"target {target} is not reachable on this curve")
        p_hi = f(hi)
    for pt in (p_lo, p_hi):
        if abs(key(pt) - target) <= tol:
            return pt
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        pt = f(mid)
        if abs(key(pt) - target) <= tol:
            return pt
        if below(pt):
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"slope search for {target} did not reach tolerance {tol}")


def rd_at_rate(src: SourceModel, dm, rate, tol=0.01):
    """The R-D point whose rate is within ``tol`` bits of ``rate``."""
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    if rate <= tol:
        return rate_zero_point(src, dm)
    return _search_slope(src, dm, lambda p: p.rate, rate, tol, True)


def rd_at_distortion(src: SourceModel, dm, distortion, tol=1e-3):
    zero = rate_zero_point(src, dm)
    if distortion >= zero.distortion:
        return zero
    return _search_slope(src, dm, lambda p: p.distortion, distortion, tol, False)


# closed forms

def binary_entropy(p):
    p = np.clip(np.asarray(p, dtype=float), _CLIP, 1 - _CLIP)
    return -(p * np.log2(p) + (1 - p) * np.log2(1 - p))


@dataclass(frozen=True, eq=False)
class ClosedFormPoint:
    rate: float
    distortion: float
    q_dists: np.ndarray
    level: float
    rates: np.ndarray
    distortions: np.ndarray


def conventional_level_from_slope(s):
    return 1.0 / (1.0 + math.exp(-s))


def bitlevel_level_from_slope(s):
    return math.exp(s)


def conventional_at_level(p, level):
    """Reverse water-filling at a given level for the BM distortion of
    ``[[1, 2], [1, 0]]``; ``p[i] = Pr(x_i = 1)``."""
    p = np.asarray(p, dtype=float)
    if not 0 <= level <= 0.5:
        raise ValueError("water level must lie in [0, 1/2]")
    cap = np.minimum(p, 1 - p)
    active = level < cap
    dt = np.where(active, level, cap)
    rates = np.where(active, np.maximum(binary_entropy(p) - binary_entropy(dt), 0.0), 0.0)
    q = np.zeros((len(p), 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        q0 = (1 - p - dt) / (1 - 2 * dt)
    q[:, 0] = np.where(active, q0, np.where(p >= 0.5, 0.0, 1.0))
    q[:, 1] = 1 - q[:, 0]
    dists = dt + 1 - p
    return ClosedFormPoint(rate=float(rates.sum()), distortion=float(dists.sum()),
                           q_dists=q, level=float(level), rates=rates, distortions=dists)


def closedform_conventional(p, total_distortion):
    """Closed-form R(D) for the BM measure at a total distortion target."""
    p = np.asarray(p, dtype=float)
    n = len(p)
    cap = np.minimum(p, 1 - p)
    target = total_distortion + p.sum() - n
    if target < -1e-12 or target > cap.sum() + 1e-12:
        raise ValueError(f"distortion {total_distortion} is outside the achievable range "
                         f"[{n - p.sum():.6g}, {n - p.sum() + cap.sum():.6g}]")
    # solve sum_i min(level, cap_i) = target exactly over the sorted caps
    c = np.sort(cap)
    before = np.concatenate([[0.0], np.cumsum(c)])
    level = 0.5
    for j in range(n):
        # caps c[:j] saturated, the rest sit at the level
        lvl = (target - before[j]) / (n - j)
        if lvl <= c[j]:
            level = max(lvl, c[j - 1] if j else 0.0)
            break
    else:
        level = c[-1] if n else 0.0
    return conventional_at_level(p, min(level, 0.5))


def _bit_rates(p, lam):
    c = (1 + lam) / (1 + lam + lam * lam)
    return binary_entropy(p) - binary_entropy(c) + (p - c) * binary_entropy(lam / (1 + lam))


def closedform_bitlevel(p, level):
    """Closed form for the bit-level measure ``[[1, 3], [1, 0]]`` at one shared
    level in (0, 1); ``p[i]`` is the probability the i-th bit decision is right."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    p = np.asarray(p, dtype=float)
    lam = float(level)
    r = _bit_rates(p, lam)
    active = r > 0
    d_act = (1 + 2 * lam + 3 * lam * lam) / (1 + lam + lam * lam) - p * (1 + 2 * lam) / (1 + lam)
    d_idle = np.minimum(1.0, 3 * (1 - p))
    dists = np.where(active, d_act, d_idle)
    rates = np.where(active, r, 0.0)
    q0_act = ((1 + lam) - p * (1 + lam + lam * lam)) / (1 - lam * lam)
    q0_idle = np.where(3 * (1 - p) > 1, 1.0, 0.0)
    q = np.zeros((len(p), 2))
    q[:, 0] = np.where(active, q0_act, q0_idle)
    q[:, 1] = 1 - q[:, 0]
    return ClosedFormPoint(rate=float(rates.sum()), distortion=float(dists.sum()),
                           q_dists=q, level=lam, rates=rates, distortions=dists)


def closedform_bitlevel_at_distortion(p, total_distortion, tol=1e-10):
    """Bisection on the shared level until the distortions sum to the target."""
    lo, hi = 1e-12, 1 - 1e-12
    d_lo = closedform_bitlevel(p, lo).distortion
    d_hi = closedform_bitlevel(p, hi).distortion
    if not d_lo - tol <= total_distortion <= d_hi + tol:
        raise ValueError(f"distortion {total_distortion} outside [{d_lo:.6g}, {d_hi:.6g}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        pt = closedform_bitlevel(p, mid)
        if abs(pt.distortion - total_distortion) <= tol:
            return pt
        if pt.distortion < total_distortion:
            lo = mid
        else:
            hi = mid
    return closedform_bitlevel(p, 0.5 * (lo + hi))
