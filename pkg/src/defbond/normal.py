"""Univariate, bivariate and m-variate standard normal CDFs.

The m-variate evaluator targets the correlation family
``sqrt((T_i - t) / (T_j - t))`` that arises when chaining option exercise
conditions over increasing dates, but accepts any positive definite
covariance.  Dimension one uses the erf-based library evaluation, dimension
two a fixed-order Gauss-Legendre reduction of the bivariate integral, and
dimensions three and up a randomized lattice rule over the sequentially
conditioned (reordered Cholesky) form, with the error estimate taken from
the spread of the randomization replicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import ndtr, ndtri, roots_legendre

from .errors import CovarianceError, DomainError, ScheduleError

__all__ = [
    "QmcConfig",
    "DEFAULT_QMC",
    "CorrelationStructure",
    "build_correlation",
    "std_normal_cdf",
    "bivariate_cdf",
    "mvn_cdf",
]

_INF = float("inf")

# Fractional parts of k*sqrt(prime) give a well-distributed lattice in up to
# 15 dimensions (an order-16 chain needs a 15-dimensional integrand).
_PRIMES = np.array(
    [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47], dtype=float
)

# Below this smallest eigenvalue a correlation pair is treated as +-1 and the
# two coordinates are merged (intersection of their half-lines).
_EIG_COLLAPSE = 1e-10


@dataclass(frozen=True)
class QmcConfig:
    """Budget and seeding for the randomized-lattice CDF evaluations.

    The point count doubles from ``base_points`` until the error estimate
    drops below ``target_error`` or the next doubling would exceed
    ``max_total_points`` across all shifts.  Results are deterministic for a
    fixed (seed, budget) configuration.
    """

    seed: int = 186525
    base_points: int = 2**13
    shifts: int = 12
    target_error: float = 1e-7
    max_total_points: int = 2**20


DEFAULT_QMC = QmcConfig()


def std_normal_cdf(x: float) -> float:
    """P(Z <= x) for a standard normal Z.  Accepts +-inf as limits."""
    if math.isnan(x):
        raise DomainError("std_normal_cdf: NaN argument")
    return float(ndtr(x))


def _norm_pdf(x):
    return np.exp(-0.5 * np.square(x)) / math.sqrt(2.0 * math.pi)


def _bvnu(dh: float, dk: float, r: float) -> float:
    """Upper-orthant probability P(X > dh, Y > dk), correlation r.

    Gauss-Legendre reduction of the single-integral form of the bivariate
    normal, with the usual split at ``|r| = 0.925`` where the integration
    variable switches to keep the integrand benign near ``|r| = 1``.
    """
    if dh == _INF or dk == _INF:
        return 0.0
    if dh == -_INF:
        return 1.0 if dk == -_INF else float(ndtr(-dk))
    if dk == -_INF:
        return float(ndtr(-dh))
    if r == 0.0:
        return float(ndtr(-dh) * ndtr(-dk))

    tp = 2.0 * math.pi
    h, k = dh, dk
    hk = h * k
    bvn = 0.0
    if abs(r) < 0.3:
        ng = 6
    elif abs(r) < 0.75:
        ng = 12
    else:
        ng = 20
    x, w = roots_legendre(ng)
    x = 1.0 + x  # nodes for the interval (0, 2); symmetry covers (1-x, 1+x)

    if abs(r) < 0.925:
        hs = 0.5 * (h * h + k * k)
        asr = 0.5 * math.asin(r)
        sn = np.sin(asr * x)
        bvn = float(np.exp((sn * hk - hs) / (1.0 - sn**2)) @ w)
        bvn = bvn * asr / tp + float(ndtr(-h) * ndtr(-k))
        return min(max(bvn, 0.0), 1.0)

    if r < 0.0:
        k = -k
        hk = -hk
    if abs(r) < 1.0:
        as_ = (1.0 - r) * (1.0 + r)
        a = math.sqrt(as_)
        bs = (h - k) ** 2
        asr = -0.5 * (bs / as_ + hk)
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 80.0
        if asr > -100.0:
            bvn = a * math.exp(asr) * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_**2)
        if hk > -100.0:
            b = math.sqrt(bs)
            sp = math.sqrt(tp) * float(ndtr(-b / a))
            bvn -= math.exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0)
        a *= 0.5
        xs = np.square(a * x)
        asr = -0.5 * (bs / xs + hk)
        ix = asr > -100.0
        xs = xs[ix]
        sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs)
        rs = np.sqrt(1.0 - xs)
        ep = np.exp(-0.5 * hk * xs / np.square(1.0 + rs)) / rs
        bvn = (a * float((np.exp(asr[ix]) * (sp - ep)) @ w[ix]) - bvn) / tp

    if r > 0.0:
        bvn += float(ndtr(-max(h, k)))
    elif h >= k:
        bvn = -bvn
    else:
        if h < 0.0:
            lk = float(ndtr(k) - ndtr(h))
        else:
            lk = float(ndtr(-h) - ndtr(-k))
        bvn = lk - bvn
    return min(max(bvn, 0.0), 1.0)


def bivariate_cdf(a: float, b: float, rho: float) -> float:
    """P(X <= a, Y <= b) for standard normals with correlation rho."""
    if math.isnan(a) or math.isnan(b) or math.isnan(rho):
        raise DomainError("bivariate_cdf: NaN argument")
    if abs(rho) > 1.0:
        raise DomainError(f"bivariate_cdf: |rho| = {abs(rho)} > 1")
    if rho == 1.0:
        return std_normal_cdf(min(a, b))
    if rho == -1.0:
        return max(0.0, float(ndtr(a)) - float(ndtr(-b)))
    return _bvnu(-a, -b, rho)


@dataclass(frozen=True)
class CorrelationStructure:
    """Correlation data implied by observing a driftless diffusion at a set
    of increasing dates, seen from ``eval_time``.

    ``covariance[i, j] = sqrt((T_i - t) / (T_j - t))`` for ``i <= j``; its
    inverse is tridiagonal and is produced in closed form by ``precision``.
    """

    eval_time: float
    expiries: tuple[float, ...]

    def __post_init__(self):
        if len(self.expiries) < 1:
            raise ScheduleError("CorrelationStructure: at least one expiry required")
        seq = (self.eval_time,) + self.expiries
        if any(not math.isfinite(v) for v in seq):
            raise ScheduleError("CorrelationStructure: non-finite dates")
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise ScheduleError(
                f"CorrelationStructure: expiries must satisfy t < T_1 < ... < T_m, got t={self.eval_time}, T={self.expiries}"
            )

    @property
    def dim(self) -> int:
        return len(self.expiries)

    @cached_property
    def covariance(self) -> np.ndarray:
        tau = np.asarray(self.expiries, float) - self.eval_time
        ratio = np.sqrt(np.minimum(tau[:, None], tau[None, :]) / np.maximum(tau[:, None], tau[None, :]))
        return ratio

    @cached_property
    def precision(self) -> np.ndarray:
        m = self.dim
        if m == 1:
            return np.array([[1.0]])
        ts = np.asarray(self.expiries, float)
        tau = ts - self.eval_time
        gaps = np.diff(ts)
        a = np.zeros((m, m))
        a[0, 0] = tau[1] / gaps[0]
        a[m - 1, m - 1] = tau[m - 1] / gaps[m - 2]
        for i in range(1, m - 1):
            a[i, i] = tau[i] / gaps[i - 1] + tau[i] / gaps[i]
        for i in range(m - 1):
            off = -math.sqrt(tau[i] * tau[i + 1]) / gaps[i]
            a[i, i + 1] = a[i + 1, i] = off
        return a


def build_correlation(t: float, expiries) -> CorrelationStructure:
    """Correlation structure for evaluation time ``t`` and increasing expiries."""
    return CorrelationStructure(float(t), tuple(float(v) for v in expiries))


def _box_prob_1d(lo: float, hi: float) -> float:
    return max(0.0, float(ndtr(hi)) - float(ndtr(lo)))


def _box_prob_2d(lo, hi, rho: float) -> float:
    p = (
        _bvnu(lo[0], lo[1], rho)
        - _bvnu(hi[0], lo[1], rho)
        - _bvnu(lo[0], hi[1], rho)
        + _bvnu(hi[0], hi[1], rho)
    )
    return min(max(p, 0.0), 1.0)


def _merge_pair(lower, upper, corr, i: int, j: int):
    """Collapse coordinate j into i assuming corr[i, j] is +-1.

    With perfectly (anti)correlated standardized coordinates the two
    constraints intersect on a single axis, so the box loses one dimension.
    """
    if corr[i, j] > 0.0:
        lower[i] = max(lower[i], lower[j])
        upper[i] = min(upper[i], upper[j])
    else:
        lower[i] = max(lower[i], -upper[j])
        upper[i] = min(upper[i], -lower[j])
    keep = np.arange(len(lower)) != j
    return lower[keep], upper[keep], corr[np.ix_(keep, keep)]


def _reduce_box(lower, upper, corr):
    """Marginalize unconstrained coordinates and merge exact +-1 pairs.

    Returns (lower, upper, corr, is_empty).  Infinite limits never reach the
    integration kernels: they either drop a dimension here or saturate a
    one/two dimensional closed form.
    """
    while True:
        if lower.size and np.any(upper <= lower):
            return lower, upper, corr, True
        free = (lower == -_INF) & (upper == _INF)
        if free.any():
            keep = ~free
            lower, upper, corr = lower[keep], upper[keep], corr[np.ix_(keep, keep)]
            continue
        d = len(lower)
        if d < 2:
            return lower, upper, corr, False
        iu, ju = np.triu_indices(d, 1)
        rr = corr[iu, ju]
        k = int(np.argmax(np.abs(rr)))
        if abs(rr[k]) < 1.0 - 5e-16:
            return lower, upper, corr, False
        lower, upper, corr = _merge_pair(lower, upper, corr, int(iu[k]), int(ju[k]))


def _ordered_cholesky(corr, lower, upper):
    """Lower-triangular factor with variables reordered so the smallest
    conditional probabilities integrate first, plus permuted bounds."""
    d = len(lower)
    c = corr.astype(float).copy()
    lo = lower.astype(float).copy()
    hi = upper.astype(float).copy()
    ell = np.zeros((d, d))
    y = np.zeros(d)
    for k in range(d):
        best, best_de = k, np.inf
        for i in range(k, d):
            v = c[i, i] - ell[i, :k] @ ell[i, :k]
            sd = math.sqrt(max(v, 1e-14))
            s = ell[i, :k] @ y[:k]
            de = float(ndtr((hi[i] - s) / sd) - ndtr((lo[i] - s) / sd))
            if de < best_de:
                best, best_de = i, de
        if best != k:
            for arr in (lo, hi, y):
                arr[[k, best]] = arr[[best, k]]
            ell[[k, best], :] = ell[[best, k], :]
            c[[k, best], :] = c[[best, k], :]
            c[:, [k, best]] = c[:, [best, k]]
        v = c[k, k] - ell[k, :k] @ ell[k, :k]
        sd = math.sqrt(max(v, 1e-14))
        ell[k, k] = sd
        for i in range(k + 1, d):
            ell[i, k] = (c[i, k] - ell[i, :k] @ ell[k, :k]) / sd
        s = ell[k, :k] @ y[:k]
        a = (lo[k] - s) / sd
        b = (hi[k] - s) / sd
        de = float(ndtr(b) - ndtr(a))
        if de > 1e-14:
            y[k] = float(_norm_pdf(a) - _norm_pdf(b)) / de
        else:
            mid = 0.5 * (max(a, -10.0) + min(b, 10.0))
            y[k] = mid
    return ell, lo, hi


def _qmc_replicate(ell, lo, hi, z) -> float:
    """Mean of the sequentially conditioned integrand over one point set."""
    n = z.shape[0]
    d = ell.shape[0]
    c = np.full(n, float(ndtr(lo[0] / ell[0, 0])))
    e = np.full(n, float(ndtr(hi[0] / ell[0, 0])))
    p = e - c
    y = np.empty((d - 1, n))
    for i in range(1, d):
        q = np.clip(c + z[:, i - 1] * (e - c), 1e-16, 1.0 - 1e-16)
        y[i - 1] = ndtri(q)
        s = ell[i, :i] @ y[:i]
        c = ndtr((lo[i] - s) / ell[i, i])
        e = ndtr((hi[i] - s) / ell[i, i])
        p = p * np.maximum(e - c, 0.0)
    return float(p.mean())


def _qmc_box(lower, upper, corr, config: QmcConfig):
    ell, lo, hi = _ordered_cholesky(corr, lower, upper)
    d = len(lo)
    key = np.array([config.seed % 2**64, d], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    shifts = rng.random((config.shifts, d - 1))
    gen = np.sqrt(_PRIMES[: d - 1])
    n = config.base_points
    while True:
        base = np.arange(1, n + 1)[:, None] * gen[None, :]
        est = np.empty(config.shifts)
        for r in range(config.shifts):
            z = np.abs(2.0 * np.modf(base + shifts[r])[0] - 1.0)
            est[r] = _qmc_replicate(ell, lo, hi, z)
        p = float(est.mean())
        err = 3.5 * float(est.std(ddof=1)) / math.sqrt(config.shifts)
        if err <= config.target_error or 2 * n * config.shifts > config.max_total_points:
            break
        n *= 2
    return min(max(p, 0.0), 1.0), max(err, 1e-16)


def _box_probability(lower, upper, corr, config: QmcConfig):
    """P(lower <= X <= upper) for X ~ N(0, corr), with error estimate."""
    lower, upper, corr, empty = _reduce_box(lower, upper, corr)
    if empty:
        return 0.0, 0.0
    d = len(lower)
    while d >= 3:
        eigmin = float(np.linalg.eigvalsh(corr)[0])
        if eigmin >= _EIG_COLLAPSE:
            break
        iu, ju = np.triu_indices(d, 1)
        rr = corr[iu, ju]
        k = int(np.argmax(np.abs(rr)))
        if abs(rr[k]) < 1.0 - 1e-6:
            # degenerate but not through a +-1 pair: not representable
            raise CovarianceError(
                f"covariance is not positive definite: smallest eigenvalue {eigmin:.3e}",
                eigenvalue=eigmin,
            )
        lower, upper, corr = _merge_pair(lower, upper, corr, int(iu[k]), int(ju[k]))
        lower, upper, corr, empty = _reduce_box(lower, upper, corr)
        if empty:
            return 0.0, 0.0
        d = len(lower)
    if d == 0:
        return 1.0, 0.0
    if d == 1:
        return _box_prob_1d(lower[0], upper[0]), 1e-15
    if d == 2:
        return _box_prob_2d(lower, upper, corr[0, 1]), 5e-15
    return _qmc_box(lower, upper, corr, config)


def _standardize(a, cov):
    diag = np.diag(cov).copy()
    if np.any(diag <= 0.0):
        bad = float(diag.min())
        raise CovarianceError(
            f"covariance has non-positive variance {bad:.3e}", eigenvalue=bad
        )
    scale = np.sqrt(diag)
    corr = cov / np.outer(scale, scale)
    np.fill_diagonal(corr, 1.0)
    return a / scale, corr


def mvn_cdf(a, corr, signs=None, config: QmcConfig = DEFAULT_QMC):
    """m-variate normal CDF with optional coordinate flips.

    Parameters
    ----------
    a : sequence of m floats (+-inf allowed)
        Limits.  With ``signs[i] == -1`` the i-th event is ``-X_i <= a_i``
        instead of ``X_i <= a_i``; equivalently the covariance of the flipped
        vector is ``(s_i s_j r_ij)``.
    corr : CorrelationStructure or (m, m) covariance array
    signs : sequence of +-1, optional

    Returns
    -------
    (probability, error_estimate)
        The estimate is conservative: one/two dimensional paths are exact to
        near machine precision, higher dimensions report 3.5 standard errors
        of the randomization replicates.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 1:
        raise DomainError("mvn_cdf: limits must be a one-dimensional sequence")
    if np.isnan(a).any():
        raise DomainError("mvn_cdf: NaN limit")
    if isinstance(corr, CorrelationStructure):
        if corr.dim != a.size:
            raise DomainError("mvn_cdf: limits and correlation dimension differ")
        corrm = corr.covariance.copy()
        limits = a.copy()
    else:
        cov = np.asarray(corr, dtype=float)
        if cov.shape != (a.size, a.size):
            raise DomainError("mvn_cdf: covariance shape does not match limits")
        if not np.allclose(cov, cov.T, atol=1e-10 * max(1.0, float(np.abs(cov).max()))):
            raise DomainError("mvn_cdf: covariance must be symmetric")
        limits, corrm = _standardize(a, 0.5 * (cov + cov.T))

    m = a.size
    if signs is None:
        signs = np.ones(m)
    else:
        signs = np.asarray(signs, dtype=float)
        if signs.shape != (m,) or not np.all(np.abs(signs) == 1.0):
            raise DomainError("mvn_cdf: signs must be a vector of +-1 entries")

    lower = np.where(signs > 0, -_INF, -limits)
    upper = np.where(signs > 0, limits, _INF)
    return _box_probability(lower, upper, corrm, config)
