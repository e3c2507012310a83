"""Chi-square and F special functions plus replayable random streams.

Densities are evaluated in log space so large degrees of freedom and large
arguments do not overflow. The F quantile is obtained by inverting the
regularized incomplete beta representation of the CDF. All random draws come
from counter-based Philox streams keyed by (seed, stream_id): the same key
always reproduces the same draws, no matter which thread or process asks for
them, so experiments can be sharded arbitrarily without changing a single
number.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, gammaln

__all__ = [
    "RngStream",
    "chi2_pdf",
    "noncentral_chi2_pdf",
    "f_quantile",
    "sample_normal_vector",
    "sample_chi2",
]

_MASK64 = (1 << 64) - 1

# A series term below this fraction of the running sum stops the summation.
_REL_TERM_CUTOFF = 1e-15


def _splitmix64(z: int) -> int:
    """splitmix64 finalizer; spreads structured ids over all 64 bits."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class RngStream:
    """Immutable key (seed, stream_id) naming a counter-based random stream.

    ``generator()`` always starts from the beginning of the stream, so a
    given key is a pure name for a fixed draw sequence. Distinct stream ids
    under one seed give statistically independent sequences (Philox keyed
    by the 128-bit concatenation), which makes results independent of
    thread scheduling: shard work by stream id, not by shared state.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = ((self.seed & _MASK64) << 64) | (self.stream_id & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, index: int) -> "RngStream":
        """Derived independent stream: same seed, scrambled stream id."""
        mixed = _splitmix64(_splitmix64(self.stream_id & _MASK64) ^ (index & _MASK64))
        return RngStream(self.seed, mixed)


def _check_df(k, name: str = "k") -> int:
    if int(k) != k or k < 1:
        raise ValueError(f"{name} must be an integer >= 1, got {k!r}")
    return int(k)


def _chi2_logpdf(x: float, k: int) -> float:
    """log density of chi-square with k df at x > 0."""
    half = 0.5 * k
    return (half - 1.0) * np.log(x) - 0.5 * x - half * np.log(2.0) - gammaln(half)


def chi2_pdf(x, k):
    """Central chi-square density with k degrees of freedom.

    Accepts scalars or arrays for x. Computed as
    exp((k/2-1) log x - x/2 - (k/2) log 2 - lgamma(k/2)), which stays finite
    far into the tails.
    """
    k = _check_df(k)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("chi-square density requires x >= 0")
    half = 0.5 * k
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp((half - 1.0) * np.log(x) - 0.5 * x - half * np.log(2.0) - gammaln(half))
    if k == 2:
        # (k/2 - 1) log x is 0 * (-inf) at the origin; the limit is 1/2.
        out = np.where(x == 0.0, 0.5, out)
    return float(out) if scalar else out


def noncentral_chi2_pdf(x, k, lam):
    """Noncentral chi-square density: Poisson mixture of central densities.

    The mixture is summed outward from the modal Poisson index; each
    direction stops once consecutive terms fall below 1e-15 of the running
    sum, which keeps the discarded relative mass under 1e-12.
    """
    k = _check_df(k)
    if lam < 0:
        raise ValueError("noncentrality must be nonnegative")
    if np.ndim(x) != 0:
        return np.array([noncentral_chi2_pdf(xi, k, lam) for xi in np.asarray(x, dtype=float)])
    x = float(x)
    if x < 0:
        raise ValueError("chi-square density requires x >= 0")
    if lam == 0.0:
        return chi2_pdf(x, k)
    if x == 0.0:
        # Only the j = 0 mixture term is nonzero at the origin.
        return float(np.exp(-0.5 * lam) * chi2_pdf(0.0, k))

    log_half_lam = np.log(0.5 * lam)

    def term(j: int) -> float:
        return float(np.exp(-0.5 * lam + j * log_half_lam - gammaln(j + 1) + _chi2_logpdf(x, k + 2 * j)))

    j_mode = int(0.5 * lam)
    total = term(j_mode)
    # <= so that terms that underflow to exactly zero count as converged
    # even while the running sum is still zero (deep in the tails).
    j, quiet = j_mode + 1, 0
    while quiet < 2:
        t = term(j)
        total += t
        quiet = quiet + 1 if t <= _REL_TERM_CUTOFF * total else 0
        j += 1
    j, quiet = j_mode - 1, 0
    while j >= 0 and quiet < 2:
        t = term(j)
        total += t
        quiet = quiet + 1 if t <= _REL_TERM_CUTOFF * total else 0
        j -= 1
    return float(total)


def f_quantile(q: float, d1: int, d2: int) -> float:
    """Quantile of the F distribution with (d1, d2) degrees of freedom.

    Inverts CDF(x) = betainc(d1/2, d2/2, d1 x / (d1 x + d2)) by bracketed
    bisection, tightened until the CDF at the returned point is within
    1e-12 of q.
    """
    d1 = _check_df(d1, "d1")
    d2 = _check_df(d2, "d2")
    if not 0.0 < q < 1.0:
        raise ValueError("quantile level must lie strictly inside (0, 1)")
    a, b = 0.5 * d1, 0.5 * d2

    def cdf(x: float) -> float:
        y = d1 * x / (d1 * x + d2)
        return float(betainc(a, b, y))

    hi = 1.0
    while cdf(hi) < q:
        hi *= 2.0
        if hi > 1e14:
            raise RuntimeError("failed to bracket the F quantile")
    lo = 0.0
    for _ in range(240):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(hi, 1.0):
            break
    x = 0.5 * (lo + hi)
    if abs(cdf(x) - q) > 1e-10:
        raise RuntimeError(f"F quantile inversion stalled at x={x} (CDF error {cdf(x) - q:.3e})")
    return x


def sample_normal_vector(dims, theta, sigma2: float, rng: RngStream) -> np.ndarray:
    """One draw of a p-variate normal with mean theta and covariance sigma2 I.

    ``dims`` only needs a ``p`` attribute. The draw is a pure function of the
    stream key: calling twice with the same RngStream repeats the vector.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (dims.p,):
        raise ValueError(f"theta must have length p={dims.p}, got shape {theta.shape}")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    g = rng.generator()
    return theta + np.sqrt(sigma2) * g.standard_normal(dims.p)


def sample_chi2(n: int, sigma2: float, rng: RngStream) -> float:
    """One draw of sigma2 times a chi-square variate with n df.

    Deterministic in the stream key, like ``sample_normal_vector``. Use
    distinct stream ids for draws that must be independent.
    """
    n = _check_df(n, "n")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    g = rng.generator()
    return float(sigma2 * g.chisquare(n))
