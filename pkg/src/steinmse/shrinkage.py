"""Shrinkage estimators of a multivariate normal mean.

The observations are a vector X ~ N_p(theta, sigma^2 I_p) and an
independent scale statistic S ~ sigma^2 chi^2_n, with theta and sigma^2
both unknown and p >= 3. Every rule in the family pulls X toward the
origin by a data-driven factor,

    delta(X, S) = (1 - phi(W) / W) X,        W = ||X||^2 / S.

A constant phi = (p-2)/(n+2) is the James-Stein rule; capping phi at W
(so the factor never goes negative) gives its positive-part version.
Linear regression problems reduce to this canonical form through
``canonicalize_regression``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import RngStream

__all__ = [
    "FamilyKind",
    "ProblemDims",
    "Observation",
    "ShrinkageFamily",
    "ShrunkToOriginWarning",
    "family_from_name",
    "apply_estimator",
    "shrink_factors",
    "canonicalize_regression",
    "risk_reduction_integrand",
    "true_risk",
]


class FamilyKind(enum.Enum):
    JAMES_STEIN = "james-stein"
    POSITIVE_PART = "positive-part"
    CUSTOM = "custom"


class ShrunkToOriginWarning(UserWarning):
    """The shrinkage factor was pinned at zero because W = 0."""


@dataclass(frozen=True)
class ProblemDims:
    """Mean dimension p (>= 3) and scale degrees of freedom n (>= 1)."""

    p: int
    n: int

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 3:
            raise ValueError("p must be an integer >= 3 (shrinkage does not dominate below dimension 3)")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be an integer >= 1")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "n", int(self.n))

    @property
    def shrink_constant(self) -> float:
        """The James-Stein shrinkage level (p-2)/(n+2)."""
        return (self.p - 2) / (self.n + 2)


@dataclass(frozen=True)
class Observation:
    """Data vector x and the positive scale statistic s; w = ||x||^2 / s."""

    x: np.ndarray
    s: float

    def __post_init__(self):
        x = np.array(self.x, dtype=float, copy=True).reshape(-1)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        if not np.isfinite(x).all():
            raise ValueError("observation vector must be finite")
        if not (self.s > 0 and np.isfinite(self.s)):
            raise ValueError("scale statistic s must be positive and finite")
        object.__setattr__(self, "s", float(self.s))

    @property
    def w(self) -> float:
        return float(self.x @ self.x) / self.s


@dataclass(frozen=True, eq=False)
class ShrinkageFamily:
    """A member of the shrinkage class: phi and its derivative in W.

    Both callables must stay finite on W >= 0; the built-in constructors
    return vectorized callables and custom ones should accept numpy arrays
    too. The continuity flags declare what the unbiased-estimation
    machinery may rely on: the general (quadrature) path requires a
    continuous phi, while the built-in positive-part rule carries its own
    branch constants for the kink.
    """

    kind: FamilyKind
    phi: Callable
    phi_prime: Callable
    phi_continuous: bool = True
    phi_prime_continuous: bool = True
    label: str = "custom"

    @property
    def has_closed_forms(self) -> bool:
        return self.kind in (FamilyKind.JAMES_STEIN, FamilyKind.POSITIVE_PART)

    @staticmethod
    def james_stein(dims: ProblemDims) -> "ShrinkageFamily":
        k = dims.shrink_constant

        def phi(w):
            return np.full(np.shape(w), k) if np.ndim(w) else k

        def phi_prime(w):
            return np.zeros(np.shape(w)) if np.ndim(w) else 0.0

        return ShrinkageFamily(FamilyKind.JAMES_STEIN, phi, phi_prime, True, True, "james-stein")

    @staticmethod
    def positive_part(dims: ProblemDims) -> "ShrinkageFamily":
        k = dims.shrink_constant

        def phi(w):
            return np.minimum(np.asarray(w, dtype=float), k) if np.ndim(w) else min(float(w), k)

        def phi_prime(w):
            # Slope 1 below the kink, 0 above; the kink itself takes the
            # right-hand value (a measure-zero point).
            if np.ndim(w):
                return np.where(np.asarray(w, dtype=float) < k, 1.0, 0.0)
            return 1.0 if w < k else 0.0

        return ShrinkageFamily(FamilyKind.POSITIVE_PART, phi, phi_prime, True, False, "positive-part")

    @staticmethod
    def custom(phi, phi_prime, phi_continuous=True, phi_prime_continuous=True, label="custom"):
        return ShrinkageFamily(FamilyKind.CUSTOM, phi, phi_prime, phi_continuous, phi_prime_continuous, label)


_FAMILY_ALIASES = {
    "js": FamilyKind.JAMES_STEIN,
    "james-stein": FamilyKind.JAMES_STEIN,
    "james_stein": FamilyKind.JAMES_STEIN,
    "js-plus": FamilyKind.POSITIVE_PART,
    "js+": FamilyKind.POSITIVE_PART,
    "positive-part": FamilyKind.POSITIVE_PART,
    "positive_part": FamilyKind.POSITIVE_PART,
}


def family_from_name(name: str, dims: ProblemDims) -> ShrinkageFamily:
    """Build a built-in family from a CLI / config alias."""
    try:
        kind = _FAMILY_ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; expected one of {sorted(_FAMILY_ALIASES)}") from None
    if kind is FamilyKind.JAMES_STEIN:
        return ShrinkageFamily.james_stein(dims)
    return ShrinkageFamily.positive_part(dims)


def shrink_factors(fam: ShrinkageFamily, w) -> np.ndarray:
    """Vector of factors 1 - phi(W)/W over strictly positive W values."""
    w = np.asarray(w, dtype=float)
    return 1.0 - np.asarray(fam.phi(w), dtype=float) / w


def apply_estimator(obs: Observation, fam: ShrinkageFamily, dims: ProblemDims) -> np.ndarray:
    """Point estimate (1 - phi(W)/W) x.

    W = 0 makes phi(W)/W singular for rules that do not vanish at the
    origin; the estimate is then pinned at the zero vector and a
    ShrunkToOriginWarning is emitted (the event has probability zero under
    the model). The positive-part rule reaches the same zero vector
    continuously, without a warning.
    """
    if obs.x.shape != (dims.p,):
        raise ValueError(f"observation has length {obs.x.shape[0]}, expected p={dims.p}")
    w = obs.w
    if w == 0.0:
        if fam.kind is not FamilyKind.POSITIVE_PART:
            warnings.warn("W = 0: estimate shrunk to the origin", ShrunkToOriginWarning)
        return np.zeros(dims.p)
    factor = 1.0 - float(np.asarray(fam.phi(w), dtype=float)) / w
    return factor * obs.x


def canonicalize_regression(design, response):
    """Reduce a full-rank linear regression to the canonical (X, S) form.

    With design A (N x p, full column rank) and response Y, returns
    ``(Observation(X, S), ProblemDims(p, N - p), B)`` where
    B = (A'A)^{1/2} is the symmetric square root, X = B^{-1} A' Y and S is
    the residual sum of squares. The canonical mean is B beta, so a
    shrinkage estimate delta maps back to the coefficient scale as
    B^{-1} delta.
    """
    a = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float).reshape(-1)
    if a.ndim != 2:
        raise ValueError("design must be a 2-D matrix")
    n_obs, p = a.shape
    if y.shape[0] != n_obs:
        raise ValueError("response length does not match the design row count")
    if n_obs <= p:
        raise ValueError("need more observations than regressors for a residual scale")
    gram = a.T @ a
    eigvals, eigvecs = np.linalg.eigh(gram)
    if eigvals[0] <= eigvals[-1] * 1e-12:
        raise ValueError("design matrix is rank deficient")
    basis = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T
    aty = a.T @ y
    x = np.linalg.solve(basis, aty)
    s = float(y @ y - aty @ np.linalg.solve(gram, aty))
    if s <= 0:
        raise ValueError("residual sum of squares is not positive; the model fits the data exactly")
    return Observation(x, s), ProblemDims(p, n_obs - p), basis


def risk_reduction_integrand(fam: ShrinkageFamily, dims: ProblemDims, w) -> np.ndarray:
    """Pointwise risk-reduction term whose mean over W is p minus the risk.

    2(p-2) phi/W - (n+2) phi^2/W + 4 phi' + 4 phi phi'. The expression
    comes from integrating the squared error by parts against the
    chi-square scale, so risk estimates built on it depend on the data only
    through W and have far lower Monte Carlo variance than raw squared
    errors.
    """
    w = np.asarray(w, dtype=float)
    phi = np.asarray(fam.phi(w), dtype=float)
    dphi = np.asarray(fam.phi_prime(w), dtype=float)
    p, n = dims.p, dims.n
    return 2.0 * (p - 2.0) * phi / w - (n + 2.0) * phi * phi / w + 4.0 * dphi + 4.0 * phi * dphi


def true_risk(fam: ShrinkageFamily, dims: ProblemDims, lam: float, reps: int, rng: RngStream,
              chunk: int = 65536):
    """Monte Carlo risk of the rule at noncentrality lam (sigma^2 = 1 units).

    Averages p minus the risk-reduction integrand over draws of W. The
    integrand contains only W, so the estimate is invariant to the true
    scale and to the direction of theta. Returns (risk, stderr); the
    stderr is NaN when reps == 1, and exactly zero when phi vanishes
    identically (the integrand is then the constant p).
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if lam < 0:
        raise ValueError("noncentrality must be nonnegative")
    p, n = dims.p, dims.n
    theta = np.sqrt(lam / p) * np.ones(p)
    g = rng.generator()
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < reps:
        m = min(chunk, reps - done)
        x = theta + g.standard_normal((m, p))
        s = g.chisquare(n, m)
        w = np.einsum("ij,ij->i", x, x) / s
        vals = p - risk_reduction_integrand(fam, dims, w)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += m
    mean = total / reps
    if reps == 1:
        return mean, float("nan")
    var = max(total_sq - reps * mean * mean, 0.0) / (reps - 1)
    return mean, float(np.sqrt(var / reps))
