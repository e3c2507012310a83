"""Confidence ellipsoids centered at shrinkage estimates.

All variants share one geometry: the set of theta with
quadratic_form(center - theta) / p <= threshold, where the quadratic form
inverts an AxialMatrix shape exactly (O(p), no dense solves). The
baseline ``C0`` is the F-pivot ball around X; ``C3`` recenters it at the
shrinkage estimate; ``C1`` / ``C2`` reshape it with the positive-definite
MSE-matrix estimates; the starred variants rescale the threshold so their
volume equals C0's exactly while keeping the estimated shape.

Volumes include the p^{p/2} factor coming from the "/p" inside the Q
statistics; it is common to every variant, so volume ratios are
unaffected by that convention.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .distributions import f_quantile
from .matrix_improved import MatrixConstants, MatrixEstimatorKind, estimate_mse_matrix
from .shrinkage import Observation, ProblemDims, ShrinkageFamily, apply_estimator
from .umvue import AxialMatrix

__all__ = [
    "ConfidenceVariant",
    "ConfidenceSpec",
    "ConfidenceResult",
    "quad_form_inv",
    "ellipsoid_volume",
    "build_confidence_set",
]


class ConfidenceVariant(enum.Enum):
    C0 = "c0"
    C1 = "c1"
    C2 = "c2"
    C3 = "c3"
    C1_STAR = "c1*"
    C2_STAR = "c2*"


_VARIANT_MATRIX_KIND = {
    ConfidenceVariant.C1: MatrixEstimatorKind.XI1_TR_ETA1,
    ConfidenceVariant.C1_STAR: MatrixEstimatorKind.XI1_TR_ETA1,
    ConfidenceVariant.C2: MatrixEstimatorKind.XI2_TR_ETA2,
    ConfidenceVariant.C2_STAR: MatrixEstimatorKind.XI2_TR_ETA2,
}


@dataclass(frozen=True)
class ConfidenceSpec:
    """Which confidence set to build and at what level.

    Matrix-shaped variants are bound to their estimator kinds (C1 family
    to the first truncated positive-definite construction, C2 family to
    the second); passing a conflicting ``matrix_kind`` raises.
    """

    variant: ConfidenceVariant
    level: float = 0.95
    matrix_kind: MatrixEstimatorKind | None = None

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValueError("confidence level must lie strictly inside (0, 1)")
        bound = _VARIANT_MATRIX_KIND.get(self.variant)
        if self.matrix_kind is None:
            object.__setattr__(self, "matrix_kind", bound)
        elif self.matrix_kind is not bound:
            raise ValueError(f"variant {self.variant.value} is bound to {bound}, "
                             f"got {self.matrix_kind}")


@dataclass(frozen=True)
class ConfidenceResult:
    """A built confidence set: center, threshold, shape, volume, membership."""

    center: np.ndarray
    quadratic_radius: float
    shape: AxialMatrix
    volume: float
    contains_truth: bool | None

    def contains(self, theta) -> bool:
        """Closed-set membership: quadratic form / p <= threshold."""
        d = self.center - np.asarray(theta, dtype=float)
        return bool(quad_form_inv(self.shape, d) / self.shape.dim <= self.quadratic_radius)


def _require_positive_definite(m: AxialMatrix, context: str):
    if m.iso_eigenvalue <= 0:
        raise ValueError(f"{context}: isotropic eigenvalue {m.iso_eigenvalue:.6g} is not positive")
    if m.axis_eigenvalue <= 0:
        raise ValueError(f"{context}: axis eigenvalue {m.axis_eigenvalue:.6g} is not positive")


def quad_form_inv(m: AxialMatrix, d) -> float:
    """d' M^{-1} d for an AxialMatrix M, computed in O(p).

    Uses the rank-one inverse: with t = u'd,
    d'M^{-1}d = ((||d||^2 - t^2)/iso + t^2/(iso+axial)) / scale.
    """
    d = np.asarray(d, dtype=float).reshape(-1)
    if d.shape != (m.dim,):
        raise ValueError(f"vector has length {d.shape[0]}, expected {m.dim}")
    _require_positive_definite(m, "inverse quadratic form")
    t = float(m.axis @ d)
    dd = float(d @ d)
    return ((dd - t * t) / m.iso + t * t / (m.iso + m.axial)) / m.scale


def ellipsoid_volume(m, c: float, dims: ProblemDims | None = None) -> float:
    """Volume of { theta : (center-theta)' M^{-1} (center-theta) / p <= c }.

    ``m`` is an AxialMatrix, or a scalar s0 meaning M = s0 I (then ``dims``
    supplies p). Equals |M|^{1/2} (c p pi)^{p/2} / Gamma(p/2 + 1), computed
    in log space.
    """
    if not c > 0:
        raise ValueError("quadratic radius must be positive")
    if isinstance(m, AxialMatrix):
        p = m.dim
        _require_positive_definite(m, "ellipsoid volume")
        logdet = m.logdet()
    else:
        if dims is None:
            raise ValueError("dims is required when the shape is an isotropic scale")
        p = dims.p
        s0 = float(m)
        if not s0 > 0:
            raise ValueError("isotropic scale must be positive")
        logdet = p * np.log(s0)
    return float(np.exp(0.5 * logdet + 0.5 * p * np.log(c * p * np.pi) - gammaln(0.5 * p + 1.0)))


def build_confidence_set(cspec: ConfidenceSpec, obs: Observation, fam: ShrinkageFamily,
                         dims: ProblemDims, consts: MatrixConstants | None = None,
                         theta=None) -> ConfidenceResult:
    """Assemble the requested confidence set for one observation.

    The threshold starts from the F quantile c at the requested level; the
    starred variants replace it with (S/n) c / |M|^{1/p} so their volume
    cancels the estimated determinant and matches C0 exactly. ``theta``
    (when given) fills ``contains_truth``.
    """
    c = f_quantile(cspec.level, dims.p, dims.n)
    variant = cspec.variant
    if variant is ConfidenceVariant.C0:
        center = np.array(obs.x, dtype=float)
    else:
        center = apply_estimator(obs, fam, dims)
    norm_x = float(np.linalg.norm(obs.x))
    axis = obs.x / norm_x if norm_x > 0 else np.eye(dims.p)[0]
    if variant in (ConfidenceVariant.C0, ConfidenceVariant.C3):
        shape = AxialMatrix(dims.p, obs.s, 1.0 / dims.n, 0.0, axis)
        radius = c
    else:
        if consts is None:
            raise ValueError("matrix constants are required for matrix-shaped variants")
        shape = estimate_mse_matrix(cspec.matrix_kind, obs, fam, dims, consts)
        _require_positive_definite(shape, f"confidence variant {variant.value}")
        if variant in (ConfidenceVariant.C1_STAR, ConfidenceVariant.C2_STAR):
            radius = float((obs.s / dims.n) * c * np.exp(-shape.logdet() / dims.p))
        else:
            radius = c
    volume = ellipsoid_volume(shape, radius, dims)
    contains = None
    if theta is not None:
        d = center - np.asarray(theta, dtype=float)
        contains = bool(quad_form_inv(shape, d) / dims.p <= radius)
    return ConfidenceResult(center, radius, shape, volume, contains)
