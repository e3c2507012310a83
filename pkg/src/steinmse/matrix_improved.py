"""Improved estimates of a shrinkage rule's MSE matrix.

The unbiased matrix estimate loses definiteness for small W. The repairs
live in a two-parameter class that rescales the isotropic part by xi(W)
and the axial part by eta(W):

    M_hat(xi, eta) = S [ (1/n - g1 xi) I + (g1 xi - g1 eta + g3) u u' ],

so the two eigenvalue factors are l_perp = 1/n - g1 xi (multiplicity p-1)
and l_axis = 1/n - g1 eta + g3. ``XI0_ETA0`` caps both factors at zero
(nonnegative definite), while ``XI1_ETA1`` / ``XI2_ETA2`` come from
improving the complementary risk-reduction matrix and are strictly
positive definite under certificates driven by the moment constant beta2.
``XI*_TR`` variants additionally clamp xi from below at the admissibility
cap (printed with denominator n+p+1; the band condition uses n+p+2, so
the constant is configurable).
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from ._rootfind import bracketed_bisect
from .distributions import RngStream
from .shrinkage import Observation, ProblemDims, ShrinkageFamily
from .umvue import AxialMatrix, g_functions

__all__ = [
    "MatrixEstimatorKind",
    "BetaConstants",
    "MatrixConstants",
    "b_of_w",
    "beta_j",
    "beta_constants",
    "solve_w_xi_eta",
    "gamma_xi_eta",
    "matrix_constants",
    "matrix_eigen_parts",
    "estimate_mse_matrix",
    "positive_definite_certified",
]


class MatrixEstimatorKind(enum.Enum):
    UMVUE = "umvue"
    XI0_ETA0 = "xi0"
    XI1_ETA1 = "xi1"
    XI2_ETA2 = "xi2"
    XI1_TR_ETA1 = "xi1-tr"
    XI2_TR_ETA2 = "xi2-tr"


_NEEDS_CONSTANTS = {
    MatrixEstimatorKind.XI1_ETA1,
    MatrixEstimatorKind.XI2_ETA2,
    MatrixEstimatorKind.XI1_TR_ETA1,
    MatrixEstimatorKind.XI2_TR_ETA2,
}


@dataclass(frozen=True)
class BetaConstants:
    """Monte Carlo moment extremes behind the matrix certificates.

    beta1 is the infimum over j >= 0 of the first moment curve (its
    nonnegativity licenses the nonnegative-definite construction), beta2
    the supremum of the second (it scales every positive-definite
    construction). Per-j values (j, value, stderr) are kept so the curves
    can be replotted and audited; j is scanned over 0..j_max plus tail
    checks at 2 j_max and 4 j_max.
    """

    beta1: float
    beta1_stderr: float
    argmin_j: int
    beta2: float
    beta2_stderr: float
    argmax_j: int
    j_max: int
    reps: int
    per_j_beta1: tuple
    per_j_beta2: tuple
    method: str = "monte-carlo"


@dataclass(frozen=True)
class MatrixConstants:
    """BetaConstants plus the roots and certificates derived from beta2.

    A ``None`` root means the corresponding threshold equation never
    crosses one, so that scaling is identically 1 (for the built-in
    James-Stein rule this happens on the eta side, where g3/g1 is the
    constant (p+2)/2).
    """

    beta: BetaConstants
    w_xi: float | None
    w_eta: float | None
    gamma_xi: float | None
    gamma_eta: float | None
    w_xi_stderr: float = 0.0
    w_eta_stderr: float = 0.0
    gamma_xi_stderr: float = 0.0
    gamma_eta_stderr: float = 0.0


def b_of_w(fam: ShrinkageFamily, dims: ProblemDims, w):
    """Second-moment kernel 4 phi/W + (n+2) phi^2/W - 4 phi' - 4 phi phi'."""
    w = np.asarray(w, dtype=float)
    phi = np.asarray(fam.phi(w), dtype=float)
    dphi = np.asarray(fam.phi_prime(w), dtype=float)
    n = dims.n
    return 4.0 * phi / w + (n + 2.0) * phi * phi / w - 4.0 * dphi - 4.0 * phi * dphi


def beta_j(order: int, fam: ShrinkageFamily, dims: ProblemDims, j: int,
           reps: int = 1_000_000, rng: RngStream | None = None, chunk: int = 262144):
    """Monte Carlo moment over u ~ chi^2_{p+2j}, v ~ chi^2_n independent.

    order 1: E[ 2(p-1) phi(u/v)/(u/v) - (p+2j-1) b(u/v) / (p+2j) ]
    order 2: E[ 2 phi(u/v)/(u/v) - b(u/v) / (p+2j) ]

    Returns (value, stderr). Calling twice with the same stream repeats the
    same draws, which is how the two orders are paired in
    ``beta_constants``.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if int(j) != j or j < 0:
        raise ValueError("j must be a nonnegative integer")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if rng is None:
        raise ValueError("a random stream is required")
    p, n = dims.p, dims.n
    g = rng.generator()
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < reps:
        m = min(chunk, reps - done)
        u = g.chisquare(p + 2 * j, m)
        v = g.chisquare(n, m)
        w = u / v
        phi_over_w = np.asarray(fam.phi(w), dtype=float) / w
        bvals = np.asarray(b_of_w(fam, dims, w), dtype=float)
        if order == 1:
            vals = 2.0 * (p - 1.0) * phi_over_w - (p + 2.0 * j - 1.0) / (p + 2.0 * j) * bvals
        else:
            vals = 2.0 * phi_over_w - bvals / (p + 2.0 * j)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += m
    mean = total / reps
    if reps == 1:
        return mean, float("nan")
    var = max(total_sq - reps * mean * mean, 0.0) / (reps - 1)
    return mean, float(np.sqrt(var / reps))


def beta_constants(fam: ShrinkageFamily, dims: ProblemDims, j_max: int = 50,
                   reps: int = 1_000_000, rng: RngStream | None = None) -> BetaConstants:
    """Scan j = 0..j_max (plus tail checks at 2 j_max and 4 j_max) for the
    extremes of both moment curves.

    Each j gets its own child stream, and both orders are evaluated on the
    same draws. Warns when an extremum lands on a scan boundary, since the
    true extremum may then sit beyond the scanned range.
    """
    if j_max < 10:
        raise ValueError("j_max must be at least 10")
    if rng is None:
        raise ValueError("a random stream is required")
    js = list(range(j_max + 1)) + [2 * j_max, 4 * j_max]
    per1 = []
    per2 = []
    for j in js:
        stream = rng.child(j)
        v1, se1 = beta_j(1, fam, dims, j, reps, stream)
        v2, se2 = beta_j(2, fam, dims, j, reps, stream)
        per1.append((j, v1, se1))
        per2.append((j, v2, se2))
    i_min = min(range(len(js)), key=lambda i: per1[i][1])
    i_max = max(range(len(js)), key=lambda i: per2[i][1])
    argmin_j, beta1, beta1_se = per1[i_min]
    argmax_j, beta2, beta2_se = per2[i_max]
    if argmin_j >= j_max:
        warnings.warn(
            f"first moment curve minimized at the scan boundary (j={argmin_j}); "
            "its infimum may lie beyond j_max", RuntimeWarning)
    if argmax_j >= j_max:
        warnings.warn(
            f"second moment curve maximized at the scan boundary (j={argmax_j}); "
            "its supremum may lie beyond j_max", RuntimeWarning)
    return BetaConstants(beta1, beta1_se, argmin_j, beta2, beta2_se, argmax_j,
                         j_max, reps, tuple(per1), tuple(per2))


def solve_w_xi_eta(fam: ShrinkageFamily, dims: ProblemDims, beta2: float):
    """Roots (w_xi, w_eta) of the two threshold equations.

    w_xi solves  (1+W) beta2 / ((n+p+2) g1(W)) = 1,
    w_eta solves (g3(W) + (1+W) beta2 / (n+p+2)) / g1(W) = 1.

    An entry is None when its left side exceeds one on the whole expanded
    bracket (no crossing): the corresponding scaling is then identically
    one. Roots are bisected to 1e-10; g1 must be nonincreasing for the
    crossing to be unique.
    """
    if not beta2 > 0:
        raise ValueError("beta2 must be positive")
    p, n = dims.p, dims.n
    gf = g_functions(fam, dims)
    c = beta2 / (n + p + 2.0)

    def q_xi(w: float) -> float:
        return (1.0 + w) * c / float(np.asarray(gf.g1(w), dtype=float)) - 1.0

    def q_eta(w: float) -> float:
        g1 = float(np.asarray(gf.g1(w), dtype=float))
        g3 = float(np.asarray(gf.g3(w), dtype=float))
        return (g3 + (1.0 + w) * c) / g1 - 1.0

    w_xi = bracketed_bisect(q_xi, 1e-8, 1.0, tol=1e-10, allow_no_root=True)
    w_eta = bracketed_bisect(q_eta, 1e-8, 1.0, tol=1e-10, allow_no_root=True)
    return w_xi, w_eta


def gamma_xi_eta(dims: ProblemDims, w_xi, w_eta, beta2: float):
    """Certificate values n (1 + root) beta2 / (n+p+2) for the two roots.

    Values at or below one certify positive definiteness of the first
    positive-definite construction. None roots propagate to None (that
    side is identically one and needs no certificate).
    """
    scale = dims.n * beta2 / (dims.n + dims.p + 2.0)
    gamma_xi = None if w_xi is None else scale * (1.0 + w_xi)
    gamma_eta = None if w_eta is None else scale * (1.0 + w_eta)
    return gamma_xi, gamma_eta


def _halfspread(solve, center: float, stderr: float) -> float:
    if stderr == 0.0 or not np.isfinite(stderr):
        return 0.0
    lo = solve(center - stderr)
    hi = solve(center + stderr)
    if lo is None or hi is None:
        return float("nan")
    return 0.5 * abs(hi - lo)


def matrix_constants(fam: ShrinkageFamily, dims: ProblemDims, j_max: int = 50,
                     reps: int = 1_000_000, rng: RngStream | None = None) -> MatrixConstants:
    """Compute the beta extremes, threshold roots and certificates once.

    Standard errors of the roots and certificates are propagated from the
    beta2 standard error by re-solving at beta2 +/- stderr.
    """
    beta = beta_constants(fam, dims, j_max, reps, rng)
    w_xi, w_eta = solve_w_xi_eta(fam, dims, beta.beta2)
    gamma_xi, gamma_eta = gamma_xi_eta(dims, w_xi, w_eta, beta.beta2)

    def xi_solver(b):
        return solve_w_xi_eta(fam, dims, b)[0]

    def eta_solver(b):
        return solve_w_xi_eta(fam, dims, b)[1]

    def gxi(b):
        w = xi_solver(b)
        return None if w is None else dims.n * (1.0 + w) * b / (dims.n + dims.p + 2.0)

    def geta(b):
        w = eta_solver(b)
        return None if w is None else dims.n * (1.0 + w) * b / (dims.n + dims.p + 2.0)

    se = beta.beta2_stderr
    w_xi_se = 0.0 if w_xi is None else _halfspread(xi_solver, beta.beta2, se)
    w_eta_se = 0.0 if w_eta is None else _halfspread(eta_solver, beta.beta2, se)
    gxi_se = 0.0 if gamma_xi is None else _halfspread(gxi, beta.beta2, se)
    geta_se = 0.0 if gamma_eta is None else _halfspread(geta, beta.beta2, se)
    return MatrixConstants(beta, w_xi, w_eta, gamma_xi, gamma_eta,
                           w_xi_se, w_eta_se, gxi_se, geta_se)


def matrix_eigen_parts(kind: MatrixEstimatorKind, w, fam: ShrinkageFamily, dims: ProblemDims,
                       consts: MatrixConstants | None = None,
                       cap_denominator: int | None = None):
    """Eigenvalue factors (l_perp, l_axis) of the chosen matrix estimate.

    The estimate is S (l_perp I + (l_axis - l_perp) u u'): l_perp has
    multiplicity p-1 and l_axis sits on the observed direction. The
    xi/eta min/max definitions are applied directly to the eigenvalue
    factors (1/n - g1 xi resp. 1/n - g1 eta + g3), which is algebraically
    identical and makes the clamp values (0 for the nonnegative
    construction, the positive floors for the others) exact in floating
    point. ``cap_denominator`` overrides the n+p+1 constant printed in
    the truncation formulas (the admissibility band uses n+p+2; both
    conventions are exposed on purpose).
    """
    w = np.asarray(w, dtype=float)
    p, n = dims.p, dims.n
    gf = g_functions(fam, dims)
    g1 = np.asarray(gf.g1(w), dtype=float)
    g3 = np.asarray(gf.g3(w), dtype=float)
    denom = float(cap_denominator) if cap_denominator else n + p + 1.0
    upper_cap = (1.0 + w) / denom  # l_perp value forced by the xi truncation

    if kind is MatrixEstimatorKind.UMVUE:
        l_perp = 1.0 / n - g1
        l_axis = 1.0 / n - g1 + g3
    elif kind is MatrixEstimatorKind.XI0_ETA0:
        # xi0 = max(min(1, 1/(n g1)), cap) and eta0 = min(1, (1/n + g3)/g1)
        # turn into exact clamps of the eigenvalue factors.
        l_perp = np.minimum(np.maximum(1.0 / n - g1, 0.0), upper_cap)
        l_axis = np.maximum(1.0 / n - g1 + g3, 0.0)
    elif kind in _NEEDS_CONSTANTS:
        if consts is None:
            raise ValueError(f"{kind.value} requires precomputed matrix constants")
        beta2 = consts.beta.beta2
        if kind in (MatrixEstimatorKind.XI1_ETA1, MatrixEstimatorKind.XI1_TR_ETA1):
            if consts.w_xi is None:
                l_perp = 1.0 / n - g1
            else:
                q = (1.0 + consts.w_xi) * beta2 / (n + p + 2.0)
                l_perp = np.maximum(1.0 / n - g1, 1.0 / n - q)
            if consts.w_eta is None:
                l_axis = 1.0 / n - g1 + g3
            else:
                q_eta = (1.0 + consts.w_eta) * beta2 / (n + p + 2.0)
                l_axis = np.maximum(1.0 / n - g1 + g3, 1.0 / n - q_eta)
        else:
            q = beta2 / (n + 2.0)
            l_perp = np.maximum(1.0 / n - g1, 1.0 / n - q)
            l_axis = np.maximum(1.0 / n - g1 + g3, 1.0 / n - q)
        if kind in (MatrixEstimatorKind.XI1_TR_ETA1, MatrixEstimatorKind.XI2_TR_ETA2):
            l_perp = np.minimum(l_perp, upper_cap)
    else:
        raise ValueError(f"unknown matrix estimator kind {kind!r}")
    return l_perp, l_axis


def estimate_mse_matrix(kind: MatrixEstimatorKind, obs: Observation, fam: ShrinkageFamily,
                        dims: ProblemDims, consts: MatrixConstants | None = None,
                        cap_denominator: int | None = None) -> AxialMatrix:
    """MSE-matrix estimate of the requested kind as an AxialMatrix."""
    w = obs.w
    if not w > 0:
        raise ValueError("W must be positive")
    l_perp, l_axis = matrix_eigen_parts(kind, w, fam, dims, consts, cap_denominator)
    l_perp = float(l_perp)
    l_axis = float(l_axis)
    axis = obs.x / np.linalg.norm(obs.x)
    return AxialMatrix(dims.p, obs.s, l_perp, l_axis - l_perp, axis)


def positive_definite_certified(kind: MatrixEstimatorKind, fam: ShrinkageFamily,
                                dims: ProblemDims, consts: MatrixConstants,
                                grid=None) -> bool:
    """Analytic sufficient conditions for strict positive definiteness.

    Monte Carlo certificate values are padded by three propagated standard
    errors. When the eta scaling is identically one (None root), the axis
    factor is 1/n - g1 + g3, so g3 >= g1 is verified on a grid instead.
    """
    if kind in (MatrixEstimatorKind.UMVUE, MatrixEstimatorKind.XI0_ETA0):
        return False
    n = dims.n
    if grid is None:
        grid = np.geomspace(1e-6, 1e6, 2001)

    def eta_side_ok() -> bool:
        if consts.w_eta is not None:
            return consts.gamma_eta + 3.0 * consts.gamma_eta_stderr < 1.0
        gf = g_functions(fam, dims)
        g1 = np.asarray(gf.g1(grid), dtype=float)
        g3 = np.asarray(gf.g3(grid), dtype=float)
        return bool(np.all(g3 >= g1))

    if kind in (MatrixEstimatorKind.XI1_ETA1, MatrixEstimatorKind.XI1_TR_ETA1):
        if consts.w_xi is None:
            return False
        xi_ok = consts.gamma_xi + 3.0 * consts.gamma_xi_stderr < 1.0
        return bool(xi_ok and eta_side_ok())
    # XI2 kinds: both eigenvalue factors are bounded below by
    # 1/n - beta2/(n+2), whichever branch the min/max picks.
    beta_hi = consts.beta.beta2 + 3.0 * consts.beta.beta2_stderr
    return bool(beta_hi / (n + 2.0) < 1.0 / n)
