"""Monte Carlo drivers: risk curves, coverage curves, constants tables.

Replications are drawn in fixed-size blocks, each block from its own
counter-based stream, and block partials are reduced in block order. The
block layout depends only on the configuration (never on the worker
count), so rerunning with any number of threads yields bit-identical
tables. Competing estimators are always evaluated on the same draws
(paired design), which makes dominance comparisons sharp at modest
replication counts.

Tables serialize to CSV with a header row and 10-significant-digit
numbers; ``write_tables`` also drops a metadata JSON and a plot script
that consumes the CSVs.
"""

from __future__ import annotations

import csv
import json
import math
import os
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .confidence import ConfidenceSpec, ConfidenceVariant
from .distributions import RngStream, f_quantile
from .matrix_improved import (MatrixEstimatorKind, matrix_constants, matrix_eigen_parts)
from .mse_improved import (MseEstimatorKind, estimate_mse_at, shrinkage_constants,
                           solve_w_pn)
from .shrinkage import (ProblemDims, ShrinkageFamily, family_from_name, shrink_factors,
                        true_risk)

__all__ = [
    "BLOCK",
    "ExperimentConfig",
    "CsvTable",
    "RiskTable",
    "CoverageTable",
    "RiskRow",
    "CoverageRow",
    "run_mse_risk_curve",
    "run_matrix_risk_curve",
    "run_coverage_curve",
    "reproduce_tables",
    "write_tables",
    "write_plot_script",
    "default_confidence_variants",
]

# Replications per stream; fixed so outputs never depend on worker count.
BLOCK = 4096

_DOMAIN_CONSTANTS = 1
_DOMAIN_TRUE = 2
_DOMAIN_MSE_CURVE = 3
_DOMAIN_MATRIX_CURVE = 4
_DOMAIN_COVERAGE = 5
_DOMAIN_TRUE_MATRIX = 6

_MSE_CONST_KINDS = {MseEstimatorKind.PSI1, MseEstimatorKind.PSI2,
                    MseEstimatorKind.PSI1_TR, MseEstimatorKind.PSI2_TR}
_MATRIX_CONST_KINDS = {MatrixEstimatorKind.XI1_ETA1, MatrixEstimatorKind.XI2_ETA2,
                       MatrixEstimatorKind.XI1_TR_ETA1, MatrixEstimatorKind.XI2_TR_ETA2}

_DEFAULT_MSE_KINDS = (MseEstimatorKind.UMVUE, MseEstimatorKind.PSI0,
                      MseEstimatorKind.PSI1_TR, MseEstimatorKind.PSI2_TR)
_DEFAULT_MATRIX_KINDS = (MatrixEstimatorKind.UMVUE, MatrixEstimatorKind.XI0_ETA0,
                         MatrixEstimatorKind.XI1_TR_ETA1, MatrixEstimatorKind.XI2_TR_ETA2)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a Monte Carlo run depends on, seed included.

    theta_direction: "equal" distributes the signal evenly over the
    coordinates, "first-axis" puts it all on the first one, or pass an
    explicit vector. Risks depend on theta only through the noncentrality,
    which the direction-invariance test exploits.
    """

    dims_list: tuple = (ProblemDims(5, 5),)
    lambda_grid: tuple = tuple(float(v) for v in range(31))
    reps: int = 100_000
    seed: int = 0
    families: tuple = ("james-stein", "positive-part")
    estimator_kinds: tuple = _DEFAULT_MSE_KINDS
    matrix_kinds: tuple = _DEFAULT_MATRIX_KINDS
    theta_direction: object = "equal"
    threads: int = 1
    const_reps: int = 1_000_000
    true_reps_factor: int = 10

    def __post_init__(self):
        object.__setattr__(self, "dims_list", tuple(self.dims_list))
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "estimator_kinds", tuple(self.estimator_kinds))
        object.__setattr__(self, "matrix_kinds", tuple(self.matrix_kinds))
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if any(lam < 0 for lam in self.lambda_grid):
            raise ValueError("noncentrality values must be nonnegative")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    def metadata(self) -> dict:
        return {
            "dims": [[d.p, d.n] for d in self.dims_list],
            "lambda_grid": list(self.lambda_grid),
            "reps": self.reps,
            "seed": self.seed,
            "families": list(self.families),
            "estimator_kinds": [k.value for k in self.estimator_kinds],
            "matrix_kinds": [k.value for k in self.matrix_kinds],
            "theta_direction": (self.theta_direction if isinstance(self.theta_direction, str)
                                else list(np.asarray(self.theta_direction, dtype=float))),
            "threads": self.threads,
            "const_reps": self.const_reps,
            "true_reps_factor": self.true_reps_factor,
        }


RiskRow = namedtuple("RiskRow", ["p", "n", "family", "lam", "kind", "risk", "stderr",
                                 "diff_vs_umvue", "diff_stderr"])
CoverageRow = namedtuple("CoverageRow", ["p", "n", "family", "lam", "variant", "coverage",
                                         "stderr", "mean_volume", "volume_ratio_vs_c0"])


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


@dataclass
class CsvTable:
    """A named table with a header row; writes 10-significant-digit CSV."""

    name: str
    header: tuple
    rows: list

    def write(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.header)
            for row in self.rows:
                writer.writerow([_fmt_cell(v) for v in row])


@dataclass
class RiskTable:
    loss: str
    rows: list
    metadata: dict = field(default_factory=dict)

    def to_csv_table(self, name: str = "risk_curve") -> CsvTable:
        return CsvTable(name, RiskRow._fields, self.rows)

    def write_csv(self, path: str) -> None:
        self.to_csv_table().write(path)


@dataclass
class CoverageTable:
    rows: list
    metadata: dict = field(default_factory=dict)

    def to_csv_table(self, name: str = "coverage_curve") -> CsvTable:
        return CsvTable(name, CoverageRow._fields, self.rows)

    def write_csv(self, path: str) -> None:
        self.to_csv_table().write(path)


def _stream(seed: int, domain: int, fam_idx: int = 0, dims_idx: int = 0,
            lam_idx: int = 0, block: int = 0) -> RngStream:
    """Pack the experiment coordinates into one 64-bit stream id."""
    sid = ((domain & 0xF) << 60) | ((fam_idx & 0xF) << 56) | ((dims_idx & 0xFF) << 48) \
        | ((lam_idx & 0xFFFF) << 32) | (block & 0xFFFFFFFF)
    return RngStream(seed, sid)


def _direction(cfg: ExperimentConfig, p: int) -> np.ndarray:
    d = cfg.theta_direction
    if isinstance(d, str):
        if d == "equal":
            return np.ones(p) / math.sqrt(p)
        if d == "first-axis":
            out = np.zeros(p)
            out[0] = 1.0
            return out
        raise ValueError(f"unknown theta direction {d!r}")
    vec = np.asarray(d, dtype=float).reshape(-1)
    if vec.shape != (p,):
        raise ValueError(f"theta direction must have length {p}")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("theta direction must be nonzero")
    return vec / norm


def _map_blocks(fn, nblocks: int, threads: int) -> list:
    if threads <= 1 or nblocks <= 1:
        return [fn(i) for i in range(nblocks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(nblocks)))


def _block_sizes(reps: int):
    nblocks = (reps + BLOCK - 1) // BLOCK
    return nblocks, [min(BLOCK, reps - i * BLOCK) for i in range(nblocks)]


def _draw_block(stream: RngStream, m: int, theta: np.ndarray, n: int):
    g = stream.generator()
    x = theta + g.standard_normal((m, theta.shape[0]))
    s = g.chisquare(n, m)
    w = np.einsum("ij,ij->i", x, x) / s
    return x, s, w


def _mean_and_stderr(total: float, total_sq: float, m: int):
    mean = total / m
    if m < 2:
        return mean, float("nan")
    var = max(total_sq - m * mean * mean, 0.0) / (m - 1)
    return mean, math.sqrt(var / m)


@lru_cache(maxsize=64)
def _quantile(level: float, p: int, n: int) -> float:
    return f_quantile(level, p, n)


def _loss_stats(losses: list, base_idx):
    """Reduce per-kind loss arrays into (sum, sum^2, dsum, dsum^2) rows."""
    out = np.empty((len(losses), 4))
    base = losses[base_idx] if base_idx is not None else None
    for ki, lvals in enumerate(losses):
        out[ki, 0] = lvals.sum()
        out[ki, 1] = (lvals * lvals).sum()
        if base is None:
            out[ki, 2] = np.nan
            out[ki, 3] = np.nan
        else:
            d = lvals - base
            out[ki, 2] = d.sum()
            out[ki, 3] = (d * d).sum()
    return out


def _rows_from_stats(agg: np.ndarray, reps: int, kinds, dims, family, lam, rows: list):
    for ki, kind in enumerate(kinds):
        risk, stderr = _mean_and_stderr(agg[ki, 0], agg[ki, 1], reps)
        if np.isnan(agg[ki, 2]):
            dmean, dse = float("nan"), float("nan")
        else:
            dmean, dse = _mean_and_stderr(agg[ki, 2], agg[ki, 3], reps)
        rows.append(RiskRow(dims.p, dims.n, family, lam, kind.value, risk, stderr, dmean, dse))


def run_mse_risk_curve(cfg: ExperimentConfig, loss: str = "mse") -> RiskTable:
    """Risk curves of the scalar MSE estimators under the chosen loss.

    loss="mse": squared error of the estimate against the true risk.
    loss="reduction": squared error of the complementary reduction
    estimate pS/n - estimate against the true reduction p - risk.

    Every estimator kind sees the same draws; the diff columns hold the
    per-replication mean loss difference against the unbiased estimator
    and its standard error (nan when the unbiased kind is not in the run).
    """
    if loss not in ("mse", "reduction"):
        raise ValueError("loss must be 'mse' or 'reduction'")
    kinds = cfg.estimator_kinds
    try:
        base_idx = kinds.index(MseEstimatorKind.UMVUE)
    except ValueError:
        base_idx = None
    rows: list = []
    for di, dims in enumerate(cfg.dims_list):
        p, n = dims.p, dims.n
        for fi, fam_name in enumerate(cfg.families):
            fam = family_from_name(fam_name, dims)
            consts = None
            if any(k in _MSE_CONST_KINDS for k in kinds):
                consts = shrinkage_constants(fam, dims, cfg.const_reps,
                                             _stream(cfg.seed, _DOMAIN_CONSTANTS, fi, di))
            direction = _direction(cfg, p)
            for li, lam in enumerate(cfg.lambda_grid):
                r_true, _ = true_risk(fam, dims, lam, cfg.reps * cfg.true_reps_factor,
                                      _stream(cfg.seed, _DOMAIN_TRUE, fi, di, li))
                target = r_true if loss == "mse" else p - r_true
                theta = math.sqrt(lam) * direction
                nblocks, sizes = _block_sizes(cfg.reps)

                def partial(bi: int) -> np.ndarray:
                    _, s, w = _draw_block(
                        _stream(cfg.seed, _DOMAIN_MSE_CURVE, fi, di, li, bi), sizes[bi], theta, n)
                    losses = []
                    for kind in kinds:
                        est = np.asarray(estimate_mse_at(kind, w, s, fam, dims, consts))
                        if loss == "reduction":
                            est = p * s / n - est
                        losses.append((est - target) ** 2)
                    return _loss_stats(losses, base_idx)

                agg = np.sum(np.stack(_map_blocks(partial, nblocks, cfg.threads)), axis=0)
                _rows_from_stats(agg, cfg.reps, kinds, dims, fam_name, lam, rows)
    meta = cfg.metadata()
    meta["loss"] = loss
    return RiskTable(loss, rows, meta)


def _true_matrix_dense(fam: ShrinkageFamily, dims: ProblemDims, lam: float, reps: int,
                       rng: RngStream, direction: np.ndarray, chunk: int = 65536) -> np.ndarray:
    """High-precision dense estimate of E[(delta - theta)(delta - theta)'].

    The truth is only near-axial (its axis is theta, not the data), so this
    is the one place a dense p x p moment matrix is accumulated.
    """
    p, n = dims.p, dims.n
    theta = math.sqrt(lam) * direction
    g = rng.generator()
    acc = np.zeros((p, p))
    done = 0
    while done < reps:
        m = min(chunk, reps - done)
        x = theta + g.standard_normal((m, p))
        s = g.chisquare(n, m)
        w = np.einsum("ij,ij->i", x, x) / s
        d = shrink_factors(fam, w)[:, None] * x - theta
        acc += d.T @ d
        done += m
    return acc / reps


def _matrix_loss(s, l_perp, l_axis, u_m_u, tr_m, tr_m2, p):
    """tr(Mhat - M)^2 with Mhat = s(l_perp I + (l_axis - l_perp) u u')."""
    tr_hat2 = s * s * ((p - 1.0) * l_perp * l_perp + l_axis * l_axis)
    tr_cross = s * (l_perp * tr_m + (l_axis - l_perp) * u_m_u)
    return tr_hat2 - 2.0 * tr_cross + tr_m2


def run_matrix_risk_curve(cfg: ExperimentConfig, loss: str = "matrix",
                          consts_map: dict | None = None) -> RiskTable:
    """Risk curves of the matrix estimators under trace-squared losses.

    loss="matrix": tr(estimate - M)^2 against the true MSE matrix M.
    loss="reduction": same for the complementary reduction matrices
    (S/n) I - estimate against I - M.

    The true M at each grid point is estimated once, densely, with
    true_reps_factor times the replication count; per-replication losses
    then use exact O(p) trace algebra on the axial shapes.
    """
    if loss not in ("matrix", "reduction"):
        raise ValueError("loss must be 'matrix' or 'reduction'")
    kinds = cfg.matrix_kinds
    try:
        base_idx = kinds.index(MatrixEstimatorKind.UMVUE)
    except ValueError:
        base_idx = None
    rows: list = []
    for di, dims in enumerate(cfg.dims_list):
        p, n = dims.p, dims.n
        for fi, fam_name in enumerate(cfg.families):
            fam = family_from_name(fam_name, dims)
            consts = None
            if any(k in _MATRIX_CONST_KINDS for k in kinds):
                consts = _lookup_matrix_constants(cfg, fam_name, fam, dims, fi, di, consts_map)
            direction = _direction(cfg, p)
            for li, lam in enumerate(cfg.lambda_grid):
                m_true = _true_matrix_dense(fam, dims, lam, cfg.reps * cfg.true_reps_factor,
                                            _stream(cfg.seed, _DOMAIN_TRUE_MATRIX, fi, di, li),
                                            direction)
                if loss == "matrix":
                    tr_m = float(np.trace(m_true))
                    tr_m2 = float(np.sum(m_true * m_true))
                    m_ref = m_true
                else:
                    m_ref = np.eye(p) - m_true
                    tr_m = float(np.trace(m_ref))
                    tr_m2 = float(np.sum(m_ref * m_ref))
                theta = math.sqrt(lam) * direction
                nblocks, sizes = _block_sizes(cfg.reps)

                def partial(bi: int) -> np.ndarray:
                    x, s, w = _draw_block(
                        _stream(cfg.seed, _DOMAIN_MATRIX_CURVE, fi, di, li, bi),
                        sizes[bi], theta, n)
                    u = x / np.sqrt(np.einsum("ij,ij->i", x, x))[:, None]
                    u_m_u = np.einsum("ij,jk,ik->i", u, m_ref, u)
                    losses = []
                    for kind in kinds:
                        l_perp, l_axis = matrix_eigen_parts(kind, w, fam, dims, consts)
                        if loss == "reduction":
                            l_perp, l_axis = 1.0 / n - l_perp, 1.0 / n - l_axis
                        losses.append(_matrix_loss(s, l_perp, l_axis, u_m_u, tr_m, tr_m2, p))
                    return _loss_stats(losses, base_idx)

                agg = np.sum(np.stack(_map_blocks(partial, nblocks, cfg.threads)), axis=0)
                _rows_from_stats(agg, cfg.reps, kinds, dims, fam_name, lam, rows)
    meta = cfg.metadata()
    meta["loss"] = loss
    return RiskTable(loss, rows, meta)


def _lookup_matrix_constants(cfg, fam_name, fam, dims, fi, di, consts_map):
    if consts_map is not None and (fam_name, dims) in consts_map:
        return consts_map[(fam_name, dims)]
    return matrix_constants(fam, dims, reps=cfg.const_reps,
                            rng=_stream(cfg.seed, _DOMAIN_CONSTANTS, fi, di, 1))


def default_confidence_variants(level: float = 0.95) -> tuple:
    return tuple(ConfidenceSpec(v, level) for v in (
        ConfidenceVariant.C0, ConfidenceVariant.C1, ConfidenceVariant.C2,
        ConfidenceVariant.C3, ConfidenceVariant.C1_STAR, ConfidenceVariant.C2_STAR))


def run_coverage_curve(cfg: ExperimentConfig, variants: tuple | None = None,
                       consts_map: dict | None = None) -> CoverageTable:
    """Coverage and expected-volume curves for the confidence variants.

    Rows carry the empirical coverage (with binomial stderr), the mean
    volume, and the mean-volume ratio against C0 at the same grid point
    (nan when C0 is not among the variants).
    """
    variants = default_confidence_variants() if variants is None else tuple(variants)
    rows: list = []
    for di, dims in enumerate(cfg.dims_list):
        p, n = dims.p, dims.n
        half_p = 0.5 * p
        log_gamma = float(gammaln(half_p + 1.0))
        for fi, fam_name in enumerate(cfg.families):
            fam = family_from_name(fam_name, dims)
            needs_matrix = any(v.variant not in (ConfidenceVariant.C0, ConfidenceVariant.C3)
                               for v in variants)
            consts = None
            if needs_matrix:
                consts = _lookup_matrix_constants(cfg, fam_name, fam, dims, fi, di, consts_map)
            direction = _direction(cfg, p)
            for li, lam in enumerate(cfg.lambda_grid):
                theta = math.sqrt(lam) * direction
                nblocks, sizes = _block_sizes(cfg.reps)

                def partial(bi: int) -> np.ndarray:
                    x, s, w = _draw_block(
                        _stream(cfg.seed, _DOMAIN_COVERAGE, fi, di, li, bi), sizes[bi], theta, n)
                    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
                    u = x / norms[:, None]
                    delta = shrink_factors(fam, w)[:, None] * x
                    out = np.empty((len(variants), 2))
                    for vi, spec in enumerate(variants):
                        c = _quantile(spec.level, p, n)
                        variant = spec.variant
                        if variant in (ConfidenceVariant.C0, ConfidenceVariant.C3):
                            d = (x if variant is ConfidenceVariant.C0 else delta) - theta
                            q = np.einsum("ij,ij->i", d, d) * n / (p * s)
                            covered = q <= c
                            logdet = p * np.log(s / n)
                            radius = np.full_like(s, c)
                        else:
                            l_perp, l_axis = matrix_eigen_parts(spec.matrix_kind, w, fam,
                                                                dims, consts)
                            if np.any(l_perp <= 0) or np.any(l_axis <= 0):
                                raise ValueError(
                                    f"variant {variant.value}: matrix estimate lost positive "
                                    "definiteness; check the certificates for these dimensions")
                            d = delta - theta
                            ud = np.einsum("ij,ij->i", d, u)
                            dd = np.einsum("ij,ij->i", d, d)
                            qf = ((dd - ud * ud) / l_perp + ud * ud / l_axis) / s
                            logdet = (p - 1.0) * np.log(s * l_perp) + np.log(s * l_axis)
                            if variant in (ConfidenceVariant.C1_STAR, ConfidenceVariant.C2_STAR):
                                radius = (s / n) * c * np.exp(-logdet / p)
                            else:
                                radius = np.full_like(s, c)
                            covered = qf / p <= radius
                        vol = np.exp(0.5 * logdet + half_p * np.log(radius * p * np.pi)
                                     - log_gamma)
                        out[vi, 0] = covered.sum()
                        out[vi, 1] = vol.sum()
                    return out

                agg = np.sum(np.stack(_map_blocks(partial, nblocks, cfg.threads)), axis=0)
                mean_vols = {variants[vi].variant: agg[vi, 1] / cfg.reps
                             for vi in range(len(variants))}
                c0_vol = mean_vols.get(ConfidenceVariant.C0)
                for vi, spec in enumerate(variants):
                    cov = agg[vi, 0] / cfg.reps
                    se = math.sqrt(max(cov * (1.0 - cov), 0.0) / cfg.reps)
                    vol = mean_vols[spec.variant]
                    ratio = float("nan") if c0_vol in (None, 0.0) else vol / c0_vol
                    rows.append(CoverageRow(p, n, fam_name, lam, spec.variant.value,
                                            cov, se, vol, ratio))
    meta = cfg.metadata()
    meta["variants"] = [v.variant.value for v in variants]
    meta["levels"] = [v.level for v in variants]
    return CoverageTable(rows, meta)


def reproduce_tables(dims_list, families=("james-stein", "positive-part"),
                     reps: int = 1_000_000, seed: int = 0, j_max: int = 50) -> dict:
    """Regenerate the five constants tables, stderr columns included.

    Closed-form entries carry stderr 0; Monte Carlo entries propagate
    their stderr into the derived roots and certificates by re-solving at
    the +/- one-sigma inputs. Per-j beta curves are included as a sixth
    table so the moment curves can be replotted.

    Returns {name: CsvTable} with names table1_gamma, table2_w,
    table3_beta2, table4_gamma_xi_eta, table5_w_xi_eta, beta_per_j.
    """
    t1, t2, t3, t4, t5, tj = [], [], [], [], [], []
    for di, dims in enumerate(tuple(dims_list)):
        p, n = dims.p, dims.n
        for fi, fam_name in enumerate(tuple(families)):
            fam = family_from_name(fam_name, dims)
            sc = shrinkage_constants(fam, dims, reps,
                                     _stream(seed, _DOMAIN_CONSTANTS, fi, di))
            if sc.alpha_stderr > 0:
                lo = solve_w_pn(fam, dims, sc.alpha - sc.alpha_stderr)
                hi = solve_w_pn(fam, dims, sc.alpha + sc.alpha_stderr)
                w_se = 0.5 * abs(hi - lo)
            else:
                w_se = 0.0
            gamma_se = n * w_se / (n + p + 2.0)
            t1.append((fam_name, p, n, sc.gamma, gamma_se))
            t2.append((fam_name, p, n, sc.w_pn, w_se))
            mc = matrix_constants(fam, dims, j_max, reps,
                                  _stream(seed, _DOMAIN_CONSTANTS, fi, di, 1))
            t3.append((fam_name, p, n, mc.beta.beta2, mc.beta.beta2_stderr, mc.beta.argmax_j))
            if mc.gamma_xi is not None:
                t4.append(("gamma_xi", fam_name, p, n, mc.gamma_xi, mc.gamma_xi_stderr))
                t5.append(("w_xi", fam_name, p, n, mc.w_xi, mc.w_xi_stderr))
            if mc.gamma_eta is not None:
                t4.append(("gamma_eta", fam_name, p, n, mc.gamma_eta, mc.gamma_eta_stderr))
                t5.append(("w_eta", fam_name, p, n, mc.w_eta, mc.w_eta_stderr))
            for order, per in ((1, mc.beta.per_j_beta1), (2, mc.beta.per_j_beta2)):
                for j, value, se in per:
                    tj.append((fam_name, p, n, order, j, value, se))
    return {
        "table1_gamma": CsvTable("table1_gamma", ("family", "p", "n", "gamma", "stderr"), t1),
        "table2_w": CsvTable("table2_w", ("family", "p", "n", "w_pn", "stderr"), t2),
        "table3_beta2": CsvTable("table3_beta2",
                                 ("family", "p", "n", "beta2", "stderr", "argmax_j"), t3),
        "table4_gamma_xi_eta": CsvTable("table4_gamma_xi_eta",
                                        ("quantity", "family", "p", "n", "value", "stderr"), t4),
        "table5_w_xi_eta": CsvTable("table5_w_xi_eta",
                                    ("quantity", "family", "p", "n", "value", "stderr"), t5),
        "beta_per_j": CsvTable("beta_per_j",
                               ("family", "p", "n", "order", "j", "value", "stderr"), tj),
    }


def write_tables(tables: dict, out_dir: str, metadata: dict | None = None) -> list:
    """Write each table as <name>.csv under out_dir, plus metadata.json."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, table in tables.items():
        path = os.path.join(out_dir, f"{name}.csv")
        table.write(path)
        written.append(path)
    if metadata is not None:
        meta_path = os.path.join(out_dir, "metadata.json")
        with open(meta_path, "w") as fh:
            json.dump(metadata, fh, indent=2, sort_keys=True)
        written.append(meta_path)
    return written


_PLOT_SCRIPT = '''"""Plot the CSV outputs sitting next to this script.

Usage: python plot_curves.py [directory]
Risk curves are grouped by (family, kind), coverage curves by variant.
"""
import csv
import glob
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def main():
    base = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
    for path in glob.glob(os.path.join(base, "*.csv")):
        rows = load(path)
        if not rows:
            continue
        name = os.path.splitext(os.path.basename(path))[0]
        fields = rows[0].keys()
        fig, ax = plt.subplots()
        if {"lam", "kind", "risk"} <= set(fields):
            series = sorted({(r["family"], r["kind"]) for r in rows})
            for fam, kind in series:
                pts = [(float(r["lam"]), float(r["risk"])) for r in rows
                       if r["family"] == fam and r["kind"] == kind]
                pts.sort()
                ax.plot([a for a, _ in pts], [b for _, b in pts], label=f"{fam}/{kind}")
            ax.set_xlabel("noncentrality")
            ax.set_ylabel("estimated risk")
        elif {"lam", "variant", "coverage"} <= set(fields):
            for variant in sorted({r["variant"] for r in rows}):
                pts = sorted((float(r["lam"]), float(r["coverage"])) for r in rows
                             if r["variant"] == variant)
                ax.plot([a for a, _ in pts], [b for _, b in pts], label=variant)
            ax.axhline(0.95, color="gray", linestyle=":")
            ax.set_xlabel("noncentrality")
            ax.set_ylabel("coverage")
        else:
            plt.close(fig)
            continue
        ax.legend(fontsize=8)
        ax.set_title(name)
        fig.savefig(os.path.join(base, name + ".png"), dpi=150)
        plt.close(fig)
        print("plotted", name)


if __name__ == "__main__":
    main()
'''


def write_plot_script(out_dir: str) -> str:
    """Drop a self-contained matplotlib script that plots the CSVs."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "plot_curves.py")
    with open(path, "w") as fh:
        fh.write(_PLOT_SCRIPT)
    return path
