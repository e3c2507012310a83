"""Command-line front end: estimation, constants tables, experiment runs.

Subcommands: estimate, constants, risk-curve, coverage, canonicalize.
JSON outputs carry a schema version and echo every numeric flag; CSV runs
drop a metadata.json next to the tables. Seeds are mandatory wherever
randomness is involved, so every run is reproducible by construction.
Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .confidence import ConfidenceSpec, ConfidenceVariant, build_confidence_set
from .distributions import RngStream
from .experiments import (ExperimentConfig, reproduce_tables, run_coverage_curve,
                          run_matrix_risk_curve, run_mse_risk_curve, write_plot_script,
                          write_tables)
from .matrix_improved import MatrixEstimatorKind, estimate_mse_matrix, matrix_constants
from .mse_improved import MseEstimatorKind, estimate_mse, shrinkage_constants
from .shrinkage import (Observation, ProblemDims, apply_estimator, canonicalize_regression,
                        family_from_name)

_MSE_KINDS = {k.value: k for k in MseEstimatorKind}
_MATRIX_KINDS = {k.value: k for k in MatrixEstimatorKind}
_VARIANTS = {v.value: v for v in ConfidenceVariant}
_VARIANTS["c1star"] = ConfidenceVariant.C1_STAR
_VARIANTS["c2star"] = ConfidenceVariant.C2_STAR


class UsageError(Exception):
    """Bad flags or inputs; maps to exit code 2."""


def _read_column(path: str) -> np.ndarray:
    """Single-column CSV, one number per line."""
    try:
        values = [float(line.split(",")[0]) for line in open(path) if line.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path} is not a single-column numeric CSV: {exc}") from exc
    if not values:
        raise UsageError(f"{path} is empty")
    return np.array(values)


def _read_matrix(path: str) -> np.ndarray:
    try:
        rows = [[float(v) for v in line.split(",")] for line in open(path) if line.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path} is not a numeric CSV matrix: {exc}") from exc
    return np.array(rows)


def _dims_or_usage(p: int, n: int) -> ProblemDims:
    try:
        return ProblemDims(p, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _parse_dims_list(text: str) -> list:
    out = []
    for part in text.split(","):
        try:
            p_str, n_str = part.lower().split("x")
            out.append(_dims_or_usage(int(p_str), int(n_str)))
        except (ValueError, UsageError) as exc:
            if isinstance(exc, UsageError):
                raise
            raise UsageError(f"bad dims entry {part!r}; expected like 5x5") from exc
    return out


def _parse_lambdas(text: str) -> list:
    """Either a comma list or start:stop:step (inclusive stop)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError("lambda range must look like start:stop:step")
        start, stop, step = (float(v) for v in parts)
        if step <= 0:
            raise UsageError("lambda step must be positive")
        out = list(np.arange(start, stop + 0.5 * step, step))
        return out
    return [float(v) for v in text.split(",")]


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("STEIN_PRECISION_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"STEIN_PRECISION_THREADS must be an integer, got {env!r}") from None
    return 1


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_estimate(args) -> int:
    dims = _dims_or_usage(args.p, args.n)
    x = _read_column(args.x)
    if x.shape != (dims.p,):
        raise UsageError(f"data vector has length {x.shape[0]}, expected p={dims.p}")
    if not args.s > 0:
        raise UsageError("--s must be positive")
    fam = family_from_name(args.family, dims)
    obs = Observation(x, args.s)
    mse_kind = _MSE_KINDS[args.mse]
    matrix_kind = _MATRIX_KINDS[args.matrix]

    needs_sc = mse_kind in (MseEstimatorKind.PSI1, MseEstimatorKind.PSI2,
                            MseEstimatorKind.PSI1_TR, MseEstimatorKind.PSI2_TR)
    needs_mc = matrix_kind not in (MatrixEstimatorKind.UMVUE, MatrixEstimatorKind.XI0_ETA0)
    variant = None
    if args.confidence:
        variant = _VARIANTS.get(args.confidence.lower())
        if variant is None:
            raise UsageError(f"unknown confidence variant {args.confidence!r}")
        if variant not in (ConfidenceVariant.C0, ConfidenceVariant.C3):
            needs_mc = True
    stochastic = (needs_sc and fam.kind.value != "james-stein") or needs_mc
    if stochastic and args.seed is None:
        raise UsageError("--seed is required when Monte Carlo constants are needed")
    rng = RngStream(args.seed or 0)

    sc = shrinkage_constants(fam, dims, args.const_reps, rng.child(1)) if needs_sc else None
    mc = matrix_constants(fam, dims, args.j_max, args.const_reps, rng.child(2)) if needs_mc else None

    point = apply_estimator(obs, fam, dims)
    mse_value = estimate_mse(mse_kind, obs, fam, dims, sc)
    matrix = estimate_mse_matrix(matrix_kind, obs, fam, dims, mc)
    payload = {
        "schema": 1,
        "inputs": {
            "p": dims.p, "n": dims.n, "s": obs.s, "family": fam.label,
            "mse": mse_kind.value, "matrix": matrix_kind.value,
            "seed": args.seed, "const_reps": args.const_reps, "j_max": args.j_max,
            "x": list(map(float, x)),
        },
        "w": obs.w,
        "point_estimate": list(map(float, point)),
        "mse": {"kind": mse_kind.value, "value": mse_value},
        "mse_matrix": {
            "kind": matrix_kind.value,
            "scale": matrix.scale,
            "iso": matrix.iso,
            "axial": matrix.axial,
            "axis": list(map(float, matrix.axis)),
            "eigenvalues": list(map(float, matrix.eigenvalues())),
        },
    }
    if variant is not None:
        result = build_confidence_set(ConfidenceSpec(variant, args.level), obs, fam, dims, mc)
        payload["confidence"] = {
            "variant": variant.value,
            "level": args.level,
            "center": list(map(float, result.center)),
            "quadratic_radius": result.quadratic_radius,
            "volume": result.volume,
        }
    _emit(payload, args.out)
    return 0


def _cmd_constants(args) -> int:
    dims_list = _parse_dims_list(args.dims)
    tables = reproduce_tables(dims_list, families=args.families.split(","),
                              reps=args.reps, seed=args.seed, j_max=args.j_max)
    meta = {"dims": args.dims, "families": args.families, "reps": args.reps,
            "seed": args.seed, "j_max": args.j_max}
    if args.out:
        write_tables(tables, args.out, meta)
        write_plot_script(args.out)
        print(f"wrote {len(tables)} tables to {args.out}")
    else:
        for name, table in tables.items():
            print(f"# {name}")
            print(",".join(table.header))
            for row in table.rows:
                print(",".join(str(v) for v in row))
    return 0


def _make_config(args, dims, kinds=None, matrix_kinds=None) -> ExperimentConfig:
    kwargs = {
        "dims_list": (dims,),
        "lambda_grid": tuple(_parse_lambdas(args.lambdas)),
        "reps": args.reps,
        "seed": args.seed,
        "families": (args.family,),
        "threads": _threads(args),
        "const_reps": args.const_reps,
    }
    if kinds is not None:
        kwargs["estimator_kinds"] = kinds
    if matrix_kinds is not None:
        kwargs["matrix_kinds"] = matrix_kinds
    return ExperimentConfig(**kwargs)


def _cmd_risk_curve(args) -> int:
    dims = _dims_or_usage(args.p, args.n)
    if args.target == "mse":
        try:
            kinds = tuple(_MSE_KINDS[k] for k in args.kinds.split(","))
        except KeyError as exc:
            raise UsageError(f"unknown MSE estimator kind {exc.args[0]!r}") from exc
        cfg = _make_config(args, dims, kinds=kinds)
        table = run_mse_risk_curve(cfg, loss=args.loss)
    else:
        try:
            kinds = tuple(_MATRIX_KINDS[k] for k in args.kinds.split(","))
        except KeyError as exc:
            raise UsageError(f"unknown matrix estimator kind {exc.args[0]!r}") from exc
        cfg = _make_config(args, dims, matrix_kinds=kinds)
        loss = "matrix" if args.loss == "mse" else args.loss
        table = run_matrix_risk_curve(cfg, loss=loss)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"risk_curve_{args.target}.csv")
        table.write_csv(path)
        with open(os.path.join(args.out, "metadata.json"), "w") as fh:
            json.dump(table.metadata, fh, indent=2, sort_keys=True)
        write_plot_script(args.out)
        print(f"wrote {path}")
    else:
        csv_table = table.to_csv_table()
        print(",".join(csv_table.header))
        for row in csv_table.rows:
            print(",".join(str(v) for v in row))
    return 0


def _cmd_coverage(args) -> int:
    dims = _dims_or_usage(args.p, args.n)
    cfg = _make_config(args, dims)
    try:
        variants = tuple(ConfidenceSpec(_VARIANTS[v.strip().lower()], args.level)
                         for v in args.variants.split(","))
    except KeyError as exc:
        raise UsageError(f"unknown confidence variant {exc.args[0]!r}") from exc
    table = run_coverage_curve(cfg, variants)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "coverage_curve.csv")
        table.write_csv(path)
        with open(os.path.join(args.out, "metadata.json"), "w") as fh:
            json.dump(table.metadata, fh, indent=2, sort_keys=True)
        write_plot_script(args.out)
        print(f"wrote {path}")
    else:
        csv_table = table.to_csv_table()
        print(",".join(csv_table.header))
        for row in csv_table.rows:
            print(",".join(str(v) for v in row))
    return 0


def _cmd_canonicalize(args) -> int:
    design = _read_matrix(args.design)
    response = _read_column(args.response)
    try:
        obs, dims, basis = canonicalize_regression(design, response)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    payload = {
        "schema": 1,
        "inputs": {"design": args.design, "response": args.response,
                   "rows": int(design.shape[0]), "cols": int(design.shape[1])},
        "p": dims.p,
        "n": dims.n,
        "x": list(map(float, obs.x)),
        "s": obs.s,
        "basis": [list(map(float, row)) for row in basis],
    }
    _emit(payload, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steinmse",
        description="Shrinkage estimation with honest precision estimates and confidence sets.")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="point estimate, MSE, MSE matrix, confidence set")
    est.add_argument("--p", type=int, required=True)
    est.add_argument("--n", type=int, required=True)
    est.add_argument("--x", required=True, help="single-column CSV with the data vector")
    est.add_argument("--s", type=float, required=True, help="scale statistic")
    est.add_argument("--family", default="js-plus")
    est.add_argument("--mse", default="umvue", choices=sorted(_MSE_KINDS))
    est.add_argument("--matrix", default="umvue", choices=sorted(_MATRIX_KINDS))
    est.add_argument("--confidence", default=None, help="c0, c1, c2, c3, c1star, c2star")
    est.add_argument("--level", type=float, default=0.95)
    est.add_argument("--seed", type=int, default=None)
    est.add_argument("--const-reps", type=int, default=1_000_000)
    est.add_argument("--j-max", type=int, default=50)
    est.add_argument("--out", default=None, help="JSON output path (default: stdout)")
    est.set_defaults(func=_cmd_estimate)

    con = sub.add_parser("constants", help="regenerate the constants tables")
    con.add_argument("--dims", default="5x5,10x5,5x10,10x10")
    con.add_argument("--families", default="james-stein,positive-part")
    con.add_argument("--reps", type=int, default=1_000_000)
    con.add_argument("--seed", type=int, required=True)
    con.add_argument("--j-max", type=int, default=50)
    con.add_argument("--out", default=None, help="output directory (default: stdout)")
    con.set_defaults(func=_cmd_constants)

    risk = sub.add_parser("risk-curve", help="risk curves for the precision estimators")
    risk.add_argument("--p", type=int, required=True)
    risk.add_argument("--n", type=int, required=True)
    risk.add_argument("--family", default="js-plus")
    risk.add_argument("--target", default="mse", choices=("mse", "matrix"))
    risk.add_argument("--kinds", default="umvue,psi0,psi1-tr,psi2-tr")
    risk.add_argument("--loss", default="mse", choices=("mse", "matrix", "reduction"))
    risk.add_argument("--lambdas", default="0:30:1")
    risk.add_argument("--reps", type=int, default=100_000)
    risk.add_argument("--seed", type=int, required=True)
    risk.add_argument("--const-reps", type=int, default=1_000_000)
    risk.add_argument("--threads", type=int, default=None)
    risk.add_argument("--out", default=None, help="output directory (default: stdout)")
    risk.set_defaults(func=_cmd_risk_curve)

    cov = sub.add_parser("coverage", help="coverage and volume curves for confidence sets")
    cov.add_argument("--p", type=int, required=True)
    cov.add_argument("--n", type=int, required=True)
    cov.add_argument("--family", default="js-plus")
    cov.add_argument("--variants", default="c0,c1,c2,c3,c1star,c2star")
    cov.add_argument("--level", type=float, default=0.95)
    cov.add_argument("--lambdas", default="0:30:5")
    cov.add_argument("--reps", type=int, default=10_000)
    cov.add_argument("--seed", type=int, required=True)
    cov.add_argument("--const-reps", type=int, default=1_000_000)
    cov.add_argument("--threads", type=int, default=None)
    cov.add_argument("--out", default=None, help="output directory (default: stdout)")
    cov.set_defaults(func=_cmd_coverage)

    canon = sub.add_parser("canonicalize", help="regression to canonical (X, S) form")
    canon.add_argument("--design", required=True, help="CSV matrix, one row per observation")
    canon.add_argument("--response", required=True, help="single-column CSV")
    canon.add_argument("--out", default=None, help="JSON output path (default: stdout)")
    canon.set_defaults(func=_cmd_canonicalize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
