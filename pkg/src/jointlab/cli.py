"""Command-line front end: parameter sweeps, Monte Carlo runs, and
table/CSV emission for every nonclassicality threshold in the package.

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(LP non-convergence or characteristic-function fit failure).  All floats
are printed with 12 significant digits.  Sweep rows are computed on a
bounded thread pool; output order always follows grid order.  Column
schemas live in docs/formats.md.
"""

import argparse
import concurrent.futures
import io
import json
import os
import sys

import numpy as np

from .cv import (
    CoherentState,
    CvConfig,
    EstimationError,
    ThermalState,
    classify_cv,
    estimate_retrieved_char,
    response_coeffs,
    retrieved_char,
    sample_observed,
    save_samples,
)
from .eightport import EightPortConfig, PureQubit, click_probabilities, empirical_pipeline, sample_clicks
from .inversion import OUTCOME_ORDER
from .lp import LpError
from .qubit import (
    SQRT3,
    BlochState,
    QubitPovm,
    classify_qubit,
    povm_statistics,
    retrieve_joint,
)
from .separability import feasibility_boundary, fibonacci_grid, separability_lp

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_MAX_WORKERS = min(8, os.cpu_count() or 1)


def _fmt(value):
    """12-significant-digit rendering used for all float output."""
    return f"{value:.12g}"


def _round12(value):
    return float(_fmt(value))


def _jsonable(obj):
    if isinstance(obj, float):
        return _round12(obj)
    if isinstance(obj, np.floating):
        return _round12(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _parse_grid(text):
    """Parse a parameter grid: 'a,b,c' values or 'lo:hi:n' for linspace."""
    text = text.strip()
    if not text:
        raise ValueError("empty grid")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range grid must be lo:hi:n, got {text!r}")
        lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
        if num < 1:
            raise ValueError("range grid needs at least one point")
        return np.linspace(lo, hi, num)
    return np.array([float(v) for v in text.split(",")])


def _emit(args, text):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_to_csv(columns, rows):
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
        buf.write("\n")
    return buf.getvalue()


def _emit_table(args, columns, rows, meta):
    if args.format == "json":
        payload = dict(meta)
        payload["columns"] = list(columns)
        payload["rows"] = [_jsonable(list(row)) for row in rows]
        _emit(args, json.dumps(payload, indent=2) + "\n")
    else:
        _emit(args, _rows_to_csv(columns, rows))


def _emit_report(args, payload):
    if args.format == "csv":
        flat = {k: v for k, v in payload.items() if not isinstance(v, (dict, list))}
        _emit(args, _rows_to_csv(list(flat), [list(flat.values())]))
    else:
        _emit(args, json.dumps(_jsonable(payload), indent=2) + "\n")


def _pool_map(fn, items):
    with concurrent.futures.ThreadPoolExecutor(max_workers=_MAX_WORKERS) as pool:
        return list(pool.map(fn, items))


def cmd_qubit_scan(args):
    etas = _parse_grid(args.eta)
    svals = _parse_grid(args.s)
    if np.any(etas <= 0.0) or np.any(etas > 1.0):
        raise ValueError("eta grid must lie in (0, 1]")
    if np.any(svals < 0.0) or np.any(svals > 1.0):
        raise ValueError("|s| grid must lie in [0, 1]")
    points = [(eta, s) for eta in etas for s in svals]

    def row(point):
        eta, s = point
        state = BlochState(np.array([0.0, 0.0, s]))
        verdict = classify_qubit(state, eta)
        label = "nonclassical" if verdict.nonclassical else "classical"
        return (float(eta), float(s), verdict.min_entry, verdict.threshold_eta, label)

    rows = _pool_map(row, points)
    _emit_table(
        args,
        ("eta", "s", "min_entry", "eta_boundary", "classification"),
        rows,
        {"command": "qubit-scan"},
    )
    return EXIT_OK


def cmd_separability(args):
    eta = float(args.eta)
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    grid = fibonacci_grid(args.grid_n)
    if args.boundary:
        boundary = feasibility_boundary(eta, grid, args.tol)
        payload = {
            "command": "separability",
            "mode": "boundary",
            "eta": eta,
            "grid_n": args.grid_n,
            "tol": args.tol,
            "boundary_s": boundary,
            "sphere_bound_s": eta / (2.0 * SQRT3),
        }
        _emit_report(args, payload)
        return EXIT_OK
    if args.s is None:
        raise ValueError("--s is required unless --boundary is given")
    s = float(args.s)
    if not 0.0 <= s <= 1.0:
        raise ValueError("|s| must lie in [0, 1]")
    state = BlochState(np.array([0.0, 0.0, s]))
    p_obs = povm_statistics(state, QubitPovm(eta))
    result = separability_lp(p_obs, eta, grid, args.tol)
    weights = result.model.weights
    support = int(np.sum(weights > 1e-12))
    moments = result.model.moments()
    payload = {
        "command": "separability",
        "eta": eta,
        "s": s,
        "grid_n": args.grid_n,
        "tol": args.tol,
        "feasible": result.feasible,
        "residual": result.residual,
        "lp_iterations": result.iterations,
        "target_moments": {"mx": 0.0, "my": 0.0, "mxy": SQRT3 * s / eta},
        "model_moments": {
            "mx": moments[0],
            "my": moments[1],
            "mxy": moments[2],
        },
        "weight_summary": {
            "support_size": support,
            "max_weight": float(weights.max()),
        },
    }
    _emit_report(args, payload)
    return EXIT_OK


def cmd_eightport(args):
    if args.seed is None:
        raise ValueError("--seed is required for sampling commands")
    if args.samples < 100:
        raise ValueError("need at least 100 samples")
    psi = PureQubit(theta=args.theta, phi=args.phi)
    cfg = EightPortConfig.default()
    exact = click_probabilities(psi, cfg)
    record = sample_clicks(psi, cfg, args.samples, args.seed)
    result = empirical_pipeline(record, QubitPovm(1.0))
    exact_retrieved = retrieve_joint(psi.bloch(), 1.0)
    gap = float(np.max(np.abs(result.frequencies.values - exact.values)))
    payload = {
        "command": "eightport",
        "theta": args.theta,
        "phi": psi.phi,
        "eta": 1.0,
        "samples": args.samples,
        "seed": args.seed,
        "config": cfg.to_dict(),
        "outcome_order": [list(o) for o in OUTCOME_ORDER],
        "exact_probabilities": exact.values,
        "counts": json.loads(record.to_json()),
        "empirical_frequencies": result.frequencies.values,
        "retrieved_entries": result.entries,
        "retrieved_standard_errors": result.standard_errors,
        "exact_retrieved_entries": exact_retrieved.values,
        "max_empirical_gap": gap,
        "nonclassical": result.nonclassical,
        "significance": result.significance,
    }
    _emit_report(args, payload)
    return EXIT_OK


def cmd_cv_scan(args):
    t2s = _parse_grid(args.t2)
    thetas = _parse_grid(args.theta)
    nbars = _parse_grid(args.nbar)
    if np.any(t2s <= 0.0) or np.any(t2s >= 1.0):
        raise ValueError("t2 grid must lie strictly in (0, 1)")
    if np.any(nbars < 0.0):
        raise ValueError("nbar grid must be nonnegative")
    points = [(t2, th, nb) for t2 in t2s for th in thetas for nb in nbars]

    def row(point):
        t2, theta, nbar = point
        cfg = CvConfig.from_t2(t2, theta)
        state = ThermalState(nbar)  # nbar = 0 matches every coherent state
        verdict = classify_cv(state, cfg)
        coeffs = response_coeffs(cfg)
        return (
            float(t2),
            float(theta),
            float(nbar),
            coeffs.uu,
            coeffs.vv,
            coeffs.uv,
            verdict.min_eigenvalue,
            verdict.kind,
        )

    rows = _pool_map(row, points)
    _emit_table(
        args,
        ("t2", "theta", "nbar", "uu", "vv", "cross", "min_eigenvalue", "classification"),
        rows,
        {"command": "cv-scan"},
    )
    return EXIT_OK


def cmd_cv_estimate(args):
    if args.seed is None:
        raise ValueError("--seed is required for sampling commands")
    cfg = CvConfig.from_t2(args.t2, args.theta)
    if args.state == "coherent":
        state = CoherentState(x0=args.x0, y0=args.y0)
    else:
        state = ThermalState(nbar=args.nbar_value)
    samples = sample_observed(state, cfg, args.samples, args.seed)
    if args.samples_out:
        save_samples(args.samples_out, samples, cfg, state, args.seed)
    boot_seed = np.random.SeedSequence((args.seed, 0xB007))
    estimate = estimate_retrieved_char(
        samples, cfg, n_boot=args.bootstrap, seed=boot_seed
    )
    truth = classify_cv(state, cfg)
    true_char = retrieved_char(state, cfg)
    cross_hat = estimate.cross
    nbar = state.nbar if isinstance(state, ThermalState) else 0.0
    verdict_hat = "nonclassical" if abs(cross_hat) > 1.0 + 2.0 * nbar else "classical"
    payload = {
        "command": "cv-estimate",
        "state": state.to_dict(),
        "t2": args.t2,
        "theta": args.theta,
        "samples": args.samples,
        "seed": args.seed,
        "bootstrap": args.bootstrap,
        "config": cfg.to_dict(),
        "cross_true": truth.cross,
        "cross_hat": cross_hat,
        "cross_se": estimate.cross_se,
        "mean_hat": estimate.char.mean,
        "mean_se": estimate.mean_se,
        "quad_hat": [estimate.char.quad_uu, estimate.char.quad_vv, estimate.char.quad_uv],
        "quad_true": [true_char.quad_uu, true_char.quad_vv, true_char.quad_uv],
        "quad_se": estimate.quad_se,
        "min_ecf_modulus": estimate.min_ecf_modulus,
        "verdict_true": truth.kind,
        "verdict_hat": verdict_hat,
        "verdict_match": verdict_hat == truth.kind
        or (truth.kind == "boundary" and verdict_hat == "classical"),
    }
    _emit_report(args, payload)
    return EXIT_OK


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="jointlab",
        description="Joint-measurement statistics laboratory",
    )
    parser.add_argument(
        "--config",
        help="JSON file of flag defaults for the chosen subcommand",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--out", help="write output to this path instead of stdout")

    p = sub.add_parser("qubit-scan", help="scan retrieved negativity over eta x |s|")
    p.add_argument("--eta", required=True, help="grid: comma values or lo:hi:n")
    p.add_argument("--s", required=True, help="grid over |s|")
    add_common(p)
    p.set_defaults(fn=cmd_qubit_scan, default_format="csv")

    p = sub.add_parser("separability", help="LP feasibility of a separable model")
    p.add_argument("--eta", required=True, type=float)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=2000)
    p.add_argument("--tol", type=float, default=2e-3)
    p.add_argument(
        "--boundary",
        action="store_true",
        help="bisect |s| for the largest separable z-axis state instead",
    )
    add_common(p)
    p.set_defaults(fn=cmd_separability, default_format="json")

    p = sub.add_parser("eightport", help="simulate the four-detector experiment")
    p.add_argument("--theta", required=True, type=float)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--samples", required=True, type=int)
    p.add_argument("--seed", type=int, default=None)
    add_common(p)
    p.set_defaults(fn=cmd_eightport, default_format="json")

    p = sub.add_parser("cv-scan", help="scan the retrieved quadratic form")
    p.add_argument("--t2", required=True, help="grid over the transmission t^2")
    p.add_argument("--theta", required=True, help="grid over the LO phase")
    p.add_argument("--nbar", required=True, help="grid over the thermal mean photon number")
    add_common(p)
    p.set_defaults(fn=cmd_cv_scan, default_format="csv")

    p = sub.add_parser("cv-estimate", help="sample and re-estimate the retrieved form")
    p.add_argument("--state", choices=("coherent", "thermal"), default="coherent")
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--y0", type=float, default=0.0)
    p.add_argument("--nbar", dest="nbar_value", type=float, default=0.0)
    p.add_argument("--t2", required=True, type=float)
    p.add_argument("--theta", required=True, type=float)
    p.add_argument("--samples", required=True, type=int)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--bootstrap", type=int, default=200)
    p.add_argument("--samples-out", dest="samples_out", default=None)
    add_common(p)
    p.set_defaults(fn=cmd_cv_estimate, default_format="json")

    return parser


def _apply_config_file(parser, argv):
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        raise ValueError("--config requires a path") from None
    with open(path) as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise ValueError("config file must hold a JSON object")
    extra = []
    for key, value in config.items():
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue  # explicit flags win
        if isinstance(value, bool):
            if value:
                extra.append(flag)
        else:
            extra.extend([flag, str(value)])
    # insert defaults after the subcommand so argparse scopes them correctly
    return argv + extra


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        if args.format is None:
            args.format = args.default_format
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LpError, EstimationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
