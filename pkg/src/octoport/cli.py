"""Command-line runner: ``octoport run`` and ``octoport validate``.

Every run writes CSV tables plus ``summary.json`` (schema version "1") to the
output directory.  Both are byte-identical across re-runs of the same config;
wall-clock timings go to a separate ``timing.json``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, parse_config, serialize_config
from .convergence import AmplitudeSchedule, boundary_null_rectangles, convergence_sweep
from .eightport import (
    LARGE_MEMORY_AMPLITUDES,
    MAX_AMPLITUDES,
    DetectorConfig,
    check_feasible,
    run_direct,
    run_factorized,
)
from .errors import (
    ConfigValidationError,
    ConfigurationError,
    InfeasibleError,
    NumericalAccuracyError,
    TruncationError,
)
from .phasespace import PhaseSpaceMeasure, conjugate_state, lemma2_rhs
from .sets import Rectangle

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_VALIDATION, EXIT_TOLERANCE, EXIT_INFEASIBLE = 0, 2, 3, 4

RECT_COLUMNS = ["rect_id", "qmin", "qmax", "pmin", "pmax"]
CONVERGENCE_COLUMNS = ["r", "rect_id", "qmin", "qmax", "pmin", "pmax", "p_finite", "p_limit", "gap"]


class ToleranceFailure(Exception):
    pass


def _grid_rectangles(cfg: ExperimentConfig, steps):
    return boundary_null_rectangles(steps, cfg.window, cfg.shape)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _rect_cells(i, r: Rectangle):
    return [i, r.qmin, r.qmax, r.pmin, r.pmax]


def _detector(cfg: ExperimentConfig, max_amplitudes: int) -> DetectorConfig:
    return DetectorConfig(
        cfg.T, cfg.S, cfg.z, cfg.phi, cfg.cutoff_dict() or None,
        max_branches=cfg.max_branches, max_amplitudes=max_amplitudes,
    )


def _check_probabilities(values, what: str):
    values = np.asarray(values, dtype=float)
    if values.size and (values.min() < -1e-12 or values.max() > 1 + 1e-12):
        raise ToleranceFailure(f"{what}: probability outside [0, 1]")


def _g_statistics(cfg, out, opts):
    stats = (run_direct if cfg.path == "direct" else run_factorized)(_detector(cfg, opts["max_amplitudes"]), opts["threads"])
    rects = _grid_rectangles(cfg, stats.step)
    probs = stats.rectangle_probs(rects)
    _check_probabilities(probs, "rectangle probabilities")
    kk, ll = np.meshgrid(stats.k, stats.l, indexing="ij")
    joint = [
        (k, l, k * stats.step, l * stats.step, w)
        for k, l, w in zip(kk.ravel(), ll.ravel(), stats.weights.ravel())
        if w > 0
    ]
    _write_csv(out / "joint.csv", ["k", "l", "q", "p", "probability"], joint)
    _write_csv(out / "rectangles.csv", RECT_COLUMNS + ["probability"], [_rect_cells(i, r) + [p] for i, (r, p) in enumerate(zip(rects, probs))])
    mass = stats.total
    results = {"path": stats.path, "total_mass": mass, "grid_mass": float(probs.sum()), "lattice_step": stats.step, "mean": list(stats.mean())}
    return results, {k: float(v) for k, v in stats.budgets.items()}, mass >= 1 - 1e-4


def _lemma1_check(cfg, out, opts):
    det = _detector(cfg, opts["max_amplitudes"])
    a = run_direct(det, opts["threads"])
    b = run_factorized(det, opts["threads"])
    rects = _grid_rectangles(cfg, a.step)
    pa, pb = a.rectangle_probs(rects), b.rectangle_probs(rects)
    diff = np.abs(pa - pb)
    _write_csv(
        out / "rectangles.csv",
        RECT_COLUMNS + ["p_direct", "p_factorized", "abs_diff"],
        [_rect_cells(i, r) + [x, y, d] for i, (r, x, y, d) in enumerate(zip(rects, pa, pb, diff))],
    )
    md = float(diff.max())
    results = {"max_abs_diff": md, "tolerance": cfg.tolerance, "pass": md <= cfg.tolerance}
    budgets = {f"direct.{k}": float(v) for k, v in a.budgets.items()}
    budgets.update({f"factorized.{k}": float(v) for k, v in b.budgets.items()})
    return results, budgets, md <= cfg.tolerance


def _lemma2_check(cfg, out, opts):
    # no outcome lattice here; keep edges where the user put them
    lo, hi = cfg.window
    nq, np_ = cfg.shape
    eq, ep = np.linspace(lo, hi, nq + 1), np.linspace(lo, hi, np_ + 1)
    rects = [Rectangle(eq[i], eq[i + 1], ep[j], ep[j + 1]) for i in range(nq) for j in range(np_)]
    meas = PhaseSpaceMeasure(cfg.T.density(), conjugate_state(cfg.S.density()))
    rows, worst = [], 0.0
    for i, r in enumerate(rects):
        lhs = lemma2_rhs(cfg.T, cfg.S, r.q, r.p)
        rhs = meas.rectangle_probability(r)
        worst = max(worst, abs(lhs - rhs))
        rows.append(_rect_cells(i, r) + [lhs, rhs, abs(lhs - rhs)])
    _write_csv(out / "rectangles.csv", RECT_COLUMNS + ["p_overlap", "p_phasespace", "abs_diff"], rows)
    _check_probabilities([row[5] for row in rows] + [row[6] for row in rows], "lemma2")
    results = {"max_abs_diff": worst, "tolerance": cfg.tolerance, "pass": worst <= cfg.tolerance}
    return results, {"T_deficit": cfg.T.density().deficit, "S_deficit": cfg.S.density().deficit, "quadrature_rtol": meas.rtol}, worst <= cfg.tolerance


def _convergence(cfg, out, opts):
    schedule = AmplitudeSchedule(cfg.radii, cfg.phi)
    if cfg.path == "direct":
        for r in schedule.radii:
            check_feasible(DetectorConfig(cfg.T, cfg.S, r, cfg.phi, max_amplitudes=opts["max_amplitudes"]))
    rects = _grid_rectangles(cfg, schedule.steps)
    rep = convergence_sweep(
        cfg.T, cfg.S, schedule, rects, path=cfg.path, threshold=cfg.tolerance,
        max_amplitudes=opts["max_amplitudes"], threads=opts["threads"],
    )
    if rep.skipped:
        raise InfeasibleError("; ".join(f"r={r}: {msg}" for r, msg in rep.skipped.items()))
    _write_csv(
        out / "convergence.csv",
        CONVERGENCE_COLUMNS,
        [[row.r, row.rect_id, *row.rect.as_tuple(), row.p_finite, row.p_limit, row.gap] for row in rep.rows],
    )
    _check_probabilities([row.p_finite for row in rep.rows] + [row.p_limit for row in rep.rows], "convergence")
    sup = rep.sup_gaps()
    ok = rep.passed()
    results = {
        "sup_gap": {_fmt(r): g for r, g in sup.items()},
        "monotone": rep.monotone(),
        "threshold": cfg.tolerance,
        "pass": ok,
        "note": rep.note,
    }
    return results, {f"leak_r={_fmt(r)}": float(v) for r, v in rep.leaks.items()}, ok


def _husimi_map(cfg, out, opts):
    meas = PhaseSpaceMeasure(cfg.T.density(), cfg.S.density())
    lo, hi = cfg.window
    qs = np.linspace(lo, hi, cfg.shape[0])
    ps = np.linspace(lo, hi, cfg.shape[1])
    Q, P = np.meshgrid(qs, ps, indexing="ij")
    dens = meas.density(Q, P)
    _write_csv(out / "husimi.csv", ["q", "p", "density"], zip(Q.ravel(), P.ravel(), dens.ravel()))
    i, j = np.unravel_index(np.argmax(dens), dens.shape)
    res = {"peak": [float(qs[i]), float(ps[j])], "peak_density": float(dens[i, j]), "grid_resolution": [float(qs[1] - qs[0]) if qs.size > 1 else 0.0, float(ps[1] - ps[0]) if ps.size > 1 else 0.0]}
    return res, {"T_deficit": cfg.T.density().deficit, "S_deficit": cfg.S.density().deficit}, True


RUNNERS = {
    "g_statistics": _g_statistics,
    "lemma1_check": _lemma1_check,
    "lemma2_check": _lemma2_check,
    "convergence_sweep": _convergence,
    "husimi_map": _husimi_map,
}


def run_experiment(cfg: ExperimentConfig, out_dir, threads: int | None = None, large_memory: bool = False) -> dict:
    """Execute ``cfg`` and write its result files; returns the summary record.

    Raises ``ToleranceFailure`` after writing outputs when a check fails.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    opts = {"threads": threads, "max_amplitudes": LARGE_MEMORY_AMPLITUDES if large_memory else MAX_AMPLITUDES}
    start = time.perf_counter()
    results, budgets, ok = RUNNERS[cfg.kind](cfg, out, opts)
    elapsed = time.perf_counter() - start
    summary = {
        "schema_version": SCHEMA_VERSION,
        "kind": cfg.kind,
        "status": "pass" if ok else "fail",
        "config": cfg.to_dict(),
        "config_text": serialize_config(cfg),
        "results": results,
        "budgets": budgets,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    (out / "timing.json").write_text(json.dumps({"wall_seconds": elapsed, "threads": threads or 1}, indent=2) + "\n")
    if not ok:
        raise ToleranceFailure(f"{cfg.kind} failed its tolerance check")
    return summary


def _load(path: str) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="octoport", description="Eight-port homodyne detection laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default="results")
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--large-memory", action="store_true")
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    args = parser.parse_args(argv)

    try:
        cfg = _load(args.config)
    except ConfigValidationError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.command == "validate":
        print(serialize_config(cfg), end="")
        return EXIT_OK

    try:
        summary = run_experiment(cfg, args.out, args.threads, args.large_memory)
    except ToleranceFailure as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except (NumericalAccuracyError, TruncationError) as exc:
        print(f"{type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except InfeasibleError as exc:
        print(f"{type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConfigurationError as exc:
        print(f"{type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(json.dumps(summary["results"], sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
