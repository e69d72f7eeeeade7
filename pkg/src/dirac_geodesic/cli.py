"""Command-line runner: ``dirac-geodesic {validate,flow,sweep,spectrum,report} --config run.yaml``.

Exit codes: 0 success, 2 configuration error (nothing written), 3 blowup,
4 no stationary point reached, 5 validation tolerance exceeded.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import circle_spectral as cs
from . import io
from .circle_spectral import CircleGrid, SpinStructure
from .config import SCENARIOS, RunConfig, load_config
from .errors import BlowupError, ConfigurationError, DiracGeodesicError
from .fixtures import band_limited_field, build_initial
from .flow import (
    FlowParams,
    FlowState,
    SnapshotCollector,
    detect_stationary,
    epsilon_sweep,
    evolve,
    speed_spread,
    subconvergence_extract,
)
from .manifolds import catalog
from .oracle import dense_operator_matrix

log = logging.getLogger("dirac_geodesic")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_NOT_CONVERGED = 4
EXIT_VALIDATION = 5


@dataclass
class RunSummary:
    config: dict
    status: str = "ok"
    final_t: float = 0.0
    converged: bool = False
    regularized_residual: float = float("nan")
    unregularized_residual: float = float("nan")
    dirac_norm: float = float("nan")
    speed_spread: float = float("nan")
    wall_time: float = 0.0
    energy_trace: str = ""
    snapshots: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def write(self, path) -> Path:
        path = Path(path)
        with path.open("w") as fh:
            yaml.safe_dump(_plain(asdict(self)), fh, sort_keys=False)
        return path


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class _Prepared:
    """Everything a scenario needs, built before any file is written."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.manifold = catalog(cfg.manifold, **cfg.manifold_params)
        self.grid = CircleGrid(cfg.n)
        self.params = None
        self.state0 = None
        if cfg.scenario in ("flow", "sweep", "spectrum"):
            spin = SpinStructure.parse(cfg.spin if cfg.spin != "both" else "sigma1")
            self.state0 = build_initial(self.manifold, self.grid, spin, cfg.initial, cfg.seed)
        if cfg.scenario in ("flow", "sweep"):
            self.params = FlowParams(
                eps=cfg.eps_list[0],
                dt=cfg.dt,
                t_end=cfg.t_end,
                rescaled=cfg.rescaled,
                integrator=cfg.integrator,
                stationary_tol=cfg.stationary_tol,
                monitor_stride=cfg.monitor_stride,
                stop_on_stationary=cfg.stop_on_stationary,
            )
        if cfg.scenario == "validate" and cfg.manifold != "unit_circle":
            raise ConfigurationError("validate compares against exact solutions on unit_circle only")
        if cfg.scenario == "sweep":
            eps = cfg.eps_list
            if any(b >= a for a, b in zip(eps, eps[1:])):
                raise ConfigurationError("sweep eps values must be strictly descending")
        if cfg.scenario == "report" and not cfg.inputs:
            raise ConfigurationError("report needs a list of diagnostics files in 'inputs'")


# -- scenarios --------------------------------------------------------------------


def _write_snapshots(out: Path, collector: SnapshotCollector, times, limit: int, prefix="snapshot"):
    paths = []
    for i, st in enumerate(collector.at(times[-limit:])):
        p = out / f"{prefix}_{i:03d}.csv"
        io.write_snapshot(p, st)
        paths.append(str(p))
    return paths


def _fill_limit(summary: RunSummary, state: FlowState, eps: float, tol: float):
    rep = detect_stationary(state, eps, tol)
    summary.final_t = state.t
    summary.converged = rep.stationary
    summary.regularized_residual = rep.regularized_l2
    summary.unregularized_residual = rep.unregularized_l2
    summary.dirac_norm = rep.dirac_l2
    summary.speed_spread = speed_spread(state)
    return rep


def run_flow(prep: _Prepared, out: Path, summary: RunSummary) -> int:
    cfg = prep.cfg
    collector = SnapshotCollector()
    diag = out / "diagnostics.csv"
    summary.energy_trace = str(diag)
    try:
        final, traj = evolve(prep.state0, prep.params, observers=[collector])
    except BlowupError as exc:
        io.write_diagnostics(diag, exc.trajectory or [])
        summary.status = f"blowup: {exc}"
        if exc.last_state is not None:
            p = out / "last_valid.csv"
            io.write_snapshot(p, exc.last_state)
            summary.snapshots = [str(p)]
        return EXIT_BLOWUP
    io.write_diagnostics(diag, traj)
    times = subconvergence_extract(traj)
    summary.snapshots = _write_snapshots(out, collector, times, cfg.max_snapshots)
    _fill_limit(summary, final, prep.params.eps, cfg.stationary_tol)
    drift = max(
        float(np.max(np.abs(final.curve.points - prep.state0.curve.points))),
        float(np.max(np.abs(final.spinor.values - prep.state0.spinor.values))),
    )
    summary.details = {"stop_reason": traj.stop_reason, "drift_sup": drift, "subsequence_length": len(times)}
    if cfg.require_convergence and not summary.converged:
        summary.status = "not converged"
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def run_sweep(prep: _Prepared, out: Path, summary: RunSummary) -> int:
    cfg = prep.cfg
    entries = epsilon_sweep(prep.state0, cfg.eps_list, prep.params)
    rows = []
    files = {}
    for i, e in enumerate(entries):
        diag = out / f"diagnostics_eps{i:02d}.csv"
        io.write_diagnostics(diag, e.trajectory or [])
        files[e.eps] = diag
        snap = out / f"limit_eps{i:02d}.csv"
        io.write_snapshot(snap, e.state)
        summary.snapshots.append(str(snap))
        rows.append(
            {
                "eps": e.eps,
                "exploratory": e.exploratory,
                "converged": e.converged,
                "final_t": e.final_t,
                "grad_norm": e.grad_norm,
                "regularized_l2": e.regularized_l2,
                "unregularized_l2": e.unregularized_l2,
                "dirac_l2": e.dirac_l2,
                "speed_spread": e.speed_spread,
                "diagnostics": str(diag),
                "error": e.error,
            }
        )
    io.emit_plot_data(files, out / "plot_data.csv")
    summary.energy_trace = str(out / "plot_data.csv")
    last = entries[-1]
    _fill_limit(summary, last.state, last.eps, cfg.stationary_tol)
    summary.details = {"entries": rows}
    if any(e.error for e in entries if not e.exploratory):
        summary.status = "blowup"
        return EXIT_BLOWUP
    if cfg.require_convergence and not all(e.converged for e in entries if not e.exploratory):
        summary.status = "not converged"
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _unit_circle_initial(grid: CircleGrid, spin: SpinStructure, seed: int):
    rng = np.random.default_rng(seed)
    s = grid.nodes
    theta_per = 0.3 * band_limited_field(grid.n, 1, "sigma1", rng, kmax=4)[:, 0]
    f0 = 0.3 * band_limited_field(grid.n, 1, spin, rng, kmax=4, complex_=True)[:, 0]
    theta = s + theta_per
    u = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    tangent = np.stack([-np.sin(theta), np.cos(theta)], axis=1)
    return theta_per, f0, u, f0[:, None] * tangent


def unit_circle_errors(state: FlowState, theta_per0, f0, eps: float, t: float, rescaled: bool):
    """Sup errors of the lifted angle and spinor coefficient against the exact flat solutions."""
    s = state.curve.grid.nodes
    u = state.curve.points
    angle = np.arctan2(u[:, 1], u[:, 0])
    exact_angle = s + cs.inverse_transform(cs.heat_exact(cs.forward_transform(theta_per0, "sigma1"), t)).real
    curve_err = float(np.max(np.abs(np.angle(np.exp(1j * (angle - exact_angle))))))
    tangent = np.stack([-u[:, 1], u[:, 0]], axis=1)
    coeff = np.sum(state.spinor.values * tangent, axis=1)
    spin = state.spin
    # the rescaled spinor at time t is the unrescaled one at time t / eps
    t_spinor = t / eps if rescaled else t
    exact = cs.inverse_transform(cs.flat_spinor_exact(cs.forward_transform(f0, spin), eps, t_spinor))
    return curve_err, float(np.max(np.abs(coeff - exact)))


def run_validate(prep: _Prepared, out: Path, summary: RunSummary) -> int:
    cfg = prep.cfg
    spins = list(SpinStructure) if cfg.spin == "both" else [SpinStructure.parse(cfg.spin)]
    seed = 0 if cfg.seed is None else cfg.seed
    rows = []
    ok = True
    for spin in spins:
        theta_per, f0, u, psi = _unit_circle_initial(prep.grid, spin, seed)
        state0 = FlowState.from_arrays(0.0, prep.grid, prep.manifold, u, psi, spin)
        for eps in cfg.eps_list:
            params = FlowParams(
                eps=eps,
                dt=cfg.dt,
                t_end=cfg.t_end,
                rescaled=cfg.rescaled,
                integrator=cfg.integrator,
                monitor_stride=cfg.monitor_stride,
                stop_on_stationary=False,
            )
            final, traj = evolve(state0, params)
            diag = out / f"diagnostics_{spin.value}_eps{eps:g}.csv"
            io.write_diagnostics(diag, traj)
            ce, se = unit_circle_errors(final, theta_per, f0, eps, final.t, cfg.rescaled)
            passed = ce <= cfg.validate_tol and se <= cfg.validate_tol
            ok &= passed
            rows.append({"spin": spin.value, "eps": eps, "curve_error": ce, "spinor_error": se, "passed": passed})
            log.info("validate %s eps=%g curve=%.3e spinor=%.3e %s", spin.value, eps, ce, se, "PASS" if passed else "FAIL")
    with (out / "validation.csv").open("w") as fh:
        fh.write("spin,eps,curve_error,spinor_error,passed\n")
        for r in rows:
            fh.write(f"{r['spin']},{io.fmt(r['eps'])},{io.fmt(r['curve_error'])},{io.fmt(r['spinor_error'])},{int(r['passed'])}\n")
    summary.details = {"runs": rows}
    summary.converged = ok
    summary.final_t = cfg.t_end
    summary.energy_trace = str(out / "validation.csv")
    if not ok:
        summary.status = "validation failed"
        return EXIT_VALIDATION
    return EXIT_OK


def run_spectrum(prep: _Prepared, out: Path, summary: RunSummary) -> int:
    cfg = prep.cfg
    rep = dense_operator_matrix(cfg.operator, prep.state0.curve, cfg.eps_list[0], prep.state0.spin, cfg.band_limited)
    path = io.write_spectrum(out / "spectrum.csv", rep)
    summary.energy_trace = str(path)
    summary.details = {
        "operator": cfg.operator,
        "size": int(rep.matrix.shape[0]),
        "symmetry_defect": rep.symmetry_defect,
        "kernel_dimension": rep.kernel_dimension(),
    }
    return EXIT_OK


def run_report(prep: _Prepared, out: Path, summary: RunSummary) -> int:
    path = io.emit_plot_data(list(prep.cfg.inputs), out / "plot_data.csv")
    summary.energy_trace = str(path)
    return EXIT_OK


RUNNERS = {
    "validate": run_validate,
    "flow": run_flow,
    "sweep": run_sweep,
    "spectrum": run_spectrum,
    "report": run_report,
}


def run(cfg: RunConfig) -> tuple[RunSummary | None, int]:
    """Execute a validated configuration; returns ``(summary, exit_code)``."""
    try:
        prep = _Prepared(cfg)
    except (DiracGeodesicError, ValueError, TypeError, KeyError) as exc:
        log.error("configuration error: %s", exc)
        return None, EXIT_CONFIG
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    summary = RunSummary(config=cfg.as_dict())
    t0 = time.perf_counter()
    try:
        code = RUNNERS[cfg.scenario](prep, out, summary)
    except BlowupError as exc:
        summary.status = f"blowup: {exc}"
        code = EXIT_BLOWUP
    summary.wall_time = time.perf_counter() - t0
    summary.details["exit_code"] = code
    summary.write(out / "summary.yaml")
    return summary, code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dirac-geodesic", description="Regularized Dirac-geodesic flow on the circle")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SCENARIOS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="YAML run configuration")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--seed", type=int, help="seed override for random initial data")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
        overrides = {"scenario": args.command}
        if args.out:
            overrides["output"] = args.out
        if args.seed is not None:
            overrides["seed"] = args.seed
        cfg = replace(cfg, **overrides)
    except (DiracGeodesicError, ValueError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary, code = run(cfg)
    if summary is not None:
        print(f"{cfg.scenario}: status={summary.status} converged={summary.converged} exit={code}")
    else:
        print("configuration error; no outputs written", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
