"""Scenario runner: build models from configs, integrate, emit artifacts.

Every run writes a JSON manifest echoing the fully-defaulted config,
the backend, wall time, an invariant summary (trace drift, minimum
eigenvalue, truncation check) and SHA-256 digests of the output files.
CSV files are byte-identical across reruns of the same config: floats
are printed with 17 significant digits and '\\n' line endings.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from pathlib import Path

import numpy as np

from . import svg
from ._backend import backend_name
from .analysis import delta_b, peak_find, reduce_to_mode, wigner
from .config import ScenarioConfig
from .errors import ConfigError
from .limits import compare_prelimit_limit, oscillation_count
from .master import (
    DensityMatrix,
    IntegratorConfig,
    Trajectory,
    integrate,
    steady_state,
    truncation_check,
)
from .slh import (
    build_chi2,
    build_chi2_dispersive,
    build_kerr,
    build_qubit_limit,
    build_tpa,
)
from .version import VERSION

TRACE_DRIFT_BOUND = 1e-8  # per unit simulated time
MIN_EIG_BOUND = -1e-7
TRUNCATION_BOUND = 1e-6


def build_model(family: str, params: dict, dims):
    if family == "kerr":
        return build_kerr(params["delta"], params["chi"], params["kappa_a1"],
                          params["kappa_a2"], dims[0], params["alpha"])
    if family == "chi2":
        return build_chi2(params["delta"], params["g"], params["kappa_a1"],
                          params["kappa_a2"], params["kappa_b"], params["alpha"], dims)
    if family == "chi2-dispersive":
        return build_chi2_dispersive(params["delta"], params["g"], params["delta_b"],
                                     params["kappa_a1"], params["kappa_a2"],
                                     params["kappa_b"], params["alpha"], dims)
    if family == "tpa":
        return build_tpa(params["delta"], params["kappa_a1"], params["kappa_a2"],
                         params["gamma"], params["alpha"], dims[0])
    if family == "qubit-limit":
        return build_qubit_limit(params["delta"], params["kappa_a1"],
                                 params["kappa_a2"], params["alpha"])
    raise ConfigError(f"unknown model family {family!r}")


def limit_counterpart(params: dict):
    """Driven two-level model sharing the drive and decay parameters."""
    return build_qubit_limit(params["delta"], params["kappa_a1"],
                             params["kappa_a2"], params["alpha"])


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_csv(path: Path, header, columns) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _column_label(name: str, traj: Trajectory) -> str:
    if name == "pop0":
        return traj.pop_labels[0]
    if name == "pop1":
        return traj.pop_labels[1]
    return name


class _InvariantTracker:
    def __init__(self):
        self.max_trace_drift_rate = 0.0
        self.min_eigenvalue = 0.0
        self.max_truncation = 0.0

    def absorb(self, traj: Trajectory):
        self.max_trace_drift_rate = max(
            self.max_trace_drift_rate, traj.info["trace_drift_rate"]
        )
        self.min_eigenvalue = min(self.min_eigenvalue, traj.info["min_eigenvalue"])
        self.max_truncation = max(self.max_truncation, truncation_check(traj))

    def summary(self) -> dict:
        ok = (
            self.max_trace_drift_rate <= TRACE_DRIFT_BOUND
            and self.min_eigenvalue >= MIN_EIG_BOUND
            and self.max_truncation <= TRUNCATION_BOUND
        )
        return {
            "max_trace_drift_per_unit_time": self.max_trace_drift_rate,
            "min_eigenvalue": self.min_eigenvalue,
            "max_truncation_population": self.max_truncation,
            "bounds": {
                "max_trace_drift_per_unit_time": TRACE_DRIFT_BOUND,
                "min_eigenvalue": MIN_EIG_BOUND,
                "max_truncation_population": TRUNCATION_BOUND,
            },
            "ok": ok,
        }


def run(cfg: ScenarioConfig, out_dir, make_svg: bool = False) -> dict:
    """Execute a scenario; returns the manifest (also written to disk)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    tracker = _InvariantTracker()
    outputs: list[Path] = []
    results: dict = {}

    if cfg.kind in ("kerr", "chi2", "chi2-dispersive", "tpa", "qubit-limit"):
        _run_simulate(cfg, out, make_svg, tracker, outputs, results)
    elif cfg.kind == "compare":
        _run_compare(cfg, out, make_svg, tracker, outputs, results)
    elif cfg.kind == "sweep":
        _run_sweep(cfg, out, make_svg, tracker, outputs, results)
    elif cfg.kind == "wigner":
        _run_wigner(cfg, out, tracker, outputs, results)
    elif cfg.kind == "nongauss":
        _run_nongauss(cfg, out, make_svg, tracker, outputs, results)
    else:
        raise ConfigError(f"kind {cfg.kind!r} cannot be dispatched")

    invariants = tracker.summary()
    manifest = {
        "tool": "nlcavity",
        "version": VERSION,
        "backend": backend_name(),
        "kind": cfg.kind,
        "config": cfg.echo,
        "wall_time_s": time.perf_counter() - t0,
        "invariants": invariants,
        "results": results,
        "outputs": {p.name: _sha256(p) for p in sorted(outputs)},
        "status": "ok" if invariants["ok"] else "invariant-violation",
    }
    manifest_path = out / f"{cfg.basename}_manifest.json"
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest


def _traj_csv(cfg: ScenarioConfig, traj: Trajectory, path: Path):
    header = ["t"] + [_column_label(n, traj) for n in cfg.observables]
    cols = [traj.times] + [traj.series(n) for n in cfg.observables]
    write_csv(path, header, cols)


def _run_simulate(cfg, out, make_svg, tracker, outputs, results):
    model = build_model(cfg.family, cfg.params, cfg.dims)
    traj = integrate(model, DensityMatrix.vacuum(model.sig), cfg.integrator)
    tracker.absorb(traj)
    csv_path = out / f"{cfg.basename}.csv"
    _traj_csv(cfg, traj, csv_path)
    outputs.append(csv_path)
    results["n_steps"] = traj.info["n_steps"]
    results["final_n_expect"] = float(traj.series("n_expect")[-1])
    if make_svg:
        svg_path = out / f"{cfg.basename}.svg"
        series = {
            _column_label(n, traj): traj.series(n)
            for n in cfg.observables
            if n != "trace_err"
        }
        svg.line_plot(svg_path, traj.times, series, title=cfg.basename, ylabel="value")
        outputs.append(svg_path)


def run_steady(cfg: ScenarioConfig, out_dir) -> dict:
    """Steady-state variant of a model-kind scenario (CLI `steady`)."""
    if cfg.kind not in ("kerr", "chi2", "chi2-dispersive", "tpa", "qubit-limit"):
        raise ConfigError(f"steady requires a model scenario, got kind {cfg.kind!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    model = build_model(cfg.family, cfg.params, cfg.dims)
    rho = steady_state(model)
    diag = np.real(np.diag(rho.mat))
    dims = model.sig.mode_dims
    csv_path = out / f"{cfg.basename}_steady.csv"
    if len(dims) == 1:
        write_csv(csv_path, ["level", "population"],
                  [np.arange(dims[0]), diag])
    else:
        levels = np.array([(i, j) for i in range(dims[0]) for j in range(dims[1])])
        write_csv(csv_path, ["level_a", "level_b", "population"],
                  [levels[:, 0], levels[:, 1], diag])
    n_op = np.arange(dims[0], dtype=np.float64)
    marg = diag.reshape(dims).sum(axis=tuple(range(1, len(dims)))) if len(dims) > 1 else diag
    results = {
        "pop0": float(marg[0] if len(dims) == 1 else diag[0]),
        "pop1": float(diag[model.sig.index_of((1,) + (0,) * (len(dims) - 1))]),
        "n_expect": float(marg @ n_op),
    }
    manifest = {
        "tool": "nlcavity",
        "version": VERSION,
        "backend": backend_name(),
        "kind": "steady",
        "config": cfg.echo,
        "wall_time_s": time.perf_counter() - t0,
        "invariants": {"ok": True},
        "results": results,
        "outputs": {csv_path.name: _sha256(csv_path)},
        "status": "ok",
    }
    with open(out / f"{cfg.basename}_steady_manifest.json", "w", encoding="utf-8",
              newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest


def _run_compare(cfg, out, make_svg, tracker, outputs, results):
    pre = build_model(cfg.family, cfg.params, cfg.dims)
    limit = limit_counterpart(cfg.params)
    res = compare_prelimit_limit(pre, limit, cfg.observable, cfg.integrator)
    tracker.absorb(res.pre_trajectory)
    tracker.absorb(res.limit_trajectory)
    csv_path = out / f"{cfg.basename}.csv"
    write_csv(
        csv_path,
        ["t", f"{cfg.observable}_prelimit", f"{cfg.observable}_limit", "abs_diff"],
        [res.times, res.pre_series, res.limit_series,
         np.abs(res.pre_series - res.limit_series)],
    )
    outputs.append(csv_path)
    pre_csv = out / f"{cfg.basename}_prelimit.csv"
    _traj_csv(cfg, res.pre_trajectory, pre_csv)
    outputs.append(pre_csv)
    results["deviation"] = res.deviation
    results["max_leakage_prelimit"] = float(res.pre_trajectory.series("leakage").max())
    if make_svg:
        svg_path = out / f"{cfg.basename}.svg"
        svg.line_plot(
            svg_path,
            res.times,
            {f"{cfg.observable} (pre-limit)": res.pre_series,
             f"{cfg.observable} (limit)": res.limit_series},
            title=cfg.basename,
            ylabel=cfg.observable,
        )
        outputs.append(svg_path)


def _run_sweep(cfg, out, make_svg, tracker, outputs, results):
    limit = limit_counterpart(cfg.params)
    limit_traj = integrate(limit, DensityMatrix.vacuum(limit.sig), cfg.integrator)
    tracker.absorb(limit_traj)
    rows = {"value": [], "deviation": [], "max_leakage": [], "oscillations": [],
            "steady_n": []}
    per_value = {}
    for i, value in enumerate(cfg.values):
        params = dict(cfg.params)
        params[cfg.parameter] = value
        dims = cfg.dims_per_value[i] if cfg.dims_per_value else cfg.dims
        model = build_model(cfg.family, params, dims)
        traj = integrate(model, DensityMatrix.vacuum(model.sig), cfg.integrator)
        tracker.absorb(traj)
        tag = f"{cfg.parameter}{value:g}"
        csv_path = out / f"{cfg.basename}_{tag}.csv"
        _traj_csv(cfg, traj, csv_path)
        outputs.append(csv_path)
        deviation = float(np.abs(
            traj.series(cfg.observable) - limit_traj.series(cfg.observable)
        ).max())
        n_series = traj.series("n_expect")
        osc = oscillation_count(traj.times, n_series)
        if cfg.include_steady:
            sdims = (cfg.steady_dims_per_value[i]
                     if cfg.steady_dims_per_value else dims)
            smodel = (model if tuple(sdims) == tuple(dims)
                      else build_model(cfg.family, params, sdims))
            n_ss = _steady_n(smodel)
        else:
            n_ss = math.nan
        rows["value"].append(value)
        rows["deviation"].append(deviation)
        rows["max_leakage"].append(float(traj.series("leakage").max()))
        rows["oscillations"].append(osc)
        rows["steady_n"].append(n_ss)
        per_value[f"{value:g}"] = {
            "deviation": deviation,
            "oscillations": osc,
            "steady_n": None if math.isnan(n_ss) else n_ss,
        }
        if make_svg:
            svg_path = out / f"{cfg.basename}_{tag}.svg"
            svg.line_plot(svg_path, traj.times, {"n_expect": n_series},
                          title=f"{cfg.basename} {tag}", ylabel="n_expect")
            outputs.append(svg_path)
    summary = out / f"{cfg.basename}_summary.csv"
    write_csv(summary, list(rows), [np.asarray(rows[k], dtype=np.float64) for k in rows])
    outputs.append(summary)
    results["per_value"] = per_value


def _steady_n(model) -> float:
    rho = steady_state(model)
    dims = model.sig.mode_dims
    diag = np.real(np.diag(rho.mat))
    marg = diag.reshape(dims).sum(axis=tuple(range(1, len(dims)))) if len(dims) > 1 else diag
    return float(marg @ np.arange(dims[0], dtype=np.float64))


def _delta_b_series(traj: Trajectory):
    values = np.empty(len(traj.times))
    for k in range(len(traj.times)):
        state = traj.state_at(k)
        if state.sig.n_modes > 1:
            state = reduce_to_mode(state, 0)
        values[k] = delta_b(state)
    return values


def _run_wigner(cfg, out, tracker, outputs, results):
    model = build_model(cfg.family, cfg.params, cfg.dims)
    rho0 = DensityMatrix.vacuum(model.sig)
    if cfg.t_snapshot == "delta_b_peak":
        scan_cfg = _with_stride_one(cfg.integrator)
        scan = integrate(model, rho0, scan_cfg)
        tracker.absorb(scan)
        peak = peak_find(scan.times, _delta_b_series(scan))
        t_snap = float(peak.t_peak)
        results["peak_interior"] = peak.interior
    else:
        t_snap = float(cfg.t_snapshot)
    if t_snap > 0.0:
        snap_cfg = IntegratorConfig(
            t_end=t_snap,
            method=cfg.integrator.method,
            rtol=cfg.integrator.rtol,
            atol=cfg.integrator.atol,
            dt=cfg.integrator.dt,
            grid_points=max(2, int(round(cfg.integrator.grid_points
                                         * t_snap / cfg.integrator.t_end)) + 1),
        )
        traj = integrate(model, rho0, snap_cfg)
        tracker.absorb(traj)
        state = traj.final_state
    else:
        state = rho0
    if state.sig.n_modes > 1:
        state = reduce_to_mode(state, 0)
    xs = np.linspace(-cfg.grid["xmax"], cfg.grid["xmax"], cfg.grid["nx"])
    ps = np.linspace(-cfg.grid["pmax"], cfg.grid["pmax"], cfg.grid["np"])
    wg = wigner(state, xs, ps)
    if wg.truncation_flagged:
        tracker.max_truncation = max(tracker.max_truncation, 1.0)
    csv_path = out / f"{cfg.basename}_wigner.csv"
    nx, npts = len(xs), len(ps)
    write_csv(
        csv_path,
        ["x", "p", "W"],
        [np.repeat(xs, npts), np.tile(ps, nx), wg.values.reshape(nx * npts)],
    )
    outputs.append(csv_path)
    diag = np.real(np.diag(state.mat))
    results.update(
        t_snapshot=t_snap,
        wigner_min=wg.minimum(),
        wigner_integral=wg.integral(),
        truncation_flagged=wg.truncation_flagged,
        pop2=float(diag[2]) if state.sig.dim > 2 else 0.0,
        delta_b=delta_b(state),
    )


def _run_nongauss(cfg, out, make_svg, tracker, outputs, results):
    peaks = {}
    overlay = {}
    times = None
    for i, value in enumerate(cfg.values):
        params = dict(cfg.params)
        params[cfg.parameter] = value
        dims = cfg.dims_per_value[i] if cfg.dims_per_value else cfg.dims
        model = build_model(cfg.family, params, dims)
        traj = integrate(model, DensityMatrix.vacuum(model.sig),
                         _with_stride_one(cfg.integrator))
        tracker.absorb(traj)
        series = _delta_b_series(traj)
        times = traj.times
        tag = f"{cfg.parameter}{value:g}"
        csv_path = out / f"{cfg.basename}_{tag}_delta_b.csv"
        write_csv(csv_path, ["t", "delta_b"], [traj.times, series])
        outputs.append(csv_path)
        peak = peak_find(traj.times, series)
        peaks[f"{value:g}"] = {
            "t_peak": peak.t_peak,
            "delta_b": peak.value,
            "interior": peak.interior,
        }
        overlay[tag] = series
    results["peaks"] = peaks
    if make_svg and times is not None:
        svg_path = out / f"{cfg.basename}.svg"
        svg.line_plot(svg_path, times, overlay, title=cfg.basename, ylabel="delta_b")
        outputs.append(svg_path)


def _with_stride_one(ic: IntegratorConfig) -> IntegratorConfig:
    return IntegratorConfig(
        t_end=ic.t_end, method=ic.method, rtol=ic.rtol, atol=ic.atol, dt=ic.dt,
        grid_points=ic.grid_points, checkpoint_stride=1,
    )
