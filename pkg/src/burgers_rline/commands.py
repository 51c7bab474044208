"""Library entry points behind the CLI subcommands."""

from __future__ import annotations

import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .analytic import AnalyticModel, GaussianBump
from .config import SimulationConfig
from .errors import ConfigError, NonConvergenceError
from .mesh import build_space
from .norms import INF, AsymptoteReport, NormSample, TInfinityDetector, error_norms, gamma_tilde
from .stepper import default_semidiameter, init_state, iterate, run, steps_for


def probe(coeffs, L, space, xs):
    """P2 solution at physical points; second array flags points outside [-L, L]."""
    xs = np.asarray(xs, dtype=float)
    outside = np.abs(xs) > L
    return space.evaluate(coeffs, xs / L), outside


def _out_dir(config):
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _newton_summary(stats):
    if not stats:
        return {"steps": 0, "total_iterations": 0, "max": 0, "mean": 0.0, "histogram": {}}
    arr = np.asarray(stats)
    hist = np.bincount(arr)
    return {
        "steps": int(arr.size),
        "total_iterations": int(arr.sum()),
        "max": int(arr.max()),
        "mean": float(arr.mean()),
        "histogram": {str(k): int(v) for k, v in enumerate(hist) if v},
    }


def _run_record(config, arts, status="ok"):
    space = build_space(config.n_vertices)
    probes = []
    for t, L, coeffs in arts.snapshots:
        vals, outside = probe(coeffs, L, space, config.probe_points)
        for x, u, o in zip(config.probe_points, vals, outside):
            probes.append({"t": t, "x": x, "u": float(u), "outside": bool(o)})
    return {
        "config": config.to_dict(),
        "status": status,
        "error": arts.error,
        "failed_at": arts.failed_at,
        "doubling_log": [
            {"time": e.time, "l_before": e.l_before, "l_after": e.l_after} for e in arts.doubling_log
        ],
        "newton_stats": _newton_summary(arts.newton_stats),
        "probes": probes,
    }


def write_norms(path, series):
    io.write_csv(path, NormSample.FIELDS, [s.row() for s in series])


def cmd_solve(config: SimulationConfig, datum=None):
    """Run the solver and write run.json, norms.csv and one CSV per snapshot."""
    out = _out_dir(config)
    try:
        arts = run(config, datum)
    except NonConvergenceError as exc:
        arts = exc.artifacts
        io.write_json(out / "run.json", _run_record(config, arts, status="failed"))
        write_norms(out / "norms.csv", arts.norm_series)
        raise
    space = arts.space
    for t, L, coeffs in arts.snapshots:
        rows = zip(L * space.dof_coords, coeffs)
        io.write_csv(out / io.snapshot_name(t), ["x_physical", "u"], rows)
    write_norms(out / "norms.csv", arts.norm_series)
    io.write_json(out / "run.json", _run_record(config, arts))
    return arts


def analytic_rows(nu, times, points, digits=5, datum=None):
    model = AnalyticModel(datum or GaussianBump(), nu, target_digits=digits)
    rows = []
    for t in times:
        if t > 0:
            vals = model.evaluate_many(np.asarray(points, dtype=float), t)
        else:
            vals = model.g(np.asarray(points, dtype=float))
        for x, u in zip(points, vals):
            rows.append([t, x, float(u), io.sig_format(u)])
    return rows


ANALYTIC_HEADER = ["t", "x", "u_exact", "u_exact_5sig"]
COMPARE_HEADER = ["t", "x", "u_fem", "u_exact", "abs_err", "rel_err", "u_fem_5sig", "u_exact_5sig", "outside"]


def cmd_analytic(nu, times, points, digits=5, path=None, datum=None):
    rows = analytic_rows(nu, times, points, digits, datum)
    text = io.csv_text(ANALYTIC_HEADER, rows)
    if path is not None:
        Path(path).write_text(text)
    return text


def cmd_compare(config: SimulationConfig, times=None, points=None, digits=5, datum=None):
    """Run the solver and tabulate FEM vs exact values at (t, x) pairs."""
    times = list(config.snapshot_times if times is None else times)
    points = list(config.probe_points if points is None else points)
    if not times:
        raise ConfigError("compare needs at least one time")
    config = replace(config, snapshot_times=times, probe_points=points,
                     t_final=max(config.t_final, max(times)))
    config.validate()
    datum = datum or GaussianBump()
    arts = run(config, datum)
    model = AnalyticModel(datum, config.nu, target_digits=digits)
    space = arts.space
    rows = []
    for t, L, coeffs in arts.snapshots:
        fem, outside = probe(coeffs, L, space, points)
        exact = model.evaluate_many(np.asarray(points, dtype=float), t) if t > 0 else datum.g(np.asarray(points))
        for x, uf, ue, o in zip(points, fem, exact, outside):
            err = abs(uf - ue)
            rel = err / abs(ue) if ue != 0 else (0.0 if err == 0 else math.inf)
            rows.append([t, x, float(uf), float(ue), err, rel, io.sig_format(uf), io.sig_format(ue), bool(o)])
    text = io.csv_text(COMPARE_HEADER, rows)
    (_out_dir(config) / "compare.csv").write_text(text)
    return rows, text


def _parse_ps(p_list):
    out = []
    for p in p_list:
        out.append(INF if str(p).lower() in ("inf", "infinity", "oo") else int(float(p)))
    return out


def _p_key(p):
    return "inf" if p == INF else str(p)


def cmd_asymptote(config: SimulationConfig, p_list=(1, 2, "inf"), delta=0.128, tol=1e-10, datum=None):
    """Step until consecutive delta-spaced snapshots agree to ``tol`` (or t_final)."""
    datum = datum or GaussianBump()
    ps = _parse_ps(p_list)
    space = build_space(config.n_vertices)
    params = config.scheme_params()
    l0 = config.l0 if config.l0 is not None else default_semidiameter(datum, space, params.support_threshold)
    state = init_state(datum, l0, space, params.dt, params.support_threshold)
    every = steps_for(delta, params.dt, "delta")
    n_steps = steps_for(config.t_final, params.dt, "t_final")
    det = TInfinityDetector(delta, tol)
    det.feed(state.time, state.semidiameter, state.coeffs)
    reached = False
    for state, _events, _iters in iterate(state, space, params, n_steps):
        if state.step_index % every == 0 and det.feed(state.time, state.semidiameter, state.coeffs):
            reached = True
            break
    t_inf = state.time
    model = AnalyticModel(datum, config.nu)
    report = AsymptoteReport(t_infinity=t_inf, reached=reached)
    for p in ps:
        key = _p_key(p)
        gt = gamma_tilde(state.coeffs, state.semidiameter, t_inf, space, p)
        ga = model.gamma_p(p)
        report.gamma_tilde[key] = gt
        report.gamma_analytic[key] = ga
        report.relative_gap[key] = abs(gt - ga) / abs(ga) if ga else math.inf
    payload = {
        "t_infinity": report.t_infinity,
        "reached": report.reached,
        "semidiameter": state.semidiameter,
        "last_difference": det.last_difference,
        "delta": delta,
        "tol": tol,
        "gamma_tilde": report.gamma_tilde,
        "gamma_analytic": report.gamma_analytic,
        "relative_gap": report.relative_gap,
        "config": config.to_dict(),
    }
    io.write_json(_out_dir(config) / "asymptote.json", payload)
    return report, payload


def cmd_errors(config: SimulationConfig, t_window=None, digits=7, datum=None):
    """Maximum error norms over sampled times in ``t_window``."""
    datum = datum or GaussianBump()
    lo, hi = (0.0, config.t_final) if t_window is None else map(float, t_window)
    if hi < lo:
        raise ConfigError(f"empty time window [{lo}, {hi}]")
    config = replace(config, t_final=max(config.t_final, hi), snapshot_times=[])
    model = AnalyticModel(datum, config.nu, target_digits=digits)
    cadence = config.norm_cadence_steps
    series = []

    def on_step(state, _events):
        t = state.time
        if state.step_index % cadence == 0 and lo <= t <= hi and t > 0:
            e = error_norms(state.coeffs, state.semidiameter, t, space, model)
            series.append((t, *e))

    space = build_space(config.n_vertices)
    arts = run(config, datum, on_step=on_step)
    if series:
        arr = np.asarray(series)
        maxima = arr[:, 1:].max(axis=0)
        at = arr[np.argmax(arr[:, 1:], axis=0), 0]
    else:
        maxima = at = [math.nan] * 3
    payload = {
        "window": [lo, hi],
        "cadence_steps": cadence,
        "samples": len(series),
        "digits": digits,
        "max_l1": float(maxima[0]),
        "max_l2": float(maxima[1]),
        "max_linf": float(maxima[2]),
        "argmax_time": {"l1": float(at[0]), "l2": float(at[1]), "linf": float(at[2])},
        "doubling_log": [[e.time, e.l_before, e.l_after] for e in arts.doubling_log],
        "config": config.to_dict(),
    }
    out = _out_dir(config)
    io.write_csv(out / "errors.csv", ["t", "l1", "l2", "linf"], series)
    io.write_json(out / "errors.json", payload)
    return payload
