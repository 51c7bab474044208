"""Acceptance suite: reproduction of the reference values and the property checks.

Each criterion test records one PASS/FAIL line, printed in the terminal
summary. Runs marked ``extended`` take minutes to hours and only execute
with ``--extended`` (or BURGERS_RLINE_EXTENDED=1).
"""

import functools
import math
import os
import time

import numpy as np
import pytest

from burgers_rline import commands
from burgers_rline.analytic import AnalyticModel, GaussianBump, erf
from burgers_rline.assembly import SchemeParams, assemble_jacobian, assemble_residual
from burgers_rline.banded import BandedMatrix, factorize, solve
from burgers_rline.config import SimulationConfig
from burgers_rline.mesh import build_space
from burgers_rline.stepper import relocate_double, run

from test_analytic import erf_series

DT = 1e-3
BUMP = GaussianBump()


# -- helpers ------------------------------------------------------------------

def same_digits(a, b, digits=5):
    """Equal after rounding both to ``digits`` significant digits."""
    return f"{a:.{digits - 1}e}" == f"{b:.{digits - 1}e}"


def within_half_unit(value, printed, digits=4):
    """|value - printed| at most half a unit in the ``digits``-th significant digit of printed."""
    e = math.floor(math.log10(abs(printed)))
    return abs(value - printed) <= 0.5 * 10.0 ** (e - digits + 1) * (1 + 1e-9)


def within_steps(t, printed, dt=DT, digits=3):
    """Event time within one step of the interval a ``digits``-digit printed value stands for."""
    e = math.floor(math.log10(abs(printed)))
    return abs(t - printed) <= 0.5 * 10.0 ** (e - digits + 1) + dt + 1e-12


@functools.lru_cache(maxsize=None)
def fem_run(nu, n_vertices, t_final, snapshots=(), cadence=1000):
    cfg = SimulationConfig(nu=nu, n_vertices=n_vertices, dt=DT, t_final=t_final,
                           snapshot_times=list(snapshots), norm_cadence_steps=cadence)
    t0 = time.perf_counter()
    arts = run(cfg)
    return arts, time.perf_counter() - t0


def fem_at(arts, t, xs):
    for ts, L, coeffs in arts.snapshots:
        if abs(ts - t) < 1e-9:
            return commands.probe(coeffs, L, arts.space, xs)[0]
    raise KeyError(t)


@functools.lru_cache(maxsize=None)
def oracle(nu, digits=5):
    return AnalyticModel(BUMP, nu, target_digits=digits)


def check_block(nu, n_vertices, block, arts):
    """Compare FEM values to a reference block {t: {x: (n801_column, analytic)}}; returns failures."""
    bad = []
    for t, rows in block.items():
        xs = list(rows)
        vals = fem_at(arts, t, xs)
        for x, u in zip(xs, vals):
            col, exact = rows[x]
            ok = same_digits(u, col, 5) if same_digits(col, exact, 5) else within_half_unit(u, col, 4)
            if not ok:
                bad.append(f"t={t} x={x}: {u:.5e} vs {col:.4e}")
    return bad


# -- reference values ---------------------------------------------------------

# x: (N=401 column, analytic)
SHORT_TIME = {
    -1.0: (1.9933e-02, 1.9935e-02),
    -0.5: (2.3850e-01, 2.3849e-01),
    0.0: (5.7619e-01, 5.7621e-01),
    0.5: (2.6432e-01, 2.6432e-01),
    1.0: (2.1311e-02, 2.1314e-02),
}

# nu = 1, N = 801 column and analytic column
NU1_VALUES = {
    0.5: {-2.0: (2.9476e-02, 2.9476e-02), -1.0: (1.2539e-01, 1.2539e-01), 0.0: (2.1720e-01, 2.1720e-01),
          1.0: (1.4621e-01, 1.4621e-01), 2.0: (3.5960e-02, 3.5960e-02)},
    2.5: {-5.0: (7.4538e-03, 7.4538e-03), -2.5: (4.8750e-02, 4.8750e-02), 0.0: (9.8942e-02, 9.8942e-02),
          2.5: (5.8815e-02, 5.8815e-02), 5.0: (9.4563e-03, 9.4563e-03)},
}
NU1_LONG = {
    100.0: {-20.0: (5.1822e-03, 5.1822e-03), -10.0: (1.1418e-02, 1.1418e-02), 0.0: (1.5709e-02, 1.5709e-02),
            10.0: (1.3179e-02, 1.3179e-02), 20.0: (6.5366e-03, 6.5366e-03)},
}

DOUBLINGS = {
    1.0: [5.00e-3, 9.80e-2, 4.76e-1, 2.02, 8.35, 3.43e1, 1.41e2],
    0.1: [5.00e-3, 9.76e-1, 4.70, 1.96e1, 8.00e1, 3.26e2],
    0.01: [4.98e-1, 8.05, 3.06e1, 1.19e2, 4.69e2],
    0.001: [4.55, 1.59e1, 5.83e1, 2.21e2],
}

NU01_VALUES = {
    0.1: {-1.0: (6.6379e-04, 6.6379e-04), -0.5: (1.2484e-01, 1.2484e-01), 0.0: (8.1289e-01, 8.1289e-01),
          0.5: (1.6601e-01, 1.6601e-01), 1.0: (6.7258e-04, 6.7257e-04)},
    1.0: {-2.0: (1.2236e-04, 1.2236e-04), -1.0: (3.6493e-02, 3.6493e-02), 0.0: (3.5397e-01, 3.5397e-01),
          1.0: (1.3624e-01, 1.3624e-01), 2.0: (2.1256e-04, 2.1256e-04)},
    5.0: {-4.0: (6.0526e-05, 6.0526e-05), -2.0: (1.4916e-02, 1.4916e-02), 0.0: (1.5387e-01, 1.5387e-01),
          2.0: (1.0178e-01, 1.0178e-01), 4.0: (3.0280e-04, 3.0280e-04)},
}
NU01_LONG = {
    50.0: {-10.0: (1.9048e-04, 1.9048e-04), -5.0: (7.8305e-03, 7.8305e-03), 0.0: (4.6189e-02, 4.6189e-02),
           5.0: (5.7505e-02, 5.7505e-02), 10.0: (2.2606e-03, 2.2606e-03)},
    500.0: {-25.0: (3.4513e-04, 3.4512e-04), -10.0: (5.4509e-03, 5.4509e-03), 0.0: (1.4289e-02, 1.4289e-02),
            10.0: (2.1701e-02, 2.1701e-02), 25.0: (4.7812e-03, 4.7812e-03)},
}

NU001_VALUES = {
    0.5: {-1.0: (2.1788e-04, 2.1788e-04), -0.5: (7.5111e-02, 7.5111e-02), 0.0: (5.1787e-01, 5.1787e-01),
          0.5: (6.8111e-01, 6.8111e-01), 1.0: (2.2105e-04, 2.2105e-04)},
    10.0: {-1.0: (9.5488e-03, 9.5488e-03), -0.5: (3.1517e-02, 3.1517e-02), 0.0: (6.5267e-02, 6.5267e-02),
           1.0: (1.4914e-01, 1.4914e-01), 2.0: (2.4069e-01, 2.4069e-01)},
}
NU001_LONG = {
    50.0: {-2.5: (1.0140e-03, 1.0140e-03), 0.0: (2.1888e-02, 2.1888e-02), 2.5: (6.3993e-02, 6.3993e-02),
           5.0: (1.1119e-01, 1.1119e-01), 7.5: (3.2128e-04, 3.2127e-04)},
    250.0: {0.0: (8.3037e-03, 8.3037e-03), 7.5: (3.3935e-02, 3.3935e-02), 12.5: (5.3122e-02, 5.3122e-02),
            15.0: (4.9922e-02, 4.9922e-02), 17.5: (5.8370e-05, 5.8379e-05)},
    500.0: {0.0: (5.6266e-03, 5.6266e-03), 7.5: (1.7910e-02, 1.7910e-02), 12.5: (2.7264e-02, 2.7264e-02),
            17.5: (3.6903e-02, 3.6903e-02), 22.5: (1.0872e-02, 1.0872e-02)},
}

NU0001_VALUES = {
    5.0: {-0.5: (2.5377e-02, 2.5377e-02), 0.0: (9.7790e-02, 9.7790e-02), 0.5: (1.8310e-01, 1.8310e-01),
          1.0: (2.7253e-01, 2.7253e-01), 1.75: (4.0992e-01, 4.0992e-01)},
    50.0: {-1.0: (1.5250e-03, 1.5250e-03), 1.0: (3.2281e-02, 3.2281e-02), 3.0: (7.0537e-02, 7.0537e-02),
           5.0: (1.0955e-01, 1.0955e-01), 7.0: (6.2548e-04, 6.1865e-04)},
    100.0: {0.0: (8.1649e-03, 8.1649e-03), 2.5: (3.1193e-02, 3.1193e-02), 5.0: (5.5535e-02, 5.5535e-02),
            7.5: (8.0129e-02, 8.0129e-02), 10.0: (2.6774e-02, 2.6781e-02)},
    250.0: {0.0: (4.0513e-03, 4.0513e-03), 4.0: (1.8749e-02, 1.8749e-02), 8.0: (3.4433e-02, 3.4433e-02),
            12.0: (5.0260e-02, 5.0260e-02), 16.0: (5.8466e-02, 5.8109e-02)},
}

# (nu, N): (L1, L2, Linf)
ERROR_MAXIMA = {
    (1.0, 401): (1.95135e-05, 1.85085e-05, 3.28857e-05),
    (0.1, 801): (5.63505e-07, 6.33056e-07, 1.34676e-06),
    (0.01, 801): (3.71877e-06, 9.20586e-06, 6.08589e-05),
}

GAMMA = {
    1: {1.0: 5.60499e-01, 0.1: 5.60499e-01, 0.01: 5.60499e-01, 0.001: 5.60499e-01},
    2: {1.0: 2.50288e-01, 0.1: 4.38152e-01, 0.01: 5.92341e-01, 0.001: 6.23646e-01},
    "inf": {1.0: 1.58067e-01, 0.1: 4.86580e-01, 0.01: 9.25328e-01, 0.001: 1.03902e+00},
}
GAMMA_TILDE_N401 = {2: 2.50290e-01, "inf": 1.58070e-01}


# -- criteria -----------------------------------------------------------------

def test_criterion_1_short_time_values(acceptance_report):
    t0 = time.perf_counter()
    arts, _ = fem_run(1.0, 401, 0.05, (0.05,), 10)
    xs = list(SHORT_TIME)
    fem = fem_at(arts, 0.05, xs)
    exact = oracle(1.0).evaluate_many(np.array(xs), 0.05)
    elapsed = time.perf_counter() - t0
    fem_ok = [same_digits(u, SHORT_TIME[x][0]) for x, u in zip(xs, fem)]
    ora_ok = [same_digits(u, SHORT_TIME[x][1]) for x, u in zip(xs, exact)]
    ok = all(fem_ok) and all(ora_ok) and elapsed < 5.0
    acceptance_report(1, ok, f"nu=1, t=0.05, N=401: FEM {sum(fem_ok)}/5, oracle {sum(ora_ok)}/5 at 5 digits, "
                             f"u_h(0)={fem[2]:.4e}, {elapsed:.2f} s")
    assert ok


def test_criterion_2_nu1_values(acceptance_report):
    arts, elapsed = fem_run(1.0, 801, 2.5, tuple(NU1_VALUES), 100)
    bad = check_block(1.0, 801, NU1_VALUES, arts)
    ok = not bad and elapsed < 120
    acceptance_report(2, ok, f"nu=1, N=801, t=0.5 and 2.5: {10 - len(bad)}/10 points at 5 digits, {elapsed:.1f} s "
                             + "; ".join(bad))
    assert ok


def _doubling_times(arts):
    return [e.time for e in arts.doubling_log]


def test_criterion_3_doubling_schedule(acceptance_report):
    arts1, el1 = fem_run(1.0, 801, 142.0, (10.0, 100.0), 1000)
    got1 = _doubling_times(arts1)
    ok1 = len(got1) == 7 and all(within_steps(t, p) for t, p in zip(got1, DOUBLINGS[1.0]))
    arts2, el2 = fem_run(0.1, 801, 5.0, tuple(NU01_VALUES), 100)
    got2 = _doubling_times(arts2)[:3]
    flags2 = [within_steps(t, p) for t, p in zip(got2, DOUBLINGS[0.1][:3])]
    ok = ok1 and len(got2) == 3 and all(flags2)
    detail = (f"nu=1: {sum(within_steps(t, p) for t, p in zip(got1, DOUBLINGS[1.0]))}/7 events "
              f"{[round(t, 3) for t in got1]} ({el1:.0f} s); "
              f"nu=0.1: {sum(flags2)}/3 events {[round(t, 3) for t in got2]} vs {DOUBLINGS[0.1][:3]}")
    if not ok:
        detail += "; the nu=0.1 2->4 event follows the 1/nu scaling of the other columns (reference value kept as is)"
    acceptance_report(3, ok, detail)
    assert ok1
    assert all(flags2[1:]) and len(got2) == 3
    # the first nu = 0.1 event is checked in test_criterion_3_nu01_first_event


@pytest.mark.xfail(strict=True, reason="printed 5.00e-3 is inconsistent with the 1/nu scaling; "
                                       "the scheme gives 5.0e-2")
def test_criterion_3_nu01_first_event():
    arts, _ = fem_run(0.1, 801, 5.0, tuple(NU01_VALUES), 100)
    assert within_steps(_doubling_times(arts)[0], DOUBLINGS[0.1][0])


def test_criterion_4_small_viscosity_values(acceptance_report):
    arts_a, el_a = fem_run(0.1, 801, 5.0, tuple(NU01_VALUES), 100)
    arts_b, el_b = fem_run(0.01, 801, 10.0, tuple(NU001_VALUES), 100)
    bad = check_block(0.1, 801, NU01_VALUES, arts_a) + check_block(0.01, 801, NU001_VALUES, arts_b)
    ok = not bad and el_a < 180 and el_b < 180
    acceptance_report(4, ok, f"nu=0.1 (t=0.1,1,5) and nu=0.01 (t=0.5,10): {25 - len(bad)}/25 points, "
                             f"{el_a:.1f} s + {el_b:.1f} s " + "; ".join(bad))
    assert ok


def test_criterion_5_error_maxima(acceptance_report, tmp_path_factory):
    parts, ok = [], True
    for (nu, n), ref in ERROR_MAXIMA.items():
        cfg = SimulationConfig(nu=nu, n_vertices=n, dt=DT, t_final=1.0, norm_cadence_steps=10,
                               output_dir=str(tmp_path_factory.mktemp(f"errors_{nu}_{n}")))
        t0 = time.perf_counter()
        res = commands.cmd_errors(cfg, (0.0, 1.0), digits=7)
        got = (res["max_l1"], res["max_l2"], res["max_linf"])
        ratios = [g / r for g, r in zip(got, ref)]
        ok &= all(r <= 2.0 for r in ratios)
        parts.append(f"nu={nu} N={n}: " + ", ".join(f"{g:.3e} ({r:.2f}x)" for g, r in zip(got, ratios))
                     + f" {time.perf_counter() - t0:.0f} s")
    acceptance_report(5, ok, "max error norms (L1, L2, Linf) vs reference: " + "; ".join(parts))
    assert ok


def test_criterion_6_gamma_constants(acceptance_report):
    t0 = time.perf_counter()
    mass = math.sqrt(math.pi / 10) * math.erf(2 * math.sqrt(10))
    hits, worst_g1 = 0, 0.0
    for p, row in GAMMA.items():
        for nu, ref in row.items():
            got = AnalyticModel(BUMP, nu).gamma_p(p)
            hits += same_digits(got, ref, 5)
            if p == 1:
                worst_g1 = max(worst_g1, abs(got - mass) / mass)
    elapsed = time.perf_counter() - t0
    ok = hits == 12 and worst_g1 < 1e-10 and elapsed < 1.0
    acceptance_report(6, ok, f"gamma_p: {hits}/12 entries at 5 digits, max |gamma_1 - |m||/|m| = "
                             f"{worst_g1:.1e}, {elapsed:.2f} s")
    assert ok


@pytest.mark.extended
def test_criterion_7_gamma_tilde(acceptance_report, tmp_path):
    cap = float(os.environ.get("BURGERS_RLINE_TINF_CAP", "2048"))
    cfg = SimulationConfig(nu=1.0, n_vertices=401, dt=DT, t_final=cap, output_dir=str(tmp_path))
    report, payload = commands.cmd_asymptote(cfg, (1, 2, "inf"), delta=0.128, tol=1e-10)
    g2, ginf = report.gamma_tilde["2"], report.gamma_tilde["inf"]
    digits_ok = same_digits(g2, GAMMA_TILDE_N401[2], 4) and same_digits(ginf, GAMMA_TILDE_N401["inf"], 4)
    ok = report.reached and digits_ok
    acceptance_report(7, ok, f"t_inf {'reached' if report.reached else 'NOT reached'} by t={report.t_infinity:g} "
                             f"(last l2 difference {payload['last_difference']:.2e} vs 1e-10); "
                             f"gamma~_2={g2:.6e}, gamma~_inf={ginf:.6e}, 4-digit agreement {digits_ok}")
    assert ok


def test_criterion_8_properties(acceptance_report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    checks = {}

    s = build_space(11)
    worst = 0.0
    for _ in range(20):
        u, up = rng.uniform(-1, 1, (2, s.n_dofs))
        u[[0, -1]] = up[[0, -1]] = 0.0
        par = SchemeParams(nu=rng.uniform(0.01, 1), dt=1e-2, theta=rng.uniform(0, 1))
        L, d, eps = rng.uniform(0.5, 4), rng.uniform(-1, 1, s.n_dofs), 1e-7
        fd = (assemble_residual(u + eps * d, up, L, s, par) - assemble_residual(u - eps * d, up, L, s, par)) / (2 * eps)
        jd = assemble_jacobian(u, L, s, par).matvec(d)
        worst = max(worst, float(np.max(np.abs(jd - fd) / (1 + np.abs(jd)))))
    checks["jacobian"] = (worst < 1e-6, f"{worst:.1e}")

    s = build_space(801)
    v = rng.standard_normal(s.n_dofs)
    moved = relocate_double(v, s)
    j = np.arange(s.n_dofs)
    src = 2 * j - (s.n_vertices - 1)
    keep = (src >= 0) & (src < s.n_dofs)
    checks["relocation"] = (bool(np.all(moved[keep] == v[src[keep]]) and np.all(moved[~keep] == 0)), "bitwise")

    drift = {}
    for nu in (1.0, 0.1, 0.01):
        arts, _ = fem_run(nu, 801, 1.0, (), 10)
        m = np.array([n.mass for n in arts.norm_series])
        drift[nu] = float(np.max(np.abs(m - m[0])) / abs(m[0]))
    checks["mass"] = (max(drift.values()) < 1e-5, f"max drift {max(drift.values()):.1e}")

    series = fem_run(0.01, 801, 1.0, (), 10)[0].norm_series[1:]
    l2 = np.array([n.l2 for n in series])
    linf = np.array([n.linf for n in series])
    h1 = np.array([n.h1 for n in series])
    mono = bool(np.all(np.diff(l2) <= 0) and np.all(np.diff(linf) <= 0))
    peak = int(np.argmax(h1))
    checks["decay"] = (mono and 0 < peak < h1.size - 1, f"H1 peak at t={series[peak].time:g}")

    vals = []
    for dt in (4e-3, 2e-3, 1e-3):
        cfg = SimulationConfig(nu=1.0, n_vertices=801, dt=dt, t_final=0.048, snapshot_times=[0.048])
        a = run(cfg)
        _, L, c = a.snapshots[0]
        vals.append(commands.probe(c, L, a.space, [0.0])[0][0])
    order = math.log2((vals[0] - vals[1]) / (vals[1] - vals[2]))
    checks["order"] = (abs(order - 2.0) <= 0.2, f"{order:.3f}")

    worst = 0.0
    for _ in range(50):
        n = 50
        a = sum(np.diag(rng.uniform(-1, 1, n - abs(k)), k) for k in range(-2, 3))
        a += np.diag(np.abs(a).sum(axis=1) + 0.1)
        b = rng.uniform(-1, 1, n)
        x = solve(factorize(BandedMatrix.from_dense(a)), b)
        ref = np.linalg.solve(a, b)
        worst = max(worst, float(np.linalg.norm(x - ref) / np.linalg.norm(ref)))
    checks["banded_lu"] = (worst < 1e-11, f"{worst:.1e}")

    model = oracle(1.0, 13)
    x, t, h = 0.3, 0.5, 1e-4
    u = lambda x, t: model.analytic_u(x, t)
    u0 = u(x, t)
    resid = abs((u(x, t + h) - u(x, t - h)) / (2 * h) + u0 * (u(x + h, t) - u(x - h, t)) / (2 * h)
                - (u(x + h, t) - 2 * u0 + u(x - h, t)) / h**2)
    checks["pde_residual"] = (resid < 1e-3, f"{resid:.1e}")

    xs = rng.uniform(-4, 4, 100)
    worst = max(abs(erf(v) - erf_series(v)) / abs(erf_series(v)) for v in xs)
    checks["erf"] = (worst < 1e-15, f"{worst:.1e}")

    elapsed = time.perf_counter() - t0
    ok = all(c[0] for c in checks.values()) and elapsed < 60
    acceptance_report(8, ok, ", ".join(f"{k} {'ok' if c[0] else 'FAIL'} ({c[1]})" for k, c in checks.items())
                      + f"; {elapsed:.1f} s")
    assert ok


@pytest.mark.extended
def test_criterion_9_decay_slope(acceptance_report):
    arts, elapsed = fem_run(0.1, 801, 500.0, tuple(NU01_LONG), 1000)
    t = np.array([n.time for n in arts.norm_series])
    linf = np.array([n.linf for n in arts.norm_series])
    sel = (t >= 50) & (t <= 500)
    slope = float(np.polyfit(np.log(t[sel]), np.log(linf[sel]), 1)[0])
    ok = abs(slope + 0.5) <= 0.05
    acceptance_report(9, ok, f"log-log slope of ||u_h||_inf over [50, 500], nu=0.1: {slope:.4f} ({elapsed:.0f} s)")
    assert ok


# -- extended reference blocks ------------------------------------------------

@pytest.mark.extended
def test_extended_nu1_t100(acceptance_report):
    arts, _ = fem_run(1.0, 801, 142.0, (10.0, 100.0), 1000)
    bad = check_block(1.0, 801, NU1_LONG, arts)
    acceptance_report("2x", not bad, f"nu=1, N=801, t=100: {5 - len(bad)}/5 " + "; ".join(bad))
    assert not bad


@pytest.mark.extended
def test_extended_doubling_columns(acceptance_report):
    parts, ok = [], True
    for nu, t_final, snaps in ((0.01, 500.0, tuple(NU001_LONG)), (0.001, 250.0, tuple(NU0001_VALUES))):
        arts, el = fem_run(nu, 801, t_final, snaps, 1000)
        got = _doubling_times(arts)
        flags = [within_steps(t, p) for t, p in zip(got, DOUBLINGS[nu])]
        ok &= len(got) >= len(DOUBLINGS[nu]) and all(flags)
        parts.append(f"nu={nu}: {sum(flags)}/{len(DOUBLINGS[nu])} {[round(t, 3) for t in got]} ({el:.0f} s)")
    acceptance_report("3x", ok, "doubling times, nu=0.01 and 0.001: " + "; ".join(parts))
    assert ok


@pytest.mark.extended
def test_extended_long_time_values(acceptance_report):
    blocks = (
        (0.1, 500.0, NU01_LONG),
        (0.01, 500.0, NU001_LONG),
        (0.001, 250.0, NU0001_VALUES),
    )
    bad, total = [], 0
    for nu, t_final, block in blocks:
        arts, _ = fem_run(nu, 801, t_final, tuple(block), 1000)
        bad += [f"nu={nu} {b}" for b in check_block(nu, 801, block, arts)]
        total += sum(len(r) for r in block.values())
    acceptance_report("4x", not bad, f"long-time and nu=0.001 values: {total - len(bad)}/{total} "
                                     + "; ".join(bad))
    assert not bad
