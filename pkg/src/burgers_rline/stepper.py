"""Time loop: Newton-solved theta steps on [-1, 1] with semidiameter doubling.

The physical domain is [-L, L] and the mesh never changes. Whenever the
numerical support (DOFs with |u| above the threshold) reaches a boundary
cell, L is doubled and the coefficient vector is relocated: the new DOF at
y takes the old value at 2y, which is itself a DOF because the vertex count
is odd.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import banded
from .assembly import SchemeParams, assemble_jacobian, explicit_part, implicit_residual
from .analytic import GaussianBump
from .errors import ConfigError, NonConvergenceError
from .mesh import FeSpace, build_space
from .norms import norm_sample

log = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e4


@dataclass
class SolutionState:
    coeffs: np.ndarray
    semidiameter: float
    dt: float
    step_index: int = 0

    @property
    def time(self):
        return self.step_index * self.dt


@dataclass(frozen=True)
class DoublingEvent:
    time: float
    l_before: float
    l_after: float


def support_ok(coeffs, space: FeSpace, threshold=1e-15) -> bool:
    """True iff no DOF of either boundary cell exceeds ``threshold`` in magnitude."""
    coeffs = np.asarray(coeffs)
    return bool(np.all(np.abs(coeffs[:3]) <= threshold) and np.all(np.abs(coeffs[-3:]) <= threshold))


def relocate_double(coeffs, space: FeSpace):
    """Coefficients of the same function after L -> 2L; intermediate old DOFs are dropped."""
    coeffs = np.asarray(coeffs)
    n = space.n_vertices
    out = np.zeros_like(coeffs)
    j = np.arange(space.n_dofs)
    src = 2 * j - (n - 1)
    keep = (src >= 0) & (src <= 2 * n - 2)
    out[keep] = coeffs[src[keep]]
    return out


def default_semidiameter(datum, space: FeSpace, threshold=1e-15, max_doublings=60):
    """Smallest d * 2^k whose boundary-cell DOF images of g are below ``threshold``."""
    L = datum.d
    for _ in range(max_doublings):
        if support_ok(_sample(datum, L, space), space, threshold):
            return L
        L *= 2.0
    raise ConfigError("could not find a semidiameter containing the initial datum")


def _sample(datum, L, space):
    return np.asarray(datum.g(L * space.dof_coords), dtype=float)


def init_state(datum, l0, space: FeSpace, dt, threshold=1e-15) -> SolutionState:
    """Interpolate g(L0 * y) at the DOFs; Dirichlet entries are set to zero.

    A datum that already reaches the boundary cells is accepted; the support
    check after the first step then doubles the domain.
    """
    if l0 < datum.d:
        raise ConfigError(f"L0={l0} is smaller than the support semidiameter {datum.d}")
    coeffs = _sample(datum, l0, space)
    coeffs[0] = coeffs[-1] = 0.0
    if not support_ok(coeffs, space, threshold):
        log.warning("initial datum reaches the boundary cells at L0=%g", l0)
    return SolutionState(coeffs=coeffs, semidiameter=float(l0), dt=float(dt))


def newton_solve(state: SolutionState, space: FeSpace, params: SchemeParams):
    """Solve one theta step starting from the previous solution; returns (coeffs, iterations)."""
    L = state.semidiameter
    u = state.coeffs.copy()
    rhs = explicit_part(state.coeffs, L, space, params)
    prev_norm = None
    for it in range(1, params.newton_max_iter + 1):
        res = implicit_residual(u, rhs, L, space, params)
        jac = assemble_jacobian(u, L, space, params)
        delta = banded.solve(banded.factorize(jac), -res)
        u += delta
        norm = float(np.linalg.norm(delta))
        if not math.isfinite(norm):
            raise NonConvergenceError("Newton update is not finite", time=state.time + params.dt)
        if norm < params.newton_tol:
            return u, it
        if prev_norm is not None and prev_norm > 0 and norm > DIVERGENCE_FACTOR * prev_norm:
            raise NonConvergenceError(
                f"Newton diverging: |du| grew from {prev_norm:.3e} to {norm:.3e}",
                time=state.time + params.dt,
            )
        prev_norm = norm
    raise NonConvergenceError(
        f"Newton did not converge in {params.newton_max_iter} iterations (|du|={norm:.3e})",
        time=state.time + params.dt,
    )


def advance(state: SolutionState, space: FeSpace, params: SchemeParams):
    """One time step plus any doublings; returns (new_state, events, newton_iterations)."""
    coeffs, iters = newton_solve(state, space, params)
    new = SolutionState(coeffs, state.semidiameter, state.dt, state.step_index + 1)
    events = []
    while not support_ok(new.coeffs, space, params.support_threshold):
        ev = DoublingEvent(new.time, new.semidiameter, 2.0 * new.semidiameter)
        log.debug("doubling L %g -> %g at t=%g", ev.l_before, ev.l_after, ev.time)
        new.coeffs = relocate_double(new.coeffs, space)
        new.semidiameter = ev.l_after
        events.append(ev)
    return new, events, iters


def steps_for(t, dt, what="time"):
    """Exact number of steps to reach ``t``; t must be a multiple of dt."""
    k = round(t / dt)
    if abs(k * dt - t) > 1e-12 * max(1.0, abs(t)):
        raise ConfigError(f"{what} {t} is not an integer multiple of dt={dt}")
    return int(k)


@dataclass
class RunArtifacts:
    snapshots: list = field(default_factory=list)  # (time, L, coeffs)
    norm_series: list = field(default_factory=list)
    doubling_log: list = field(default_factory=list)
    newton_stats: list = field(default_factory=list)
    config_echo: object = None
    error: str | None = None
    failed_at: float | None = None
    final_state: SolutionState | None = None
    space: FeSpace | None = None


def iterate(state, space, params, n_steps):
    """Yield (state, events, iterations) after each of ``n_steps`` steps."""
    for _ in range(n_steps):
        try:
            state, events, iters = advance(state, space, params)
        except NonConvergenceError as exc:
            if exc.time is None:
                exc.time = state.time + params.dt
            raise
        yield state, events, iters


def run(config, datum=None, on_step=None) -> RunArtifacts:
    """Step from t=0 to config.t_final collecting snapshots, norms, doublings.

    ``on_step(state, events)`` is called after every accepted step. On solver
    failure the partial artifacts are attached to the raised exception as
    ``exc.artifacts``.
    """
    datum = GaussianBump() if datum is None else datum
    space = build_space(config.n_vertices)
    params = config.scheme_params()
    l0 = config.l0 if config.l0 is not None else default_semidiameter(datum, space, params.support_threshold)
    state = init_state(datum, l0, space, params.dt, params.support_threshold)

    n_steps = steps_for(config.t_final, params.dt, "t_final")
    snap_steps = {steps_for(t, params.dt, "snapshot time") for t in config.snapshot_times}
    cadence = config.norm_cadence_steps
    arts = RunArtifacts(config_echo=config, space=space)

    def record(st):
        if st.step_index in snap_steps:
            arts.snapshots.append((st.time, st.semidiameter, st.coeffs.copy()))
        if st.step_index % cadence == 0 or st.step_index == n_steps:
            arts.norm_series.append(norm_sample(st, space))

    record(state)
    try:
        for state, events, iters in iterate(state, space, params, n_steps):
            arts.doubling_log.extend(events)
            arts.newton_stats.append(iters)
            record(state)
            if on_step is not None:
                on_step(state, events)
    except NonConvergenceError as exc:
        arts.error = str(exc)
        arts.failed_at = exc.time
        exc.artifacts = arts
        raise
    arts.final_state = state
    return arts
