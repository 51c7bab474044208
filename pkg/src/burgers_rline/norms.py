"""Norms of P2 solutions on the physical line and large-time diagnostics.

All integral norms carry the factor L of the map x = L*y. The H1 seminorm
part uses the derivative in the dimensionless coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotReachedError

INF = math.inf


@dataclass(frozen=True)
class NormSample:
    time: float
    l1: float
    l2: float
    linf: float
    h1: float
    semidiameter: float
    mass: float = 0.0

    FIELDS = ("time", "semidiameter", "l1", "l2", "linf", "h1", "mass")

    def row(self):
        return [getattr(self, f) for f in self.FIELDS]


@dataclass
class AsymptoteReport:
    t_infinity: float
    reached: bool
    gamma_tilde: dict = field(default_factory=dict)
    gamma_analytic: dict = field(default_factory=dict)
    relative_gap: dict = field(default_factory=dict)


def _parse_p(p):
    if p in (INF, "inf", "infinity", "Inf", "oo"):
        return INF
    if p in ("h1", "H1"):
        return "h1"
    if float(p) in (1.0, 2.0):
        return int(float(p))
    raise ValueError(f"unsupported norm {p!r}")


def _check(coeffs, space):
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (space.n_dofs,):
        raise ValueError(f"coefficient vector has shape {coeffs.shape}, expected ({space.n_dofs},)")
    return coeffs


def _abs_integral_per_cell(local):
    """Exact int_0^1 |u(xi)| dxi of each cell quadratic, splitting at its roots."""
    c0, c1, c2 = local[:, 0], local[:, 1], local[:, 2]
    A = c0
    B = -3.0 * c0 + 4.0 * c1 - c2
    C = 2.0 * c0 - 4.0 * c1 + 2.0 * c2
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = B * B - 4.0 * A * C
        sq = np.sqrt(np.maximum(disc, 0.0))
        q = -0.5 * (B + np.where(B >= 0, sq, -sq))
        quad = C != 0
        r1 = np.where(quad, q / C, np.where(B != 0, -A / B, np.nan))
        r2 = np.where(quad & (q != 0), A / q, np.nan)
        real = ~quad | (disc >= 0)
    roots = np.stack([r1, r2], axis=1)
    valid = real[:, None] & np.isfinite(roots) & (roots > 0.0) & (roots < 1.0)
    roots = np.sort(np.where(valid, roots, 1.0), axis=1)
    knots = np.concatenate([np.zeros((local.shape[0], 1)), roots, np.ones((local.shape[0], 1))], axis=1)
    prim = A[:, None] * knots + B[:, None] * knots**2 / 2.0 + C[:, None] * knots**3 / 3.0
    return np.sum(np.abs(np.diff(prim, axis=1)), axis=1)


def solution_norm(coeffs, L, space, p):
    """L1, L2, Linf or H1 norm of the P2 function on [-L, L]."""
    coeffs = _check(coeffs, space)
    p = _parse_p(p)
    hc = space.cell_length
    w = space.quadrature.weights
    local = space.cell_values(coeffs)
    uq = local @ space.phi_q.T
    if p == 1:
        return float(L * hc * np.sum(_abs_integral_per_cell(local)))
    if p == 2:
        return math.sqrt(L * hc * float(np.sum(uq**2 @ w)))
    if p == INF:
        return float(max(np.max(np.abs(coeffs)), np.max(np.abs(uq))))
    duq = local @ space.dphi_q.T / hc
    return math.sqrt(L * hc * float(np.sum((uq**2 + duq**2) @ w)))


def signed_mass(coeffs, L, space):
    """L * int u_h over [-1, 1] (Simpson is exact on each quadratic cell)."""
    local = space.cell_values(coeffs)
    return float(L * space.cell_length * np.sum(local @ np.array([1.0, 4.0, 1.0])) / 6.0)


def norm_sample(state, space) -> NormSample:
    c, L = state.coeffs, state.semidiameter
    return NormSample(
        time=state.time,
        l1=solution_norm(c, L, space, 1),
        l2=solution_norm(c, L, space, 2),
        linf=solution_norm(c, L, space, INF),
        h1=solution_norm(c, L, space, "h1"),
        semidiameter=L,
        mass=signed_mass(c, L, space),
    )


def error_norms(coeffs, L, time, space, oracle, target_digits=None):
    """(l1, l2, linf) of u_h - u on the physical line, by cellwise Gauss quadrature.

    Linf also includes the DOF points.
    """
    coeffs = _check(coeffs, space)
    if not time > 0:
        raise ValueError("error norms need t > 0")
    yq = space.quadrature_coords()
    uh_q = space.cell_values(coeffs) @ space.phi_q.T
    pts = np.concatenate([(L * yq).ravel(), L * space.dof_coords])
    exact = oracle.evaluate_many(pts, time, target_digits)
    eq = uh_q - exact[: yq.size].reshape(yq.shape)
    edof = coeffs - exact[yq.size :]
    w = space.quadrature.weights
    hc = space.cell_length
    l1 = L * hc * float(np.sum(np.abs(eq) @ w))
    l2 = math.sqrt(L * hc * float(np.sum(eq**2 @ w)))
    linf = float(max(np.max(np.abs(eq)), np.max(np.abs(edof))))
    return l1, l2, linf


class TInfinityDetector:
    """Feeds coefficient snapshots taken every ``delta`` time units.

    A comparison is only made between consecutive snapshots with the same
    semidiameter; a doubling in between skips one comparison.
    """

    def __init__(self, delta=0.128, tol=1e-10):
        self.delta = delta
        self.tol = tol
        self._prev = None
        self.t_infinity = None
        self.last_difference = None

    def feed(self, time, L, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if self.t_infinity is not None:
            return True
        if self._prev is not None and self._prev[0] == L:
            self.last_difference = float(np.linalg.norm(coeffs - self._prev[1]))
            if self.last_difference < self.tol:
                self.t_infinity = time
                return True
        self._prev = (L, coeffs.copy())
        return False


def detect_t_infinity(samples, delta=0.128, tol=1e-10):
    """First sampled time whose l2 coefficient difference to the previous sample is below tol.

    ``samples`` is an iterable of (time, L, coeffs) taken every ``delta``.
    """
    det = TInfinityDetector(delta, tol)
    for time, L, coeffs in samples:
        if det.feed(time, L, coeffs):
            return det.t_infinity
    raise NotReachedError(
        f"coefficient differences never fell below {tol:g} (last {det.last_difference})"
    )


def gamma_tilde(coeffs, L, t_infinity, space, p):
    """t_inf^((1 - 1/p)/2) times the Lp norm of the discrete solution."""
    p = _parse_p(p)
    expo = 0.5 if p == INF else 0.5 * (1.0 - 1.0 / p)
    return t_infinity**expo * solution_norm(coeffs, L, space, p)
