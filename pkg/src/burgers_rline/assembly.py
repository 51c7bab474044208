"""Residual and Jacobian of the theta-scheme Galerkin problem on [-1, 1].

For the step from ``u_prev`` to ``u`` on a domain of semidiameter L the
residual row for test function phi_i is

    (phi_i, u - u_prev)
    + dt/L    * (phi_i, theta u u' + (1 - theta) u_prev u_prev')
    + dt nu/L^2 * (phi_i', theta u' + (1 - theta) u_prev')

with ' the derivative in the dimensionless coordinate. Time stays in
physical units. Dirichlet rows are replaced by ``u_i - 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .banded import HALF_BANDWIDTH, BandedMatrix
from .errors import ConfigError
from .mesh import FeSpace


@dataclass(frozen=True)
class SchemeParams:
    nu: float
    dt: float
    theta: float = 0.5
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    support_threshold: float = 1e-15

    def __post_init__(self):
        if not self.nu > 0:
            raise ConfigError(f"nu must be positive, got {self.nu}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must lie in [0, 1], got {self.theta}")
        if not (self.newton_tol > 0 and self.support_threshold > 0):
            raise ConfigError("tolerances must be positive")
        if self.newton_max_iter < 1:
            raise ConfigError("newton_max_iter must be >= 1")


def _check(vec, space, name):
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (space.n_dofs,):
        raise ValueError(f"{name} has shape {vec.shape}, expected ({space.n_dofs},)")
    return vec


@njit(cache=True)
def _cell_terms(vec, weight_conv, weight_diff, hc, w, phi, dphi):
    """Assembled sum over cells of (phi_i, v) + wc (phi_i, v v') + wd (phi_i', v')."""
    n = vec.size
    out = np.zeros(n)
    nq = w.size
    for c in range(0, n - 1, 2):
        for q in range(nq):
            v = vec[c] * phi[q, 0] + vec[c + 1] * phi[q, 1] + vec[c + 2] * phi[q, 2]
            dv = (vec[c] * dphi[q, 0] + vec[c + 1] * dphi[q, 1] + vec[c + 2] * dphi[q, 2]) / hc
            value = w[q] * hc * (v + weight_conv * v * dv)
            slope = w[q] * weight_diff * dv
            for a in range(3):
                out[c + a] += value * phi[q, a] + slope * dphi[q, a]
    return out


@njit(cache=True)
def _jacobian_bands(u, c_conv, c_diff, hc, w, phi, dphi, bands):
    n = u.size
    nq = w.size
    k = 2
    for c in range(0, n - 1, 2):
        for q in range(nq):
            v = u[c] * phi[q, 0] + u[c + 1] * phi[q, 1] + u[c + 2] * phi[q, 2]
            dv = (u[c] * dphi[q, 0] + u[c + 1] * dphi[q, 1] + u[c + 2] * dphi[q, 2]) / hc
            for a in range(3):
                for b in range(3):
                    val = hc * phi[q, a] * phi[q, b] * (1.0 + c_conv * dv)
                    val += c_conv * v * phi[q, a] * dphi[q, b]
                    val += c_diff / hc * dphi[q, a] * dphi[q, b]
                    bands[k + a - b, c + b] += w[q] * val


def _terms(vec, weight, L, space, params):
    return _cell_terms(
        vec,
        weight * params.dt / L,
        weight * params.dt * params.nu / L**2,
        space.cell_length,
        space.quadrature.weights,
        space.phi_q,
        space.dphi_q,
    )


def explicit_part(u_prev, L, space, params):
    """The u_prev-dependent part of the residual, constant during a Newton solve."""
    u_prev = _check(u_prev, space, "u_prev")
    return -_terms(u_prev, -(1.0 - params.theta), L, space, params)


def implicit_residual(u, rhs, L, space, params):
    """Residual given the precomputed explicit part ``rhs``."""
    res = _terms(u, params.theta, L, space, params) + rhs
    res[0] = u[0]
    res[-1] = u[-1]
    return res


def assemble_residual(u, u_prev, L, space: FeSpace, params: SchemeParams):
    u = _check(u, space, "u")
    return implicit_residual(u, explicit_part(u_prev, L, space, params), L, space, params)


def assemble_jacobian(u, L, space: FeSpace, params: SchemeParams) -> BandedMatrix:
    u = _check(u, space, "u")
    jac = BandedMatrix.zeros(space.n_dofs, HALF_BANDWIDTH)
    _jacobian_bands(
        u,
        params.theta * params.dt / L,
        params.theta * params.dt * params.nu / L**2,
        space.cell_length,
        space.quadrature.weights,
        space.phi_q,
        space.dphi_q,
        jac.bands,
    )
    k = HALF_BANDWIDTH
    bands = jac.bands
    # identity rows for the two Dirichlet DOFs
    n = space.n_dofs
    for j in range(0, min(k + 1, n)):
        bands[k - j, j] = 0.0
    for j in range(max(n - 1 - k, 0), n):
        bands[k + n - 1 - j, j] = 0.0
    bands[k, 0] = 1.0
    bands[k, n - 1] = 1.0
    return jac
