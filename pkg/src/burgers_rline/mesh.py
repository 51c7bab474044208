"""Uniform P2 Lagrange space on the dimensionless interval [-1, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule on the reference cell [0, 1]."""

    points: np.ndarray
    weights: np.ndarray


def make_quadrature() -> QuadratureRule:
    """3-point Gauss-Legendre mapped to [0, 1]; exact up to degree 5."""
    x, w = np.polynomial.legendre.leggauss(3)
    return QuadratureRule(points=0.5 * (x + 1.0), weights=0.5 * w)


def eval_basis(local_index, ref_coord):
    """Quadratic shape function with nodes at 0, 1/2, 1 and its d/dxi.

    Works elementwise on arrays of reference coordinates.
    """
    xi = np.asarray(ref_coord, dtype=float)
    if local_index == 0:
        return (1.0 - xi) * (1.0 - 2.0 * xi), 4.0 * xi - 3.0
    if local_index == 1:
        return 4.0 * xi * (1.0 - xi), 4.0 - 8.0 * xi
    if local_index == 2:
        return xi * (2.0 * xi - 1.0), 4.0 * xi - 1.0
    raise ValueError(f"local_index must be 0, 1 or 2, got {local_index}")


def basis_table(ref_coords):
    """Values and reference derivatives of all three shape functions.

    Returns two arrays of shape (len(ref_coords), 3).
    """
    xi = np.atleast_1d(np.asarray(ref_coords, dtype=float))
    vals = np.empty((xi.size, 3))
    ders = np.empty((xi.size, 3))
    for a in range(3):
        vals[:, a], ders[:, a] = eval_basis(a, xi)
    return vals, ders


@dataclass(frozen=True, eq=False)
class FeSpace:
    n_vertices: int
    n_cells: int
    n_dofs: int
    cell_length: float
    dof_coords: np.ndarray
    cell_dofs: np.ndarray
    quadrature: QuadratureRule
    # shape function tables at the quadrature points, (n_q, 3)
    phi_q: np.ndarray
    dphi_q: np.ndarray

    @property
    def boundary_dofs(self):
        return (0, self.n_dofs - 1)

    @property
    def boundary_cells(self):
        return (0, self.n_cells - 1)

    @property
    def dof_spacing(self):
        return 1.0 / (self.n_vertices - 1)

    def quadrature_coords(self):
        """Dimensionless coordinates of every quadrature point, (n_cells, n_q)."""
        left = self.dof_coords[0:-1:2]
        return left[:, None] + self.cell_length * self.quadrature.points[None, :]

    def cell_values(self, coeffs):
        """Coefficient vector reshaped to per-cell local coefficients (n_cells, 3)."""
        return np.asarray(coeffs)[self.cell_dofs]

    def locate(self, y):
        """Cell index and reference coordinate for dimensionless points in [-1, 1]."""
        y = np.asarray(y, dtype=float)
        s = (y + 1.0) / self.cell_length
        cell = np.clip(np.floor(s).astype(int), 0, self.n_cells - 1)
        return cell, s - cell

    def evaluate(self, coeffs, y):
        """Evaluate the P2 function with the given coefficients at points y.

        Points outside [-1, 1] evaluate to 0 (the function is extended by zero).
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        inside = np.abs(y) <= 1.0
        out = np.zeros_like(y)
        cell, xi = self.locate(np.where(inside, y, 0.0))
        local = self.cell_values(coeffs)[cell]
        vals = np.stack([eval_basis(a, xi)[0] for a in range(3)], axis=-1)
        out[inside] = np.sum(local * vals, axis=-1)[inside]
        return out

    def interpolate(self, f):
        """Nodal interpolant of a vectorized function of the dimensionless coordinate."""
        return np.asarray(f(self.dof_coords), dtype=float)


def build_space(n_vertices: int) -> FeSpace:
    """Build the fixed triangulation of [-1, 1] with ``n_vertices`` vertices.

    DOFs are interleaved left to right (vertex, midpoint, vertex, ...), which
    keeps every assembled operator within half-bandwidth 2. The vertex count
    must be odd so that doubling the semidiameter maps DOFs onto DOFs.
    """
    if isinstance(n_vertices, bool) or int(n_vertices) != n_vertices:
        raise ConfigError(f"n_vertices must be an integer, got {n_vertices!r}")
    n_vertices = int(n_vertices)
    if n_vertices < 3 or n_vertices % 2 == 0:
        raise ConfigError(f"n_vertices must be odd and >= 3, got {n_vertices}")
    n_cells = n_vertices - 1
    n_dofs = 2 * n_vertices - 1
    spacing = 1.0 / (n_vertices - 1)
    dof_coords = -1.0 + np.arange(n_dofs) * spacing
    dof_coords[-1] = 1.0
    cell_dofs = 2 * np.arange(n_cells)[:, None] + np.arange(3)[None, :]
    quad = make_quadrature()
    phi_q, dphi_q = basis_table(quad.points)
    for arr in (dof_coords, cell_dofs, phi_q, dphi_q):
        arr.flags.writeable = False
    return FeSpace(
        n_vertices=n_vertices,
        n_cells=n_cells,
        n_dofs=n_dofs,
        cell_length=2.0 * spacing,
        dof_coords=dof_coords,
        cell_dofs=cell_dofs,
        quadrature=quad,
        phi_q=phi_q,
        dphi_q=dphi_q,
    )
