"""P1 finite element matrices.

All matrices live at full node dimension, so interior and boundary forms add
directly. Weighted masses use a quadrature rule exact for the weight's
polynomial degree plus two.

Besides the matrices themselves, :func:`mass_factor` returns a sparse
quadrature-point square root ``Q`` with ``Q.T @ Q == M_w``; the spectral
solver uses it to work with the form as a sum of squares.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .coefficients import as_field, quadrature_degree
from .exceptions import MeshError


def _symmetric_csr(rows, cols, vals, n) -> sp.csr_matrix:
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    A = 0.5 * (A + A.T)
    return A.tocsr()


def _weighted_local(quad, conn, field, n, eval_shape):
    pts, wts, phi = quad
    vals = field(pts.reshape(-1, eval_shape)).reshape(wts.shape)
    local = np.einsum("eq,qa,qb->eab", wts * vals, phi, phi)
    k = conn.shape[1]
    rows = np.repeat(conn, k, axis=1).ravel()
    cols = np.tile(conn, (1, k)).ravel()
    return _symmetric_csr(rows, cols, local.ravel(), n)


def assemble_mass(mesh, weight=1.0) -> sp.csr_matrix:
    """``M_w[i, j] = int_Omega w phi_i phi_j dx``."""
    field = as_field(weight)
    quad = mesh.element_quadrature(quadrature_degree(field))
    return _weighted_local(quad, mesh.elements, field, mesh.n_nodes, mesh.dimension)


def assemble_boundary_mass(mesh, weight=1.0) -> sp.csr_matrix:
    """``B_w[i, j] = int_Gamma w phi_i phi_j dS``, supported on boundary nodes.

    In 1D this is diagonal with the weight's endpoint values.
    """
    field = as_field(weight)
    quad = mesh.facet_quadrature(quadrature_degree(field))
    return _weighted_local(quad, mesh.boundary_facets, field, mesh.n_nodes, mesh.dimension)


def p1_gradients(mesh) -> np.ndarray:
    """Constant P1 gradients per element, shape (n_elements, d + 1, d)."""
    p = mesh.nodes[mesh.elements]
    if mesh.dimension == 1:
        h = p[:, 1, 0] - p[:, 0, 0]
        if np.any(h <= 0):
            raise MeshError("degenerate element")
        g = np.stack([-1.0 / h, 1.0 / h], axis=1)
        return g[:, :, None]
    J = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # columns are edge vectors
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    if np.any(det <= 0):
        raise MeshError("degenerate element")
    Jinv_T = np.stack(
        [np.stack([J[:, 1, 1], -J[:, 1, 0]], axis=1),
         np.stack([-J[:, 0, 1], J[:, 0, 0]], axis=1)], axis=1) / det[:, None, None]
    ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    return np.einsum("eij,aj->eai", Jinv_T, ref)


def assemble_stiffness(mesh) -> sp.csr_matrix:
    """``K[i, j] = int_Omega grad phi_i . grad phi_j dx``."""
    g = p1_gradients(mesh)
    meas = mesh.element_measures()
    local = meas[:, None, None] * np.einsum("eai,ebi->eab", g, g)
    conn = mesh.elements
    k = conn.shape[1]
    rows = np.repeat(conn, k, axis=1).ravel()
    cols = np.tile(conn, (1, k)).ravel()
    return _symmetric_csr(rows, cols, local.ravel(), mesh.n_nodes)


def _factor_rows(quad, conn, field, n, eval_shape):
    pts, wts, phi = quad
    vals = field(pts.reshape(-1, eval_shape)).reshape(wts.shape)
    scaled = wts * vals
    if np.any(scaled < 0):
        raise ValueError("a square-root factor needs a nonnegative weight")
    root = np.sqrt(scaled)  # (e, q)
    ne, nq = root.shape
    k = conn.shape[1]
    data = (root[:, :, None] * phi[None, :, :]).ravel()
    rows = np.repeat(np.arange(ne * nq), k)
    cols = np.repeat(conn, nq, axis=0).ravel()
    return sp.csr_matrix((data, (rows, cols)), shape=(ne * nq, n))


def mass_factor(mesh, weight=1.0) -> sp.csr_matrix:
    """Sparse ``Q`` with ``Q.T @ Q`` equal to :func:`assemble_mass` (weight >= 0)."""
    field = as_field(weight)
    quad = mesh.element_quadrature(quadrature_degree(field))
    return _factor_rows(quad, mesh.elements, field, mesh.n_nodes, mesh.dimension)


def boundary_mass_factor(mesh, weight=1.0) -> sp.csr_matrix:
    """Boundary counterpart of :func:`mass_factor`."""
    field = as_field(weight)
    quad = mesh.facet_quadrature(quadrature_degree(field))
    return _factor_rows(quad, mesh.boundary_facets, field, mesh.n_nodes, mesh.dimension)
