"""Discrete Wentzell Bi-Laplacian: form, operator blocks and spectrum.

A single P1 nodal vector ``u`` represents the pair ``(u1, u2)`` with ``u2``
the boundary nodal values, so the trace coupling of the form domain is built
in. The Laplacian is the variational Neumann Laplacian ``z = -M^{-1} K u``
and the form is

    a(u, v) = z_u^T M_alpha z_v + u^T B_{gamma/beta} v,

with the product-space inner product ``M_H = M + B_{1/beta}``.

Spectrum
--------
The form minus its lower bound ``gamma0 * M_H`` is a sum of squares,

    A - gamma0 M_H = G^T G,   G = [R_alpha W ; S_{(gamma-gamma0)/beta} ; sqrt(-gamma0) R_M],

so with ``M_H = L L^T`` the pencil eigenvalues are ``gamma0 + s_k**2`` where
``s_k`` are the singular values of ``G L^{-T}``. Working with the factor keeps
the low eigenvalues accurate to roughly ``eps * sqrt(lambda_max)`` in the
square root instead of ``eps * lambda_max``, which is what separates the
constant mode from zero at desk-scale resolutions.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import (
    assemble_boundary_mass,
    assemble_mass,
    assemble_stiffness,
    boundary_mass_factor,
)
from .coefficients import CallableField, ProblemData, check_hypothesis, quadrature_degree
from .exceptions import AmbiguousKernelError, FactorizationError, FluxRecoveryError, WentzellError

DEFAULT_MAX_NODES = 8192

EIG_RESIDUAL_TOL = 1e-8
ORTHONORMALITY_TOL = 1e-10
ZERO_BAND = 1e-9


def _ratio_field(num, den):
    """Pointwise ``num / den`` as a field (used for gamma/beta and 1/beta)."""
    degree = getattr(num, "degree", 0) + 2 * getattr(den, "degree", 0)
    return CallableField(lambda p: num(p) / den(p), degree=degree)


def _spd_splu(A: sp.spmatrix, what: str):
    """Sparse LU without pivoting; positive pivots certify that ``A`` is SPD."""
    try:
        lu = spla.splu(sp.csc_matrix(A), permc_spec="MMD_AT_PLUS_A",
                       diag_pivot_thresh=0.0, options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise FactorizationError(f"{what} is singular: {exc}") from exc
    piv = lu.U.diagonal()
    if np.any(piv <= 0) or not np.all(np.isfinite(piv)):
        raise FactorizationError(f"{what} is not symmetric positive definite")
    return lu


@dataclass(frozen=True, eq=False)
class DiscreteWentzellOperator:
    """Assembled matrices of the discrete form and its Hilbert space.

    Create with :func:`build_operator`. Dense derived objects (the discrete
    Laplacian matrix ``W``, the form matrix ``A_form`` and the Cholesky factor
    of ``M_H``) are computed on first use and cached.
    """

    mesh: object
    data: ProblemData
    M: sp.csr_matrix
    K: sp.csr_matrix
    M_alpha: sp.csr_matrix
    B_one: sp.csr_matrix
    B_beta_inv: sp.csr_matrix
    B_gamma_beta: sp.csr_matrix
    M_H: sp.csr_matrix
    gamma_min: float
    gamma_max: float
    _M_lu: object = field(repr=False)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def gamma0(self) -> float:
        """Lower bound ``min(min gamma, 0)`` of the form relative to ``M_H``."""
        return min(self.gamma_min, 0.0)

    @property
    def gamma_is_zero(self) -> bool:
        return self.gamma_min == 0.0 and self.gamma_max == 0.0

    @property
    def ones(self) -> np.ndarray:
        return np.ones(self.n)

    # -- solves ----------------------------------------------------------------
    def solve_M(self, rhs):
        return self._M_lu.solve(np.asarray(rhs, dtype=float))

    def neumann_laplacian(self, u):
        """``z`` with ``M z = -K u``; accepts vectors or column stacks."""
        u = np.asarray(u, dtype=float)
        return self.solve_M(-(self.K @ u))

    @cached_property
    def W(self) -> np.ndarray:
        """Dense matrix of ``u -> z`` (built from factorized solves)."""
        return self.solve_M(-self.K.toarray())

    @cached_property
    def A_form(self) -> np.ndarray:
        W = self.W
        A = W.T @ (self.M_alpha @ W) + self.B_gamma_beta.toarray()
        return 0.5 * (A + A.T)

    @cached_property
    def MH_cholesky(self) -> np.ndarray:
        try:
            return sla.cholesky(self.M_H.toarray(), lower=True)
        except sla.LinAlgError as exc:
            raise FactorizationError(f"M_H is not positive definite: {exc}") from exc

    @cached_property
    def _MI_lu(self):
        idx = self.mesh.interior_nodes
        return _spd_splu(self.M[idx][:, idx], "interior mass block") if idx.size else None

    @cached_property
    def _boundary_lus(self):
        b = self.mesh.boundary_nodes
        return (_spd_splu(self.B_one[b][:, b], "boundary mass"),
                _spd_splu(self.B_beta_inv[b][:, b], "weighted boundary mass"))

    # -- forms -----------------------------------------------------------------
    def form(self, u, v=None) -> float:
        """Value of the discrete form ``a(u, v)`` (``a(u, u)`` if ``v`` is None).

        Evaluated through the Laplacian data, never through ``A_form``, so the
        kernel is resolved to rounding of ``K u``.
        """
        u = np.asarray(u, dtype=float)
        zu = self.neumann_laplacian(u)
        if v is None:
            v, zv = u, zu
        else:
            v = np.asarray(v, dtype=float)
            zv = self.neumann_laplacian(v)
        return float(zu @ (self.M_alpha @ zv) + u @ (self.B_gamma_beta @ v))

    def h_inner(self, u, v):
        return np.asarray(u).T @ (self.M_H @ np.asarray(v))

    def h_norm(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(np.sqrt(max(u @ (self.M_H @ u), 0.0)))

    def interior_integral(self, u) -> float:
        return float(self.ones @ (self.M @ u))

    def boundary_integral(self, u, weighted=False) -> float:
        B = self.B_beta_inv if weighted else self.B_one
        return float(self.ones @ (B @ u))


def build_operator(mesh, data: ProblemData | None = None, max_nodes: int = DEFAULT_MAX_NODES
                   ) -> DiscreteWentzellOperator:
    """Assemble the discrete form, the product-space mass and the factorizations."""
    data = ProblemData() if data is None else data
    if mesh.n_nodes > max_nodes:
        raise WentzellError(f"{mesh.n_nodes} nodes exceed the dense cap of {max_nodes}")
    check_hypothesis(mesh, data)

    M = assemble_mass(mesh, 1.0)
    K = assemble_stiffness(mesh)
    M_alpha = assemble_mass(mesh, data.alpha)
    B_one = assemble_boundary_mass(mesh, 1.0)
    B_beta_inv = assemble_boundary_mass(mesh, _ratio_field(lambda p: np.ones(len(p)), data.beta))
    B_gamma_beta = assemble_boundary_mass(mesh, _ratio_field(data.gamma, data.beta))
    M_H = (M + B_beta_inv).tocsr()

    pts, _, _ = mesh.facet_quadrature(quadrature_degree(data.gamma))
    gvals = data.gamma(pts.reshape(-1, mesh.dimension))
    M_lu = _spd_splu(M, "mass matrix M")
    return DiscreteWentzellOperator(
        mesh=mesh, data=data, M=M, K=K, M_alpha=M_alpha, B_one=B_one,
        B_beta_inv=B_beta_inv, B_gamma_beta=B_gamma_beta, M_H=M_H,
        gamma_min=float(gvals.min()), gamma_max=float(gvals.max()), _M_lu=M_lu,
    )


def discrete_neumann_laplacian(op: DiscreteWentzellOperator, u) -> np.ndarray:
    """Variational Neumann Laplacian: solves ``M z = -K u``."""
    u = np.asarray(u, dtype=float)
    if u.shape[0] != op.n:
        raise ValueError(f"vector of length {u.shape[0]} does not match {op.n} nodes")
    return op.neumann_laplacian(u)


def rayleigh_quotient(op: DiscreteWentzellOperator, u) -> float:
    u = np.asarray(u, dtype=float)
    denom = float(u @ (op.M_H @ u))
    if not denom > 0:
        raise ValueError("Rayleigh quotient of the zero vector")
    return op.form(u) / denom


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending eigenpairs of ``A_form e = lambda M_H e``; columns are M_H-orthonormal."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    operator: DiscreteWentzellOperator
    residuals: np.ndarray

    @property
    def k_max(self) -> int:
        return len(self.eigenvalues)

    @property
    def is_complete(self) -> bool:
        return self.k_max == self.operator.n

    def coefficients(self, f) -> np.ndarray:
        """``<f, e_k>_H`` for a vector or a column stack ``f``."""
        return self.eigenvectors.T @ (self.operator.M_H @ np.asarray(f, dtype=float))

    def orthonormality_error(self) -> float:
        E = self.eigenvectors
        G = E.T @ (self.operator.M_H @ E)
        return float(np.max(np.abs(G - np.eye(G.shape[0]))))

    def clusters(self, rel_gap: float = 1e-8) -> list[list[int]]:
        """Index groups of numerically coincident eigenvalues."""
        lam = self.eigenvalues
        groups = [[0]] if len(lam) else []
        for k in range(1, len(lam)):
            scale = max(abs(lam[k]), abs(lam[k - 1]), 1.0)
            if lam[k] - lam[k - 1] < rel_gap * scale:
                groups[-1].append(k)
            else:
                groups.append([k])
        return groups

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "lambda_k", "residual_k"])
            for k, (lam, r) in enumerate(zip(self.eigenvalues, self.residuals), start=1):
                w.writerow([k, f"{lam:.17g}", f"{r:.17g}"])

    def eigenvectors_to_json(self, path, count: int | None = None) -> None:
        E = self.eigenvectors[:, :count]
        with open(path, "w") as fh:
            json.dump([[float(f"{x:.17g}") for x in col] for col in E.T], fh)


def _svd(C):
    try:
        return sla.svd(C, full_matrices=False, lapack_driver="gesdd")
    except sla.LinAlgError:
        try:
            return sla.svd(C, full_matrices=False, lapack_driver="gesvd")
        except sla.LinAlgError as exc:
            raise WentzellError(f"singular value iteration did not converge: {exc}") from exc


def eigen_residuals(op: DiscreteWentzellOperator, lam, E) -> np.ndarray:
    """Backward-error residuals ``|A e - lam M_H e| / ((|A| + |lam| |M_H|) |e|)``."""
    A = op.A_form
    nA = np.linalg.norm(A, 1)
    nM = spla.norm(op.M_H, 1)
    R = A @ E - (op.M_H @ E) * lam[None, :]
    return np.linalg.norm(R, axis=0) / ((nA + np.abs(lam) * nM) * np.linalg.norm(E, axis=0))


def solve_spectrum(op: DiscreteWentzellOperator, k: int | None = None) -> SpectralDecomposition:
    """First ``k`` eigenpairs (all of them by default), ascending and M_H-orthonormal."""
    n = op.n
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    g0 = op.gamma0
    mesh, data = op.mesh, op.data

    try:
        R_alpha = sla.cholesky(op.M_alpha.toarray(), lower=False)
    except sla.LinAlgError as exc:
        raise FactorizationError(f"alpha-weighted mass is not positive definite: {exc}") from exc
    blocks = [R_alpha @ op.W]
    shifted = CallableField(lambda p: (data.gamma(p) - g0) / data.beta(p),
                            degree=data.gamma.degree + 2 * data.beta.degree)
    blocks.append(boundary_mass_factor(mesh, shifted).toarray())
    if g0 < 0:
        R_M = sla.cholesky(op.M.toarray(), lower=False)
        blocks.append(np.sqrt(-g0) * R_M)
    G = np.vstack(blocks)

    L = op.MH_cholesky
    C = sla.solve_triangular(L, G.T, lower=True).T  # G L^{-T}
    _, s, Vt = _svd(C)
    order = np.argsort(s)[:k]
    lam = g0 + s[order] ** 2
    E = sla.solve_triangular(L.T, Vt[order].T, lower=False)
    return SpectralDecomposition(lam, E, op, eigen_residuals(op, lam, E))


# -- weak Neumann trace and Green's identity ---------------------------------

def boundary_flux_recovery(op: DiscreteWentzellOperator, u, z, check: bool = True,
                           tol: float = 1e-8) -> np.ndarray:
    """Variational Neumann trace ``g`` of ``u`` given its Laplacian datum ``z``.

    Solves ``B_1 g = (M z + K u)`` on boundary rows. Interior rows of
    ``M z + K u`` must vanish (relative ``tol``) for ``z`` to be a Laplacian
    of ``u``; otherwise :class:`FluxRecoveryError` is raised. The result is a
    node-length vector supported on boundary nodes.
    """
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    if u.shape != (op.n,) or z.shape != (op.n,):
        raise ValueError("u and z must be nodal vectors")
    Mz = op.M @ z
    Ku = op.K @ u
    r = Mz + Ku
    if check:
        inner = op.mesh.interior_nodes
        scale = np.linalg.norm(Mz) + np.linalg.norm(Ku)
        res = np.linalg.norm(r[inner])
        if res > tol * max(scale, np.finfo(float).tiny):
            raise FluxRecoveryError(
                f"interior residual {res:.3e} exceeds {tol:g} x {scale:.3e}; "
                "z is not a discrete Laplacian of u")
    b = op.mesh.boundary_nodes
    g = np.zeros(op.n)
    g[b] = op._boundary_lus[0].solve(r[b])
    return g


def green_identity_residual(op: DiscreteWentzellOperator, u, z_u, v, z_v=None,
                            return_scale: bool = False):
    """``|<z_u, v> - <u, z_v> - <g, tr v>_Gamma|`` with ``g`` the flux of ``u``.

    ``z_v`` defaults to the Neumann Laplacian of ``v``. With
    ``return_scale=True`` also returns the sum of the magnitudes of the three
    terms, the natural yardstick for the residual.
    """
    v = np.asarray(v, dtype=float)
    if z_v is None:
        z_v = op.neumann_laplacian(v)
    g = boundary_flux_recovery(op, u, z_u)
    t1 = float(np.asarray(z_u) @ (op.M @ v))
    t2 = float(np.asarray(u) @ (op.M @ np.asarray(z_v)))
    t3 = float(g @ (op.B_one @ v))
    res = abs(t1 - t2 - t3)
    if return_scale:
        return res, abs(t1) + abs(t2) + abs(t3)
    return res


def apply_operator_blocks(op: DiscreteWentzellOperator, u):
    """Operator-matrix action on ``u``: interior ``Delta w`` and boundary ``-beta d_nu w + gamma u``.

    Here ``z`` is the Neumann Laplacian of ``u`` and ``w = M^{-1} M_alpha z`` the
    L2 projection of ``alpha z``. The interior block is the representative of
    ``Delta w`` against interior test functions (zero at boundary nodes); the
    flux of ``w`` then follows from the boundary rows. Both blocks are
    node-length vectors, and for every ``v``

        interior^T M v + boundary^T B_{1/beta} v == v^T A_form u.
    """
    u = np.asarray(u, dtype=float)
    z = op.neumann_laplacian(u)
    w = op.solve_M(op.M_alpha @ z)
    inner = op.mesh.interior_nodes
    b = op.mesh.boundary_nodes
    Kw = op.K @ w
    y = np.zeros(op.n)
    if inner.size:
        y[inner] = op._MI_lu.solve(-Kw[inner])
    g = boundary_flux_recovery(op, w, y, check=False)
    rhs = -(op.B_one @ g) + op.B_gamma_beta @ u
    boundary = np.zeros(op.n)
    boundary[b] = op._boundary_lus[1].solve(rhs[b])
    return y, boundary


def blocks_pairing(op: DiscreteWentzellOperator, blocks, v) -> float:
    """Product-space pairing ``<(b1, b2), (v, tr v)>_H`` of operator blocks with ``v``."""
    b1, b2 = blocks
    v = np.asarray(v, dtype=float)
    return float(b1 @ (op.M @ v) + b2 @ (op.B_beta_inv @ v))


# -- kernel classification ---------------------------------------------------

class KernelClass(str, enum.Enum):
    ZERO_CONSTANT_KERNEL = "ZeroEigenvalueConstantKernel"
    STRICTLY_POSITIVE = "StrictlyPositive"
    NEGATIVE_FIRST_EIGENVALUE = "NegativeFirstEigenvalue"


def relative_spread(v) -> float:
    v = np.asarray(v, dtype=float)
    return float((v.max() - v.min()) / np.max(np.abs(v)))


def kernel_classify(op: DiscreteWentzellOperator, spectrum: SpectralDecomposition,
                    data: ProblemData | None = None, spread_tol: float = 1e-6) -> KernelClass:
    """Sign class of the first eigenvalue, with the constant-kernel check."""
    if spectrum.k_max < 2:
        raise ValueError("classification needs at least two eigenvalues")
    lam1, lam2 = spectrum.eigenvalues[:2]
    band = ZERO_BAND * max(lam2, 1.0)
    if lam1 > band:
        return KernelClass.STRICTLY_POSITIVE
    if lam1 < -band:
        return KernelClass.NEGATIVE_FIRST_EIGENVALUE
    spread = relative_spread(spectrum.eigenvectors[:, 0])
    if spread > spread_tol:
        raise AmbiguousKernelError(
            f"lambda_1 = {lam1:.3e} lies in the zero band {band:.3e} but the "
            f"eigenvector spread is {spread:.3e}")
    return KernelClass.ZERO_CONSTANT_KERNEL
