"""Large-gamma behaviour: sweeps over constant gamma and the clamped limit.

As gamma grows the boundary penalty forces the trace of the first eigenvector
to zero, and ``lambda_1`` increases toward the first eigenvalue of the clamped
problem. A sweep records, per rung ``g``, ``lambda_1``, the boundary norm of
the H-normalized first eigenvector, and the gap to a clamped reference.

``|e_1|_Gamma|^2 <= lambda_1 / g`` follows from ``a(e_1) = lambda_1`` and
``a(e_1) >= g |e_1|_Gamma|^2`` (beta == 1).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .coefficients import ProblemData
from .exceptions import ConfigError, FactorizationError, WentzellError
from .oracle import clamped_beam_eigenvalues
from .spectral import build_operator, solve_spectrum

TRACE_SLACK = 1e-10


@dataclass(frozen=True)
class GammaSweepConfig:
    mesh: object
    ladder: tuple
    alpha: float = 1.0
    eta: float = 1e-3
    eigencount: int = 1

    def __post_init__(self):
        ladder = tuple(float(g) for g in self.ladder)
        if not ladder:
            raise ConfigError("gamma ladder is empty")
        if ladder[0] <= 0 or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError(f"gamma ladder must be positive and strictly increasing: {ladder}")
        if self.eigencount < 1:
            raise ConfigError("eigencount must be at least 1")
        object.__setattr__(self, "ladder", ladder)

    def problem(self, g: float) -> ProblemData:
        # beta is fixed to 1 in sweep mode
        return ProblemData(alpha=self.alpha, beta=1.0, gamma=g, eta=self.eta)


@dataclass
class GammaSweepReport:
    ladder: np.ndarray
    lambda1: np.ndarray
    trace_norm: np.ndarray          # |e_1 on Gamma|, not squared
    bound_rhs: np.ndarray           # sqrt(lambda_1 / g + slack)
    clamped_ref: float
    clamped_discrete: np.ndarray
    eigenvalues: np.ndarray         # (rungs, eigencount)
    reference_kind: str = "discrete"
    eigenvectors: list = field(default_factory=list, repr=False)

    @property
    def gap(self) -> np.ndarray:
        return self.clamped_ref - self.lambda1

    @property
    def strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self.lambda1) > 0))

    @property
    def trace_bound_holds(self) -> np.ndarray:
        return self.trace_norm ** 2 <= self.lambda1 / self.ladder + TRACE_SLACK

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["g_n", "lambda1", "trace_norm", "bound_rhs", "clamped_ref", "gap"])
            for row in zip(self.ladder, self.lambda1, self.trace_norm, self.bound_rhs, self.gap):
                g, lam, tn, rhs, gap = row
                w.writerow([f"{x:.17g}" for x in (g, lam, tn, rhs, self.clamped_ref, gap)])


def clamped_reference_2d(mesh, eigencount: int, alpha=1.0) -> np.ndarray:
    """Discrete clamped eigenvalues on ``mesh`` (works in 1D as well).

    Boundary nodal values are fixed to zero; the Laplacian keeps the
    variational Neumann construction on the full space, which enforces the
    normal derivative condition weakly. The pencil is ``(W_I^T M_alpha W_I, M_II)``.
    """
    op = build_operator(mesh, ProblemData(alpha=alpha, beta=1.0, gamma=0.0,
                                          eta=min(1e-3, _min_value(alpha))))
    inner = mesh.interior_nodes
    if inner.size == 0:
        raise WentzellError("the mesh has no interior nodes to carry a clamped mode")
    if not 1 <= eigencount <= inner.size:
        raise ValueError(f"eigencount must lie in [1, {inner.size}]")
    try:
        R = sla.cholesky(op.M_alpha.toarray(), lower=False)
        L = sla.cholesky(op.M[inner][:, inner].toarray(), lower=True)
    except sla.LinAlgError as exc:
        raise FactorizationError(f"clamped reference: {exc}") from exc
    G = R @ op.W[:, inner]
    C = sla.solve_triangular(L, G.T, lower=True).T
    s = sla.svd(C, compute_uv=False)
    if s.min() <= 0:
        raise WentzellError("clamped system lost rank")
    return np.sort(s ** 2)[:eigencount]


def _min_value(alpha) -> float:
    return float(alpha) if np.isscalar(alpha) else 1e-3


def run_gamma_sweep(config: GammaSweepConfig, keep_vectors: bool = False) -> GammaSweepReport:
    mesh = config.mesh
    lam1, tnorm, eigs, vecs = [], [], [], []
    for i, g in enumerate(config.ladder):
        try:
            op = build_operator(mesh, config.problem(g))
            spec = solve_spectrum(op, max(config.eigencount, 1))
        except WentzellError as exc:
            raise type(exc)(f"rung {i} (g = {g:g}): {exc}") from exc
        e1 = spec.eigenvectors[:, 0]
        lam1.append(spec.eigenvalues[0])
        tnorm.append(np.sqrt(max(float(e1 @ (op.B_beta_inv @ e1)), 0.0)))
        eigs.append(spec.eigenvalues[: config.eigencount])
        if keep_vectors:
            vecs.append(e1)
    lam1 = np.array(lam1)
    ladder = np.array(config.ladder)
    discrete = clamped_reference_2d(mesh, config.eigencount, config.alpha)
    if mesh.dimension == 1:
        length = float(np.ptp(mesh.nodes[:, 0]))
        ref, kind = float(clamped_beam_eigenvalues(config.alpha, length, 1)[0]), "analytic"
    else:
        ref, kind = float(discrete[0]), "discrete"
    return GammaSweepReport(
        ladder=ladder, lambda1=lam1, trace_norm=np.array(tnorm),
        bound_rhs=np.sqrt(lam1 / ladder + TRACE_SLACK), clamped_ref=ref,
        clamped_discrete=discrete, eigenvalues=np.array(eigs), reference_kind=kind,
        eigenvectors=vecs,
    )


@dataclass(frozen=True)
class SignCensus:
    positive: int
    negative: int
    zero: int
    min_value: float
    max_value: float
    negative_nodes: np.ndarray = field(repr=False)

    @property
    def one_signed(self) -> bool:
        return self.negative == 0 or self.positive == 0


def sign_structure(eigenvector, op, nodes=None, zero_tol: float = 0.0) -> SignCensus:
    """Nodal sign census after flipping so that ``<e, 1>_H >= 0``.

    ``op`` supplies the H inner product (anything with ``M_H``, or a plain
    mass matrix). ``nodes`` restricts the census, e.g. to interior nodes.
    """
    e = np.asarray(eigenvector, dtype=float)
    MH = getattr(op, "M_H", op)
    if float(np.ones(e.size) @ (MH @ e)) < 0:
        e = -e
    idx = np.arange(e.size) if nodes is None else np.asarray(nodes)
    v = e[idx]
    scale = np.max(np.abs(v)) if v.size else 0.0
    thr = zero_tol * scale
    pos, neg = v > thr, v < -thr
    return SignCensus(int(pos.sum()), int(neg.sum()), int(v.size - pos.sum() - neg.sum()),
                      float(v.min()), float(v.max()), idx[neg])


def clamped_first_mode(mesh, alpha=1.0) -> np.ndarray:
    """First discrete clamped eigenvector, zero-extended to all nodes."""
    op = build_operator(mesh, ProblemData(alpha=alpha, beta=1.0, gamma=0.0,
                                          eta=min(1e-3, _min_value(alpha))))
    inner = mesh.interior_nodes
    R = sla.cholesky(op.M_alpha.toarray(), lower=False)
    L = sla.cholesky(op.M[inner][:, inner].toarray(), lower=True)
    C = sla.solve_triangular(L, (R @ op.W[:, inner]).T, lower=True).T
    _, s, Vt = sla.svd(C, full_matrices=False)
    v = sla.solve_triangular(L.T, Vt[np.argmin(s)], lower=False)
    out = np.zeros(mesh.n_nodes)
    out[inner] = v
    return out


@dataclass
class MonotonicityReport:
    ladder: np.ndarray
    eigenvalues: np.ndarray     # (rungs, count)
    slack: float

    @property
    def worst_drop(self) -> float:
        """Largest decrease of any lambda_k between consecutive rungs, scaled."""
        lam = self.eigenvalues
        drop = (lam[:-1] - lam[1:]) / np.maximum(1.0, np.abs(lam[:-1]))
        return float(drop.max()) if drop.size else 0.0

    @property
    def holds(self) -> bool:
        return self.worst_drop <= self.slack


def gamma_monotonicity(mesh, ladder, data: ProblemData | None = None, count: int | None = None,
                       slack: float = 1e-10) -> MonotonicityReport:
    """Eigenvalues along an increasing ladder of constant gamma values.

    Unlike a sweep, the ladder may contain zero or negative values and beta
    is taken from ``data``. A drop counts against ``slack`` relative to
    ``max(1, |lambda_k|)``.
    """
    ladder = np.asarray(ladder, dtype=float)
    if ladder.size < 2 or np.any(np.diff(ladder) <= 0):
        raise ConfigError("the ladder needs at least two strictly increasing values")
    data = ProblemData() if data is None else data
    rows = []
    for g in ladder:
        op = build_operator(mesh, data.with_gamma(float(g)))
        rows.append(solve_spectrum(op, count).eigenvalues)
    return MonotonicityReport(ladder, np.array(rows), slack)
