"""Semigroup evolution by spectral expansion and positivity diagnostics.

``T(t) f = sum_k exp(-lambda_k t) <f, e_k>_H e_k``. With the full discrete
spectrum this is exact for the discrete operator, so no time stepping is
involved. Vectors are P1 nodal vectors; the boundary component is the
restriction to boundary nodes, except for data produced by
:func:`project_initial_data`, which may carry boundary values unrelated to
the interior function.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .coefficients import as_field, quadrature_degree
from .spectral import DiscreteWentzellOperator, SpectralDecomposition

NEGLIGIBLE = 1e-20


def geometric_time_grid(t_min: float, t_max: float, num: int = 100, include_zero: bool = False
                        ) -> np.ndarray:
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    grid = np.geomspace(t_min, t_max, num)
    return np.concatenate([[0.0], grid]) if include_zero else grid


def project_initial_data(op: DiscreteWentzellOperator, f1, f2) -> np.ndarray:
    """H-orthogonal projection of ``(f1, f2)`` onto the discrete space.

    ``f2`` need not be the trace of ``f1``. Solves ``M_H c = load`` with
    ``load_i = int f1 phi_i dx + int_Gamma f2 phi_i / beta dS``.
    """
    mesh, beta = op.mesh, op.data.beta
    f1, f2 = as_field(f1), as_field(f2)
    n = op.n

    pts, wts, phi = mesh.element_quadrature(quadrature_degree(f1))
    vals = f1(pts.reshape(-1, mesh.dimension)).reshape(wts.shape)
    load = np.zeros(n)
    np.add.at(load, mesh.elements, np.einsum("eq,qa->ea", wts * vals, phi))

    pts, wts, phi = mesh.facet_quadrature(quadrature_degree(f2) + 2 * beta.degree)
    flat = pts.reshape(-1, mesh.dimension)
    vals = (f2(flat) / beta(flat)).reshape(wts.shape)
    np.add.at(load, mesh.boundary_facets, np.einsum("eq,qa->ea", wts * vals, phi))

    import scipy.linalg as sla

    L = op.MH_cholesky
    return sla.cho_solve((L, True), load)


def _modal_weights(lam, t, k_max):
    lam = lam[:k_max]
    expo = -lam * t
    return np.exp(expo)


def semigroup_apply(spectrum: SpectralDecomposition, f, t: float, k_max: int | None = None
                    ) -> np.ndarray:
    """``T(t) f`` truncated to the first ``k_max`` modes (all computed modes by default).

    ``f`` may be a vector or a column stack.
    """
    if t < 0:
        raise ValueError(f"negative time {t!r}")
    k_max = spectrum.k_max if k_max is None else int(k_max)
    E = spectrum.eigenvectors[:, :k_max]
    c = E.T @ (spectrum.operator.M_H @ np.asarray(f, dtype=float))
    w = _modal_weights(spectrum.eigenvalues, t, k_max)
    return E @ (w[:, None] * c if c.ndim == 2 else w * c)


def truncation_tail_bound(spectrum: SpectralDecomposition, f, t: float, k_max: int) -> float:
    """Bound ``exp(-lambda_{k_max+1} t) |f|_H`` on the neglected modes."""
    if k_max >= spectrum.k_max:
        if spectrum.is_complete:
            return 0.0
        raise ValueError("the tail bound needs eigenvalue k_max + 1")
    return float(np.exp(-spectrum.eigenvalues[k_max] * t) * spectrum.operator.h_norm(f))


class _ModalEvaluator:
    """Evaluate ``T(t)`` on a fixed set of initial data at many times.

    Modes with ``exp(-lambda_k t)`` below ``NEGLIGIBLE`` relative to the
    largest weight are skipped; for data of unit size this changes the result
    by less than ``1e-20``.
    """

    def __init__(self, spectrum: SpectralDecomposition, F):
        self.lam = spectrum.eigenvalues
        self.E = spectrum.eigenvectors
        self.C = spectrum.coefficients(F)

    def __call__(self, t: float) -> np.ndarray:
        w = np.exp(-(self.lam - self.lam[0]) * t)
        active = w > NEGLIGIBLE
        w = w[active] * np.exp(-self.lam[0] * t)
        C = self.C[active]
        return self.E[:, active] @ (w[:, None] * C if C.ndim == 2 else w * C)


def steady_state(op: DiscreteWentzellOperator, f) -> np.ndarray:
    """H-orthogonal projection of ``f`` onto the constants (the limit when gamma = 0)."""
    if not op.gamma_is_zero:
        raise ValueError("steady_state is the long-time limit only when gamma == 0")
    f = np.asarray(f, dtype=float)
    one = op.ones
    return (float(one @ (op.M_H @ f)) / float(one @ (op.M_H @ one))) * one


def unweighted_mean_state(op: DiscreteWentzellOperator, f) -> np.ndarray:
    """``(int f1 dx + int f2 dS) / (|Omega| + |Gamma|)`` times the constant function.

    Uses the unweighted surface measure; it equals :func:`steady_state`
    exactly when beta == 1.
    """
    f = np.asarray(f, dtype=float)
    one = op.ones
    num = op.interior_integral(f) + op.boundary_integral(f)
    den = op.interior_integral(one) + op.boundary_integral(one)
    return (num / den) * one


@dataclass
class EnvelopeReport:
    rate: float
    times: np.ndarray
    ratios: np.ndarray
    reference: str

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios))

    def holds(self, slack: float = 1e-10) -> bool:
        return self.max_ratio <= 1.0 + slack


def decay_envelope_check(spectrum: SpectralDecomposition, f, t_grid, mean: str = "projection"
                         ) -> EnvelopeReport:
    """Ratios ``|T(t) f - f_bar|_H exp(rate t) / |f|_H`` over ``t_grid``.

    For gamma == 0 the rate is ``lambda_2`` and ``f_bar`` the constant
    steady state (``mean="projection"`` for the H-projection, ``"unweighted"``
    for the unweighted-measure formula). Otherwise gamma must be nonnegative;
    the rate is ``lambda_1`` and ``f_bar = 0``.
    """
    op = spectrum.operator
    f = np.asarray(f, dtype=float)
    if op.gamma_is_zero:
        rate = float(spectrum.eigenvalues[1])
        fbar = steady_state(op, f) if mean == "projection" else unweighted_mean_state(op, f)
        ref = mean
    else:
        if op.gamma_min < 0:
            raise ValueError("decay envelopes need gamma >= 0")
        rate = float(spectrum.eigenvalues[0])
        fbar = np.zeros_like(f)
        ref = "zero"
    nf = op.h_norm(f)
    evaluate = _ModalEvaluator(spectrum, f)
    times = np.asarray(t_grid, dtype=float)
    ratios = np.array([op.h_norm(evaluate(t) - fbar) * np.exp(rate * t) / nf for t in times])
    return EnvelopeReport(rate, times, ratios, ref)


@dataclass
class GrowthReport:
    lambda1: float
    times: np.ndarray
    operator_norms: np.ndarray
    attained_norms: np.ndarray

    @property
    def max_rel_error(self) -> float:
        return float(np.max(np.abs(self.attained_norms - self.operator_norms) / self.operator_norms))


def growth_check(spectrum: SpectralDecomposition, t_grid) -> GrowthReport:
    """Operator norm ``exp(-lambda_1 t)`` and its attainment at ``e_1``.

    Requires ``lambda_1 < 0`` (unbounded growth).
    """
    lam1 = float(spectrum.eigenvalues[0])
    if lam1 >= 0:
        raise ValueError(f"growth check needs lambda_1 < 0, got {lam1!r}")
    op = spectrum.operator
    times = np.asarray(t_grid, dtype=float)
    e1 = spectrum.eigenvectors[:, 0]
    # the largest exp(-lambda_k t) over the spectrum is the norm of a self-adjoint T(t)
    norms = np.array([np.max(np.exp(-spectrum.eigenvalues * t)) for t in times])
    attained = np.array([op.h_norm(semigroup_apply(spectrum, e1, t)) for t in times])
    return GrowthReport(lam1, times, norms, attained)


# -- positivity ----------------------------------------------------------------

def _check_nonnegative(f):
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("initial datum has a negative node")
    if not np.any(f > 0):
        raise ValueError("initial datum is zero")
    return f


@dataclass(frozen=True)
class PositivityProbe:
    min_value: float
    argmin: int
    t: float


def positivity_probe(spectrum: SpectralDecomposition, f, t: float) -> PositivityProbe:
    """Smallest nodal value of ``T(t) f`` for nonnegative, nonzero ``f``."""
    f = _check_nonnegative(f)
    u = semigroup_apply(spectrum, f, t)
    i = int(np.argmin(u))
    return PositivityProbe(float(u[i]), i, float(t))


def eventual_positivity_threshold(op: DiscreteWentzellOperator, f) -> float:
    """Half the coefficient of the constant limit of ``T(t) f``."""
    one = op.ones
    return 0.5 * float(one @ (op.M_H @ f)) / float(one @ (op.M_H @ one))


def eventual_positivity_time(spectrum: SpectralDecomposition, f, t_max: float,
                             t_resolution: int = 200, t_min: float | None = None):
    """Smallest grid time after which ``min T(t) f`` stays above the threshold.

    The grid is ``0`` followed by ``t_resolution`` geometric points from
    ``t_min`` (default ``1e-6 t_max``) to ``t_max``. Returns ``None`` when even
    ``t_max`` fails. ``f`` may be a column stack, in which case an array of
    times (NaN for not found) is returned.
    """
    op = spectrum.operator
    if not op.gamma_is_zero:
        raise ValueError("eventual positivity is established for gamma == 0")
    F = np.asarray(f, dtype=float)
    single = F.ndim == 1
    F2 = F[:, None] if single else F
    for j in range(F2.shape[1]):
        _check_nonnegative(F2[:, j])
    t_min = t_max * 1e-6 if t_min is None else t_min
    grid = geometric_time_grid(t_min, t_max, t_resolution, include_zero=True)
    eps0 = np.array([eventual_positivity_threshold(op, F2[:, j]) for j in range(F2.shape[1])])
    evaluate = _ModalEvaluator(spectrum, F2)
    ok = np.array([evaluate(t).min(axis=0) >= eps0 for t in grid])  # (times, data)
    # first index from which every later grid time is ok
    suffix_ok = np.flip(np.logical_and.accumulate(np.flip(ok, axis=0), axis=0), axis=0)
    t0 = np.full(F2.shape[1], np.nan)
    for j in range(F2.shape[1]):
        idx = np.flatnonzero(suffix_ok[:, j])
        if idx.size:
            t0[j] = grid[idx[0]]
    if single:
        return None if np.isnan(t0[0]) else float(t0[0])
    return t0


@dataclass(frozen=True)
class Witness:
    index: int
    t: float
    value: float
    f: np.ndarray = field(repr=False)


@dataclass
class NonpositivityReport:
    positivity_witness: Witness | None
    linf_witness: Witness | None
    n_candidates: int
    times: np.ndarray
    max_imag: float = 0.0

    @property
    def searched(self) -> str:
        return (f"{self.n_candidates} candidates x {len(self.times)} times in "
                f"[{self.times.min():.3e}, {self.times.max():.3e}]")


def nonpositivity_search(spectrum: SpectralDecomposition, candidates, t_window,
                         rel_tol: float = 1e-6) -> NonpositivityReport:
    """Search for sign loss and sup-norm growth of ``T(t) f`` over a candidate family.

    ``candidates`` is a column stack (or list) of nonnegative vectors and
    ``t_window`` a sequence of times. A positivity witness has
    ``min T(t) f <= -rel_tol |f|_inf``; an L-infinity witness has
    ``|T(t) f|_inf > (1 + rel_tol) |f|_inf``. The first witness in
    (time, candidate) order is reported for each kind.
    """
    F = np.asarray(candidates, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    elif F.shape[0] != spectrum.operator.n:
        F = F.T
    for j in range(F.shape[1]):
        _check_nonnegative(F[:, j])
    sup = np.max(np.abs(F), axis=0)
    times = np.asarray(t_window, dtype=float)
    evaluate = _ModalEvaluator(spectrum, F)
    pos = linf = None
    max_imag = 0.0
    for t in times:
        U = evaluate(t)
        max_imag = max(max_imag, float(np.max(np.abs(np.imag(U)))))
        if pos is None:
            mins = U.min(axis=0)
            hit = np.flatnonzero(mins <= -rel_tol * sup)
            if hit.size:
                j = int(hit[0])
                pos = Witness(j, float(t), float(mins[j]), F[:, j].copy())
        if linf is None:
            sups = np.max(np.abs(U), axis=0)
            hit = np.flatnonzero(sups > (1 + rel_tol) * sup)
            if hit.size:
                j = int(hit[0])
                linf = Witness(j, float(t), float(sups[j]), F[:, j].copy())
        if pos is not None and linf is not None:
            break
    return NonpositivityReport(pos, linf, F.shape[1], times, max_imag)


def hat_functions(n: int, nodes=None) -> np.ndarray:
    """Nodal hat functions as columns (all nodes, or the given subset)."""
    idx = np.arange(n) if nodes is None else np.asarray(nodes)
    H = np.zeros((n, idx.size))
    H[idx, np.arange(idx.size)] = 1.0
    return H


def step_functions(mesh) -> np.ndarray:
    """Indicators of ``{x_0 <= c}`` interpolated on the nodes, one column per cut."""
    x = mesh.nodes[:, 0]
    cuts = np.unique(x)[1:-1]
    return (x[:, None] <= cuts[None, :]).astype(float)


# -- trajectories ----------------------------------------------------------------

@dataclass
class EvolutionResult:
    times: np.ndarray
    snapshots: np.ndarray   # (len(times), n_nodes)
    h_norm: np.ndarray
    min_value: np.ndarray
    max_value: np.ndarray
    sup_norm: np.ndarray
    tail_bound: np.ndarray | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "h_norm", "min_value", "max_value", "sup_norm"])
            for row in zip(self.times, self.h_norm, self.min_value, self.max_value, self.sup_norm):
                w.writerow([f"{x:.17g}" for x in row])

    def snapshots_to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"t": [float(f"{t:.17g}") for t in self.times],
                       "u": [[float(f"{x:.17g}") for x in s] for s in self.snapshots]}, fh)


def evolve(spectrum: SpectralDecomposition, f, times, k_max: int | None = None) -> EvolutionResult:
    """Trajectory ``t -> T(t) f`` with per-time diagnostics."""
    op = spectrum.operator
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("negative time in grid")
    snaps = np.array([semigroup_apply(spectrum, f, t, k_max) for t in times])
    tail = None
    if k_max is not None and k_max < op.n:
        tail = np.array([truncation_tail_bound(spectrum, f, t, k_max) for t in times])
    return EvolutionResult(
        times=times,
        snapshots=snaps,
        h_norm=np.array([op.h_norm(s) for s in snaps]),
        min_value=snaps.min(axis=1),
        max_value=snaps.max(axis=1),
        sup_norm=np.abs(snaps).max(axis=1),
        tail_bound=tail,
    )
