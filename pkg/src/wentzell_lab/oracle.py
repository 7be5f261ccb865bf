r"""Semi-analytic eigenvalues on an interval.

Boundary conditions in 1D
-------------------------
On ``(0, L)`` with constant coefficients the eigenproblem of the operator
matrix reads ``alpha u'''' = lambda u`` with ``u'(0) = u'(L) = 0`` and, at each
endpoint, ``-beta d_nu(alpha u'') + gamma u = lambda u``. The outward normal
is ``-1`` at ``0`` and ``+1`` at ``L``, so ``d_nu(alpha u'')`` is
``-alpha u'''(0)`` and ``+alpha u'''(L)``. Hence

    beta alpha u'''(0) = (lambda - gamma) u(0),
   -beta alpha u'''(L) = (lambda - gamma) u(L).

The same conditions come out of integrating ``int alpha u'' v''`` by parts
twice against test functions with ``v' = 0`` at the ends, using the counting
measure weighted by ``1/beta`` at the endpoints.

With ``k = (lambda / alpha)**0.25`` the general solution is spanned by
``cos kx, sin kx, cosh kx, sinh kx``. To avoid overflow the hyperbolic pair is
replaced by ``exp(-kx)`` and ``exp(k(x - L))``, a change of basis with a
positive, ``x``-independent determinant factor, so the root set and the sign
pattern between roots are unchanged. Rows are scaled to O(1).

The clamped beam (``u = u' = 0`` at both ends) is the large-gamma limit; its
eigenvalues are ``alpha (k_j / L)**4`` with ``cos k cosh k = 1``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .exceptions import OracleError

GRID_RATIO = 1.02
GRID_START = 1e-6
ROOT_RTOL = 1e-12


@dataclass(frozen=True)
class BeamParams:
    length: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("length must be positive")
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")
        if self.gamma < 0:
            raise ValueError("the oracle covers gamma >= 0 only")


def _char_matrix(p: BeamParams, lam: float) -> np.ndarray:
    L, a, b, g = p.length, p.alpha, p.beta, p.gamma
    k = (lam / a) ** 0.25
    c, s = np.cos(k * L), np.sin(k * L)
    em = np.exp(-k * L)
    # columns: cos kx, sin kx, exp(-kx), exp(k(x - L)); derivative rows divided by k
    du0 = [0.0, 1.0, -1.0, em]
    duL = [-s, c, -em, 1.0]
    # u''' / k^3 at 0 and L
    t0 = np.array([0.0, -1.0, -1.0, em])
    tL = np.array([s, -c, -em, 1.0])
    u0 = np.array([1.0, 0.0, 1.0, em])
    uL = np.array([c, s, em, 1.0])
    bak3 = b * a * k ** 3
    shift = lam - g
    scale = bak3 + abs(shift)
    r0 = (bak3 * t0 - shift * u0) / scale
    rL = (-bak3 * tL - shift * uL) / scale
    return np.array([du0, duL, r0, rL])


def wentzell_char_det(params: BeamParams, lam: float) -> float:
    """Characteristic determinant; its zeros in ``lam > 0`` are the eigenvalues."""
    if not lam > 0:
        raise ValueError("the characteristic determinant is defined for lambda > 0 only")
    return float(np.linalg.det(_char_matrix(params, float(lam))))


def det_scale(params: BeamParams, lam: float) -> float:
    """Hadamard bound (product of row norms) used to judge a near-zero determinant."""
    return float(np.prod(np.linalg.norm(_char_matrix(params, float(lam)), axis=1)))


@dataclass(frozen=True)
class OracleRoot:
    value: float
    bracket_lo: float
    bracket_hi: float
    residual: float


def find_wentzell_roots(params: BeamParams, count: int, lambda_max: float | None = None
                        ) -> list[OracleRoot]:
    """Scan a geometric grid for sign changes and refine each bracket.

    ``lambda = 0`` is prepended (with an empty bracket) when ``gamma == 0``.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    a, L = params.alpha, params.length
    if lambda_max is None:
        lambda_max = a * ((count + 2) * np.pi / L) ** 4 * 4
    roots = []
    if params.gamma == 0:
        roots.append(OracleRoot(0.0, 0.0, 0.0, 0.0))
    lo = GRID_START * a / L ** 4
    f_lo = wentzell_char_det(params, lo)
    while len(roots) < count and lo < lambda_max:
        hi = min(lo * GRID_RATIO, lambda_max)
        f_hi = wentzell_char_det(params, hi)
        if f_lo == 0.0:
            roots.append(OracleRoot(lo, lo, lo, 0.0))
        elif np.sign(f_lo) != np.sign(f_hi) and f_hi != 0.0:
            r = brentq(lambda x: wentzell_char_det(params, x), lo, hi,
                       rtol=ROOT_RTOL, xtol=1e-300, maxiter=500)
            res = abs(wentzell_char_det(params, r)) / det_scale(params, r)
            roots.append(OracleRoot(r, lo, hi, res))
        lo, f_lo = hi, f_hi
    if len(roots) < count:
        raise OracleError(f"found {len(roots)} of {count} eigenvalues below {lambda_max:g}",
                          found=[r.value for r in roots])
    return roots[:count]


def find_wentzell_eigenvalues_1d(params: BeamParams, count: int,
                                 lambda_max: float | None = None) -> np.ndarray:
    """First ``count`` eigenvalues, ascending (0 first when gamma == 0)."""
    return np.array([r.value for r in find_wentzell_roots(params, count, lambda_max)])


def clamped_beam_roots(count: int, delta: float = 0.5) -> np.ndarray:
    """Positive roots ``k_j`` of ``cos k cosh k = 1`` near ``(j + 1/2) pi``."""
    # cos k - 1/cosh k has the same zeros and no overflow
    f = lambda k: np.cos(k) - 1.0 / np.cosh(k)
    out = []
    for j in range(1, count + 1):
        c = (j + 0.5) * np.pi
        out.append(brentq(f, c - delta, c + delta, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return np.array(out)


def clamped_beam_eigenvalues(alpha: float, length: float, count: int) -> np.ndarray:
    """Clamped-beam eigenvalues ``alpha (k_j / L)**4``."""
    return alpha * (clamped_beam_roots(count) / length) ** 4


def roots_to_csv(roots: list[OracleRoot], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "lambda_oracle", "bracket_lo", "bracket_hi", "residual"])
        for i, r in enumerate(roots, start=1):
            w.writerow([i, f"{r.value:.17g}", f"{r.bracket_lo:.17g}",
                        f"{r.bracket_hi:.17g}", f"{r.residual:.17g}"])


@dataclass(frozen=True)
class OracleComparison:
    sizes: tuple
    oracle: np.ndarray
    fem: np.ndarray          # (len(sizes), count)
    rel_errors: np.ndarray   # NaN where the oracle value is 0
    abs_errors: np.ndarray
    orders: np.ndarray       # (len(sizes) - 1, count) observed orders between successive sizes

    def rows(self):
        for i, n in enumerate(self.sizes):
            for k in range(self.oracle.size):
                yield n, k + 1, self.oracle[k], self.fem[i, k], self.abs_errors[i, k], self.rel_errors[i, k]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "k", "lambda_oracle", "lambda_fem", "abs_error", "rel_error"])
            for n, k, o, f, ae, re in self.rows():
                w.writerow([n, k] + [f"{x:.17g}" for x in (o, f, ae, re)])


def compare_fem_oracle(sizes, params: BeamParams, count: int) -> OracleComparison:
    """FEM eigenvalues on uniform meshes of ``(0, L)`` against the oracle."""
    from .coefficients import ProblemData
    from .geometry import build_interval_mesh
    from .spectral import build_operator, solve_spectrum

    sizes = tuple(int(n) for n in sizes)
    oracle = find_wentzell_eigenvalues_1d(params, count)
    eta = min(params.alpha, params.beta)
    data = ProblemData(params.alpha, params.beta, params.gamma, eta)
    fem = np.empty((len(sizes), count))
    for i, n in enumerate(sizes):
        op = build_operator(build_interval_mesh(0.0, params.length, n), data)
        fem[i] = solve_spectrum(op, count).eigenvalues
    abs_err = np.abs(fem - oracle[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(oracle[None, :] != 0, abs_err / np.abs(oracle[None, :]), np.nan)
        h = 1.0 / np.array(sizes, dtype=float)
        orders = np.log(abs_err[:-1] / abs_err[1:]) / np.log(h[:-1, None] / h[1:, None])
    return OracleComparison(sizes, oracle, fem, rel, abs_err, orders)
