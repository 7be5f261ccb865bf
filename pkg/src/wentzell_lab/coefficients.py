"""Coefficient fields alpha, beta, gamma and the ellipticity hypothesis.

Fields are either constants or polynomials in the coordinates, so a scenario
can be serialized as plain JSON::

    {"kind": "constant", "coeffs": [3.5]}
    {"kind": "polynomial", "coeffs": [1.0, 0.0, 2.0]}        # 1 + 2 x**2
    {"kind": "polynomial", "coeffs": [[1.0, 1, 0], [2.0, 0, 2]]}  # x + 2 y**2

A flat coefficient list is read as ascending powers of the first coordinate;
a list of ``[c, p_x, p_y, ...]`` rows is a sum of monomials.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import FieldError, HypothesisError

_KINDS = ("constant", "polynomial")


@dataclass(frozen=True)
class FieldSpec:
    kind: str
    coeffs: tuple

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise FieldError(f"unknown field kind {self.kind!r}; expected one of {_KINDS}")
        coeffs = self.coeffs
        if np.isscalar(coeffs):
            coeffs = [coeffs]
        coeffs = list(coeffs)
        if not coeffs:
            raise FieldError("a field needs at least one coefficient")
        if self.kind == "constant":
            if len(coeffs) != 1 or not np.isscalar(coeffs[0]):
                raise FieldError("a constant field takes exactly one number")
            norm = (float(coeffs[0]),)
        elif all(np.isscalar(c) for c in coeffs):
            norm = tuple((float(c), p) for p, c in enumerate(coeffs))
        else:
            terms = []
            for t in coeffs:
                t = list(t)
                if len(t) < 2 or any(int(p) != p or p < 0 for p in t[1:]):
                    raise FieldError(f"bad polynomial term {t!r}")
                terms.append((float(t[0]), *(int(p) for p in t[1:])))
            norm = tuple(terms)
        object.__setattr__(self, "coeffs", norm)

    @classmethod
    def constant(cls, value: float) -> "FieldSpec":
        return cls("constant", (value,))

    @classmethod
    def from_dict(cls, data) -> "FieldSpec":
        if isinstance(data, FieldSpec):
            return data
        if not isinstance(data, dict) or "kind" not in data:
            raise FieldError(f"field spec must be a dict with 'kind', got {data!r}")
        return cls(data["kind"], data.get("coeffs", data.get("parameters", ())))

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "coeffs": [self.coeffs[0]]}
        return {"kind": "polynomial", "coeffs": [list(t) for t in self.coeffs]}

    @property
    def degree(self) -> int:
        if self.kind == "constant":
            return 0
        return max(sum(t[1:]) for t in self.coeffs)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim <= 1:
            pts = pts.reshape(-1, 1) if pts.ndim == 1 else pts.reshape(1, 1)
        if self.kind == "constant":
            return np.full(pts.shape[0], self.coeffs[0])
        out = np.zeros(pts.shape[0])
        for c, *powers in self.coeffs:
            if len(powers) > pts.shape[1] and any(powers[pts.shape[1]:]):
                raise FieldError(f"term {(c, *powers)} uses more coordinates than the domain has")
            term = np.full(pts.shape[0], c)
            for axis, p in enumerate(powers[: pts.shape[1]]):
                if p:
                    term = term * pts[:, axis] ** p
            out += term
        return out


class CallableField:
    """Wraps a Python callable as a field. Not serializable; library use only."""

    def __init__(self, func: Callable, degree: int = 4):
        self.func = func
        self.degree = degree

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        return np.broadcast_to(np.asarray(self.func(pts), dtype=float), (pts.shape[0],)).copy()


def as_field(obj):
    """Coerce a number, dict, FieldSpec or callable into an evaluable field."""
    if isinstance(obj, (FieldSpec, CallableField)):
        return obj
    if isinstance(obj, dict):
        return FieldSpec.from_dict(obj)
    if np.isscalar(obj):
        return FieldSpec.constant(float(obj))
    if callable(obj):
        return CallableField(obj)
    raise FieldError(f"cannot interpret {obj!r} as a field")


def evaluate_field(spec, point) -> float:
    """Value of ``spec`` at a single point (a number or coordinate tuple)."""
    field = as_field(spec)
    return float(field(np.atleast_1d(np.asarray(point, dtype=float)).reshape(1, -1))[0])


@dataclass(frozen=True)
class ProblemData:
    """Coefficients of the Wentzell problem.

    ``alpha`` lives on the domain, ``beta`` and ``gamma`` on its boundary.
    ``gamma`` has no sign restriction.
    """

    alpha: object = 1.0
    beta: object = 1.0
    gamma: object = 0.0
    eta: float = 1e-3

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, as_field(getattr(self, name)))
        if not self.eta > 0:
            raise FieldError(f"eta must be positive, got {self.eta!r}")

    def with_gamma(self, gamma) -> "ProblemData":
        return ProblemData(self.alpha, self.beta, gamma, self.eta)

    def with_alpha(self, alpha) -> "ProblemData":
        return ProblemData(alpha, self.beta, self.gamma, self.eta)


@dataclass(frozen=True)
class HypothesisReport:
    ok: bool
    field: str | None = None
    location: str | None = None
    point: tuple | None = None
    value: float | None = None

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "hypothesis satisfied"
        return (f"{self.field} = {self.value!r} < eta at {self.location} "
                f"quadrature point {self.point}")


def quadrature_degree(field) -> int:
    """Degree used by assembly for a weighted P1 mass with this weight."""
    return int(getattr(field, "degree", 4)) + 2


def validate_hypothesis(mesh, data: ProblemData) -> HypothesisReport:
    """Check alpha >= eta and beta >= eta at the assembly quadrature points."""
    checks = (
        ("alpha", "interior", data.alpha, mesh.element_quadrature),
        ("beta", "boundary", data.beta, mesh.facet_quadrature),
    )
    for name, where, field, quad in checks:
        pts, _, _ = quad(quadrature_degree(field))
        flat = pts.reshape(-1, mesh.dimension)
        vals = field(flat)
        bad = np.flatnonzero(vals < data.eta)
        if bad.size:
            i = int(bad[0])
            return HypothesisReport(False, name, where, tuple(float(c) for c in flat[i]), float(vals[i]))
    return HypothesisReport(True)


def check_hypothesis(mesh, data: ProblemData) -> None:
    report = validate_hypothesis(mesh, data)
    if not report.ok:
        raise HypothesisError(report)
