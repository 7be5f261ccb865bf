"""Simplicial meshes of the computational domains.

Three structured families are provided: uniform interval meshes, the unit
square split into right triangles along a fixed diagonal, and the regular
``n_sectors``-gon inscribed in the unit circle (a polygonal, hence Lipschitz,
stand-in for the disk). Meshes are immutable once built.

In 1D the boundary is the two endpoints and ``dS`` is the counting measure,
so every boundary integral is a sum of point values.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import MeshError
from .quadrature import (
    interval_rule,
    p1_shape_interval,
    p1_shape_triangle,
    triangle_rule,
)


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Simplicial mesh with its boundary facets.

    Attributes
    ----------
    dimension : int
        1 (intervals) or 2 (triangles).
    nodes : ndarray, shape (n_nodes, dimension)
    elements : ndarray, shape (n_elements, dimension + 1)
        Triangles are stored counterclockwise.
    boundary_facets : ndarray, shape (n_facets, dimension)
    facet_orientation : ndarray, shape (n_facets,)
        In 1D the sign of the outward normal at the endpoint. In 2D ``+1``
        means the facet's node order runs counterclockwise along the
        boundary, so the outward normal is the tangent turned clockwise.
    """

    dimension: int
    nodes: np.ndarray
    elements: np.ndarray
    boundary_facets: np.ndarray
    facet_orientation: np.ndarray
    name: str = field(default="mesh")

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(np.reshape(self.nodes, (len(self.nodes), -1)), float))
        object.__setattr__(self, "elements", _frozen(self.elements, np.int64))
        object.__setattr__(self, "boundary_facets", _frozen(np.reshape(self.boundary_facets, (len(self.boundary_facets), -1)), np.int64))
        object.__setattr__(self, "facet_orientation", _frozen(self.facet_orientation, np.int64))
        self.validate()

    # -- basic sizes ---------------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.boundary_facets)

    @property
    def interior_nodes(self) -> np.ndarray:
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    def element_measures(self) -> np.ndarray:
        """Signed lengths (1D) or signed areas (2D) of the elements."""
        p = self.nodes[self.elements]
        if self.dimension == 1:
            return p[:, 1, 0] - p[:, 0, 0]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def facet_measures(self) -> np.ndarray:
        if self.dimension == 1:
            return np.ones(len(self.boundary_facets))
        p = self.nodes[self.boundary_facets]
        return np.linalg.norm(p[:, 1] - p[:, 0], axis=1)

    def outward_normals(self) -> np.ndarray:
        """Unit outward normal per boundary facet, shape (n_facets, dimension)."""
        if self.dimension == 1:
            return self.facet_orientation.astype(float)[:, None]
        p = self.nodes[self.boundary_facets]
        t = (p[:, 1] - p[:, 0]) * self.facet_orientation[:, None]
        n = np.column_stack([t[:, 1], -t[:, 0]])
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def measure(self) -> float:
        return float(np.sum(self.element_measures()))

    # -- validation ----------------------------------------------------------
    def _element_facets(self):
        d = self.dimension
        if d == 1:
            return [(int(i),) for el in self.elements for i in el]
        out = []
        for el in self.elements:
            for a, b in ((0, 1), (1, 2), (2, 0)):
                out.append(tuple(sorted((int(el[a]), int(el[b])))))
        return out

    def validate(self) -> None:
        """Check the mesh invariants; raises :class:`MeshError` on failure."""
        d = self.dimension
        if d not in (1, 2):
            raise MeshError(f"dimension must be 1 or 2, got {d}")
        if self.nodes.shape[1] != d:
            raise MeshError("node coordinates do not match the dimension")
        if self.elements.ndim != 2 or self.elements.shape[1] != d + 1:
            raise MeshError(f"elements must have {d + 1} nodes each")
        if self.boundary_facets.shape[1] != d:
            raise MeshError(f"boundary facets must have {d} nodes each")
        if len(self.facet_orientation) != len(self.boundary_facets):
            raise MeshError("one orientation flag per boundary facet is required")
        for arr, what in ((self.elements, "element"), (self.boundary_facets, "facet")):
            if arr.size and (arr.min() < 0 or arr.max() >= self.n_nodes):
                raise MeshError(f"{what} node index out of range")
        meas = self.element_measures()
        if np.any(meas <= 0):
            bad = int(np.flatnonzero(meas <= 0)[0])
            raise MeshError(f"element {bad} has non-positive measure {meas[bad]!r}")

        counts = Counter(self._element_facets())
        single = {f for f, c in counts.items() if c == 1}
        if any(c > 2 for c in counts.values()):
            raise MeshError("a facet is shared by more than two elements")
        declared = [tuple(sorted(int(i) for i in f)) for f in self.boundary_facets]
        if len(set(declared)) != len(declared) or set(declared) != single:
            raise MeshError("boundary facets differ from the set of single-element facets")

        rows = np.repeat(self.elements, d + 1, axis=1).ravel()
        cols = np.tile(self.elements, (1, d + 1)).ravel()
        graph = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(self.n_nodes, self.n_nodes))
        ncomp, _ = connected_components(graph, directed=False)
        if ncomp != 1:
            raise MeshError(f"mesh has {ncomp} connected components")

    # -- quadrature ----------------------------------------------------------
    def element_quadrature(self, degree: int):
        """Physical quadrature on every element.

        Returns ``(points, weights, shape)`` with points of shape
        ``(n_elements, nq, dimension)``, weights ``(n_elements, nq)`` and the
        P1 shape values ``(nq, dimension + 1)`` (identical on every element).
        """
        p = self.nodes[self.elements]
        meas = self.element_measures()
        if self.dimension == 1:
            s, w = interval_rule(degree)
            phi = p1_shape_interval(s)
            pts = np.einsum("qa,ead->eqd", phi, p)
            wts = meas[:, None] * w[None, :]
        else:
            ref, w = triangle_rule(degree)
            phi = p1_shape_triangle(ref)
            pts = np.einsum("qa,ead->eqd", phi, p)
            wts = (2.0 * meas)[:, None] * w[None, :]
        return pts, wts, phi

    def facet_quadrature(self, degree: int):
        """Quadrature on boundary facets, same layout as :meth:`element_quadrature`.

        In 1D each facet is a point carrying unit (counting) measure.
        """
        p = self.nodes[self.boundary_facets]
        if self.dimension == 1:
            return p.copy(), np.ones((len(p), 1)), np.ones((1, 1))
        s, w = interval_rule(degree)
        phi = p1_shape_interval(s)
        pts = np.einsum("qa,ead->eqd", phi, p)
        wts = self.facet_measures()[:, None] * w[None, :]
        return pts, wts, phi

    # -- serialisation -------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "nodes": self.nodes.tolist(),
            "elements": self.elements.tolist(),
            "boundary_facets": self.boundary_facets.tolist(),
            "facet_orientation": self.facet_orientation.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Mesh":
        facets = data["boundary_facets"]
        orient = data.get("facet_orientation")
        if orient is None:
            orient = _infer_orientation(int(data["dimension"]), data["nodes"], data["elements"], facets)
        return cls(int(data["dimension"]), data["nodes"], data["elements"], facets, orient)

    def dump_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load_json(cls, path) -> "Mesh":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __repr__(self):
        return (f"Mesh(name={self.name!r}, dimension={self.dimension}, "
                f"n_nodes={self.n_nodes}, n_elements={self.n_elements}, "
                f"n_facets={len(self.boundary_facets)})")


def _infer_orientation(dim, nodes, elements, facets):
    nodes = np.asarray(nodes, float).reshape(len(nodes), -1)
    if dim == 1:
        centre = nodes[:, 0].mean()
        return [1 if nodes[f[0], 0] > centre else -1 for f in facets]
    directed = set()
    for el in elements:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            directed.add((int(el[a]), int(el[b])))
    return [1 if (int(f[0]), int(f[1])) in directed else -1 for f in facets]


def _boundary_edges_ccw(elements) -> np.ndarray:
    """Edges used by a single counterclockwise triangle, in that triangle's direction."""
    counts = Counter()
    directed = []
    for el in elements:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            i, j = int(el[a]), int(el[b])
            counts[(min(i, j), max(i, j))] += 1
            directed.append((i, j))
    return np.array([e for e in directed if counts[(min(e), max(e))] == 1], dtype=np.int64)


def _ccw(nodes, tris):
    tris = np.array(tris, dtype=np.int64)
    p = nodes[tris]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    flip = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def build_interval_mesh(a: float, b: float, n: int) -> Mesh:
    """Uniform mesh of ``[a, b]`` with ``n`` elements."""
    if not a < b:
        raise MeshError(f"need a < b, got a={a!r}, b={b!r}")
    if int(n) != n or n < 1:
        raise MeshError(f"need at least one element, got n={n!r}")
    n = int(n)
    nodes = np.linspace(a, b, n + 1)[:, None]
    elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    return Mesh(1, nodes, elements, [[0], [n]], [-1, 1], name=f"interval[{a},{b}]n{n}")


def build_square_mesh(n: int) -> Mesh:
    """Unit square, ``n`` cells per side, each cell cut along the (0,0)-(1,1) diagonal."""
    if int(n) != n or n < 1:
        raise MeshError(f"need n >= 1, got n={n!r}")
    n = int(n)
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def idx(i, j):
        return j * (n + 1) + i

    tris = []
    for j in range(n):
        for i in range(n):
            v00, v10, v01, v11 = idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    tris = np.array(tris, dtype=np.int64)
    facets = _boundary_edges_ccw(tris)
    return Mesh(2, nodes, tris, facets, np.ones(len(facets), dtype=np.int64), name=f"square n{n}")


def build_disk_mesh(n_rings: int, n_sectors: int) -> Mesh:
    """Triangulation of the regular ``n_sectors``-gon inscribed in the unit circle.

    Every sector triangle (centre, v_s, v_{s+1}) is subdivided uniformly into
    ``n_rings**2`` triangles, so ring ``j`` is the polygon scaled by
    ``j / n_rings`` carrying ``j * n_sectors`` nodes.
    """
    if int(n_rings) != n_rings or n_rings < 1:
        raise MeshError(f"need n_rings >= 1, got {n_rings!r}")
    if int(n_sectors) != n_sectors or n_sectors < 3:
        raise MeshError(f"need n_sectors >= 3, got {n_sectors!r}")
    R, S = int(n_rings), int(n_sectors)
    theta = 2.0 * np.pi * np.arange(S) / S
    verts = np.column_stack([np.cos(theta), np.sin(theta)])

    offsets = [0, 1]
    for j in range(1, R + 1):
        offsets.append(offsets[-1] + j * S)
    nodes = np.zeros((offsets[-1], 2))
    for j in range(1, R + 1):
        for s in range(S):
            a, b = verts[s], verts[(s + 1) % S]
            for i in range(j):
                nodes[offsets[j] + s * j + i] = (j / R) * ((1 - i / j) * a + (i / j) * b)

    def gid(j, s, i):
        if j == 0:
            return 0
        return offsets[j] + (s * j + i) % (j * S)

    tris = []
    for s in range(S):
        for j in range(R):
            for i in range(j + 1):
                tris.append((gid(j, s, i), gid(j + 1, s, i), gid(j + 1, s, i + 1)))
            for i in range(j):
                tris.append((gid(j, s, i), gid(j + 1, s, i + 1), gid(j, s, i + 1)))
    tris = _ccw(nodes, tris)
    facets = _boundary_edges_ccw(tris)
    return Mesh(2, nodes, tris, facets, np.ones(len(facets), dtype=np.int64),
                name=f"disk r{R}s{S}")


def boundary_measure(mesh: Mesh, weight=1.0, degree: int | None = None) -> float:
    """Integral of ``weight`` over the boundary, ``int_Gamma w dS``.

    ``weight`` may be a number, a :class:`~wentzell_lab.coefficients.FieldSpec`,
    a JSON field dict, or a callable taking an ``(npts, dimension)`` array.
    """
    from .coefficients import as_field

    w = as_field(weight)
    if degree is None:
        degree = w.degree
    pts, wts, _ = mesh.facet_quadrature(degree)
    vals = w(pts.reshape(-1, mesh.dimension)).reshape(wts.shape)
    return float(np.sum(vals * wts))
