import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wentzell_lab.assembly import (
    assemble_boundary_mass,
    assemble_mass,
    assemble_stiffness,
    boundary_mass_factor,
    mass_factor,
)
from wentzell_lab.geometry import build_disk_mesh, build_interval_mesh, build_square_mesh

X = {"kind": "polynomial", "coeffs": [0, 1]}
MESHES = [build_interval_mesh(0, 1, 7), build_square_mesh(4), build_disk_mesh(2, 9)]


def test_element_mass():
    np.testing.assert_allclose(assemble_mass(build_interval_mesh(0, 1, 1)).toarray(),
                               [[1 / 3, 1 / 6], [1 / 6, 1 / 3]], rtol=1e-14)


def test_weighted_mass_entry():
    # int_0^{1/2} x (1 - 2x)^2 dx, frozen from a symbolic integration
    M = assemble_mass(build_interval_mesh(0, 1, 2), X)
    assert abs(M[0, 0] - 1 / 48) <= 1e-15


def test_weighted_mass_symbolic():
    import sympy as s

    x = s.symbols("x")
    mesh = build_interval_mesh(0, 1, 3)
    M = assemble_mass(mesh, {"kind": "polynomial", "coeffs": [1, 0, 2]}).toarray()
    h = s.Rational(1, 3)
    hat = lambda i: s.Piecewise((1 - s.Abs(x - i * h) / h, s.Abs(x - i * h) <= h), (0, True))
    for i, j in [(0, 0), (1, 2), (3, 3)]:
        exact = s.integrate((1 + 2 * x ** 2) * hat(i) * hat(j), (x, 0, 1))
        assert abs(M[i, j] - float(exact)) <= 1e-14


def test_stiffness_interval():
    np.testing.assert_allclose(assemble_stiffness(build_interval_mesh(0, 1, 1)).toarray(), [[1, -1], [-1, 1]])


def test_stiffness_unit_square():
    # node order (0,0), (1,0), (0,1), (1,1); hand assembly of the two triangles
    K = assemble_stiffness(build_square_mesh(1)).toarray()
    expected = np.array([[1, -0.5, -0.5, 0], [-0.5, 1, 0, -0.5], [-0.5, 0, 1, -0.5], [0, -0.5, -0.5, 1]])
    np.testing.assert_allclose(K, expected, atol=1e-15)


def test_interval_boundary_mass():
    B = assemble_boundary_mass(build_interval_mesh(0, 1, 5)).toarray()
    expected = np.zeros((6, 6))
    expected[0, 0] = expected[5, 5] = 1.0
    np.testing.assert_array_equal(B, expected)


def test_square_boundary_mass():
    mesh = build_square_mesh(2)
    B1 = assemble_boundary_mass(mesh)
    assert abs(B1.sum() - 4.0) <= 1e-13
    np.testing.assert_array_equal(assemble_boundary_mass(mesh, 2.0).toarray(), 2 * B1.toarray())


@pytest.mark.parametrize("mesh", MESHES)
def test_partition_of_unity_and_kernel(mesh):
    M = assemble_mass(mesh)
    assert abs(M.sum() - mesh.measure()) <= 1e-13
    K = assemble_stiffness(mesh)
    assert np.abs(K @ np.ones(mesh.n_nodes)).max() <= 1e-13 * abs(K).max()
    assert np.linalg.eigvalsh(K.toarray()).min() >= -1e-12


@pytest.mark.parametrize("mesh", MESHES)
def test_symmetry_and_spd(mesh):
    w = {"kind": "polynomial", "coeffs": [[2.0, 0, 0], [0.5, 1, 0]][: 2 if mesh.dimension == 2 else 1]}
    if mesh.dimension == 1:
        w = {"kind": "polynomial", "coeffs": [2.0, 0.5]}
    for A in (assemble_mass(mesh, w), assemble_stiffness(mesh), assemble_boundary_mass(mesh, w)):
        D = A.toarray()
        assert np.abs(D - D.T).max() <= 1e-14 * np.abs(D).max()
    assert np.linalg.eigvalsh(assemble_mass(mesh, w).toarray()).min() > 0


@pytest.mark.parametrize("mesh", MESHES)
def test_boundary_support(mesh):
    B = assemble_boundary_mass(mesh).toarray()
    inner = mesh.interior_nodes
    assert not B[inner].any() and not B[:, inner].any()


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=25, deadline=None)
def test_linearity_in_weight(a, b, c):
    mesh = build_square_mesh(3)
    w1 = {"kind": "polynomial", "coeffs": [[a, 0, 0], [b, 1, 1]]}
    w2 = {"kind": "polynomial", "coeffs": [[c, 0, 2]]}
    w12 = {"kind": "polynomial", "coeffs": [[a, 0, 0], [b, 1, 1], [c, 0, 2]]}
    for assemble in (assemble_mass, assemble_boundary_mass):
        lhs = assemble(mesh, w12).toarray()
        rhs = assemble(mesh, w1).toarray() + assemble(mesh, w2).toarray()
        assert np.abs(lhs - rhs).max() <= 1e-13


@given(st.integers(1, 6))
@settings(max_examples=6, deadline=None)
def test_mass_of_one_is_measure(n):
    for mesh in (build_interval_mesh(0, 1, n), build_square_mesh(n)):
        one = np.ones(mesh.n_nodes)
        assert abs(one @ assemble_mass(mesh) @ one - mesh.measure()) <= 1e-14


@pytest.mark.parametrize("mesh", MESHES)
def test_square_root_factors(mesh):
    w = 2.5
    Q = mass_factor(mesh, w)
    np.testing.assert_allclose((Q.T @ Q).toarray(), assemble_mass(mesh, w).toarray(), atol=1e-15)
    P = boundary_mass_factor(mesh, w)
    np.testing.assert_allclose((P.T @ P).toarray(), assemble_boundary_mass(mesh, w).toarray(), atol=1e-15)
