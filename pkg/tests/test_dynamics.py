import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wentzell_lab import dynamics as dyn
from wentzell_lab.coefficients import ProblemData
from wentzell_lab.geometry import build_interval_mesh
from wentzell_lab.spectral import build_operator, solve_spectrum

X1 = {"kind": "polynomial", "coeffs": [0, 1]}
I64 = build_interval_mesh(0, 1, 64)
S0 = solve_spectrum(build_operator(I64))
S1 = solve_spectrum(build_operator(I64, ProblemData(gamma=1.0)))
SNEG = solve_spectrum(build_operator(I64, ProblemData(gamma=-1.0)))
SBETA = solve_spectrum(build_operator(I64, ProblemData(beta=3.0)))


# -- projection ---------------------------------------------------------------

def test_projection_of_constants(spectra):
    for (name, g), spec in spectra.items():
        if g == 0.0:
            c = dyn.project_initial_data(spec.operator, 1.0, 1.0)
            assert np.abs(c - 1).max() <= 1e-12


def test_projection_boundary_only():
    op = build_operator(I64, ProblemData(beta=2.0))
    c = dyn.project_initial_data(op, 0.0, 1.0)
    assert np.abs(c).max() > 0
    assert abs(op.h_inner(op.ones, c) - op.boundary_integral(op.ones, weighted=True)) <= 1e-10


def test_projection_reproduces_linear():
    op = S0.operator
    c = dyn.project_initial_data(op, X1, X1)
    assert np.abs(c - I64.nodes[:, 0]).max() <= 1e-12


def test_projection_on_square(spectra):
    op = spectra["square", 0.0].operator
    lin = {"kind": "polynomial", "coeffs": [[1, 0, 0], [2, 1, 0], [-1, 0, 1]]}
    c = dyn.project_initial_data(op, lin, lin)
    x, y = op.mesh.nodes.T
    assert np.abs(c - (1 + 2 * x - y)).max() <= 1e-12


# -- semigroup ------------------------------------------------------------------

def test_identity_at_zero(rng):
    f = rng.standard_normal(65)
    assert S1.operator.h_norm(dyn.semigroup_apply(S1, f, 0.0) - f) <= 1e-10 * S1.operator.h_norm(f)


def test_modal_decay():
    for j in (0, 3, 20):
        e = S1.eigenvectors[:, j]
        t = 0.7 / max(S1.eigenvalues[j], 1.0)
        out = dyn.semigroup_apply(S1, e, t)
        assert np.abs(out - np.exp(-S1.eigenvalues[j] * t) * e).max() <= 1e-10 * np.abs(e).max()


def test_negative_time():
    with pytest.raises(ValueError):
        dyn.semigroup_apply(S1, np.ones(65), -1e-3)


@given(st.floats(0, 0.05), st.floats(0, 0.05), st.integers(0, 2 ** 31))
@settings(max_examples=20, deadline=None)
def test_semigroup_law(t, s, seed):
    f = np.random.default_rng(seed).standard_normal(65)
    for spec in (S1, SNEG):
        op = spec.operator
        lhs = dyn.semigroup_apply(spec, f, t + s)
        rhs = dyn.semigroup_apply(spec, dyn.semigroup_apply(spec, f, s), t)
        assert op.h_norm(lhs - rhs) <= 1e-10 * op.h_norm(f) * max(1.0, np.exp(-spec.eigenvalues[0] * (t + s)))


@given(st.floats(0, 10), st.integers(0, 2 ** 31))
@settings(max_examples=20, deadline=None)
def test_contractive_and_bounded(t, seed):
    f = np.random.default_rng(seed).standard_normal(65)
    for spec in (S0, S1, SNEG):
        op = spec.operator
        nt = op.h_norm(dyn.semigroup_apply(spec, f, t))
        assert nt <= np.exp(-spec.eigenvalues[0] * t) * op.h_norm(f) * (1 + 1e-10)
        if op.gamma_min >= 0:
            assert nt <= op.h_norm(f) * (1 + 1e-10)


@given(st.floats(0, 5), st.integers(0, 2 ** 31))
@settings(max_examples=20, deadline=None)
def test_mass_conservation(t, seed):
    f = np.random.default_rng(seed).standard_normal(65)
    op = S0.operator
    m0 = op.h_inner(op.ones, f)
    mt = op.h_inner(op.ones, dyn.semigroup_apply(S0, f, t))
    assert abs(mt - m0) <= 1e-10 * max(abs(m0), op.h_norm(f))


def test_truncation_tail_bound(rng):
    f = rng.standard_normal(65)
    k = 10
    t = 1e-3
    full = dyn.semigroup_apply(S1, f, t)
    part = dyn.semigroup_apply(S1, f, t, k_max=k)
    assert S1.operator.h_norm(full - part) <= dyn.truncation_tail_bound(S1, f, t, k) * (1 + 1e-12)
    assert dyn.truncation_tail_bound(S1, f, t, 65) == 0.0


# -- steady state and envelopes ------------------------------------------------------

def test_steady_state_examples():
    op = S0.operator
    assert np.array_equal(dyn.steady_state(op, op.ones), op.ones)
    f = dyn.project_initial_data(op, 1.0, 0.0)
    assert abs(dyn.steady_state(op, f)[0] - 1 / 3) <= 1e-12
    g = S0.eigenvectors[:, 5]
    assert np.abs(dyn.steady_state(op, g)).max() <= 1e-12
    with pytest.raises(ValueError):
        dyn.steady_state(S1.operator, op.ones)


def test_steady_state_formulas_agree_only_for_unit_beta(rng):
    f = rng.standard_normal(65)
    assert np.abs(dyn.steady_state(S0.operator, f) - dyn.unweighted_mean_state(S0.operator, f)).max() <= 1e-12
    op = SBETA.operator
    assert np.abs(dyn.steady_state(op, f) - dyn.unweighted_mean_state(op, f)).max() > 1e-6


def test_long_time_limit(rng):
    f = rng.standard_normal(65)
    op = S0.operator
    lam2 = S0.eigenvalues[1]
    for t in (1 / lam2, 5 / lam2):
        diff = op.h_norm(dyn.semigroup_apply(S0, f, t) - dyn.steady_state(op, f))
        assert diff <= np.exp(-lam2 * t) * op.h_norm(f) * (1 + 1e-10)


def test_envelope_tight_on_second_mode():
    op = S0.operator
    f = 0.7 * op.ones + S0.eigenvectors[:, 1]
    grid = np.geomspace(1e-3, 1.0, 15) / S0.eigenvalues[1]
    rep = dyn.decay_envelope_check(S0, f, grid)
    np.testing.assert_allclose(rep.ratios, 1.0 / op.h_norm(f), rtol=1e-9)


@pytest.mark.parametrize("spec", [S0, S1, SBETA])
def test_envelope_random(spec, rng):
    grid = np.geomspace(1e-4, 10, 30) / max(spec.eigenvalues[0], spec.eigenvalues[1] if spec.operator.gamma_is_zero else 0)
    for _ in range(20):
        rep = dyn.decay_envelope_check(spec, rng.standard_normal(65), grid)
        assert rep.holds()


def test_envelope_first_mode_gamma_positive():
    e1 = S1.eigenvectors[:, 0]
    rep = dyn.decay_envelope_check(S1, e1, [0.0, 0.5, 2.0])
    np.testing.assert_allclose(rep.ratios, 1.0, rtol=1e-10)


def test_envelope_rejects_negative_gamma():
    with pytest.raises(ValueError):
        dyn.decay_envelope_check(SNEG, np.ones(65), [1.0])


def test_growth():
    g = dyn.growth_check(SNEG, [0.0, 1.0, 2.0])
    assert g.lambda1 < 0
    assert g.max_rel_error <= 1e-10
    assert abs(g.operator_norms[0] - 1) <= 1e-15
    assert g.operator_norms[1] > 1
    assert abs(g.operator_norms[2] - g.operator_norms[1] ** 2) <= 1e-10 * g.operator_norms[2]
    with pytest.raises(ValueError):
        dyn.growth_check(S1, [1.0])


# -- positivity --------------------------------------------------------------------

def test_probe_examples():
    p = dyn.positivity_probe(S0, np.ones(65), 0.3)
    assert abs(p.min_value - 1) <= 1e-10
    hat = np.zeros(65)
    hat[32] = 1.0
    op = S0.operator
    late = dyn.positivity_probe(S0, hat, 50 / S0.eigenvalues[1])
    coef = op.h_inner(op.ones, hat) / op.h_inner(op.ones, op.ones)
    assert abs(late.min_value - coef) <= 1e-9 and coef > 0
    early = [dyn.positivity_probe(S0, hat, t).min_value for t in np.geomspace(1e-8, 1e-3, 30)]
    assert min(early) < 0


def test_probe_rejects_bad_data():
    with pytest.raises(ValueError):
        dyn.positivity_probe(S0, -np.ones(65), 0.1)
    with pytest.raises(ValueError):
        dyn.positivity_probe(S0, np.zeros(65), 0.1)


def test_eventual_positivity_examples():
    assert dyn.eventual_positivity_time(S0, np.ones(65), 1.0) == 0.0
    boundary = np.zeros(65)
    boundary[[0, 64]] = 1.0
    t0 = dyn.eventual_positivity_time(S0, boundary, 10 / S0.eigenvalues[1])
    assert t0 is not None and np.isfinite(t0)
    t0s = dyn.eventual_positivity_time(S0, dyn.hat_functions(65), 10 / S0.eigenvalues[1])
    assert np.all(np.isfinite(t0s))
    with pytest.raises(ValueError):
        dyn.eventual_positivity_time(S1, np.ones(65), 1.0)


def test_eventual_positivity_not_found():
    hat = np.zeros(65)
    hat[10] = 1.0
    assert dyn.eventual_positivity_time(S0, hat, 1e-8, t_resolution=5) is None


def test_nonpositivity_search():
    lam2 = S0.eigenvalues[1]
    window = np.geomspace(1e-9, 0.1 / lam2, 40)
    rep = dyn.nonpositivity_search(S0, dyn.hat_functions(65), window)
    assert rep.positivity_witness is not None
    w = rep.positivity_witness
    assert dyn.semigroup_apply(S0, w.f, w.t).min() <= -1e-6
    assert rep.max_imag == 0.0
    none = dyn.nonpositivity_search(S0, np.ones(65), window)
    assert none.positivity_witness is None and none.linf_witness is None
    assert "1 candidates" in none.searched


def test_evolve_and_csv(tmp_path, rng):
    f = np.abs(rng.standard_normal(65))
    times = [0.0, 1e-4, 1e-2, 1.0]
    res = dyn.evolve(S1, f, times)
    assert res.snapshots.shape == (4, 65)
    assert np.all(np.diff(res.h_norm) <= 1e-12)
    res.to_csv(tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "t,h_norm,min_value,max_value,sup_norm" and len(lines) == 5
    res.snapshots_to_json(tmp_path / "s.json")
    with pytest.raises(ValueError):
        dyn.evolve(S1, f, [-1.0])
    part = dyn.evolve(S1, f, times, k_max=5)
    assert part.tail_bound is not None and part.tail_bound.shape == (4,)
