"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import time

import numpy as np
import pytest

from wentzell_lab import dynamics as dyn
from wentzell_lab.coefficients import ProblemData
from wentzell_lab.gamma_limit import GammaSweepConfig, gamma_monotonicity, run_gamma_sweep
from wentzell_lab.geometry import build_disk_mesh, build_interval_mesh, build_square_mesh
from wentzell_lab.oracle import BeamParams, compare_fem_oracle
from wentzell_lab.spectral import (
    KernelClass,
    build_operator,
    green_identity_residual,
    kernel_classify,
    rayleigh_quotient,
    relative_spread,
    solve_spectrum,
)

K1 = 4.7300407  # first root of cos k cosh k = 1


@pytest.fixture
def report(capsys):
    def emit(number, ok, summary):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {summary}")
        return ok
    return emit


def test_c01_oracle_agreement(report):
    start = time.perf_counter()
    cmp = compare_fem_oracle([256, 512], BeamParams(gamma=1.0), 4)
    elapsed = time.perf_counter() - start
    rel = cmp.rel_errors[-1]
    ratio = cmp.abs_errors[0, 1] / cmp.abs_errors[1, 1]
    ok = bool(np.all(rel <= 0.01) and ratio >= 3 and elapsed < 30)
    report(1, ok, f"max rel error {rel.max():.2e} at n=512, lambda_2 error ratio {ratio:.2f}, {elapsed:.1f}s")
    assert ok


def test_c02_kernel_trichotomy(report):
    start = time.perf_counter()
    lines, ok = [], True
    for mesh in (build_interval_mesh(0, 1, 256), build_square_mesh(24)):
        for g, expected in ((0.0, KernelClass.ZERO_CONSTANT_KERNEL), (1.0, KernelClass.STRICTLY_POSITIVE),
                            (-1.0, KernelClass.NEGATIVE_FIRST_EIGENVALUE)):
            op = build_operator(mesh, ProblemData(gamma=g))
            spec = solve_spectrum(op, 4)
            lam1, lam2 = spec.eigenvalues[:2]
            ok &= kernel_classify(op, spec) is expected
            if g == 0.0:
                spread = relative_spread(spec.eigenvectors[:, 0])
                ok &= bool(abs(lam1) <= 1e-9 * lam2 and spread <= 1e-6)
                lines.append(f"{mesh.dimension}D |l1|/l2={abs(lam1) / lam2:.1e} spread={spread:.1e}")
            elif g > 0:
                ok &= bool(lam1 > 0)
            else:
                ok &= bool(lam1 < 0)
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    report(2, ok, f"{'; '.join(lines)}; {elapsed:.1f}s")
    assert ok


def test_c03_semiboundedness(report):
    rng = np.random.default_rng(3)
    cases = [
        (build_interval_mesh(0, 1, 128), ProblemData(gamma=-1.0)),
        (build_interval_mesh(0, 1, 128), ProblemData(gamma={"kind": "polynomial", "coeffs": [-2.0, 3.0]})),
        (build_square_mesh(12), ProblemData(gamma={"kind": "polynomial", "coeffs": [[-1, 1, 0], [0.5, 0, 1]]})),
        (build_disk_mesh(4, 16), ProblemData(beta=2.0, gamma=-0.5)),
        (build_square_mesh(12), ProblemData(alpha=3.0, gamma=2.0)),
    ]
    worst = worst_noise = np.inf
    for mesh, data in cases:
        op = build_operator(mesh, data)
        low = solve_spectrum(op, 8).eigenvectors
        for i in range(200):
            # half white noise, half random mixtures of low modes that sit near the bound
            u = rng.standard_normal(op.n) if i % 2 else low @ (rng.standard_normal(8) / np.arange(1, 9) ** 2)
            gap = rayleigh_quotient(op, u) - op.gamma0
            worst = min(worst, gap)
            if i % 2:
                worst_noise = min(worst_noise, gap)
    ok = bool(worst >= -1e-9)
    report(3, ok, f"min(Rayleigh - gamma0) = {worst:.3e} (white noise alone {worst_noise:.1e}) "
                  f"over {len(cases)} operators x 200 vectors")
    assert ok


def test_c04_decay_envelopes_and_growth(report):
    rng = np.random.default_rng(4)
    mesh = build_interval_mesh(0, 1, 256)
    s0 = solve_spectrum(build_operator(mesh, ProblemData(beta=1.0, gamma=0.0)))
    lam2 = s0.eigenvalues[1]
    grid = np.geomspace(1e-4 / lam2, 10 / lam2, 60)
    r0 = max(dyn.decay_envelope_check(s0, rng.standard_normal(mesh.n_nodes), grid, mean="unweighted").max_ratio
             for _ in range(100))
    s1 = solve_spectrum(build_operator(mesh, ProblemData(gamma=1.0)))
    lam1 = s1.eigenvalues[0]
    grid1 = np.geomspace(1e-4 / lam1, 10 / lam1, 60)
    r1 = max(dyn.decay_envelope_check(s1, rng.standard_normal(mesh.n_nodes), grid1).max_ratio
             for _ in range(100))
    sn = solve_spectrum(build_operator(mesh, ProblemData(gamma=-1.0)))
    growth = dyn.growth_check(sn, [0.0, 0.5, 1.0, 2.0, 5.0])
    ok = bool(r0 <= 1 + 1e-10 and r1 <= 1 + 1e-10 and growth.lambda1 < 0 and growth.max_rel_error <= 1e-10)
    report(4, ok, f"max ratio gamma=0: {r0:.6f}, gamma=1: {r1:.6f}; growth lambda_1={growth.lambda1:.5f}, "
                  f"norm rel error {growth.max_rel_error:.1e}")
    assert ok


def test_c05_semigroup_law(report):
    rng = np.random.default_rng(5)
    worst_law = worst_id = 0.0
    for mesh, g in ((build_square_mesh(10), 0.5), (build_interval_mesh(0, 1, 128), -1.0)):
        spec = solve_spectrum(build_operator(mesh, ProblemData(gamma=g)))
        op = spec.operator
        scale = 1.0 / max(abs(spec.eigenvalues[0]), spec.eigenvalues[1])
        for _ in range(20):
            t, s = rng.uniform(0, 2 * scale, 2)
            f = rng.standard_normal(op.n)
            nf = op.h_norm(f)
            lhs = dyn.semigroup_apply(spec, f, t + s)
            rhs = dyn.semigroup_apply(spec, dyn.semigroup_apply(spec, f, s), t)
            worst_law = max(worst_law, op.h_norm(lhs - rhs) / nf)
            worst_id = max(worst_id, op.h_norm(dyn.semigroup_apply(spec, f, 0.0) - f) / nf)
    ok = bool(worst_law <= 1e-10 and worst_id <= 1e-10)
    report(5, ok, f"semigroup law {worst_law:.1e}, identity {worst_id:.1e} (relative)")
    assert ok


def test_c06_green_identity(report):
    rng = np.random.default_rng(6)
    worst = 0.0
    for mesh in (build_interval_mesh(0, 1, 256), build_square_mesh(16)):
        op = build_operator(mesh, ProblemData(gamma=1.0))
        for _ in range(50):
            u, v = rng.standard_normal((2, op.n))
            res, scale = green_identity_residual(op, u, op.neumann_laplacian(u), v, return_scale=True)
            worst = max(worst, res / scale)
    ok = bool(worst <= 1e-9)
    report(6, ok, f"worst residual / scale = {worst:.1e}")
    assert ok


def test_c07_nonpositivity_witness(report):
    start = time.perf_counter()
    mesh = build_interval_mesh(0, 1, 512)
    spec = solve_spectrum(build_operator(mesh))
    lam2 = spec.eigenvalues[1]
    window = np.geomspace(1e-9, 0.1 / lam2, 80)
    hats = dyn.hat_functions(mesh.n_nodes)
    res = dyn.nonpositivity_search(spec, hats, window)
    w = res.positivity_witness
    linf = res.linf_witness
    note = f"L-inf witness from hats at t={linf.t:.2e}" if linf else f"no L-inf witness among hats ({res.searched})"
    if linf is None:
        steps = dyn.nonpositivity_search(spec, dyn.step_functions(mesh), window)
        if steps.linf_witness is not None:
            note += f"; step function {steps.linf_witness.index} gives sup {steps.linf_witness.value:.6f} " \
                    f"at t={steps.linf_witness.t:.2e}"
        else:
            note += f"; none among steps ({steps.searched})"
    elapsed = time.perf_counter() - start
    ok = bool(w is not None and w.value <= -1e-6 and elapsed < 60)
    found = f"hat {w.index}, t={w.t:.2e}, min={w.value:.3e}" if w else "none"
    report(7, ok, f"positivity witness: {found}; {note}; {elapsed:.1f}s")
    assert ok


def test_c08_eventual_positivity(report):
    start = time.perf_counter()
    mesh = build_interval_mesh(0, 1, 512)
    spec = solve_spectrum(build_operator(mesh))
    t_max = 10 / spec.eigenvalues[1]
    t0 = dyn.eventual_positivity_time(spec, dyn.hat_functions(mesh.n_nodes), t_max, t_resolution=200)
    elapsed = time.perf_counter() - start
    ok = bool(np.all(np.isfinite(t0)) and elapsed < 120)
    report(8, ok, f"{np.isfinite(t0).sum()}/{t0.size} hats positive from t0, max t0 = {np.nanmax(t0):.4e} "
                  f"(t_max {t_max:.3e}); {elapsed:.1f}s")
    assert ok


def test_c09_gamma_sweep(report):
    start = time.perf_counter()
    rep = run_gamma_sweep(GammaSweepConfig(build_interval_mesh(0, 1, 512), [10.0 ** k for k in range(7)]))
    elapsed = time.perf_counter() - start
    target = K1 ** 4
    rel = abs(rep.lambda1[-1] - target) / target
    ok = bool(rep.strictly_increasing and rel <= 0.05 and rep.trace_bound_holds.all() and elapsed < 120)
    report(9, ok, f"lambda_1(1e6) = {rep.lambda1[-1]:.4f} vs {target:.4f} (rel {rel:.1e}), "
                  f"trace norm at 1e6 = {rep.trace_norm[-1]:.2e}; {elapsed:.1f}s")
    assert ok


def test_c10_gamma_monotonicity(report):
    drops = []
    for mesh in (build_interval_mesh(0, 1, 128), build_square_mesh(16)):
        drops.append(gamma_monotonicity(mesh, [0.0, 1.0, 10.0, 100.0], slack=1e-10))
    ok = all(r.holds for r in drops)
    report(10, ok, "worst scaled drop " + ", ".join(f"{r.worst_drop:.1e}" for r in drops))
    assert ok
