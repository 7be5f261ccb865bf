"""Command-line experiment runner.

Scenarios are JSON files::

    {"domain": {"type": "interval", "a": 0, "b": 1, "n": 256},
     "alpha": 1, "beta": 1, "gamma": {"kind": "constant", "coeffs": [0]},
     "eta": 1e-3,
     "experiment": "spectrum",
     "params": {...},
     "cases": [{"gamma": 1}, {"domain": {"type": "square", "n": 16}}]}

``domain`` is one of ``interval`` (``a``, ``b``, ``n``), ``square`` (``n``)
or ``disk`` (``rings``, ``sectors``). The optional ``cases`` list holds
overrides of the top-level keys; each case runs separately and writes into
``case_<i>/``. Exit status: 0 when every check passes, 1 when a check fails,
2 for configuration errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from . import dynamics as dyn
from .coefficients import FieldSpec, ProblemData, as_field, validate_hypothesis
from .exceptions import ConfigError, WentzellError
from .gamma_limit import GammaSweepConfig, gamma_monotonicity, run_gamma_sweep
from .geometry import build_disk_mesh, build_interval_mesh, build_square_mesh
from .oracle import BeamParams, compare_fem_oracle, find_wentzell_roots, roots_to_csv
from .spectral import (
    EIG_RESIDUAL_TOL,
    ORTHONORMALITY_TOL,
    KernelClass,
    apply_operator_blocks,
    blocks_pairing,
    build_operator,
    green_identity_residual,
    kernel_classify,
    rayleigh_quotient,
    relative_spread,
    solve_spectrum,
)
from .svgplot import Axes, emit_svg_plot

EXPERIMENTS = ("spectrum", "evolve", "gamma-sweep", "positivity", "oracle-compare", "green-check")
EXIT_OK, EXIT_CHECKS, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
TOP_KEYS = {"domain", "alpha", "beta", "gamma", "eta", "experiment", "params", "cases",
            "description", "seed"}


def _g(x: float) -> str:
    return f"{x:.17g}"


# -- configuration ---------------------------------------------------------------

def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return cfg


def validate_config(cfg: dict) -> dict:
    unknown = set(cfg) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level field(s): {sorted(unknown)}")
    exp = cfg.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"field 'experiment': {exp!r} is not one of {EXPERIMENTS}")
    if "domain" not in cfg:
        raise ConfigError("field 'domain' is required")
    if not isinstance(cfg.get("params", {}), dict):
        raise ConfigError("field 'params' must be an object")
    cases = cfg.get("cases", [])
    if not isinstance(cases, list) or not all(isinstance(c, dict) for c in cases):
        raise ConfigError("field 'cases' must be a list of objects")
    for i, case in enumerate(cases):
        bad = set(case) - TOP_KEYS
        if bad or "cases" in case:
            raise ConfigError(f"cases[{i}]: unsupported override(s) {sorted(bad | ({'cases'} & set(case)))}")
    for i, case in enumerate([cfg] + [{**cfg, **c} for c in cases]):
        mesh = build_mesh(case["domain"])
        report = validate_hypothesis(mesh, problem_data(case))
        if not report.ok:
            where = "top level" if i == 0 else f"cases[{i - 1}]"
            raise ConfigError(f"{where}: field {report.field!r}: {report}")
    return cfg


def build_mesh(spec):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError("field 'domain' must be an object with a 'type'")
    kind = spec["type"]
    try:
        if kind == "interval":
            return build_interval_mesh(float(spec.get("a", 0.0)), float(spec.get("b", 1.0)), int(spec["n"]))
        if kind == "square":
            return build_square_mesh(int(spec["n"]))
        if kind == "disk":
            return build_disk_mesh(int(spec["rings"]), int(spec["sectors"]))
    except KeyError as exc:
        raise ConfigError(f"field 'domain': missing {exc.args[0]!r} for type {kind!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'domain': {exc}") from exc
    raise ConfigError(f"field 'domain.type': unknown domain {kind!r}")


def problem_data(cfg: dict) -> ProblemData:
    fields = {}
    for name, default in (("alpha", 1.0), ("beta", 1.0), ("gamma", 0.0)):
        try:
            fields[name] = as_field(cfg.get(name, default))
        except WentzellError as exc:
            raise ConfigError(f"field {name!r}: {exc}") from exc
        if not isinstance(fields[name], FieldSpec):
            raise ConfigError(f"field {name!r} must be a number or a field spec")
    try:
        return ProblemData(fields["alpha"], fields["beta"], fields["gamma"], float(cfg.get("eta", 1e-3)))
    except (WentzellError, ValueError, TypeError) as exc:
        raise ConfigError(f"field 'eta': {exc}") from exc


def _time_grid(spec, scale: float = 1.0) -> np.ndarray:
    """Times from a list or ``{"min", "max", "num", "log", "relative_to"}``.

    With ``relative_to`` set, ``min`` and ``max`` are multiples of ``scale``.
    """
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    s = dict(spec)
    lo, hi = float(s["min"]), float(s["max"])
    if s.get("relative_to"):
        lo, hi = lo * scale, hi * scale
    num = int(s.get("num", 50))
    grid = np.geomspace(lo, hi, num) if s.get("log", True) else np.linspace(lo, hi, num)
    if s.get("include_zero"):
        grid = np.concatenate([[0.0], grid])
    return grid


# -- reporting -------------------------------------------------------------------

@dataclass
class RunReport:
    config: dict
    timings: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_CHECKS

    def to_dict(self) -> dict:
        return {"config": self.config, "timings": self.timings, "outputs": self.outputs,
                "checks": self.checks, "passed": self.passed, "details": self.details}

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "report.json"
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not serializable: {type(obj).__name__}")


class _Phase:
    def __init__(self, report: RunReport, name: str):
        self.report, self.name = report, name

    def __enter__(self):
        self.t = time.perf_counter()

    def __exit__(self, *exc):
        self.report.timings[self.name] = self.report.timings.get(self.name, 0.0) + time.perf_counter() - self.t


# -- experiments -----------------------------------------------------------------

def _exp_spectrum(cfg, mesh, data, params, out: Path, rep: RunReport, rng):
    with _Phase(rep, "assemble"):
        op = build_operator(mesh, data)
    with _Phase(rep, "spectrum"):
        spec = solve_spectrum(op, params.get("eigencount"))
    path = out / "spectrum.csv"
    spec.to_csv(path)
    rep.outputs.append(str(path))
    nvec = int(params.get("vectors", 0))
    if nvec:
        path = out / "eigenvectors.json"
        spec.eigenvectors_to_json(path, nvec)
        rep.outputs.append(str(path))
    rep.checks["residuals"] = bool(spec.residuals.max() <= EIG_RESIDUAL_TOL)
    rep.checks["orthonormality"] = bool(spec.orthonormality_error() <= ORTHONORMALITY_TOL)
    lam = spec.eigenvalues
    rep.details.update(lambda_1=lam[0], lambda_2=lam[1] if lam.size > 1 else None,
                       max_residual=spec.residuals.max(),
                       orthonormality_error=spec.orthonormality_error(),
                       first_vector_spread=relative_spread(spec.eigenvectors[:, 0]),
                       boundary_gamma_integral=float(op.ones @ (_unweighted_gamma(op) @ op.ones)),
                       boundary_gamma_beta_integral=float(op.ones @ (op.B_gamma_beta @ op.ones)))
    if lam.size > 1:
        cls = kernel_classify(op, spec)
        rep.details["kernel_class"] = cls.value
        rep.details["constant_first_vector"] = cls is KernelClass.ZERO_CONSTANT_KERNEL
        if "expect_class" in params:
            rep.checks["kernel_class"] = cls.value == params["expect_class"]
        if cls is KernelClass.ZERO_CONSTANT_KERNEL:
            rep.checks["zero_band"] = bool(abs(lam[0]) <= 1e-9 * lam[1])
    n_samples = int(params.get("rayleigh_samples", 0))
    if n_samples:
        X = rng.standard_normal((op.n, n_samples))
        q = np.array([rayleigh_quotient(op, X[:, j]) for j in range(n_samples)])
        rep.details["rayleigh_min"] = q.min()
        rep.checks["semibounded"] = bool(q.min() >= op.gamma0 - 1e-9)
    if params.get("plot", True):
        path = out / "spectrum.svg"
        k = np.arange(1, lam.size + 1)
        pos = lam > 0
        emit_svg_plot([("lambda_k", k[pos], lam[pos])],
                      Axes("k", "lambda_k", "eigenvalues", xlog=True, ylog=True), path)
        rep.outputs.append(str(path))


def _unweighted_gamma(op):
    from .assembly import assemble_boundary_mass
    return assemble_boundary_mass(op.mesh, op.data.gamma)


def _initial_data(op, params, rng):
    if "f1" in params or "f2" in params:
        f1 = params.get("f1", 0.0)
        f2 = params.get("f2", f1)
        for name, f in (("f1", f1), ("f2", f2)):
            if not isinstance(as_field(f), FieldSpec):
                raise ConfigError(f"params.{name} must be a number or a field spec")
        return dyn.project_initial_data(op, f1, f2)
    return rng.standard_normal(op.n)


def _exp_evolve(cfg, mesh, data, params, out: Path, rep: RunReport, rng):
    with _Phase(rep, "assemble"):
        op = build_operator(mesh, data)
    with _Phase(rep, "spectrum"):
        spec = solve_spectrum(op, params.get("k_max"))
    lam = spec.eigenvalues
    rate = lam[1] if op.gamma_is_zero else abs(lam[0]) if lam[0] != 0 else lam[1]
    times = _time_grid(params.get("times", {"min": 1e-4, "max": 10, "num": 40,
                                           "relative_to": "rate", "include_zero": True}),
                       1.0 / rate)
    f = _initial_data(op, params, rng)
    with _Phase(rep, "evolve"):
        res = dyn.evolve(spec, f, times, params.get("k_max"))
    path = out / "evolution.csv"
    res.to_csv(path)
    rep.outputs.append(str(path))
    if params.get("snapshots"):
        path = out / "snapshots.json"
        res.snapshots_to_json(path)
        rep.outputs.append(str(path))
    nf = op.h_norm(f)
    rep.details["h_norm_initial"] = nf
    if op.gamma_min >= 0:
        rep.checks["contractive"] = bool(np.all(res.h_norm <= nf * (1 + 1e-10)))
    if op.gamma_is_zero:
        m0 = float(op.ones @ (op.M_H @ f))
        drift = np.abs(res.snapshots @ (op.M_H @ op.ones) - m0) / max(abs(m0), nf)
        rep.checks["mass_conserved"] = bool(drift.max() <= 1e-10)

    checks = params.get("checks", [])
    with _Phase(rep, "checks"):
        if "envelope" in checks:
            n = int(params.get("samples", 100))
            grid = _time_grid(params.get("envelope_grid", {"min": 1e-4, "max": 10, "num": 60,
                                                           "relative_to": "rate"}), 1.0 / rate)
            F = rng.standard_normal((op.n, n))
            mean = params.get("mean", "unweighted")
            ratios = [dyn.decay_envelope_check(spec, F[:, j], grid, mean).max_ratio for j in range(n)]
            rep.details["envelope_max_ratio"] = max(ratios)
            rep.checks["envelope"] = bool(max(ratios) <= 1 + 1e-10)
        if "growth" in checks:
            grid = _time_grid(params.get("growth_grid", [0.0, 0.5, 1.0, 2.0, 4.0]))
            g = dyn.growth_check(spec, grid)
            rep.details.update(growth_lambda1=g.lambda1, growth_rel_error=g.max_rel_error)
            rep.checks["growth"] = bool(g.lambda1 < 0 and g.max_rel_error <= 1e-10)
        if "semigroup_law" in checks:
            n = int(params.get("triples", 20))
            worst_law = worst_id = 0.0
            for _ in range(n):
                t, s = rng.uniform(0, 2.0 / rate, 2)
                v = rng.standard_normal(op.n)
                nv = op.h_norm(v)
                lhs = dyn.semigroup_apply(spec, v, t + s)
                rhs = dyn.semigroup_apply(spec, dyn.semigroup_apply(spec, v, s), t)
                worst_law = max(worst_law, op.h_norm(lhs - rhs) / nv)
                worst_id = max(worst_id, op.h_norm(dyn.semigroup_apply(spec, v, 0.0) - v) / nv)
            rep.details.update(semigroup_law_error=worst_law, identity_error=worst_id)
            rep.checks["semigroup_law"] = bool(worst_law <= 1e-10)
            rep.checks["identity"] = bool(worst_id <= 1e-10)
    if params.get("plot", True):
        path = out / "evolution.svg"
        emit_svg_plot([("h_norm", res.times, res.h_norm), ("sup_norm", res.times, res.sup_norm)],
                      Axes("t", "norm", "trajectory", xlog=True, ylog=True), path)
        rep.outputs.append(str(path))


def _exp_gamma_sweep(cfg, mesh, data, params, out: Path, rep: RunReport, rng):
    mode = params.get("mode", "sweep")
    ladder = params.get("ladder", [10.0 ** k for k in range(7)])
    if mode == "monotone":
        with _Phase(rep, "spectra"):
            mono = gamma_monotonicity(mesh, ladder, data, params.get("eigencount"))
        path = out / "monotonicity.csv"
        lam = mono.eigenvalues
        with open(path, "w") as fh:
            fh.write("k," + ",".join(f"gamma={_g(g)}" for g in mono.ladder) + "\n")
            for k in range(lam.shape[1]):
                fh.write(f"{k + 1}," + ",".join(_g(x) for x in lam[:, k]) + "\n")
        rep.outputs.append(str(path))
        rep.details["worst_drop"] = mono.worst_drop
        rep.checks["monotone"] = mono.holds
        return
    if mode != "sweep":
        raise ConfigError(f"params.mode: unknown mode {mode!r}")
    alpha = data.alpha
    if alpha.kind != "constant":
        raise ConfigError("gamma-sweep needs a constant alpha")
    conf = GammaSweepConfig(mesh, ladder, alpha=alpha.coeffs[0], eta=data.eta,
                            eigencount=int(params.get("eigencount", 1)))
    with _Phase(rep, "spectra"):
        res = run_gamma_sweep(conf)
    path = out / "gamma_sweep.csv"
    res.to_csv(path)
    rep.outputs.append(str(path))
    ref = res.clamped_ref
    rep.details.update(lambda1=res.lambda1, clamped_ref=ref, reference_kind=res.reference_kind,
                       clamped_discrete=res.clamped_discrete)
    rep.checks["strictly_increasing"] = res.strictly_increasing
    rep.checks["trace_bound"] = bool(np.all(res.trace_bound_holds))
    if "limit_rel_tol" in params:
        rel = abs(res.lambda1[-1] - ref) / ref
        rep.details["limit_rel_error"] = rel
        rep.checks["limit"] = bool(rel <= float(params["limit_rel_tol"]))
    if params.get("plot", True):
        path = out / "gamma_sweep.svg"
        emit_svg_plot([("lambda_1", res.ladder, res.lambda1),
                       ("clamped", res.ladder, np.full(res.ladder.size, ref))],
                      Axes("g", "lambda_1", "first eigenvalue against gamma", xlog=True), path)
        rep.outputs.append(str(path))


def _family(mesh, op, names):
    cols = []
    for name in names:
        if name == "hats":
            cols.append(dyn.hat_functions(op.n))
        elif name == "interior_hats":
            cols.append(dyn.hat_functions(op.n, mesh.interior_nodes))
        elif name == "steps":
            cols.append(dyn.step_functions(mesh))
        elif name == "one":
            cols.append(op.ones[:, None])
        else:
            raise ConfigError(f"params.family: unknown member {name!r}")
    return np.hstack(cols)


def _exp_positivity(cfg, mesh, data, params, out: Path, rep: RunReport, rng):
    with _Phase(rep, "assemble"):
        op = build_operator(mesh, data)
    with _Phase(rep, "spectrum"):
        spec = solve_spectrum(op)
    lam2 = spec.eigenvalues[1]
    rep.details["lambda_2"] = lam2
    if params.get("search", True):
        names = params.get("family", ["hats", "steps"])
        F = _family(mesh, op, names)
        window = _time_grid(params.get("window", {"min": 1e-9, "max": 0.1, "num": 80,
                                                  "relative_to": "lambda_2"}), 1.0 / lam2)
        with _Phase(rep, "search"):
            res = dyn.nonpositivity_search(spec, F, window)
        info = {"searched": res.searched, "family": names, "max_imag": res.max_imag}
        for key, w in (("positivity_witness", res.positivity_witness), ("linf_witness", res.linf_witness)):
            info[key] = None if w is None else {"candidate": w.index, "t": w.t, "value": w.value}
        rep.details["search"] = info
        rep.checks["positivity_witness"] = res.positivity_witness is not None
        if params.get("require_linf_witness", False):
            rep.checks["linf_witness"] = res.linf_witness is not None
    if params.get("eventual", True) and op.gamma_is_zero:
        H = _family(mesh, op, params.get("eventual_family", ["hats"]))
        t_max = float(params.get("t_max", 10.0)) / lam2
        res_n = int(params.get("t_resolution", 200))
        with _Phase(rep, "eventual"):
            t0 = dyn.eventual_positivity_time(spec, H, t_max, res_n)
        path = out / "eventual_positivity.csv"
        with open(path, "w") as fh:
            fh.write("candidate,t0\n")
            for j, t in enumerate(t0):
                fh.write(f"{j},{'nan' if np.isnan(t) else _g(t)}\n")
        rep.outputs.append(str(path))
        rep.details["t0_max"] = float(np.nanmax(t0)) if np.any(np.isfinite(t0)) else None
        rep.checks["eventual_positivity"] = bool(np.all(np.isfinite(t0)))


def _exp_oracle_compare(cfg, mesh, data, params, out: Path, rep: RunReport, rng):
    if mesh.dimension != 1:
        raise ConfigError("oracle-compare needs an interval domain")
    for name in ("alpha", "beta", "gamma"):
        if getattr(data, name).kind != "constant":
            raise ConfigError(f"oracle-compare needs a constant {name}")
    a, b = mesh.nodes[0, 0], mesh.nodes[-1, 0]
    bp = BeamParams(float(b - a), data.alpha.coeffs[0], data.beta.coeffs[0], data.gamma.coeffs[0])
    count = int(params.get("count", 4))
    sizes = params.get("sizes", [256, 512])
    with _Phase(rep, "oracle"):
        roots = find_wentzell_roots(bp, count + (1 if bp.gamma == 0 else 0))
    path = out / "oracle.csv"
    roots_to_csv(roots, path)
    rep.outputs.append(str(path))
    with _Phase(rep, "fem"):
        cmp = compare_fem_oracle(sizes, bp, len(roots))
    path = out / "comparison.csv"
    cmp.to_csv(path)
    rep.outputs.append(str(path))
    positive = cmp.oracle > 0
    rel = cmp.rel_errors[-1][positive][:count]
    rep.details.update(oracle=cmp.oracle, fem_finest=cmp.fem[-1], rel_errors_finest=rel,
                       orders=cmp.orders)
    rep.checks["relative_error"] = bool(np.all(rel <= float(params.get("rel_tol", 0.01))))
    k = int(params.get("ratio_index", 2)) - 1
    if len(sizes) > 1:
        idx = np.flatnonzero(positive)[k]
        ratio = cmp.abs_errors[-2, idx] / cmp.abs_errors[-1, idx]
        rep.details["error_ratio"] = ratio
        rep.checks["error_ratio"] = bool(ratio >= float(params.get("min_ratio", 3.0)))


def _exp_green_check(cfg, mesh, data, params, out: Path, rep: RunReport, rng):
    with _Phase(rep, "assemble"):
        op = build_operator(mesh, data)
    n = int(params.get("pairs", 50))
    rows = []
    with _Phase(rep, "pairs"):
        for i in range(n):
            u, v = rng.standard_normal((2, op.n))
            res, scale = green_identity_residual(op, u, op.neumann_laplacian(u), v, return_scale=True)
            blocks = apply_operator_blocks(op, u)
            lhs = blocks_pairing(op, blocks, v)
            rhs = op.form(u, v)
            rows.append((i, res, scale, abs(lhs - rhs), abs(lhs) + abs(rhs)))
    path = out / "green.csv"
    with open(path, "w") as fh:
        fh.write("pair,residual,scale,blocks_residual,blocks_scale\n")
        for r in rows:
            fh.write(f"{r[0]}," + ",".join(_g(x) for x in r[1:]) + "\n")
    rep.outputs.append(str(path))
    arr = np.array([r[1:] for r in rows])
    rep.details["worst_relative"] = float(np.max(arr[:, 0] / arr[:, 1]))
    rep.details["worst_blocks_relative"] = float(np.max(arr[:, 2] / arr[:, 3]))
    rep.checks["green_identity"] = bool(np.all(arr[:, 0] <= 1e-9 * arr[:, 1]))
    rep.checks["operator_blocks"] = bool(np.all(arr[:, 2] <= 1e-9 * arr[:, 3]))


_RUNNERS = {
    "spectrum": _exp_spectrum,
    "evolve": _exp_evolve,
    "gamma-sweep": _exp_gamma_sweep,
    "positivity": _exp_positivity,
    "oracle-compare": _exp_oracle_compare,
    "green-check": _exp_green_check,
}


def _run_single(cfg: dict, out: Path, seed: int) -> RunReport:
    rep = RunReport(config=cfg)
    out.mkdir(parents=True, exist_ok=True)
    with _Phase(rep, "mesh"):
        mesh = build_mesh(cfg["domain"])
    data = problem_data(cfg)
    rng = np.random.default_rng(seed)
    _RUNNERS[cfg["experiment"]](cfg, mesh, data, cfg.get("params", {}), out, rep, rng)
    rep.timings = {k: round(v, 6) for k, v in rep.timings.items()}
    rep.details = {k: _json_ready(v) for k, v in rep.details.items()}
    return rep


def _json_ready(v):
    if isinstance(v, np.ndarray):
        return [_json_ready(x) for x in v]
    if isinstance(v, (list, tuple)):
        return [_json_ready(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_ready(x) for k, x in v.items()}
    if isinstance(v, (np.floating, float)):
        return float(_g(float(v)))
    if isinstance(v, np.generic):
        return v.item()
    return v


def run_scenario(config: dict, out_dir=".", seed: int | None = None) -> RunReport:
    """Validate ``config``, run it (and its cases), write ``report.json``."""
    cfg = validate_config(config)
    seed = int(cfg.get("seed", 0) if seed is None else seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = {k: v for k, v in cfg.items() if k != "cases"}
    cases = cfg.get("cases") or []
    if not cases:
        rep = _run_single(base, out, seed)
    else:
        rep = RunReport(config=cfg)
        for i, override in enumerate(cases):
            sub = _run_single({**base, **override}, out / f"case_{i}", seed)
            for k, v in sub.timings.items():
                rep.timings[f"case_{i}.{k}"] = v
            rep.outputs.extend(sub.outputs)
            for k, v in sub.checks.items():
                rep.checks[f"case_{i}.{k}"] = v
            rep.details[f"case_{i}"] = sub.details
    rep.outputs.append(str(rep.write(out)))
    return rep


# -- bundled scenarios -------------------------------------------------------------

def bundled_scenarios() -> dict:
    root = resources.files("wentzell_lab") / "scenarios"
    out = {}
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".json"):
            out[entry.name[:-5]] = json.loads(entry.read_text())
    return out


def _resolve_config(arg: str) -> dict:
    path = Path(arg)
    if path.exists():
        return load_config(path)
    bundled = bundled_scenarios()
    if arg in bundled:
        return bundled[arg]
    raise ConfigError(f"no config file or bundled scenario named {arg!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wentzell-lab",
                                description="Fourth-order operator with dynamic boundary conditions: experiments")
    p.add_argument("--list", action="store_true", help="list bundled scenarios and exit")
    sub = p.add_subparsers(dest="experiment")
    for name in EXPERIMENTS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON file or bundled scenario name")
        s.add_argument("--out-dir", default="out", help="output directory")
        s.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.list:
        for name, cfg in bundled_scenarios().items():
            print(f"{name:32s} {cfg['experiment']:15s} {cfg.get('description', '')}")
        return EXIT_OK
    if args.experiment is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = _resolve_config(args.config)
        if cfg.get("experiment") != args.experiment:
            raise ConfigError(f"config runs {cfg.get('experiment')!r}, not {args.experiment!r}")
        rep = run_scenario(cfg, args.out_dir, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (WentzellError, ArithmeticError, sla.LinAlgError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure in {args.config}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for name, ok in rep.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"report: {Path(args.out_dir) / 'report.json'}")
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
