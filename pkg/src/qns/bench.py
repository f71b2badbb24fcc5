"""Benchmark harness: the experiment set behind the qns command line.

Every benchmark returns a BenchmarkReport carrying the full configuration
echo, a metric table, the acceptance checks evaluated on it, and the CSV
artifacts written under the output directory. CSV floats use 12
significant digits and runs are deterministic given (command, seed).
"""
from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np

from . import cfd, hhl, metrics
from .cfd import NSConfig
from .grid import StretchConfig, build_grid
from .hhl import HHLConfig, HHLSolver, calibrate, hhl_solve
from .hybrid import CHEBYSHEV, FULL_STATE, HybridConfig, hybrid_run
from .linalg import (assemble_laplacian, assemble_laplacian_1d, direct_solve,
                     dirichlet_rhs_fold, dirichlet_rhs_fold_1d)
from .qst import ShotModel, build_basis, chebyshev_nodes, reconstruct

BENCHMARKS = ("poisson1d", "poisson2d", "nc-sweep", "cheb-demo", "cavity-classical",
              "cavity-fullstate", "cavity-hybrid", "tgv-hybrid")


class BenchmarkError(ValueError):
    pass


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class BenchmarkReport:
    name: str
    seed: int
    config: dict
    metrics: dict = dataclass_field(default_factory=dict)
    checks: list = dataclass_field(default_factory=list)
    artifacts: list = dataclass_field(default_factory=list)
    elapsed: float = 0.0

    def add_check(self, name, value, threshold):
        ok = bool(np.isfinite(value)) and value <= threshold
        self.checks.append(Check(name, float(value), float(threshold), ok))

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        lines = [f"benchmark: {self.name}", f"seed: {self.seed}"]
        lines += [f"config.{k}: {v}" for k, v in sorted(self.config.items())]
        lines += [f"metric.{k}: {v:.9g}" for k, v in self.metrics.items()]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"check.{c.name}: {c.value:.6g} <= {c.threshold:g} [{status}]")
        lines += [f"artifact: {a}" for a in self.artifacts]
        lines.append(f"elapsed_seconds: {self.elapsed:.3f}")
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _out_dir(out) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _field_rows(field: cfd.FlowField, extra: dict[str, np.ndarray] | None = None):
    """Row-major interior dump with i, j, x, y columns (1-based indices)."""
    g = field.grid
    extra = extra or {}
    rows = []
    for j in range(1, g.n_eta + 1):
        for i in range(1, g.n_xi + 1):
            row = [i, j, g.x_nodes[i], g.y_nodes[j],
                   field.u[i, j], field.v[i, j], field.p[i, j]]
            row.extend(arr[i - 1, j - 1] for arr in extra.values())
            rows.append(row)
    header = ["i", "j", "x", "y", "u", "v", "p"] + list(extra.keys())
    return header, rows


def _write_report(report: BenchmarkReport, out_dir: Path):
    path = out_dir / f"{report.name}-report.txt"
    with open(path, "w") as fh:
        fh.write(report.text())
    report.artifacts.append(str(path))


# --------------------------------------------------------------------------
# Poisson benchmarks
# --------------------------------------------------------------------------

def _poisson1d_problem(n_points: int):
    cfg = StretchConfig()
    A = assemble_laplacian_1d(n_points, cfg)
    rhs = dirichlet_rhs_fold_1d(n_points, cfg, lambda x: 10.0 * x, 0.0, 1.0)
    from .grid import nodes_1d

    x_nodes, _, _ = nodes_1d(n_points, cfg)
    return A, rhs, x_nodes[1:-1]


def bench_poisson1d(out="qns-out", seed=0, grid=16, clock_qubits=8,
                    backend="spectral", trotter_steps=150, **_):
    t0 = time.perf_counter()
    n_b = int(round(np.log2(grid)))
    if 2 ** n_b != grid:
        raise BenchmarkError(f"grid size {grid} must be a power of two")
    A, rhs, x = _poisson1d_problem(grid)
    x_ref = direct_solve(A, rhs)
    cfg = HHLConfig(n_b=n_b, n_c=clock_qubits, backend=backend, trotter_steps=trotter_steps)
    result = hhl_solve(A, rhs, cfg)
    candidate = calibrate(result.solution_amplitudes[:grid], x_ref)
    are = metrics.metric_are(candidate, x_ref)
    cos = float(abs(np.dot(candidate, x_ref)) / (np.linalg.norm(candidate) * np.linalg.norm(x_ref)))

    report = BenchmarkReport("poisson1d", seed, {
        "grid": grid, "clock_qubits": clock_qubits, "backend": backend,
        "trotter_steps": trotter_steps, "rhs": "f(x) = 10 x", "bc": "u(0)=0, u(1)=1",
    })
    report.metrics = {
        "mean_are": float(are.mean()), "max_are": float(are.max()),
        "cosine_similarity": cos, "success_probability": result.success_probability,
        "lambda_min": result.lambda_min, "lambda_max": result.lambda_max,
    }
    report.add_check("mean_are", are.mean(), 0.05)
    out_dir = _out_dir(out)
    path = out_dir / "poisson1d-solution.csv"
    write_csv(path, ["k", "x", "u_classical", "u_hhl", "are"],
              [[k + 1, x[k], x_ref[k], candidate[k], are[k]] for k in range(grid)])
    report.artifacts.append(str(path))
    report.elapsed = time.perf_counter() - t0
    _write_report(report, out_dir)
    return report


def poisson2d_boundary(x, y):
    """The four stated boundary functions of the 2D benchmark."""
    if x == 0.0:
        return 0.5
    if abs(x - 1.0) < 1e-12:
        return float(np.sin(y))
    if y == 0.0:
        return (x - 0.5) * (x - 1.0)
    return 0.5 * (x - 1.0)


def poisson2d_rhs(x, y):
    """Heaviside source 4 - 8 H(x - 0.5)."""
    return 4.0 - 8.0 * (x > 0.5)


def _poisson2d_problem(n: int):
    grid = build_grid(n, n, StretchConfig())
    A = assemble_laplacian(grid, "dirichlet")
    rhs = dirichlet_rhs_fold(grid, poisson2d_boundary, poisson2d_rhs)
    return grid, A, rhs


def bench_poisson2d(out="qns-out", seed=0, grid=16, clock_qubits=8,
                    backend="spectral", trotter_steps=150, **_):
    t0 = time.perf_counter()
    n_b = int(round(np.log2(grid * grid)))
    if 2 ** n_b != grid * grid:
        raise BenchmarkError(f"grid {grid}x{grid} is not a power-of-two unknown count")
    g, A, rhs = _poisson2d_problem(grid)
    x_ref = direct_solve(A, rhs)
    cfg = HHLConfig(n_b=n_b, n_c=clock_qubits, backend=backend, trotter_steps=trotter_steps)
    result = hhl_solve(A, rhs, cfg)
    candidate = calibrate(result.solution_amplitudes[:rhs.size], x_ref)
    are = metrics.metric_are(candidate, x_ref)

    report = BenchmarkReport("poisson2d", seed, {
        "grid": grid, "clock_qubits": clock_qubits, "backend": backend,
        "rhs": "4 - 8 H(x - 0.5)", "bc": "inhomogeneous Dirichlet (four sides)",
    })
    report.metrics = {
        "mean_are": float(are.mean()), "max_are": float(are.max()),
        "success_probability": result.success_probability,
    }
    report.add_check("mean_are", are.mean(), 0.05)
    out_dir = _out_dir(out)
    path = out_dir / "poisson2d-field.csv"
    rows = []
    for j in range(1, g.n_eta + 1):
        for i in range(1, g.n_xi + 1):
            k = g.flat_index(i, j)
            rows.append([i, j, g.x_nodes[i], g.y_nodes[j], x_ref[k], candidate[k], are[k]])
    write_csv(path, ["i", "j", "x", "y", "u_classical", "u_hhl", "are"], rows)
    report.artifacts.append(str(path))
    report.elapsed = time.perf_counter() - t0
    _write_report(report, out_dir)
    return report


def _nc_sweep_point(args):
    n_c, grid, backend, trotter_steps = args
    A, rhs, _ = _poisson1d_problem(grid)
    x_ref = direct_solve(A, rhs)
    rows = hhl.nc_sweep(A, rhs, x_ref, [n_c], int(round(np.log2(grid))),
                        backend=backend, trotter_steps=trotter_steps)
    return rows[0]


def bench_nc_sweep(out="qns-out", seed=0, grid=16, nc_values=None,
                   backend="spectral", trotter_steps=150, jobs=1, **_):
    t0 = time.perf_counter()
    nc_values = list(nc_values) if nc_values else list(range(2, 11))
    args = [(n_c, grid, backend, trotter_steps) for n_c in nc_values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_nc_sweep_point, args))
    else:
        rows = [_nc_sweep_point(a) for a in args]

    report = BenchmarkReport("nc-sweep", seed, {
        "grid": grid, "nc_values": nc_values, "backend": backend, "jobs": jobs,
    })
    table = dict(rows)
    for n_c, are in rows:
        report.metrics[f"mean_are_nc{n_c}"] = are
    if 8 in table:
        report.add_check("mean_are_nc8", table[8], 0.05)
    out_dir = _out_dir(out)
    path = out_dir / "nc-sweep.csv"
    write_csv(path, ["n_c", "mean_are"], rows)
    report.artifacts.append(str(path))
    report.elapsed = time.perf_counter() - t0
    _write_report(report, out_dir)
    return report


# --------------------------------------------------------------------------
# Chebyshev tomography demo
# --------------------------------------------------------------------------

def cheb_demo_function(x):
    return np.log(x + 2.0) * np.sin(5.0 * np.exp(x + 1.0))


def bench_cheb_demo(out="qns-out", seed=0, grid=64, cheb_m=20, shots=300, **_):
    t0 = time.perf_counter()
    nodes = chebyshev_nodes(grid)
    f = cheb_demo_function(nodes)
    norm = np.linalg.norm(f)
    psi = f / norm
    basis = build_basis(nodes, cheb_m)
    recon, _ = reconstruct(psi, basis, ShotModel(shots=shots, seed=seed))
    mse_norm = metrics.mse(recon, psi)
    mse_rescaled = metrics.mse(recon * norm, f)

    report = BenchmarkReport("cheb-demo", seed, {
        "grid": grid, "cheb_m": cheb_m, "shots": shots,
        "function": "ln(x+2) sin(5 e^(x+1))", "nodes": "chebyshev",
    })
    report.metrics = {
        "mse": mse_norm, "mse_rescaled": mse_rescaled,
        "gram_condition": basis.condition_number,
    }
    report.add_check("mse", mse_norm, 0.01)
    out_dir = _out_dir(out)
    path = out_dir / "cheb-demo.csv"
    write_csv(path, ["k", "x", "f", "f_reconstructed", "psi", "psi_reconstructed"],
              [[k, nodes[k], f[k], recon[k] * norm, psi[k], recon[k]] for k in range(grid)])
    report.artifacts.append(str(path))
    report.elapsed = time.perf_counter() - t0
    _write_report(report, out_dir)
    return report


# --------------------------------------------------------------------------
# Cavity and TGV runs
# --------------------------------------------------------------------------

def bench_cavity_classical(out="qns-out", seed=0, grid=64, re=100.0, dt=2e-3,
                           steps=12500, beta=None, **_):
    t0 = time.perf_counter()
    cfg = NSConfig(nu=1.0 / re, dt=dt, steps=steps, case="cavity", n=grid, beta=beta)
    field, history = cfd.classical_run(cfg)
    ref = metrics.ghia_reference()
    rms_u, rms_v = metrics.centerline_rms_vs_ghia(field, ref)

    report = BenchmarkReport("cavity-classical", seed, {
        "grid": grid, "re": re, "dt": dt, "steps": steps, "beta": beta,
    })
    report.metrics = {
        "rms_u_vs_ghia": rms_u, "rms_v_vs_ghia": rms_v,
        "kinetic_energy": history[-1]["kinetic_energy"],
        "final_time": field.time,
        "max_poisson_residual": max(h["poisson_residual"] for h in history),
    }
    report.add_check("rms_u_vs_ghia", rms_u, 0.03)
    out_dir = _out_dir(out)
    header, rows = _field_rows(field)
    path = out_dir / "cavity-classical-field.csv"
    write_csv(path, header, rows)
    report.artifacts.append(str(path))
    report.artifacts += _write_centerlines(field, ref, out_dir, "cavity-classical")
    report.elapsed = time.perf_counter() - t0
    _write_report(report, out_dir)
    return report


def _write_centerlines(field, ref, out_dir, prefix):
    paths = []
    y, u_prof = metrics.centerline_extract(field, "vertical")
    x, v_prof = metrics.centerline_extract(field, "horizontal")
    p1 = out_dir / f"{prefix}-centerline-vertical.csv"
    write_csv(p1, ["y", "u"], list(zip(y, u_prof)))
    p2 = out_dir / f"{prefix}-centerline-horizontal.csv"
    write_csv(p2, ["x", "v"], list(zip(x, v_prof)))
    paths += [str(p1), str(p2)]
    if ref is not None:
        p3 = out_dir / f"{prefix}-ghia-comparison.csv"
        u_at = np.interp(ref.y, y, u_prof)
        v_at = np.interp(ref.x, x, v_prof)
        write_csv(p3, ["y", "u_ghia", "u_solver", "x", "v_ghia", "v_solver"],
                  [[ref.y[k], ref.u[k], u_at[k], ref.x[k], ref.v[k], v_at[k]]
                   for k in range(ref.y.size)])
        paths.append(str(p3))
    return paths


def _hybrid_cavity(name, readout, out, seed, grid, clock_qubits, trotter_steps, backend,
                   re, dt, steps, beta, cheb_m, shots, gradient, are_threshold):
    t0 = time.perf_counter()
    n_b = int(round(np.log2(grid * grid)))
    ns = NSConfig(nu=1.0 / re, dt=dt, steps=steps, case="cavity", n=grid, beta=beta)
    cfg = HybridConfig(
        ns=ns,
        hhl=HHLConfig(n_b=n_b, n_c=clock_qubits, backend=backend, trotter_steps=trotter_steps),
        readout=readout, cheb_m=cheb_m,
        shot_model=ShotModel(shots=shots, seed=seed) if readout == CHEBYSHEV else None,
        gradient=gradient,
    )
    field, twin, history = hybrid_run(cfg)
    vel_are = history.velocity_are_vs_twin[-1]

    report = BenchmarkReport(name, seed, {
        "grid": grid, "clock_qubits": clock_qubits, "backend": backend, "re": re,
        "dt": dt, "steps": steps, "beta": beta, "readout": readout,
        "cheb_m": cheb_m if readout == CHEBYSHEV else None,
        "shots": shots if readout == CHEBYSHEV else None, "gradient": gradient,
    })
    report.metrics = {
        "velocity_are_vs_twin": vel_are,
        "velocity_nare_vs_twin": history.velocity_nare_vs_twin[-1],
        "mean_pressure_are": history.mean_pressure_are(),
        "mean_pressure_l2_residual": history.mean_pressure_l2_residual(),
        "mean_success_probability": float(np.mean([d.success_probability for d in history.steps])),
        "final_time": field.time,
    }
    if are_threshold is not None:
        report.add_check("velocity_are_vs_twin", vel_are, are_threshold)
    out_dir = _out_dir(out)
    header, rows = _field_rows(field, {
        "u_classical": twin.u[1:-1, 1:-1], "v_classical": twin.v[1:-1, 1:-1],
        "p_classical": twin.p[1:-1, 1:-1],
    })
    path = out_dir / f"{name}-field.csv"
    write_csv(path, header, rows)
    report.artifacts.append(str(path))
    report.artifacts += _write_centerlines(field, metrics.ghia_reference(), out_dir, name)
    report.artifacts.append(_write_step_diagnostics(history, out_dir, name))
    report.elapsed = time.perf_counter() - t0
    _write_report(report, out_dir)
    return report


def _write_step_diagnostics(history, out_dir, prefix) -> str:
    path = out_dir / f"{prefix}-steps.csv"
    rows = []
    for d, are, nare in zip(history.steps, history.velocity_are_vs_twin,
                            history.velocity_nare_vs_twin):
        rows.append([d.step, d.success_probability, d.scale_factor,
                     d.gram_condition if d.gram_condition is not None else "",
                     d.pressure_are, d.pressure_l2_residual, d.poisson_residual,
                     d.rhs_scale, are, nare])
    write_csv(path, ["step", "success_probability", "scale_factor", "gram_condition",
                     "pressure_are", "pressure_l2_residual", "poisson_residual",
                     "rhs_scale", "velocity_are_vs_twin", "velocity_nare_vs_twin"], rows)
    return str(path)


def bench_cavity_fullstate(out="qns-out", seed=0, grid=16, clock_qubits=8,
                           trotter_steps=150, backend="spectral", re=100.0, dt=1e-3,
                           steps=200, beta=2.5, gradient="central", long=False, **_):
    return _hybrid_cavity("cavity-fullstate", FULL_STATE, out, seed, grid, clock_qubits,
                          trotter_steps, backend, re, dt, 2000 if long else steps, beta,
                          10, None, gradient, None)


def bench_cavity_hybrid(out="qns-out", seed=0, grid=16, clock_qubits=8,
                        trotter_steps=150, backend="spectral", re=100.0, dt=1e-3,
                        steps=200, beta=2.5, cheb_m=10, shots=10 ** 7,
                        gradient="central", long=False, **_):
    threshold = 0.12 if long else 0.15
    return _hybrid_cavity("cavity-hybrid", CHEBYSHEV, out, seed, grid, clock_qubits,
                          trotter_steps, backend, re, dt, 2000 if long else steps, beta,
                          cheb_m, shots, gradient, threshold)


def bench_tgv_hybrid(out="qns-out", seed=0, grid=16, clock_qubits=8, trotter_steps=150,
                     backend="spectral", nu=0.01, dt=1e-3, steps=200, cheb_m=10,
                     shots=10 ** 7, readout=CHEBYSHEV, gradient="central", **_):
    t0 = time.perf_counter()
    n_b = int(round(np.log2(grid * grid)))
    ns = NSConfig(nu=nu, dt=dt, steps=steps, case="tgv", n=grid)
    cfg = HybridConfig(
        ns=ns,
        hhl=HHLConfig(n_b=n_b, n_c=clock_qubits, backend=backend, trotter_steps=trotter_steps),
        readout=readout, cheb_m=cheb_m,
        shot_model=ShotModel(shots=shots, seed=seed) if readout == CHEBYSHEV else None,
        gradient=gradient,
    )
    field, twin, history = hybrid_run(cfg)
    g = field.grid
    xm, ym = np.meshgrid(g.x_nodes, g.y_nodes, indexing="ij")
    u_e, v_e, p_e = cfd.tgv_exact(xm, ym, field.time, nu)
    p_e = p_e - p_e[1:-1, 1:-1].mean()
    nare_u = metrics.metric_normalized_are(field.u[1:-1, 1:-1], u_e[1:-1, 1:-1])
    nare_v = metrics.metric_normalized_are(field.v[1:-1, 1:-1], v_e[1:-1, 1:-1])
    nare_vel = 0.5 * (nare_u.mean() + nare_v.mean())
    nare_p = metrics.metric_normalized_are(field.p[1:-1, 1:-1], p_e[1:-1, 1:-1]).mean()

    report = BenchmarkReport("tgv-hybrid", seed, {
        "grid": grid, "clock_qubits": clock_qubits, "backend": backend, "nu": nu,
        "dt": dt, "steps": steps, "readout": readout,
        "cheb_m": cheb_m, "shots": shots, "gradient": gradient,
    })
    report.metrics = {
        "velocity_normalized_are": float(nare_vel),
        "pressure_normalized_are": float(nare_p),
        "u_normalized_are": float(nare_u.mean()),
        "v_normalized_are": float(nare_v.mean()),
        "mean_pressure_l2_residual": history.mean_pressure_l2_residual(),
        "kinetic_energy": cfd.kinetic_energy(field),
        "final_time": field.time,
    }
    report.add_check("velocity_normalized_are", nare_vel, 0.05)
    report.add_check("pressure_normalized_are", nare_p, 0.10)
    out_dir = _out_dir(out)
    header, rows = _field_rows(field, {
        "u_exact": u_e[1:-1, 1:-1], "v_exact": v_e[1:-1, 1:-1], "p_exact": p_e[1:-1, 1:-1],
    })
    path = out_dir / "tgv-hybrid-field.csv"
    write_csv(path, header, rows)
    report.artifacts.append(str(path))
    report.artifacts.append(_write_step_diagnostics(history, out_dir, "tgv-hybrid"))
    report.elapsed = time.perf_counter() - t0
    _write_report(report, out_dir)
    return report


_RUNNERS = {
    "poisson1d": bench_poisson1d,
    "poisson2d": bench_poisson2d,
    "nc-sweep": bench_nc_sweep,
    "cheb-demo": bench_cheb_demo,
    "cavity-classical": bench_cavity_classical,
    "cavity-fullstate": bench_cavity_fullstate,
    "cavity-hybrid": bench_cavity_hybrid,
    "tgv-hybrid": bench_tgv_hybrid,
}


def run_benchmark(name: str, **options) -> BenchmarkReport:
    if name not in _RUNNERS:
        raise BenchmarkError(f"unknown benchmark {name!r}; choose from {BENCHMARKS}")
    return _RUNNERS[name](**options)


def resolve_seed(explicit=None) -> int:
    """--seed flag wins, then the QNS_SEED environment variable, then 0."""
    if explicit is not None:
        return int(explicit)
    env = os.environ.get("QNS_SEED")
    return int(env) if env else 0
