"""Quantum pressure solve coupled into the classical projection loop.

Each hybrid step assembles the divergence source exactly as the classical
solver does, sends it through HHL, reads the normalized solution out either
directly (full statevector) or through Chebyshev tomography, and calibrates
the result: the L2 norm is matched to the lockstep classical solve of the
same right-hand side (whose field values are never used), the global sign
is fixed by correlation, and the zero-mean gauge is enforced. An
independent classical twin trajectory is advanced alongside for the
end-of-run comparison metrics.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import cfd
from .cfd import FlowField, NSConfig
from .hhl import HHLConfig, HHLSolver
from .linalg import NULLSPACE_CONSTANT, direct_solve
from .qst import ChebyBasis, ShotModel, build_basis, reconstruct

FULL_STATE = "fullstate"
CHEBYSHEV = "chebyshev"

CENTRAL = "central"
ANALYTIC = "analytic-chebyshev"


class HybridError(ValueError):
    """Invalid hybrid configuration."""


@dataclass
class HybridConfig:
    ns: NSConfig
    hhl: HHLConfig
    readout: str = FULL_STATE
    cheb_m: int = 10
    shot_model: ShotModel | None = None
    gradient: str = CENTRAL

    def __post_init__(self):
        if self.readout not in (FULL_STATE, CHEBYSHEV):
            raise HybridError(f"unknown readout {self.readout!r}")
        if self.gradient not in (CENTRAL, ANALYTIC):
            raise HybridError(f"unknown gradient method {self.gradient!r}")
        if self.gradient == ANALYTIC and self.readout != CHEBYSHEV:
            raise HybridError("analytic gradient requires the chebyshev readout")
        if self.ns.n * self.ns.n > 2 ** self.hhl.n_b:
            raise HybridError(
                f"{self.ns.n}x{self.ns.n} interior nodes exceed 2^{self.hhl.n_b} amplitudes")


@dataclass
class StepDiagnostics:
    step: int
    success_probability: float
    scale_factor: float
    gram_condition: float | None
    pressure_are: float          # Eq-19 metric; blows up near p = 0 nodes by design
    pressure_l2_residual: float  # ||p_q - p_ref||_2 / ||p_ref||_2, scale-robust
    poisson_residual: float
    rhs_scale: float


@dataclass
class HybridHistory:
    steps: list = dataclass_field(default_factory=list)
    velocity_are_vs_twin: list = dataclass_field(default_factory=list)
    velocity_nare_vs_twin: list = dataclass_field(default_factory=list)

    def mean_pressure_are(self) -> float:
        return float(np.mean([d.pressure_are for d in self.steps]))

    def mean_pressure_l2_residual(self) -> float:
        return float(np.mean([d.pressure_l2_residual for d in self.steps]))


def hybrid_pressure_solve(b: np.ndarray, p_classical: np.ndarray, solver: HHLSolver,
                          basis: ChebyBasis | None, cfg: HybridConfig):
    """Quantum pressure vector calibrated against the classical reference.

    Returns (pressure vector, metadata dict with the HHL result and the QST
    coefficients when the chebyshev readout is active). A zero rhs
    short-circuits to zero pressure.
    """
    n = b.size
    if np.linalg.norm(b, np.inf) == 0.0:
        return np.zeros(n), {"success_probability": 1.0, "scale": 0.0, "coeffs": None}
    result = solver.solve(b)
    raw = result.solution_amplitudes[:n]
    coeffs = None
    if cfg.readout == CHEBYSHEV:
        if basis is None:
            raise HybridError("chebyshev readout needs a basis")
        model = cfg.shot_model if cfg.shot_model is not None else ShotModel(shots=None)
        raw, coeffs = reconstruct(raw, basis, model)
    unit = raw / np.linalg.norm(raw)
    sign = 1.0 if float(np.dot(unit, p_classical)) >= 0.0 else -1.0
    unit = sign * unit
    if coeffs is not None:
        coeffs = sign * coeffs
    scale = float(np.linalg.norm(p_classical))
    p = scale * unit
    p = p - p.mean()
    if coeffs is not None:
        # keep the polynomial consistent with the scaled, gauged field;
        # the gauge shift only moves the constant (T0 x T0) coefficient
        coeffs = coeffs * scale
        shift = scale * unit.mean()
        coeffs[0] -= shift * basis._norms[0]
    meta = {
        "result": result,
        "success_probability": result.success_probability,
        "scale": scale,
        "coeffs": coeffs,
    }
    return p, meta


def hybrid_step(field: FlowField, cfg: HybridConfig, A, solver: HHLSolver,
                basis: ChebyBasis | None, step=0):
    """One projection cycle with the quantum pressure path."""
    ns = cfg.ns
    grid = field.grid
    work = field.copy()
    cfd.apply_velocity_bc(work, ns)
    u_star, v_star = cfd.advect_diffuse(work, ns)
    star = FlowField(grid, u_star, v_star, work.p, work.time)
    cfd.apply_velocity_bc(star, ns)

    b = cfd.divergence_rhs(star.u, star.v, grid, ns.dt)
    if A.nullspace == NULLSPACE_CONSTANT:
        b = b - b.mean()
    p_ref = direct_solve(A, b)
    p_ref = p_ref - p_ref.mean()
    p_vec, meta = hybrid_pressure_solve(b, p_ref, solver, basis, cfg)
    residual = float(np.linalg.norm(A.matvec(p_ref) - b, np.inf))

    p = work.p.copy()
    p[1:-1, 1:-1] = cfd.vec_to_interior(p_vec, grid)
    cfd.apply_pressure_bc(p, ns)
    if cfg.gradient == ANALYTIC and meta.get("coeffs") is not None:
        dpdx, dpdy = cfd.pressure_gradient(p, grid, ANALYTIC, cheb=(basis, meta["coeffs"]))
    else:
        dpdx, dpdy = cfd.pressure_gradient(p, grid, CENTRAL)
    u_new, v_new = cfd.project_velocity(star.u, star.v, dpdx, dpdy, ns.dt)
    out = FlowField(grid, u_new, v_new, p, work.time + ns.dt)
    cfd.apply_velocity_bc(out, ns)
    cfd._check_finite(out, step, "hybrid projection")

    from .metrics import metric_are

    ref_norm = float(np.linalg.norm(p_ref))
    diag = StepDiagnostics(
        step=step,
        success_probability=float(meta["success_probability"]),
        scale_factor=float(meta["scale"]),
        gram_condition=basis.condition_number if basis is not None else None,
        pressure_are=float(metric_are(p_vec, p_ref).mean()),
        pressure_l2_residual=float(np.linalg.norm(p_vec - p_ref)) / ref_norm if ref_norm > 0 else 0.0,
        poisson_residual=residual,
        rhs_scale=float(np.linalg.norm(b, np.inf)),
    )
    return out, diag


def build_hybrid_setup(cfg: HybridConfig):
    """Grid, pressure matrix, HHL solver and QST basis for a hybrid run."""
    grid = cfd.case_grid(cfg.ns)
    A = cfd.pressure_matrix(grid, cfg.ns)
    solver = HHLSolver(A, cfg.hhl)
    basis = None
    if cfg.readout == CHEBYSHEV:
        basis = build_basis((grid.interior_x, grid.interior_y), cfg.cheb_m, dims=2)
    return grid, A, solver, basis


def hybrid_run(cfg: HybridConfig):
    """Advance the hybrid solver and its independent classical twin.

    Returns (hybrid field, twin field, HybridHistory). The twin trajectory
    only enters the recorded comparison metrics, never the hybrid physics;
    the per-step calibration reference is recomputed from the hybrid's own
    right-hand side inside hybrid_step.
    """
    from .metrics import metric_are, metric_normalized_are, speed

    grid, A, solver, basis = build_hybrid_setup(cfg)
    field = cfd.initial_field(cfg.ns, grid)
    twin = field.copy()
    history = HybridHistory()
    for step in range(cfg.ns.steps):
        field, diag = hybrid_step(field, cfg, A, solver, basis, step=step)
        twin, _ = cfd.classical_step(twin, cfg.ns, A, step=step)
        history.steps.append(diag)
        s_hyb = speed(field.u[1:-1, 1:-1], field.v[1:-1, 1:-1])
        s_twin = speed(twin.u[1:-1, 1:-1], twin.v[1:-1, 1:-1])
        history.velocity_are_vs_twin.append(float(metric_are(s_hyb, s_twin).mean()))
        history.velocity_nare_vs_twin.append(float(metric_normalized_are(s_hyb, s_twin).mean()))
    return field, twin, history
