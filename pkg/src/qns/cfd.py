"""Classical projection-method solver for 2D incompressible flow.

Explicit forward-Euler advection-diffusion in non-conservative form with
metric-scaled central differences, a pressure Poisson solve over the
flattened interior nodes, and a divergence-free velocity correction.
Two cases are wired in: the lid-driven cavity (no-slip walls, moving top
lid, all-Neumann pressure) and the Taylor-Green vortex on a periodic
uniform grid. The density is fixed at rho = 1 so the pressure is
kinematic throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid2D, StretchConfig, HYPERBOLIC, UNIFORM, build_grid, build_periodic_grid
from .linalg import NULLSPACE_CONSTANT, SparseSymMatrix, assemble_laplacian, direct_solve

RHO = 1.0

CAVITY = "cavity"
TGV = "tgv"


class CFDError(ValueError):
    """Invalid solver configuration."""


class InstabilityError(RuntimeError):
    """Non-finite value appeared during time stepping."""


@dataclass
class NSConfig:
    """Time-stepping parameters plus the grid the case lives on."""

    nu: float = 0.01
    dt: float = 1e-3
    steps: int = 200
    lid_speed: float = 1.0
    case: str = CAVITY
    n: int = 16
    beta: float | None = None   # hyperbolic stretching for the cavity; None = uniform

    def __post_init__(self):
        if self.dt <= 0 or self.nu <= 0:
            raise CFDError("dt and nu must be positive")
        if self.case not in (CAVITY, TGV):
            raise CFDError(f"unknown case {self.case!r}")


class FlowField:
    """Collocated u, v, p arrays of shape (n_xi+2, n_eta+2), axis 0 = x."""

    def __init__(self, grid: Grid2D, u=None, v=None, p=None, time=0.0):
        shape = (grid.n_xi + 2, grid.n_eta + 2)
        self.grid = grid
        self.u = np.zeros(shape) if u is None else u
        self.v = np.zeros(shape) if v is None else v
        self.p = np.zeros(shape) if p is None else p
        self.time = time

    def copy(self) -> "FlowField":
        return FlowField(self.grid, self.u.copy(), self.v.copy(), self.p.copy(), self.time)


def interior_to_vec(arr: np.ndarray) -> np.ndarray:
    """Interior block flattened with x fastest (k = i + (j-1) N_xi)."""
    return arr[1:-1, 1:-1].flatten(order="F")


def vec_to_interior(vec: np.ndarray, grid: Grid2D) -> np.ndarray:
    return vec.reshape((grid.n_xi, grid.n_eta), order="F")


def case_grid(cfg: NSConfig) -> Grid2D:
    if cfg.case == TGV:
        return build_periodic_grid(cfg.n, cfg.n, 2.0 * np.pi)
    if cfg.beta is None:
        return build_grid(cfg.n, cfg.n, StretchConfig(length=1.0, mode=UNIFORM))
    return build_grid(cfg.n, cfg.n, StretchConfig(beta=cfg.beta, length=1.0, mode=HYPERBOLIC))


def pressure_matrix(grid: Grid2D, cfg: NSConfig) -> SparseSymMatrix:
    return assemble_laplacian(grid, "periodic" if cfg.case == TGV else "neumann")


def tgv_exact(x, y, t, nu):
    """Exact decaying Taylor-Green fields (u, v, p) at the given points."""
    decay = np.exp(-2.0 * nu * t)
    u = np.sin(x) * np.cos(y) * decay
    v = -np.cos(x) * np.sin(y) * decay
    p = 0.25 * (np.cos(2.0 * x) + np.cos(2.0 * y)) * decay * decay
    return u, v, p


def apply_cavity_bc(field: FlowField, cfg: NSConfig):
    """No-slip walls, moving top lid; lid value wins at the top corners."""
    for arr in (field.u, field.v):
        arr[0, :] = 0.0
        arr[-1, :] = 0.0
        arr[:, 0] = 0.0
    field.v[:, -1] = 0.0
    field.u[:, -1] = cfg.lid_speed


def apply_periodic_bc(field: FlowField, cfg: NSConfig = None):
    for arr in (field.u, field.v, field.p):
        _wrap_ghosts(arr)


def _wrap_ghosts(arr: np.ndarray):
    arr[0, :] = arr[-2, :]
    arr[-1, :] = arr[1, :]
    arr[:, 0] = arr[:, -2]
    arr[:, -1] = arr[:, 1]


def apply_velocity_bc(field: FlowField, cfg: NSConfig):
    if cfg.case == CAVITY:
        apply_cavity_bc(field, cfg)
    else:
        for arr in (field.u, field.v):
            _wrap_ghosts(arr)


def apply_pressure_bc(p: np.ndarray, cfg: NSConfig):
    """Ghost pressures: homogeneous-Neumann mirror (cavity) or wraparound."""
    if cfg.case == CAVITY:
        p[0, :] = p[1, :]
        p[-1, :] = p[-2, :]
        p[:, 0] = p[:, 1]
        p[:, -1] = p[:, -2]
    else:
        _wrap_ghosts(p)


def _stencil_views(arr):
    return arr[1:-1, 1:-1], arr[2:, 1:-1], arr[:-2, 1:-1], arr[1:-1, 2:], arr[1:-1, :-2]


def advect_diffuse(field: FlowField, cfg: NSConfig):
    """Intermediate velocity u* = u + dt (-(u.grad)u + nu lap u).

    Central differences scaled by the node metrics; the Laplacian is the
    squared-metric 5-point stencil. Boundary values are carried over
    unchanged (the caller re-applies the case boundary conditions).
    """
    g = field.grid
    hx = g.h_xi[1:-1][:, None]
    hy = g.h_eta[1:-1][None, :]
    dxi, deta = g.d_xi, g.d_eta
    u_star, v_star = field.u.copy(), field.v.copy()
    for src, dst in ((field.u, u_star), (field.v, v_star)):
        c, e, w, n, s = _stencil_views(src)
        u_c = field.u[1:-1, 1:-1]
        v_c = field.v[1:-1, 1:-1]
        conv = u_c * hx * (e - w) / (2.0 * dxi) + v_c * hy * (n - s) / (2.0 * deta)
        lap = (hx * hx) * (e - 2.0 * c + w) / dxi ** 2 + (hy * hy) * (n - 2.0 * c + s) / deta ** 2
        dst[1:-1, 1:-1] = c + cfg.dt * (-conv + cfg.nu * lap)
    return u_star, v_star


def central_divergence(u: np.ndarray, v: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Metric-scaled central-difference divergence at the interior nodes."""
    hx = grid.h_xi[1:-1][:, None]
    hy = grid.h_eta[1:-1][None, :]
    dudx = hx * (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * grid.d_xi)
    dvdy = hy * (v[1:-1, 2:] - v[1:-1, :-2]) / (2.0 * grid.d_eta)
    return dudx + dvdy


def divergence_rhs(u_star: np.ndarray, v_star: np.ndarray, grid: Grid2D, dt: float) -> np.ndarray:
    """Poisson right-hand side (rho/dt) div(u*), flattened x-fastest."""
    div = central_divergence(u_star, v_star, grid)
    return (RHO / dt) * div.flatten(order="F")


def pressure_gradient(p: np.ndarray, grid: Grid2D, method="central", cheb=None):
    """(dp/dx, dp/dy) at the interior nodes.

    "central" differentiates the node values (ghosts must be current);
    "analytic-chebyshev" differentiates the Chebyshev reconstruction
    instead, cheb = (ChebyBasis, coefficients from qst.reconstruct).
    """
    if method == "central":
        hx = grid.h_xi[1:-1][:, None]
        hy = grid.h_eta[1:-1][None, :]
        dpdx = hx * (p[2:, 1:-1] - p[:-2, 1:-1]) / (2.0 * grid.d_xi)
        dpdy = hy * (p[1:-1, 2:] - p[1:-1, :-2]) / (2.0 * grid.d_eta)
        return dpdx, dpdy
    if method != "analytic-chebyshev":
        raise CFDError(f"unknown gradient method {method!r}")
    if cheb is None:
        raise CFDError("analytic-chebyshev gradient needs the (basis, coefficients) pair")
    from numpy.polynomial import chebyshev as C

    basis, coeffs = cheb
    if basis.dims != 2:
        raise CFDError("analytic gradient requires a 2D basis")
    cgrid = basis.coefficient_grid(coeffs)
    xt, yt = basis.node_coords
    (x_lo, x_hi), (y_lo, y_hi) = basis.physical_ranges
    xm, ym = np.meshgrid(xt, yt, indexing="ij")
    dpdx = C.chebval2d(xm, ym, C.chebder(cgrid, axis=0)) * (2.0 / (x_hi - x_lo))
    dpdy = C.chebval2d(xm, ym, C.chebder(cgrid, axis=1)) * (2.0 / (y_hi - y_lo))
    return dpdx, dpdy


def project_velocity(u_star: np.ndarray, v_star: np.ndarray, dpdx: np.ndarray,
                     dpdy: np.ndarray, dt: float):
    """u^{n+1} = u* - (dt/rho) grad p at the interior nodes."""
    u_new, v_new = u_star.copy(), v_star.copy()
    u_new[1:-1, 1:-1] -= (dt / RHO) * dpdx
    v_new[1:-1, 1:-1] -= (dt / RHO) * dpdy
    return u_new, v_new


def initial_field(cfg: NSConfig, grid: Grid2D) -> FlowField:
    field = FlowField(grid)
    if cfg.case == CAVITY:
        apply_cavity_bc(field, cfg)
    else:
        xm, ym = np.meshgrid(grid.x_nodes, grid.y_nodes, indexing="ij")
        field.u, field.v, field.p = tgv_exact(xm, ym, 0.0, cfg.nu)
    return field


def kinetic_energy(field: FlowField) -> float:
    return float(0.5 * np.sum(field.u[1:-1, 1:-1] ** 2 + field.v[1:-1, 1:-1] ** 2))


def _check_finite(field: FlowField, step, stage):
    for name, arr in (("u", field.u), ("v", field.v), ("p", field.p)):
        if not np.all(np.isfinite(arr)):
            raise InstabilityError(f"non-finite {name} after {stage} at step {step}")


def classical_step(field: FlowField, cfg: NSConfig, A: SparseSymMatrix, step=0):
    """One projection cycle with the classical direct pressure solve.

    Returns (new field, diagnostics dict). Diagnostics report the Poisson
    residual (the un-removed divergence source) and the raw central
    divergence of the projected velocity.
    """
    grid = field.grid
    work = field.copy()
    apply_velocity_bc(work, cfg)
    u_star, v_star = advect_diffuse(work, cfg)
    star = FlowField(grid, u_star, v_star, work.p, work.time)
    apply_velocity_bc(star, cfg)

    b = divergence_rhs(star.u, star.v, grid, cfg.dt)
    if A.nullspace == NULLSPACE_CONSTANT:
        b = b - b.mean()
    p_vec = direct_solve(A, b)
    p_vec = p_vec - p_vec.mean()          # zero-mean gauge
    residual = float(np.linalg.norm(A.matvec(p_vec) - b, np.inf))

    p = work.p.copy()
    p[1:-1, 1:-1] = vec_to_interior(p_vec, grid)
    apply_pressure_bc(p, cfg)
    dpdx, dpdy = pressure_gradient(p, grid, "central")
    u_new, v_new = project_velocity(star.u, star.v, dpdx, dpdy, cfg.dt)
    out = FlowField(grid, u_new, v_new, p, work.time + cfg.dt)
    apply_velocity_bc(out, cfg)
    _check_finite(out, step, "projection")

    diagnostics = {
        "time": out.time,
        "kinetic_energy": kinetic_energy(out),
        "poisson_residual": residual,
        "rhs_scale": float(np.linalg.norm(b, np.inf)),
        "central_divergence": float(np.abs(central_divergence(out.u, out.v, grid)).max()),
    }
    return out, diagnostics


def classical_run(cfg: NSConfig, grid: Grid2D = None, A: SparseSymMatrix = None):
    """Run cfg.steps projection cycles from the case initial condition."""
    grid = grid if grid is not None else case_grid(cfg)
    A = A if A is not None else pressure_matrix(grid, cfg)
    field = initial_field(cfg, grid)
    history = []
    for step in range(cfg.steps):
        field, diag = classical_step(field, cfg, A, step=step)
        history.append(diag)
    return field, history
