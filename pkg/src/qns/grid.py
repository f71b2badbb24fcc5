"""Uniform and hyperbolically stretched 2D tensor-product grids.

Computational coordinates (xi, eta) live on the unit square. Physical
coordinates follow either the identity map x = xi * L or a hyperbolic
arctan stretching that clusters nodes near both domain edges:

    x(xi) = L/2 * [1 + beta * arctan((2 xi - 1) tan(1/beta))]

Metric coefficients h = d(xi)/dx are carried per node so that finite
difference operators can be written in computational space and scaled
back to physical space.

Node layout: N interior nodes at xi_i = i * dxi with dxi = 1/(N+1),
plus the two boundary nodes at xi = 0 and xi = 1, i.e. (N+2) nodes per
direction. Periodic grids (built by build_periodic_grid) instead place
N interior nodes at x_i = (i-1) * L/N so that the wraparound ghost
columns coincide with interior columns exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNIFORM = "uniform"
HYPERBOLIC = "hyperbolic"


class GridError(ValueError):
    """Invalid grid configuration or out-of-range coordinate."""


@dataclass(frozen=True)
class StretchConfig:
    """Mapping from computational [0,1] to physical [0,L] space."""

    beta: float = 2.5
    length: float = 1.0
    mode: str = UNIFORM

    def __post_init__(self):
        if self.length <= 0:
            raise GridError(f"domain length must be positive, got {self.length}")
        if self.mode not in (UNIFORM, HYPERBOLIC):
            raise GridError(f"unknown grid mode {self.mode!r}")
        if self.mode == HYPERBOLIC and self.beta <= 0:
            raise GridError(f"stretching parameter must be positive, got {self.beta}")


def _check_unit_interval(xi: np.ndarray):
    if np.any(xi < -1e-12) or np.any(xi > 1.0 + 1e-12):
        raise GridError("computational coordinate outside [0, 1]")


def stretch_map(xi, cfg: StretchConfig):
    """Physical coordinate of computational coordinate(s) xi in [0, 1]."""
    arr = np.asarray(xi, dtype=float)
    _check_unit_interval(arr)
    if cfg.mode == UNIFORM:
        out = arr * cfg.length
    else:
        t = np.tan(1.0 / cfg.beta)
        out = 0.5 * cfg.length * (1.0 + cfg.beta * np.arctan((2.0 * arr - 1.0) * t))
    return float(out) if np.isscalar(xi) else out


def metric_coeff(xi, cfg: StretchConfig):
    """Metric coefficient h = d(xi)/dx, the inverse Jacobian of stretch_map."""
    arr = np.asarray(xi, dtype=float)
    _check_unit_interval(arr)
    if cfg.mode == UNIFORM:
        out = np.full_like(arr, 1.0 / cfg.length)
    else:
        t = np.tan(1.0 / cfg.beta)
        # dx/dxi = L beta t / (1 + (2 xi - 1)^2 t^2), analytic derivative
        out = (1.0 + (2.0 * arr - 1.0) ** 2 * t * t) / (cfg.length * cfg.beta * t)
    return float(out) if np.isscalar(xi) else out


class Grid2D:
    """Square tensor-product grid with per-node metric coefficients.

    Attributes:
        n_xi, n_eta: interior node counts
        d_xi, d_eta: computational spacings
        x_nodes, y_nodes: physical coordinates, length n+2 (index 0 and
            n+1 are boundary nodes, or wrap ghosts for periodic grids)
        h_xi, h_eta: metric coefficients at the same indices
        periodic: True for wraparound grids (TGV), False otherwise
    """

    def __init__(self, n_xi, n_eta, cfg: StretchConfig, *, periodic=False):
        if n_xi < 2 or n_eta < 2:
            raise GridError(f"need at least 2 interior nodes per direction, got {n_xi}x{n_eta}")
        if periodic and cfg.mode != UNIFORM:
            raise GridError("periodic grids support uniform mode only")
        self.n_xi = int(n_xi)
        self.n_eta = int(n_eta)
        self.cfg = cfg
        self.periodic = bool(periodic)
        if periodic:
            self.d_xi = 1.0 / n_xi
            self.d_eta = 1.0 / n_eta
            xi = (np.arange(n_xi + 2) - 1.0) * self.d_xi
            eta = (np.arange(n_eta + 2) - 1.0) * self.d_eta
            self.x_nodes = xi * cfg.length
            self.y_nodes = eta * cfg.length
            self.h_xi = np.full(n_xi + 2, 1.0 / cfg.length)
            self.h_eta = np.full(n_eta + 2, 1.0 / cfg.length)
        else:
            self.d_xi = 1.0 / (n_xi + 1)
            self.d_eta = 1.0 / (n_eta + 1)
            xi = np.arange(n_xi + 2) * self.d_xi
            eta = np.arange(n_eta + 2) * self.d_eta
            self.x_nodes = stretch_map(xi, cfg)
            self.y_nodes = stretch_map(eta, cfg)
            self.h_xi = metric_coeff(xi, cfg)
            self.h_eta = metric_coeff(eta, cfg)
        if np.any(np.diff(self.x_nodes) <= 0) or np.any(np.diff(self.y_nodes) <= 0):
            raise GridError("physical coordinates are not strictly increasing")

    @property
    def n_interior(self):
        return self.n_xi * self.n_eta

    @property
    def interior_x(self):
        return self.x_nodes[1:-1]

    @property
    def interior_y(self):
        return self.y_nodes[1:-1]

    def flat_index(self, i, j):
        """1-based (i, j) interior node to 0-based vector index k = i + (j-1)*N_xi - 1."""
        return (i - 1) + (j - 1) * self.n_xi

    def __repr__(self):
        return (f"Grid2D({self.n_xi}x{self.n_eta}, {self.cfg.mode}, L={self.cfg.length}, "
                f"periodic={self.periodic})")


def build_grid(n_xi, n_eta, cfg: StretchConfig) -> Grid2D:
    """Grid with interior nodes at xi_i = i/(N+1) and boundary nodes at xi = 0, 1."""
    return Grid2D(n_xi, n_eta, cfg)


def build_periodic_grid(n_xi, n_eta, length) -> Grid2D:
    """Uniform periodic grid: N unique nodes per direction at spacing L/N.

    Ghost slots (index 0 and N+1) sit one spacing outside and are identified
    with the opposite interior column, so wraparound copies are exact.
    """
    return Grid2D(n_xi, n_eta, StretchConfig(length=length, mode=UNIFORM), periodic=True)


def nodes_1d(n, cfg: StretchConfig):
    """1D analogue of build_grid: (x_nodes, h_nodes, d_xi) with n interior nodes."""
    if n < 2:
        raise GridError(f"need at least 2 interior nodes, got {n}")
    d_xi = 1.0 / (n + 1)
    xi = np.arange(n + 2) * d_xi
    return stretch_map(xi, cfg), metric_coeff(xi, cfg), d_xi
