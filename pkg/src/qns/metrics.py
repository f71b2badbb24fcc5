"""Error metrics, centerline extraction, and the bundled Ghia reference."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .cfd import FlowField

DEFAULT_EPS = 1e-8


class MetricError(ValueError):
    pass


def metric_are(candidate, reference, eps=DEFAULT_EPS):
    """Pointwise absolute relative error ||c| - |r|| / (|r| + eps)."""
    c = np.asarray(candidate, dtype=float)
    r = np.asarray(reference, dtype=float)
    if c.shape != r.shape:
        raise MetricError(f"shape mismatch {c.shape} vs {r.shape}")
    return np.abs(np.abs(c) - np.abs(r)) / (np.abs(r) + eps)


def metric_normalized_are(candidate, reference):
    """Pointwise |r - c| / max|r| (error normalized to the field maximum)."""
    c = np.asarray(candidate, dtype=float)
    r = np.asarray(reference, dtype=float)
    if c.shape != r.shape:
        raise MetricError(f"shape mismatch {c.shape} vs {r.shape}")
    peak = np.abs(r).max()
    if peak == 0.0:
        raise MetricError("reference field is identically zero")
    return np.abs(r - c) / peak


def mse(candidate, reference) -> float:
    c = np.asarray(candidate, dtype=float)
    r = np.asarray(reference, dtype=float)
    if c.shape != r.shape:
        raise MetricError(f"shape mismatch {c.shape} vs {r.shape}")
    return float(np.mean((c - r) ** 2))


def speed(u, v):
    return np.sqrt(np.asarray(u) ** 2 + np.asarray(v) ** 2)


def centerline_extract(field: FlowField, axis: str):
    """Velocity profile through the cavity center.

    axis "vertical": u along x = L/2 as a function of y (lid profile);
    axis "horizontal": v along y = L/2 as a function of x. Values between
    nodes are linearly interpolated. Returns (coordinates, values)
    including the boundary nodes.
    """
    g = field.grid
    x_mid = 0.5 * (g.x_nodes[0] + g.x_nodes[-1])
    y_mid = 0.5 * (g.y_nodes[0] + g.y_nodes[-1])
    if axis == "vertical":
        vals = np.array([np.interp(x_mid, g.x_nodes, field.u[:, j])
                         for j in range(g.n_eta + 2)])
        return g.y_nodes.copy(), vals
    if axis == "horizontal":
        vals = np.array([np.interp(y_mid, g.y_nodes, field.v[i, :])
                         for i in range(g.n_xi + 2)])
        return g.x_nodes.copy(), vals
    raise MetricError(f"unknown centerline axis {axis!r}")


@dataclass
class GhiaReference:
    """Re=100 centerline tables from Ghia et al. (1982)."""

    y: np.ndarray
    u: np.ndarray
    x: np.ndarray
    v: np.ndarray


def ghia_reference() -> GhiaReference:
    path = resources.files("qns.data").joinpath("ghia_re100.csv")
    rows = []
    with path.open("r", encoding="utf-8") as fh:
        for row in csv.reader(line for line in fh if not line.startswith("#")):
            rows.append(row)
    header, body = rows[0], rows[1:]
    data = {name: np.array([float(r[i]) for r in body]) for i, name in enumerate(header)}
    ref = GhiaReference(y=data["y"], u=data["u"], x=data["x"], v=data["v"])
    for coords in (ref.y, ref.x):
        if np.any(np.diff(coords) <= 0):
            raise MetricError("Ghia coordinate column is not strictly increasing")
    for vals in (ref.u, ref.v):
        if np.any(np.abs(vals) > 1.0):
            raise MetricError("Ghia velocity outside [-1, 1]")
    return ref


def centerline_rms_vs_ghia(field: FlowField, ref: GhiaReference = None):
    """(u RMS, v RMS) of the cavity centerlines against the Ghia tables."""
    ref = ref if ref is not None else ghia_reference()
    y, u_prof = centerline_extract(field, "vertical")
    x, v_prof = centerline_extract(field, "horizontal")
    u_at = np.interp(ref.y, y, u_prof)
    v_at = np.interp(ref.x, x, v_prof)
    rms_u = float(np.sqrt(np.mean((u_at - ref.u) ** 2)))
    rms_v = float(np.sqrt(np.mean((v_at - ref.v) ** 2)))
    return rms_u, rms_v
