"""Chebyshev-polynomial quantum state tomography.

A normalized real statevector is estimated by projecting it onto a
truncated basis of Chebyshev polynomials evaluated at the (affinely
rescaled) grid nodes. Overlaps come from an emulated Hadamard test:
the inner product is computed exactly and binomial shot noise for the
configured shot count is added. Because the sample nodes are generally
not Chebyshev nodes, the basis vectors are not orthogonal and the raw
overlap vector is corrected with the inverse Gram matrix before the
state is resynthesized.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import qsim
from .qsim import StateVector


class QSTError(ValueError):
    """Contract violation in tomography inputs."""


class IllConditionedError(QSTError):
    """Gram matrix condition number beyond the usable range."""


@dataclass
class ShotModel:
    """Per-overlap shot budget. shots=None means exact (infinite-shot) readout."""

    shots: int | None
    seed: int = 0

    def __post_init__(self):
        if self.shots is not None and self.shots < 1:
            raise QSTError(f"shot count must be >= 1, got {self.shots}")
        self._rng = np.random.default_rng(self.seed)

    def reseed(self, seed: int):
        self._rng = np.random.default_rng(seed)

    def sample(self, overlap: float) -> float:
        """Binomial estimate of a real overlap in [-1, 1]."""
        if self.shots is None:
            return float(overlap)
        p1 = min(1.0, max(0.0, 0.5 * (1.0 + overlap)))
        k = self._rng.binomial(self.shots, p1)
        return 2.0 * k / self.shots - 1.0


def cheby_eval(k: int, x):
    """Chebyshev polynomial T_k(x) by the three-term recurrence."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 1.0 + 1e-12):
        raise QSTError("argument outside [-1, 1]")
    if k < 0:
        raise QSTError(f"degree must be non-negative, got {k}")
    t_prev = np.ones_like(arr)
    if k == 0:
        return float(t_prev) if np.isscalar(x) else t_prev
    t_cur = arr.copy()
    for _ in range(k - 1):
        t_prev, t_cur = t_cur, 2.0 * arr * t_cur - t_prev
    return float(t_cur) if np.isscalar(x) else t_cur


def rescale_to_unit(points: np.ndarray) -> np.ndarray:
    """Affine map of sample coordinates onto [-1, 1]."""
    points = np.asarray(points, dtype=float)
    lo, hi = points.min(), points.max()
    if hi <= lo:
        raise QSTError("sample coordinates are degenerate")
    return 2.0 * (points - lo) / (hi - lo) - 1.0


def chebyshev_nodes(n: int) -> np.ndarray:
    """The n Chebyshev-Gauss nodes cos((2k-1)pi/2n), ascending."""
    k = np.arange(1, n + 1)
    return np.sort(np.cos((2 * k - 1) * np.pi / (2 * n)))


class ChebyBasis:
    """Normalized (tensor-product) Chebyshev basis on fixed sample nodes.

    basis_vectors holds one unit vector per column; gram is their mutual
    overlap matrix, factorized once for the reconstruction solve.
    """

    def __init__(self, basis_vectors: np.ndarray, m: int, dims: int,
                 node_coords, degrees):
        self.basis_vectors = basis_vectors
        self.m = m
        self.dims = dims
        self.node_coords = node_coords
        self.degrees = degrees          # list of degree tuples per column
        self.gram = basis_vectors.T @ basis_vectors
        self.condition_number = float(np.linalg.cond(self.gram))
        if not np.isfinite(self.condition_number) or self.condition_number > 1e12:
            raise IllConditionedError(
                f"Gram condition number {self.condition_number:.3e} beyond 1e12")
        try:
            self._cho = scipy.linalg.cho_factor(self.gram)
        except np.linalg.LinAlgError:
            eps = 1e-12 * np.trace(self.gram) / self.m
            self._cho = scipy.linalg.cho_factor(self.gram + eps * np.eye(self.gram.shape[0]))

    @property
    def n_vectors(self) -> int:
        return self.basis_vectors.shape[1]

    @property
    def n_points(self) -> int:
        return self.basis_vectors.shape[0]

    def solve_gram(self, v: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve(self._cho, v)

    def coefficient_grid(self, coeffs: np.ndarray) -> np.ndarray:
        """Arrange reconstruction coefficients (already divided by the basis
        vector norms) as a dense Chebyshev coefficient array, 1D or 2D."""
        norms = self._norms
        scaled = coeffs / norms
        if self.dims == 1:
            return scaled
        grid = np.zeros((self.m, self.m))
        for a, (dj, dk) in enumerate(self.degrees):
            grid[dj, dk] = scaled[a]
        return grid


def build_basis(points, m: int, dims: int = 1) -> ChebyBasis:
    """Basis of m Chebyshev polynomials per dimension on the given nodes.

    1D: points is the array of sample coordinates. 2D: points is the pair
    (x_coords, y_coords) of per-direction node coordinates; basis vectors
    are the m^2 tensor products flattened with x fastest, matching the
    k = i + (j-1) N_xi vector layout.
    """
    if m < 1:
        raise QSTError(f"need at least one polynomial, got m={m}")
    if dims == 1:
        raw_x = np.asarray(points, dtype=float)
        x = rescale_to_unit(raw_x)
        if x.size < m:
            raise QSTError(f"{x.size} samples cannot support {m} polynomials")
        columns = [cheby_eval(k, x) for k in range(m)]
        degrees = list(range(m))
        coords = (x,)
        ranges = ((float(raw_x.min()), float(raw_x.max())),)
    elif dims == 2:
        xs, ys = points
        raw_x, raw_y = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        x = rescale_to_unit(raw_x)
        y = rescale_to_unit(raw_y)
        ranges = ((float(raw_x.min()), float(raw_x.max())),
                  (float(raw_y.min()), float(raw_y.max())))
        if x.size * y.size < m * m:
            raise QSTError(f"{x.size * y.size} samples cannot support {m}^2 polynomials")
        tx = [cheby_eval(k, x) for k in range(m)]
        ty = [cheby_eval(k, y) for k in range(m)]
        columns, degrees = [], []
        for dj in range(m):
            for dk in range(m):
                columns.append(np.outer(ty[dk], tx[dj]).reshape(-1))  # x fastest
                degrees.append((dj, dk))
        coords = (x, y)
    else:
        raise QSTError(f"dims must be 1 or 2, got {dims}")
    raw = np.stack(columns, axis=1)
    norms = np.linalg.norm(raw, axis=0)
    if np.any(norms == 0.0):
        raise QSTError("degenerate basis vector")
    basis = ChebyBasis(raw / norms, m, dims, coords, degrees)
    basis._norms = norms
    basis.physical_ranges = ranges
    return basis


def overlap_estimate(state: np.ndarray, phi: np.ndarray, model: ShotModel) -> float:
    """Emulated Hadamard test: exact overlap plus binomial shot noise."""
    state = np.asarray(state, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if state.shape != phi.shape:
        raise QSTError("state and basis vector shapes differ")
    return model.sample(float(np.dot(phi, state)))


def gate_level_hadamard_test(state: np.ndarray, phi: np.ndarray, shots: int,
                             seed: int = 0) -> float:
    """Gate-level Hadamard test on <= 6 data qubits, for validation.

    Prepares (|0>|psi> + |1>|phi>)/sqrt(2) with controlled state-preparation
    unitaries, applies H to the ancilla, and samples the ancilla: the
    outcome-0 probability is (1 + <phi|psi>)/2.
    """
    state = np.asarray(state, dtype=float)
    phi = np.asarray(phi, dtype=float)
    n = int(round(np.log2(state.size)))
    if 2 ** n != state.size or state.shape != phi.shape:
        raise QSTError("vectors must share a power-of-two length")
    if n > 6:
        raise QSTError("gate-level test limited to 6 data qubits")
    ancilla = n
    sv = StateVector.zero(n + 1)
    sv = qsim.apply_single_qubit(sv, qsim.H_GATE, ancilla)
    u_psi = _preparation_unitary(state)
    u_phi = _preparation_unitary(phi)
    sv = qsim.apply_single_qubit(sv, qsim.X_GATE, ancilla)
    sv = qsim.apply_dense_unitary(sv, u_psi, 0, n, controls=(ancilla,))
    sv = qsim.apply_single_qubit(sv, qsim.X_GATE, ancilla)
    sv = qsim.apply_dense_unitary(sv, u_phi, 0, n, controls=(ancilla,))
    sv = qsim.apply_single_qubit(sv, qsim.H_GATE, ancilla)
    probs = sv.probabilities()
    p0 = float(probs[: 2 ** n].sum())
    rng = np.random.default_rng(seed)
    k = rng.binomial(shots, min(1.0, max(0.0, p0)))
    return 2.0 * k / shots - 1.0


def _preparation_unitary(vec: np.ndarray) -> np.ndarray:
    """Any real orthogonal matrix whose first column is vec (unit norm)."""
    v = vec / np.linalg.norm(vec)
    basis = np.eye(v.size)
    pivot = int(np.argmax(np.abs(v)))
    basis[:, [0, pivot]] = basis[:, [pivot, 0]]
    basis[:, 0] = v
    q, r = np.linalg.qr(basis)
    return q * np.sign(r.diagonal())


def reconstruct(state: np.ndarray, basis: ChebyBasis, model: ShotModel):
    """Estimate the state as a Gram-corrected Chebyshev expansion.

    Returns (reconstructed values on the sample nodes, expansion
    coefficients in the normalized basis).
    """
    state = np.asarray(state, dtype=float)
    if state.size != basis.n_points:
        raise QSTError(f"state length {state.size} does not match basis on "
                       f"{basis.n_points} points")
    overlaps = np.array([overlap_estimate(state, basis.basis_vectors[:, a], model)
                         for a in range(basis.n_vectors)])
    coeffs = basis.solve_gram(overlaps)
    return basis.basis_vectors @ coeffs, coeffs
