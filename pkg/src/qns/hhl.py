"""HHL pipeline on the dense statevector simulator.

Register layout (qubit 0 = least significant): problem register on qubits
[0, n_b), clock register on [n_b, n_b + n_c), ancilla on qubit n_b + n_c.
A flat basis index therefore reads  anc * 2^(n_b+n_c) + l * 2^n_b + k  with
l the clock value and k the problem-register index.

Pipeline: amplitude-encode b, quantum phase estimation with controlled
e^{iAt} powers (exact spectral backend or first-order Trotter product over
the Pauli terms of A), coherent reciprocal rotation of the ancilla, inverse
QPE, and exact post-selection of the ancilla |1> branch. Negative-definite
systems are negated up front; singular (Neumann/periodic) systems have the
rhs projected off the constant nullspace and clock value l = 0 skipped,
which yields pseudoinverse behaviour.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qsim
from .linalg import SparseSymMatrix, pauli_decompose
from .qsim import StateVector

SPECTRAL = "spectral"
TROTTER = "trotter"


class HHLError(ValueError):
    """Configuration or input contract violation in the HHL pipeline."""


class DegenerateInputError(HHLError):
    """Right-hand side is (numerically) zero."""


@dataclass
class HHLConfig:
    """Pipeline parameters.

    evolution_scale, when set, fixes the clock phase assigned to
    |lambda|_max. When unset the solver starts from 1 - 2^-n_c (largest
    eigenvalue in the top clock bin, no wraparound) and then nudges the
    time so the smallest nonzero eigenvalue lands exactly on its nearest
    clock bin; the 1/lambda weighting makes that mode dominate the
    solution, and an exactly representable gravest phase removes both its
    rounding error and most of the clock uncompute leakage (see
    default_phase_scale). reciprocal_constant C defaults to 2^-n_c, the
    largest value for which the arcsin in the reciprocal rotation is
    defined for every nonzero clock value.
    """

    n_b: int
    n_c: int = 8
    trotter_steps: int = 150
    backend: str = SPECTRAL
    evolution_scale: float | None = None
    reciprocal_constant: float | None = None

    def __post_init__(self):
        if self.n_b < 1 or self.n_c < 1:
            raise HHLError("need at least one problem qubit and one clock qubit")
        if self.trotter_steps < 1:
            raise HHLError("trotter_steps must be >= 1")
        if self.backend not in (SPECTRAL, TROTTER):
            raise HHLError(f"unknown backend {self.backend!r}")
        scale = self.phase_scale
        if not 0.0 < scale < 1.0:
            raise HHLError(f"evolution scale {scale} must lie in (0, 1) to avoid phase wrap")
        c = self.c_constant
        if not 0.0 < c <= 2.0 ** -self.n_c:
            raise HHLError(f"reciprocal constant {c} exceeds the smallest clock fraction")

    @property
    def phase_scale(self) -> float:
        return self.evolution_scale if self.evolution_scale is not None else 1.0 - 2.0 ** -self.n_c

    @property
    def c_constant(self) -> float:
        return self.reciprocal_constant if self.reciprocal_constant is not None else 2.0 ** -self.n_c


def default_phase_scale(lambda_min: float, lambda_max: float, n_c: int) -> float:
    """Phase assigned to lambda_max so lambda_min sits exactly on a clock bin.

    Starting from the no-wrap maximum 1 - 2^-n_c, the scale is adjusted so
    the smallest (nonzero) eigenvalue's phase is an exact multiple of
    2^-n_c. If rounding up would push lambda_max past the top bin, the
    bin index is rounded down instead.
    """
    base = 1.0 - 2.0 ** -n_c
    bins = 2 ** n_c
    phi_min_bins = base * lambda_min / lambda_max * bins
    l_star = max(1, round(phi_min_bins))
    scale = base * l_star / phi_min_bins
    if scale >= 1.0:
        l_star = max(1, int(np.floor(phi_min_bins)))
        scale = base * l_star / phi_min_bins
    return scale


@dataclass
class HHLResult:
    solution_amplitudes: np.ndarray
    success_probability: float
    lambda_min: float
    lambda_max: float
    evolution_time: float
    clock_zero_weight: float


def prepare_b(b: np.ndarray, n_b: int):
    """Amplitude-encode b (ideal oracle): returns (n_b-qubit state, dropped norm)."""
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.size > 2 ** n_b:
        raise HHLError(f"rhs of length {b.size} does not fit in {n_b} qubits")
    norm = np.linalg.norm(b)
    if norm == 0.0:
        raise DegenerateInputError("cannot amplitude-encode an all-zero vector")
    amps = np.zeros(2 ** n_b, dtype=complex)
    amps[:b.size] = b / norm
    return StateVector(amps), float(norm)


class SpectralEvolution:
    """Controlled U^{2^k} with U = V e^{i Lambda t} V^T, exact."""

    def __init__(self, matrix: np.ndarray, t: float):
        w, v = np.linalg.eigh(matrix)
        self.n_b = int(round(np.log2(matrix.shape[0])))
        self._w, self._v, self.t = w, v, t
        self._cache: dict[tuple[int, bool], np.ndarray] = {}

    def unitary(self, power_exponent: int, inverse: bool = False) -> np.ndarray:
        key = (power_exponent, inverse)
        if key not in self._cache:
            sign = -1.0 if inverse else 1.0
            phases = np.exp(1j * sign * self._w * self.t * 2 ** power_exponent)
            self._cache[key] = (self._v * phases) @ self._v.T
        return self._cache[key]

    def apply(self, state, power_exponent, control, inverse=False):
        return qsim.apply_dense_unitary(state, self.unitary(power_exponent, inverse),
                                        0, self.n_b, controls=(control,))


class TrotterEvolution:
    """Controlled U^{2^k} as 2^k * R first-order Lie-Trotter steps.

    One step applies exp(i c_m tau P_m) for every Pauli term of A in a fixed
    order, tau = t / R. The adjoint reverses the order and negates the
    angles, so apply/apply-inverse round-trip exactly.
    """

    def __init__(self, matrix: np.ndarray, t: float, steps: int):
        self.n_b = int(round(np.log2(matrix.shape[0])))
        self.steps = steps
        self.terms = pauli_decompose(matrix)
        self.t = t
        qubits = list(range(self.n_b - 1, -1, -1))
        tau = t / steps
        self._factors = []
        for coeff, word in self.terms:
            flip, phase, n_y = qsim.pauli_word_masks(word, qubits)
            angle = -2.0 * coeff * tau  # exp(i c tau P) = exp(-i angle/2 P)
            self._factors.append((flip, phase, n_y, np.cos(angle / 2), np.sin(angle / 2)))
        # kernels keyed by (state size, control qubit): per-term gather indices
        # and phases restricted to the control=1 subspace
        self._kernels: dict[tuple[int, int], list] = {}

    def _kernel(self, size, control):
        key = (size, control)
        kern = self._kernels.get(key)
        if kern is None:
            idx = np.arange(size)
            sel = idx[((idx >> control) & 1) == 1]
            kern = []
            for flip, phase, n_y, c, s in self._factors:
                ph = (1j ** n_y) * (1.0 - 2.0 * qsim._parity((sel ^ flip) & phase))
                kern.append((sel, sel ^ flip, ph, c, s))
            self._kernels[key] = kern
        return kern

    def apply(self, state, power_exponent, control, inverse=False):
        amps = state.amplitudes.copy()
        kern = self._kernel(amps.size, control)
        factors = kern if not inverse else kern[::-1]
        reps = self.steps * 2 ** power_exponent
        sign = 1.0 if not inverse else -1.0
        for _ in range(reps):
            for sel, sel_flip, ph, c, s in factors:
                amps[sel] = c * amps[sel] - (1j * sign * s) * ph * amps[sel_flip]
        return StateVector(amps)


def controlled_evolution(matrix, t, backend=SPECTRAL, trotter_steps=150):
    """Build the controlled-e^{iAt} transformation for a symmetric matrix."""
    dense = matrix.toarray() if isinstance(matrix, SparseSymMatrix) else np.asarray(matrix, dtype=float)
    if backend == SPECTRAL:
        return SpectralEvolution(dense, t)
    if backend == TROTTER:
        return TrotterEvolution(dense, t, trotter_steps)
    raise HHLError(f"unknown backend {backend!r}")


def _qpe_pass(state, evolution, n_b, n_c, inverse=False):
    out = state
    if not inverse:
        for k in range(n_c):
            out = qsim.apply_single_qubit(out, qsim.H_GATE, n_b + k)
        for k in range(n_c):
            out = evolution.apply(out, k, n_b + k)
        out = qsim.qft(out, n_b, n_c, inverse=True)
    else:
        out = qsim.qft(out, n_b, n_c, inverse=False)
        for k in range(n_c - 1, -1, -1):
            out = evolution.apply(out, k, n_b + k, inverse=True)
        for k in range(n_c):
            out = qsim.apply_single_qubit(out, qsim.H_GATE, n_b + k)
    return out


def _evolution_time(matrix, cfg: HHLConfig) -> float:
    dense = matrix.toarray() if isinstance(matrix, SparseSymMatrix) else np.asarray(matrix, dtype=float)
    w = np.abs(np.linalg.eigvalsh(dense))
    lam_max = float(w.max())
    if lam_max == 0.0:
        raise HHLError("matrix has no nonzero eigenvalue to scale against")
    if cfg.evolution_scale is not None:
        scale = cfg.evolution_scale
    else:
        lam_min = float(w[w > 1e-10 * lam_max].min())
        scale = default_phase_scale(lam_min, lam_max, cfg.n_c)
    return 2.0 * np.pi * scale / lam_max


def qpe(state: StateVector, matrix, cfg: HHLConfig) -> StateVector:
    """Phase estimation of e^{iAt} into the clock register (clock starts at |0>)."""
    t = _evolution_time(matrix, cfg)
    evo = controlled_evolution(matrix, t, cfg.backend, cfg.trotter_steps)
    return _qpe_pass(state, evo, cfg.n_b, cfg.n_c)


def inverse_qpe(state: StateVector, matrix, cfg: HHLConfig) -> StateVector:
    """Exact adjoint of qpe (uncomputes the clock register)."""
    t = _evolution_time(matrix, cfg)
    evo = controlled_evolution(matrix, t, cfg.backend, cfg.trotter_steps)
    return _qpe_pass(state, evo, cfg.n_b, cfg.n_c, inverse=True)


def reciprocal_rotation(state: StateVector, cfg: HHLConfig) -> StateVector:
    """Rotate the ancilla so amplitude(|1>) = C * 2^n_c / l per clock value l.

    l = 0 (the nullspace bin) is skipped. Raises if C would require an
    amplitude above one for some reachable l.
    """
    n_b, n_c = cfg.n_b, cfg.n_c
    if state.n_qubits != n_b + n_c + 1:
        raise HHLError("state does not match the configured register layout")
    c_const = cfg.c_constant
    n_clock = 2 ** n_c
    amp1 = np.zeros(n_clock)
    amp1[1:] = c_const * n_clock / np.arange(1, n_clock)
    if np.any(amp1 > 1.0 + 1e-12):
        raise HHLError("reciprocal constant too large: arcsin argument exceeds 1")
    theta = 2.0 * np.arcsin(np.clip(amp1, 0.0, 1.0))
    cos_half = np.cos(theta / 2.0)[:, None]
    sin_half = np.sin(theta / 2.0)[:, None]
    view = state.amplitudes.reshape(2, n_clock, 2 ** n_b)
    out = np.empty_like(view)
    out[0] = cos_half * view[0] - sin_half * view[1]
    out[1] = sin_half * view[0] + cos_half * view[1]
    return StateVector(out.reshape(-1))


class HHLSolver:
    """HHL bound to one matrix, reusable across right-hand sides.

    Eigenvalue scaling, backend operators and (for the spectral backend) the
    controlled unitaries are precomputed once, so per-step solves inside the
    hybrid time loop stay cheap.
    """

    def __init__(self, A, cfg: HHLConfig):
        self.cfg = cfg
        dense = A.toarray() if isinstance(A, SparseSymMatrix) else np.asarray(A, dtype=float)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise HHLError("matrix must be square")
        if not np.allclose(dense, dense.T, atol=1e-12 * max(1.0, np.abs(dense).max())):
            raise HHLError("matrix must be symmetric")
        self.n_orig = dense.shape[0]
        dim = 2 ** cfg.n_b
        if self.n_orig > dim:
            raise HHLError(f"matrix of order {self.n_orig} does not fit in {cfg.n_b} qubits")

        w = np.linalg.eigvalsh(dense)
        scale = np.max(np.abs(w))
        if scale == 0.0:
            raise HHLError("zero matrix cannot be inverted")
        tol = 1e-12 * scale
        if w[-1] <= tol:            # negative (semi-)definite: negate
            self.sign = -1.0
        elif w[0] >= -tol:
            self.sign = 1.0
        else:
            raise HHLError("indefinite matrices are not supported")
        work = self.sign * dense
        w_pos = np.sort(self.sign * w)
        self.singular = w_pos[0] < 1e-10 * scale
        nonzero = w_pos[w_pos > 1e-10 * scale]
        if nonzero.size == 0:
            raise HHLError("matrix has no nonzero eigenvalue")
        self.lambda_min = float(nonzero[0])
        self.lambda_max = float(w_pos[-1])

        if self.n_orig < dim:
            # pad with a mid-spectrum diagonal block to avoid widening the spectrum
            pad_value = 0.5 * (self.lambda_min + self.lambda_max)
            padded = np.zeros((dim, dim))
            padded[:self.n_orig, :self.n_orig] = work
            padded[self.n_orig:, self.n_orig:] = pad_value * np.eye(dim - self.n_orig)
            work = padded
        self.work = work
        if cfg.evolution_scale is not None:
            self.scale = cfg.evolution_scale
        else:
            self.scale = default_phase_scale(self.lambda_min, self.lambda_max, cfg.n_c)
        self.t = 2.0 * np.pi * self.scale / self.lambda_max
        self.evolution = controlled_evolution(work, self.t, cfg.backend, cfg.trotter_steps)

    def solve(self, b: np.ndarray) -> HHLResult:
        cfg = self.cfg
        b = np.asarray(b, dtype=float)
        if b.size != self.n_orig:
            raise HHLError(f"rhs length {b.size} does not match matrix order {self.n_orig}")
        b = self.sign * b
        if self.singular:
            b = b - b.mean()
        b_state, _ = prepare_b(b, cfg.n_b)

        n_total = cfg.n_b + cfg.n_c + 1
        amps = np.zeros(2 ** n_total, dtype=complex)
        amps[:2 ** cfg.n_b] = b_state.amplitudes
        state = StateVector(amps)

        state = _qpe_pass(state, self.evolution, cfg.n_b, cfg.n_c)
        state = reciprocal_rotation(state, cfg)
        state = _qpe_pass(state, self.evolution, cfg.n_b, cfg.n_c, inverse=True)

        ancilla = cfg.n_b + cfg.n_c
        state, success = qsim.project_and_renormalize(state, ancilla, 1)
        block = state.amplitudes.reshape(2, 2 ** cfg.n_c, 2 ** cfg.n_b)[1, 0, :]
        clock_zero_weight = float(np.sum(np.abs(block) ** 2))
        if clock_zero_weight <= 1e-14:
            raise qsim.PostSelectionError("no amplitude left in the uncomputed clock branch")
        # strip a residual global phase, then keep the real solution branch
        peak = block[np.argmax(np.abs(block))]
        block = block * (peak.conj() / abs(peak))
        solution = block.real
        solution = solution / np.linalg.norm(solution)
        return HHLResult(
            solution_amplitudes=solution,
            success_probability=float(success),
            lambda_min=self.lambda_min,
            lambda_max=self.lambda_max,
            evolution_time=self.t,
            clock_zero_weight=clock_zero_weight,
        )


def hhl_solve(A, b, cfg: HHLConfig) -> HHLResult:
    """One-shot HHL solve of A x = b (see HHLSolver for the reusable form)."""
    return HHLSolver(A, cfg).solve(b)


def nc_sweep(A, b, reference, nc_values, n_b, backend=SPECTRAL, trotter_steps=150):
    """Mean ARE of the HHL solution against `reference` for each clock size.

    Returns a list of (n_c, mean_are) rows. The HHL output is rescaled to
    the reference norm with the sign fixed by correlation, mirroring the
    calibration used everywhere else.
    """
    from .metrics import metric_are

    reference = np.asarray(reference, dtype=float)
    rows = []
    for n_c in nc_values:
        cfg = HHLConfig(n_b=n_b, n_c=int(n_c), backend=backend, trotter_steps=trotter_steps)
        result = hhl_solve(A, b, cfg)
        candidate = calibrate(result.solution_amplitudes[:reference.size], reference)
        rows.append((int(n_c), float(metric_are(candidate, reference).mean())))
    return rows


def calibrate(normalized: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Rescale a normalized solution to the reference L2 norm, sign by correlation."""
    normalized = np.asarray(normalized, dtype=float)
    unit = normalized / np.linalg.norm(normalized)
    sign = 1.0 if float(np.dot(unit, reference)) >= 0.0 else -1.0
    return sign * np.linalg.norm(reference) * unit
