"""Dense statevector simulator for the gate set the HHL pipeline needs.

Qubit 0 is the least significant bit of the basis index: basis state
|q_{n-1} ... q_1 q_0> sits at index sum_b q_b 2^b. All operations return a
new StateVector and preserve the 2-norm (unitaries) or renormalize
(projection).
"""
from __future__ import annotations

import numpy as np

SQRT2_INV = 1.0 / np.sqrt(2.0)
H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT2_INV
X_GATE = np.array([[0, 1], [1, 0]], dtype=complex)
Y_GATE = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z_GATE = np.array([[1, 0], [0, -1]], dtype=complex)


class SimError(ValueError):
    """Gate or register contract violation."""


class PostSelectionError(RuntimeError):
    """Requested measurement outcome has (numerically) zero probability."""


class StateVector:
    """Complex amplitude array of length 2^q for a q-qubit register."""

    __slots__ = ("amplitudes", "n_qubits")

    def __init__(self, amplitudes: np.ndarray, n_qubits: int | None = None):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        q = int(round(np.log2(amplitudes.size)))
        if 2 ** q != amplitudes.size:
            raise SimError(f"amplitude length {amplitudes.size} is not a power of two")
        if n_qubits is not None and n_qubits != q:
            raise SimError(f"{n_qubits} qubits inconsistent with {amplitudes.size} amplitudes")
        self.amplitudes = amplitudes
        self.n_qubits = q

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy())


def _check_unitary(U: np.ndarray, tol: float):
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise SimError(f"gate shape {U.shape} is not square")
    if np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() > tol:
        raise SimError("gate is not unitary")
    return U


def _check_qubit(q: int, n: int):
    if not 0 <= q < n:
        raise SimError(f"qubit {q} out of range for {n}-qubit register")


def apply_single_qubit(state: StateVector, gate: np.ndarray, target: int) -> StateVector:
    """Apply a 2x2 unitary to one qubit."""
    U = _check_unitary(gate, 1e-10)
    _check_qubit(target, state.n_qubits)
    view = state.amplitudes.reshape(-1, 2, 2 ** target)
    out = np.einsum("ab,ibk->iak", U, view)
    return StateVector(out.reshape(-1))


def apply_controlled(state: StateVector, gate: np.ndarray, control: int, target: int) -> StateVector:
    """Apply a 2x2 unitary to `target` on the control=1 subspace."""
    U = _check_unitary(gate, 1e-10)
    _check_qubit(control, state.n_qubits)
    _check_qubit(target, state.n_qubits)
    if control == target:
        raise SimError("control and target qubits overlap")
    n = state.n_qubits
    tens = state.amplitudes.reshape([2] * n).copy()
    c_axis, t_axis = n - 1 - control, n - 1 - target
    sub = np.take(tens, 1, axis=c_axis)
    sub = np.moveaxis(sub, t_axis if t_axis < c_axis else t_axis - 1, 0)
    sub = np.einsum("ab,b...->a...", U, sub)
    sub = np.moveaxis(sub, 0, t_axis if t_axis < c_axis else t_axis - 1)
    idx = [slice(None)] * n
    idx[c_axis] = 1
    tens[tuple(idx)] = sub
    return StateVector(tens.reshape(-1))


def apply_controlled_phase(state: StateVector, angle: float, qubits) -> StateVector:
    """Multiply amplitudes by e^{i angle} where all listed qubits are 1.

    With two qubits this is the symmetric controlled-phase gate; more
    qubits give the multi-controlled variant.
    """
    qubits = list(qubits)
    for q in qubits:
        _check_qubit(q, state.n_qubits)
    if len(set(qubits)) != len(qubits):
        raise SimError("repeated qubit in controlled phase")
    mask = 0
    for q in qubits:
        mask |= 1 << q
    idx = np.arange(state.amplitudes.size)
    out = state.amplitudes.copy()
    sel = (idx & mask) == mask
    out[sel] *= np.exp(1j * angle)
    return StateVector(out)


def _parity(values: np.ndarray) -> np.ndarray:
    v = values.copy()
    for shift in (16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1


def pauli_word_masks(word: str, qubits) -> tuple[int, int, int]:
    """(flip mask, phase mask, Y count) of a Pauli word over given qubits.

    word is ordered most-significant first: word[0] acts on qubits[0], which
    by convention callers list from high to low.
    """
    qubits = list(qubits)
    if len(word) != len(qubits):
        raise SimError(f"word {word!r} does not match {len(qubits)} qubits")
    flip = phase = n_y = 0
    for letter, q in zip(word, qubits):
        if letter == "X":
            flip |= 1 << q
        elif letter == "Y":
            flip |= 1 << q
            phase |= 1 << q
            n_y += 1
        elif letter == "Z":
            phase |= 1 << q
        elif letter != "I":
            raise SimError(f"invalid Pauli letter {letter!r}")
    return flip, phase, n_y


def apply_pauli_rotation(state: StateVector, word: str, angle: float, qubits,
                         controls=()) -> StateVector:
    """Apply exp(-i angle/2 * P) for the Pauli word P, optionally controlled.

    P|x> = i^{n_Y} (-1)^{x . phase_mask} |x ^ flip_mask>, so the rotation
    mixes amplitude pairs (x, x ^ flip_mask) with cos/sin weights.
    """
    for q in qubits:
        _check_qubit(q, state.n_qubits)
    flip, phase, n_y = pauli_word_masks(word, qubits)
    for c in controls:
        _check_qubit(c, state.n_qubits)
        if (flip >> c) & 1 or (phase >> c) & 1 or c in qubits:
            raise SimError("control qubit overlaps the rotation word")
    amps = state.amplitudes
    idx = np.arange(amps.size)
    # (P psi)[x] = ph(x ^ flip) psi[x ^ flip]
    ph = (1j ** n_y) * (1.0 - 2.0 * _parity((idx ^ flip) & phase))
    p_psi = ph * amps[idx ^ flip]
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    rotated = c * amps - 1j * s * p_psi
    if controls:
        cmask = 0
        for q in controls:
            cmask |= 1 << q
        out = amps.copy()
        sel = (idx & cmask) == cmask
        out[sel] = rotated[sel]
        return StateVector(out)
    return StateVector(rotated)


def qft(state: StateVector, first: int, count: int, inverse: bool = False) -> StateVector:
    """Quantum Fourier transform on the register [first, first+count).

    The register value is read with qubit `first` as its least significant
    bit; the forward transform maps |l> to sum_m exp(2 pi i l m / 2^count)
    |m> / 2^{count/2}. On a single qubit this is the Hadamard gate.
    """
    if count < 1 or first < 0 or first + count > state.n_qubits:
        raise SimError("QFT register out of bounds")
    out = state
    if not inverse:
        for k in range(count - 1, -1, -1):
            out = apply_single_qubit(out, H_GATE, first + k)
            for j in range(k - 1, -1, -1):
                out = apply_controlled_phase(out, np.pi / 2 ** (k - j), (first + j, first + k))
        for k in range(count // 2):
            out = _swap(out, first + k, first + count - 1 - k)
    else:
        for k in range(count // 2):
            out = _swap(out, first + k, first + count - 1 - k)
        for k in range(count):
            for j in range(k):
                out = apply_controlled_phase(out, -np.pi / 2 ** (k - j), (first + j, first + k))
            out = apply_single_qubit(out, H_GATE, first + k)
    return out


def _swap(state: StateVector, a: int, b: int) -> StateVector:
    tens = state.amplitudes.reshape([2] * state.n_qubits)
    n = state.n_qubits
    tens = np.swapaxes(tens, n - 1 - a, n - 1 - b)
    return StateVector(np.ascontiguousarray(tens).reshape(-1))


def project_and_renormalize(state: StateVector, qubit: int, outcome: int):
    """Project onto a measurement outcome of one qubit.

    Returns (renormalized projected state, pre-projection Born probability).
    """
    _check_qubit(qubit, state.n_qubits)
    if outcome not in (0, 1):
        raise SimError(f"outcome must be 0 or 1, got {outcome}")
    idx = np.arange(state.amplitudes.size)
    keep = ((idx >> qubit) & 1) == outcome
    prob = float(np.sum(np.abs(state.amplitudes[keep]) ** 2))
    if prob <= 1e-14:
        raise PostSelectionError(
            f"outcome {outcome} on qubit {qubit} has probability {prob:.3e}")
    out = np.where(keep, state.amplitudes, 0.0) / np.sqrt(prob)
    return StateVector(out), prob


def apply_dense_unitary(state: StateVector, U: np.ndarray, first: int, count: int,
                        controls=()) -> StateVector:
    """Apply a 2^count x 2^count unitary to the contiguous register
    [first, first+count), optionally controlled on qubits outside it."""
    U = _check_unitary(U, 1e-9)
    if U.shape[0] != 2 ** count:
        raise SimError(f"unitary dimension {U.shape[0]} does not match register size {count}")
    if first < 0 or first + count > state.n_qubits:
        raise SimError("register out of bounds")
    lo, reg = 2 ** first, 2 ** count
    view = state.amplitudes.reshape(-1, reg, lo)
    if not controls:
        out = np.einsum("ab,ibk->iak", U, view)
        return StateVector(out.reshape(-1))
    cmask = 0
    for c in controls:
        _check_qubit(c, state.n_qubits)
        if first <= c < first + count:
            raise SimError("control qubit lies inside the target register")
        cmask |= 1 << c
    idx = np.arange(state.amplitudes.size)
    ctrl = ((idx & cmask) == cmask).reshape(-1, reg, lo)[:, 0, :]
    moved = np.moveaxis(view, 1, 2)            # (high, low, reg)
    out = moved.copy()
    out[ctrl] = moved[ctrl] @ U.T
    return StateVector(np.moveaxis(out, 2, 1).reshape(-1))
