"""Discrete Laplacian assembly, classical solves, and Pauli decomposition.

The pressure Poisson operator is assembled as a Hermitian block-tridiagonal
matrix over the flattened interior nodes (k = i + (j-1)*N_xi). On stretched
grids the off-diagonal couplings use the symmetric product of adjacent metric
coefficients, h_i * h_{i+1} / dxi^2, which keeps A_ij == A_ji bitwise and
reduces to the plain squared-metric stencil on uniform grids.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid2D, StretchConfig, nodes_1d

NULLSPACE_NONE = "none"
NULLSPACE_CONSTANT = "constant"

_BOUNDARY_CONDITIONS = ("dirichlet", "neumann", "periodic")


class LinalgError(ValueError):
    """Contract violation in a linear-algebra operation."""


class ConsistencyError(LinalgError):
    """Singular system with a right-hand side outside the range of A."""


class SparseSymMatrix:
    """Real symmetric sparse matrix in CSR form with solver caches.

    nullspace is "constant" for Neumann/periodic assemblies (one zero
    eigenvalue with constant eigenvector) and "none" otherwise.
    """

    def __init__(self, csr: sp.csr_matrix, nullspace=NULLSPACE_NONE):
        self.csr = csr.tocsr()
        self.dim = csr.shape[0]
        self.nullspace = nullspace
        self._lu = None
        self._lu_reduced = None
        coo = self.csr.tocoo()
        transposed = sp.csr_matrix((coo.data, (coo.col, coo.row)), shape=csr.shape)
        self.is_symmetric = (self.csr != transposed).nnz == 0

    def toarray(self):
        return self.csr.toarray()

    def matvec(self, x):
        return self.csr @ x

    def max_nonzeros_per_row(self):
        return int(np.max(np.diff(self.csr.indptr)))

    def __repr__(self):
        return (f"SparseSymMatrix(dim={self.dim}, nnz={self.csr.nnz}, "
                f"nullspace={self.nullspace!r})")


def _edge_couplings(h, d):
    """Coupling h[e]*h[e+1]/d^2 for the edge linking nodes e and e+1."""
    return h[:-1] * h[1:] / (d * d)


def assemble_laplacian(grid: Grid2D, bc: str, diagonal_mode="incident-sum") -> SparseSymMatrix:
    """Five-point Laplacian over the interior nodes of a 2D grid.

    bc is one of dirichlet, neumann, periodic and applies to all four sides.
    diagonal_mode "incident-sum" sets the diagonal to the negative sum of the
    incident couplings (conservative, exact row sums for neumann/periodic);
    "squared-metric" uses -2(h_xi^2/dxi^2 + h_eta^2/deta^2) instead. The two
    agree entry-for-entry on uniform grids.
    """
    if bc not in _BOUNDARY_CONDITIONS:
        raise LinalgError(f"unknown boundary condition {bc!r}")
    if diagonal_mode not in ("incident-sum", "squared-metric"):
        raise LinalgError(f"unknown diagonal mode {diagonal_mode!r}")
    if bc == "periodic" and not grid.periodic:
        raise LinalgError("periodic assembly requires a periodic grid")

    nx, ny = grid.n_xi, grid.n_eta
    cx = _edge_couplings(grid.h_xi, grid.d_xi)   # cx[e] couples nodes e, e+1
    cy = _edge_couplings(grid.h_eta, grid.d_eta)
    rows, cols, vals = [], [], []
    diag = np.zeros(nx * ny)

    def add(k, kn, c):
        rows.append(k)
        cols.append(kn)
        vals.append(c)
        diag[k] -= c

    for j in range(1, ny + 1):
        for i in range(1, nx + 1):
            k = (i - 1) + (j - 1) * nx
            # (neighbor interior index or None, edge coupling, direction size)
            neighbors = (
                (i - 1, j, cx[i - 1], "xi"),
                (i + 1, j, cx[i], "xi"),
                (i, j - 1, cy[j - 1], "eta"),
                (i, j + 1, cy[j], "eta"),
            )
            for ii, jj, c, direction in neighbors:
                n = nx if direction == "xi" else ny
                inside = 1 <= (ii if direction == "xi" else jj) <= n
                if inside:
                    kn = (ii - 1) + (jj - 1) * nx
                    add(k, kn, c)
                elif bc == "dirichlet":
                    diag[k] -= c  # coupling to a known boundary value
                elif bc == "periodic":
                    wi = ii if direction == "eta" else (nx if ii == 0 else 1)
                    wj = jj if direction == "xi" else (ny if jj == 0 else 1)
                    kn = (wi - 1) + (wj - 1) * nx
                    add(k, kn, c)
                # neumann: mirrored ghost cancels the coupling entirely

    if diagonal_mode == "squared-metric":
        hx2 = (grid.h_xi[1:-1] ** 2) / grid.d_xi ** 2
        hy2 = (grid.h_eta[1:-1] ** 2) / grid.d_eta ** 2
        diag = -2.0 * (np.tile(hx2, ny) + np.repeat(hy2, nx))

    rows.extend(range(nx * ny))
    cols.extend(range(nx * ny))
    vals.extend(diag)
    csr = sp.csr_matrix((vals, (rows, cols)), shape=(nx * ny, nx * ny))
    nullspace = NULLSPACE_NONE if bc == "dirichlet" else NULLSPACE_CONSTANT
    return SparseSymMatrix(csr, nullspace=nullspace)


def assemble_laplacian_1d(n, cfg: StretchConfig, bc="dirichlet") -> SparseSymMatrix:
    """Tridiagonal 1D Laplacian over n interior nodes (see nodes_1d)."""
    if bc not in ("dirichlet", "neumann"):
        raise LinalgError(f"unsupported 1D boundary condition {bc!r}")
    _, h, d_xi = nodes_1d(n, cfg)
    c = _edge_couplings(h, d_xi)
    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    for k in range(n):
        for kn, edge in ((k - 1, c[k]), (k + 1, c[k + 1])):
            if 0 <= kn < n:
                rows.append(k)
                cols.append(kn)
                vals.append(edge)
                diag[k] -= edge
            elif bc == "dirichlet":
                diag[k] -= edge
    rows.extend(range(n))
    cols.extend(range(n))
    vals.extend(diag)
    csr = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    nullspace = NULLSPACE_NONE if bc == "dirichlet" else NULLSPACE_CONSTANT
    return SparseSymMatrix(csr, nullspace=nullspace)


def dirichlet_rhs_fold(grid: Grid2D, boundary_values, f) -> np.ndarray:
    """Right-hand side for A u = rhs with the boundary values folded in.

    boundary_values and f are callables of the physical coordinates (x, y).
    rhs_k = f(x_k) - sum over boundary-adjacent edges of coupling * g(boundary node).
    """
    nx, ny = grid.n_xi, grid.n_eta
    cx = _edge_couplings(grid.h_xi, grid.d_xi)
    cy = _edge_couplings(grid.h_eta, grid.d_eta)
    x, y = grid.x_nodes, grid.y_nodes
    rhs = np.empty(nx * ny)
    for j in range(1, ny + 1):
        for i in range(1, nx + 1):
            k = (i - 1) + (j - 1) * nx
            val = f(x[i], y[j])
            if i == 1:
                val -= cx[0] * boundary_values(x[0], y[j])
            if i == nx:
                val -= cx[nx] * boundary_values(x[nx + 1], y[j])
            if j == 1:
                val -= cy[0] * boundary_values(x[i], y[0])
            if j == ny:
                val -= cy[ny] * boundary_values(x[i], y[ny + 1])
            rhs[k] = val
    return rhs


def dirichlet_rhs_fold_1d(n, cfg: StretchConfig, f, left, right) -> np.ndarray:
    """1D analogue of dirichlet_rhs_fold with scalar boundary values."""
    x, h, d_xi = nodes_1d(n, cfg)
    c = _edge_couplings(h, d_xi)
    rhs = np.array([f(x[k + 1]) for k in range(n)], dtype=float)
    rhs[0] -= c[0] * left
    rhs[-1] -= c[n] * right
    return rhs


def direct_solve(A: SparseSymMatrix, b: np.ndarray) -> np.ndarray:
    """Classical sparse direct solve; the reference oracle for every benchmark.

    Singular (Neumann/periodic) systems require mean(b) ~ 0 and return the
    zero-mean solution, obtained by pinning one unknown and re-centering.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (A.dim,):
        raise LinalgError(f"rhs shape {b.shape} incompatible with dim {A.dim}")
    scale = np.linalg.norm(b, np.inf)
    if A.nullspace == NULLSPACE_CONSTANT:
        if scale > 0 and abs(b.sum()) > 1e-9 * scale * A.dim:
            raise ConsistencyError("rhs has a nonzero mean component for a singular system")
        if A._lu_reduced is None:
            A._lu_reduced = spla.splu(A.csr[:-1, :-1].tocsc())
        x = np.zeros(A.dim)
        x[:-1] = A._lu_reduced.solve(b[:-1])
        x -= x.mean()
    else:
        if A._lu is None:
            A._lu = spla.splu(A.csr.tocsc())
        x = A._lu.solve(b)
    residual = np.linalg.norm(A.matvec(x) - b, np.inf)
    if scale > 0 and residual > 1e-9 * scale:
        raise LinalgError(f"direct solve residual {residual:.3e} exceeds 1e-9 * ||b||")
    return x


@dataclass
class EigenDecomposition:
    """Eigenvalues ascending with orthonormal eigenvectors in columns."""

    eigenvalues: np.ndarray
    vectors: np.ndarray


def sym_eigendecomposition(A) -> EigenDecomposition:
    """Full dense symmetric eigendecomposition (target sizes are <= 4096)."""
    dense = A.toarray() if isinstance(A, SparseSymMatrix) else np.asarray(A, dtype=float)
    if isinstance(A, SparseSymMatrix) and not A.is_symmetric:
        raise LinalgError("matrix is not symmetric")
    if not np.allclose(dense, dense.T, atol=1e-12 * max(1.0, np.abs(dense).max())):
        raise LinalgError("matrix is not symmetric")
    w, v = np.linalg.eigh(dense)
    return EigenDecomposition(eigenvalues=w, vectors=v)


# ---------------------------------------------------------------------------
# Pauli string decomposition
#
# Letters are ordered most-significant qubit first ("XZ" means X on qubit 1,
# Z on qubit 0 of a 2-qubit register). Any Pauli string is a signed bit-flip:
# P|x> = ph(x) |x ^ f> with f the X/Y mask and ph(x) = i^{|Y|} (-1)^{x . s},
# s the Y/Z mask. Hence trace(P A) = sum_x ph(x) A[x, x^f], and for fixed f
# the sums over all s form the Walsh-Hadamard transform of A[x, x^f].
# ---------------------------------------------------------------------------

# (flip bit, phase bit) -> letter: flips come from X/Y, phases from Y/Z
_LETTER_BY_BITS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


def _walsh_hadamard(vec: np.ndarray) -> np.ndarray:
    out = vec.astype(complex).copy()
    n = out.size
    h = 1
    while h < n:
        out = out.reshape(-1, 2 * h)
        left = out[:, :h].copy()
        out[:, :h] = left + out[:, h:]
        out[:, h:] = left - out[:, h:]
        out = out.reshape(n)
        h *= 2
    return out


def _string_label(n, f, s):
    return "".join(_LETTER_BY_BITS[(f >> q) & 1, (s >> q) & 1]
                   for q in range(n - 1, -1, -1))


def pauli_decompose(A: np.ndarray, tol=1e-12):
    """Decompose a Hermitian 2^n x 2^n matrix into sum_k c_k P_k.

    Returns a list of (coefficient, pauli string) with real coefficients,
    strings ordered lexicographically, and |c| < tol terms dropped.
    """
    A = np.asarray(A)
    dim = A.shape[0]
    n = int(round(np.log2(dim)))
    if A.shape != (dim, dim) or 2 ** n != dim:
        raise LinalgError(f"matrix dimension {A.shape} is not a square power of two")
    if not np.allclose(A, A.conj().T, atol=1e-10 * max(1.0, np.abs(A).max())):
        raise LinalgError("matrix is not Hermitian")
    idx = np.arange(dim)
    terms = []
    for f in range(dim):
        g = A[idx, idx ^ f]
        wht = _walsh_hadamard(g)
        for s in range(dim):
            n_y = bin(f & s).count("1")
            c = (1j ** n_y) * wht[s] / dim
            if abs(c) < tol:
                continue
            if abs(c.imag) > 1e-10 * max(1.0, abs(c)):
                raise LinalgError("non-real Pauli coefficient for Hermitian input")
            terms.append((float(c.real), _string_label(n, f, s)))
    terms.sort(key=lambda t: t[1])
    return terms


_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_string_matrix(word: str) -> np.ndarray:
    """Dense matrix of a Pauli string (leftmost letter = most significant qubit)."""
    out = np.array([[1.0 + 0j]])
    for letter in word:
        try:
            out = np.kron(out, _PAULI_1Q[letter])
        except KeyError:
            raise LinalgError(f"invalid Pauli letter {letter!r}") from None
    return out


def pauli_reconstruct(terms, n_qubits) -> np.ndarray:
    """Dense sum_k c_k P_k for a term list over n_qubits."""
    out = np.zeros((2 ** n_qubits, 2 ** n_qubits), dtype=complex)
    for coeff, word in terms:
        if len(word) != n_qubits:
            raise LinalgError(f"word {word!r} does not match {n_qubits} qubits")
        out += coeff * pauli_string_matrix(word)
    return out
