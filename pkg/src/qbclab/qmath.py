"""Dense complex linear algebra for small bipartite quantum systems.

Everything is carried by plain ``numpy`` complex arrays. States and
operators here are small enough for dense storage; the joint dimension is
capped (``QBC_DIM_CAP`` environment variable, default ``2**20``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

DEFAULT_DIM_CAP = 2**20
ATOL = 1e-9
SCHMIDT_FLOOR = 1e-12
DEGENERACY_TOL = 1e-10


class DimensionCapError(ValueError):
    """Requested joint dimension exceeds the configured cap."""


def dimension_cap() -> int:
    """Current joint-dimension cap (QBC_DIM_CAP overrides the default)."""
    return int(os.environ.get("QBC_DIM_CAP", DEFAULT_DIM_CAP))


def check_dimension(dim: int) -> None:
    cap = dimension_cap()
    if dim > cap:
        raise DimensionCapError(f"joint dimension {dim} exceeds cap {cap}")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BipartitePureState:
    """Normalized pure state on A (x) B.

    Amplitudes are stored flattened with index (i, k) -> i * dim_b + k,
    i.e. ``matrix()[i, k]`` is the amplitude of |i>_A |k>_B.
    """

    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        check_dimension(self.dim_a * self.dim_b)
        if amps.size != self.dim_a * self.dim_b:
            raise ValueError(
                f"amplitude length {amps.size} != dim_a*dim_b = {self.dim_a * self.dim_b}"
            )
        if not np.isfinite(amps).all():
            raise ValueError("amplitudes contain NaN or Inf")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")

    def matrix(self) -> np.ndarray:
        """Amplitudes reshaped to (dim_a, dim_b)."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    def overlap(self, other: "BipartitePureState") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace operator."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if not np.isfinite(m).all():
            raise ValueError("density matrix contains NaN or Inf")
        if np.max(np.abs(m - m.conj().T)) > ATOL:
            raise ValueError("density matrix not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > ATOL:
            raise ValueError(f"trace {np.trace(m).real} != 1")
        w = np.linalg.eigvalsh(m)
        if w.min() < -ATOL:
            raise ValueError(f"negative eigenvalue {w.min():.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SchmidtForm:
    """Schmidt data of a bipartite pure state.

    ``coefficients`` are the sqrt-weights sorted descending; the columns of
    ``basis_a`` / ``basis_b`` are the matching orthonormal vectors, so the
    source state is  sum_k coefficients[k] * basis_a[:, k] (x) basis_b[:, k].
    """

    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    @property
    def rank(self) -> int:
        return self.coefficients.size

    def weights(self) -> np.ndarray:
        """The reduced-operator eigenvalues (squared coefficients)."""
        return self.coefficients**2

    def reconstruct(self) -> BipartitePureState:
        m = (self.basis_a * self.coefficients) @ self.basis_b.T
        return BipartitePureState(self.basis_a.shape[0], self.basis_b.shape[0], m.reshape(-1))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def tensor(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Kronecker product with the joint-dimension cap enforced."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    check_dimension(x.shape[0] * y.shape[0])
    if x.ndim == 2 and y.ndim == 2:
        check_dimension(x.shape[1] * y.shape[1])
    return np.kron(x, y)


def partial_trace_a(state: BipartitePureState) -> DensityOperator:
    """Reduced density operator of the B register, Tr_A |psi><psi|."""
    m = state.matrix()
    rho = np.einsum("ik,il->kl", m, m.conj())
    return DensityOperator(rho)


def schmidt_decompose(state: BipartitePureState) -> SchmidtForm:
    """Schmidt decomposition with a deterministic canonical form.

    Coefficients below the truncation floor (on the squared weights) are
    dropped. The bases returned by the SVD are post-processed so the output
    does not depend on the SVD's arbitrary choices: inside each block of
    (near-)degenerate weights the A-vectors are replaced by the projections
    of the standard basis onto the block subspace (orthonormalized in index
    order), the B-vectors are counter-rotated to keep the reconstruction
    exact, and each A-vector's first nonzero component is made real
    positive with the compensating phase pushed onto its B partner.
    """
    u, s, vh = np.linalg.svd(state.matrix(), full_matrices=False)
    keep = s**2 > SCHMIDT_FLOOR
    coeffs = s[keep]
    basis_a = u[:, keep].copy()
    basis_b = vh[keep, :].T.copy()
    basis_a, basis_b = _canonicalize(coeffs**2, basis_a, basis_b)
    return SchmidtForm(coefficients=coeffs, basis_a=basis_a, basis_b=basis_b)


def degenerate_blocks(weights: np.ndarray, tol: float = DEGENERACY_TOL) -> list[range]:
    """Group indices of a descending weight sequence into near-equal blocks."""
    blocks = []
    start = 0
    for k in range(1, weights.size + 1):
        if k == weights.size or weights[k - 1] - weights[k] > tol:
            blocks.append(range(start, k))
            start = k
    return blocks


def _projected_standard_basis(block: np.ndarray) -> np.ndarray:
    """Canonical orthonormal basis of the column space of ``block``.

    Standard basis vectors are projected onto the subspace and
    Gram-Schmidt orthonormalized in index order; depends only on the
    subspace, not on the particular columns supplied.
    """
    dim, m = block.shape
    proj = block @ block.conj().T
    chosen: list[np.ndarray] = []
    for i in range(dim):
        v = proj[:, i].copy()
        for u_vec in chosen:
            v -= u_vec * np.vdot(u_vec, v)
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            chosen.append(v / nrm)
            if len(chosen) == m:
                break
    if len(chosen) < m:  # numerically degenerate projections; keep SVD's choice
        return block
    return np.column_stack(chosen)


def _canonicalize(weights, basis_a, basis_b):
    for blk in degenerate_blocks(weights):
        cols = list(blk)
        a_block = basis_a[:, cols]
        canon = _projected_standard_basis(a_block)
        rot = a_block.conj().T @ canon
        basis_a[:, cols] = canon
        basis_b[:, cols] = basis_b[:, cols] @ rot.conj()
    for k in range(basis_a.shape[1]):
        col = basis_a[:, k]
        i0 = int(np.argmax(np.abs(col) > 1e-10))
        ph = col[i0] / abs(col[i0])
        basis_a[:, k] = col * ph.conjugate()
        basis_b[:, k] = basis_b[:, k] * ph
    return basis_a, basis_b


def matrix_sqrt(rho: DensityOperator | np.ndarray) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition."""
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh(m)
    if w.min() < -ATOL:
        raise ValueError(f"negative eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Unitary factor W of the right polar decomposition m = W sqrt(m^dag m).

    For singular m the null-space part of W is completed by the SVD's
    deterministic pairing of singular vectors.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("polar_unitary requires a square matrix")
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def fidelity(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """Uhlmann fidelity: the trace norm of sqrt(rho0) sqrt(rho1).

    Equals the maximal overlap |<psi0|psi1>| over joint purifications of
    the two operators; 1 iff they coincide, 0 iff their supports are
    orthogonal. Clamped to [0, 1].
    """
    if rho0.dim != rho1.dim:
        raise ValueError("dimension mismatch")
    cross = matrix_sqrt(rho0) @ matrix_sqrt(rho1)
    f = float(np.linalg.svd(cross, compute_uv=False).sum())
    return min(max(f, 0.0), 1.0)


def trace_distance(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """Half the sum of absolute eigenvalues of rho0 - rho1.

    The receiver's best single-shot guess between the two states succeeds
    with probability (1 + distance) / 2.
    """
    if rho0.dim != rho1.dim:
        raise ValueError("dimension mismatch")
    w = np.linalg.eigvalsh(rho0.matrix - rho1.matrix)
    d = 0.5 * float(np.abs(w).sum())
    return min(max(d, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Small state utilities
# ---------------------------------------------------------------------------


def apply_to_a(u: np.ndarray, state: BipartitePureState) -> BipartitePureState:
    """Apply a local operator on register A: (U (x) 1) |state>."""
    u = np.asarray(u, dtype=complex)
    if u.shape[1] != state.dim_a:
        raise ValueError("operator does not match the A dimension")
    return BipartitePureState(u.shape[0], state.dim_b, (u @ state.matrix()).reshape(-1))


def pad_dim_a(state: BipartitePureState, new_dim_a: int) -> BipartitePureState:
    """Embed the A register in a larger space by appending zero amplitudes."""
    if new_dim_a < state.dim_a:
        raise ValueError("padding cannot shrink the A register")
    if new_dim_a == state.dim_a:
        return state
    m = np.zeros((new_dim_a, state.dim_b), dtype=complex)
    m[: state.dim_a] = state.matrix()
    return BipartitePureState(new_dim_a, state.dim_b, m.reshape(-1))


def canonical_phase(amps: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude entry is real positive."""
    amps = np.asarray(amps, dtype=complex)
    i = int(np.argmax(np.abs(amps)))
    if abs(amps[i]) == 0.0:
        return amps.copy()
    ph = amps[i] / abs(amps[i])
    return amps * ph.conjugate()


def phase_aligned_distance(x: np.ndarray, y: np.ndarray) -> float:
    """min over theta of || x - e^{i theta} y ||  (pure states are rays)."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    y = np.asarray(y, dtype=complex).reshape(-1)
    inner = np.vdot(x, y)
    if abs(inner) < 1e-300:
        return float(np.sqrt(np.linalg.norm(x) ** 2 + np.linalg.norm(y) ** 2))
    ph = inner.conjugate() / abs(inner)
    return float(np.linalg.norm(x - ph * y))


def orthonormal_completion(basis: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the orthogonal complement.

    Standard basis vectors are orthogonalized against the given orthonormal
    columns (and each other) in index order.
    """
    dim, r = basis.shape
    need = dim - r
    if need == 0:
        return np.zeros((dim, 0), dtype=complex)
    chosen: list[np.ndarray] = []
    for i in range(dim):
        if len(chosen) == need:
            break
        v = np.zeros(dim, dtype=complex)
        v[i] = 1.0
        v -= basis @ (basis.conj().T @ v)
        for u_vec in chosen:
            v -= u_vec * np.vdot(u_vec, v)
        nrm = np.linalg.norm(v)
        if nrm > 1e-6:
            chosen.append(v / nrm)
    if len(chosen) != need:
        raise RuntimeError("orthonormal completion failed; input columns not orthonormal?")
    return np.column_stack(chosen)
