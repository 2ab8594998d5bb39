"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays. The functions here add the
checks and conventions the phase code relies on: deterministic eigenvector
phases, descending eigenvalue order, refusal of degenerate spectra, and
unitaries built from the spectral decomposition of a Hermitian generator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum, DimensionMismatch, NotHermitian

HERMITIAN_TOL = 1e-10
DEGENERACY_GAP = 1e-8

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def as_matrix(A) -> np.ndarray:
    """Validate and convert to a square, finite complex128 array."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def hermiticity_residual(A) -> float:
    A = np.asarray(A)
    return float(np.max(np.abs(A - A.conj().T)))


def unitarity_residual(U) -> float:
    """max |U^dagger U - I| over entries."""
    U = np.asarray(U, dtype=np.complex128)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending with matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.values)

    def vector(self, i: int) -> np.ndarray:
        return self.vectors[:, i]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T

    def min_gap(self) -> float:
        if self.dim < 2:
            return np.inf
        return float(np.min(-np.diff(self.values)))


def fix_phases(vectors: np.ndarray, tie_tol: float = 1e-10) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and >= 0.

    Near-ties within ``tie_tol`` go to the lowest index.
    """
    vectors = np.array(vectors, dtype=np.complex128, copy=True)
    mags = np.abs(vectors)
    for i in range(vectors.shape[1]):
        col = mags[:, i]
        pivot = int(np.flatnonzero(col >= col.max() - tie_tol)[0])
        z = vectors[pivot, i]
        if z != 0:
            vectors[:, i] *= np.conj(z) / abs(z)
        vectors[pivot, i] = abs(vectors[pivot, i])
    return vectors


def eigh_hermitian(A, tol: float = HERMITIAN_TOL, nondegenerate: bool = False,
                   gap: float = DEGENERACY_GAP) -> EigenSystem:
    """Spectral decomposition of a Hermitian matrix.

    Raises NotHermitian if ``max|A - A^dagger| > tol`` and, when
    ``nondegenerate`` is set, DegenerateSpectrum if two adjacent
    eigenvalues are closer than ``gap``.
    """
    A = as_matrix(A)
    res = hermiticity_residual(A)
    if res > tol:
        raise NotHermitian(f"max |A - A^dagger| = {res:.3e} exceeds {tol:.1e}")
    w, v = np.linalg.eigh(0.5 * (A + A.conj().T))
    order = np.argsort(-w, kind="stable")
    es = EigenSystem(values=w[order].copy(), vectors=fix_phases(v[:, order]))
    if nondegenerate and es.min_gap() < gap:
        raise DegenerateSpectrum(
            f"adjacent eigenvalue gap {es.min_gap():.3e} below {gap:.1e}")
    return es


def _generator_check(H, tol):
    res = hermiticity_residual(H)
    if res > tol * max(1.0, float(np.max(np.abs(H)))):
        raise NotHermitian(f"generator not Hermitian (residual {res:.3e})")


def step_unitary(H, dt: float, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """exp(-i H dt) from the eigendecomposition of H."""
    H = as_matrix(H)
    if not np.isfinite(dt):
        raise ValueError("dt must be finite")
    _generator_check(H, tol)
    w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def step_unitaries(Hs, dts, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Batched :func:`step_unitary` over a stack of generators (J, N, N)."""
    Hs = np.asarray(Hs, dtype=np.complex128)
    dts = np.broadcast_to(np.asarray(dts, dtype=float), Hs.shape[:1])
    if Hs.size == 0:
        return Hs.copy()
    res = np.max(np.abs(Hs - np.conj(np.swapaxes(Hs, 1, 2))), axis=(1, 2))
    scale = np.maximum(1.0, np.max(np.abs(Hs), axis=(1, 2)))
    if np.any(res > tol * scale):
        raise NotHermitian(f"generator not Hermitian (residual {res.max():.3e})")
    w, v = np.linalg.eigh(0.5 * (Hs + np.conj(np.swapaxes(Hs, 1, 2))))
    phases = np.exp(-1j * w * dts[:, None])
    return (v * phases[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))


def partial_trace(M, dims, keep) -> np.ndarray:
    """Reduced matrix on the factors listed in ``keep`` (ascending order kept)."""
    M = as_matrix(M)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != M.shape[0]:
        raise DimensionMismatch(f"factor dims {dims} do not match size {M.shape[0]}")
    keep = sorted(set(int(k) for k in np.atleast_1d(keep)))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionMismatch(f"invalid kept factors {keep} for {len(dims)} factors")
    n = len(dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    T = M.reshape(dims + dims)
    d = int(np.prod([dims[i] for i in keep]))
    return np.einsum(T, row + col, out).reshape(d, d)


def kron(*ops) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for op in ops:
        out = np.kron(out, op)
    return out


def basis_projector(dim: int, k: int) -> np.ndarray:
    P = np.zeros((dim, dim), dtype=np.complex128)
    P[k, k] = 1.0
    return P
