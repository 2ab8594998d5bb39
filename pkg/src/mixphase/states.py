"""Density operators, decompositions and their system-ancilla embeddings."""
from __future__ import annotations

import threading
from typing import Sequence

import numpy as np

from . import numkernel as nk
from .errors import DimensionMismatch, InvalidState, MalformedEmbedding

STATE_TOL = 1e-10
WEIGHT_FLOOR = 1e-12
BLOCK_TOL = 1e-12


class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace matrix.

    The spectrum is computed on first use and cached; concurrent first
    access computes it once.
    """

    __slots__ = ("_matrix", "_spectrum", "_lock")

    def __init__(self, matrix, tol: float = STATE_TOL):
        M = nk.as_matrix(matrix)
        herm = nk.hermiticity_residual(M)
        if herm > tol:
            raise InvalidState(f"not Hermitian (residual {herm:.3e})")
        M = 0.5 * (M + M.conj().T)
        tr = np.trace(M).real
        if abs(tr - 1.0) > tol:
            raise InvalidState(f"trace {tr!r} differs from 1")
        lo = np.linalg.eigvalsh(M)[0]
        if lo < -tol:
            raise InvalidState(f"negative eigenvalue {lo:.3e}")
        M.setflags(write=False)
        self._matrix = M
        self._spectrum = None
        self._lock = threading.Lock()

    @classmethod
    def pure(cls, psi) -> "DensityOperator":
        psi = np.asarray(psi, dtype=np.complex128).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def from_bloch(cls, r) -> "DensityOperator":
        x, y, z = (float(c) for c in r)
        return cls(0.5 * (nk.PAULI["I"] + x * nk.PAULI["X"] + y * nk.PAULI["Y"]
                          + z * nk.PAULI["Z"]))

    @classmethod
    def diagonal(cls, weights) -> "DensityOperator":
        return cls(np.diag(np.asarray(weights, dtype=np.complex128)))

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def spectrum(self) -> nk.EigenSystem:
        if self._spectrum is None:
            with self._lock:
                if self._spectrum is None:
                    self._spectrum = nk.eigh_hermitian(self._matrix)
        return self._spectrum

    def eigensystem(self, nondegenerate: bool = True) -> nk.EigenSystem:
        """Cached spectrum, optionally enforcing a nondegenerate spectrum."""
        es = self.spectrum
        if nondegenerate and es.min_gap() < nk.DEGENERACY_GAP:
            raise nk.DegenerateSpectrum(
                f"density operator has eigenvalue gap {es.min_gap():.3e}")
        return es

    def purity(self) -> float:
        return float(np.real(np.trace(self._matrix @ self._matrix)))

    def __repr__(self):
        return f"DensityOperator(dim={self.dim}, purity={self.purity():.6g})"


def _as_density(x) -> DensityOperator:
    return x if isinstance(x, DensityOperator) else DensityOperator(x)


class Decomposition:
    """Weights ``lambda_k`` and components ``rho_k`` on a shared system space."""

    __slots__ = ("weights", "components")

    def __init__(self, weights: Sequence[float], components: Sequence, tol: float = STATE_TOL):
        w = np.array(weights, dtype=float).ravel()
        comps = tuple(_as_density(c) for c in components)
        if len(w) != len(comps) or len(w) == 0:
            raise InvalidState("need one weight per component and at least one component")
        if np.any(w < WEIGHT_FLOOR):
            raise InvalidState(f"weights must exceed {WEIGHT_FLOOR:g}; got {w.min():.3e}")
        if abs(w.sum() - 1.0) > tol:
            raise InvalidState(f"weights sum to {w.sum()!r}")
        if len({c.dim for c in comps}) != 1:
            raise DimensionMismatch("components differ in dimension")
        w.setflags(write=False)
        self.weights = w
        self.components = comps

    @property
    def M(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def __iter__(self):
        return iter(zip(self.weights, self.components))

    def __repr__(self):
        return f"Decomposition(N={self.dim}, M={self.M}, weights={self.weights.tolist()})"


def mix(d: Decomposition) -> DensityOperator:
    """The mixed state sum_k lambda_k rho_k."""
    out = np.zeros((d.dim, d.dim), dtype=np.complex128)
    for lam, rho in d:
        out += lam * rho.matrix
    return DensityOperator(out)


class EmbeddedState:
    """Separable system (x) ancilla state, ancilla flags in the standard basis.

    The system factor comes first in the tensor ordering.
    """

    __slots__ = ("matrix", "system_dim", "ancilla_dim")

    def __init__(self, matrix, system_dim: int, ancilla_dim: int):
        M = nk.as_matrix(matrix)
        if M.shape[0] != system_dim * ancilla_dim:
            raise DimensionMismatch(
                f"size {M.shape[0]} != {system_dim} x {ancilla_dim}")
        M.setflags(write=False)
        self.matrix = M
        self.system_dim = int(system_dim)
        self.ancilla_dim = int(ancilla_dim)

    def block(self, k: int, kk: int) -> np.ndarray:
        N, M = self.system_dim, self.ancilla_dim
        return self.matrix.reshape(N, M, N, M)[:, k, :, kk]

    def offdiagonal_residual(self) -> float:
        N, M = self.system_dim, self.ancilla_dim
        if M == 1:
            return 0.0
        T = np.abs(self.matrix.reshape(N, M, N, M))
        off = ~np.eye(M, dtype=bool)
        return float(np.transpose(T, (1, 3, 0, 2))[off].max())

    def flags(self, tol: float = BLOCK_TOL):
        """(weight, component matrix) per ancilla flag with nonzero weight."""
        res = self.offdiagonal_residual()
        if res > tol:
            raise MalformedEmbedding(f"off-diagonal ancilla blocks of size {res:.3e}")
        out = []
        for k in range(self.ancilla_dim):
            blk = self.block(k, k)
            lam = float(np.trace(blk).real)
            if lam > WEIGHT_FLOOR:
                out.append((lam, blk / lam))
        return out

    def system_marginal(self) -> np.ndarray:
        return nk.partial_trace(self.matrix, [self.system_dim, self.ancilla_dim], [0])

    def ancilla_marginal(self) -> np.ndarray:
        return nk.partial_trace(self.matrix, [self.system_dim, self.ancilla_dim], [1])

    def to_decomposition(self) -> Decomposition:
        flags = self.flags()
        return Decomposition([f[0] for f in flags], [f[1] for f in flags],
                             tol=1e-8)


def embed(d: Decomposition) -> EmbeddedState:
    """sum_k lambda_k rho_k (x) |k><k| on the system (x) ancilla space."""
    N, M = d.dim, d.M
    out = np.zeros((N * M, N * M), dtype=np.complex128)
    for k, (lam, rho) in enumerate(d):
        out += lam * np.kron(rho.matrix, nk.basis_projector(M, k))
    return EmbeddedState(out, N, M)


def conjugate_ancilla(s: EmbeddedState, U) -> EmbeddedState:
    """(I (x) U) s (I (x) U^dagger)."""
    W = np.kron(np.eye(s.system_dim), np.asarray(U, dtype=np.complex128))
    return EmbeddedState(W @ s.matrix @ W.conj().T, s.system_dim, s.ancilla_dim)


def equivalent(a: EmbeddedState, b: EmbeddedState, tol: float = 1e-9) -> bool:
    """Whether two embeddings describe the same decomposition.

    Compares the multisets of (weight, component) pairs up to a
    permutation of flags; weights within ``tol``, components within ``tol``
    in max-entry distance.
    """
    if (a.system_dim, a.ancilla_dim) != (b.system_dim, b.ancilla_dim):
        raise DimensionMismatch("embeddings differ in dimension")
    fa = sorted(a.flags(), key=lambda f: -f[0])
    fb = b.flags()
    if len(fa) != len(fb):
        return False

    def close(x, y):
        return abs(x[0] - y[0]) <= tol and np.max(np.abs(x[1] - y[1])) <= tol

    candidates = [[j for j, y in enumerate(fb) if close(x, y)] for x in fa]
    used = [False] * len(fb)

    def search(i):
        if i == len(fa):
            return True
        for j in candidates[i]:
            if not used[j]:
                used[j] = True
                if search(i + 1):
                    return True
                used[j] = False
        return False

    return search(0)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_spectrum(n: int, rng: np.random.Generator, min_gap: float = 1e-3) -> np.ndarray:
    """Flat-simplex eigenvalues, resampled until adjacent gaps reach ``min_gap``."""
    while True:
        w = np.sort(rng.dirichlet(np.ones(n)))[::-1]
        if n == 1 or np.min(-np.diff(w)) >= min_gap:
            return w


def random_density(n: int, rng: np.random.Generator, min_gap: float = 1e-3) -> DensityOperator:
    w = random_spectrum(n, rng, min_gap)
    U = haar_unitary(n, rng)
    return DensityOperator((U * w) @ U.conj().T)


def random_decomposition(N: int, M: int, seed=None) -> Decomposition:
    """Reproducible random decomposition with nondegenerate components."""
    if N < 2 or M < 1:
        raise ValueError("need N >= 2 and M >= 1")
    rng = np.random.default_rng(seed)
    if M == 1:
        weights = np.ones(1)
    else:
        while True:
            weights = rng.dirichlet(np.ones(M))
            if weights.min() > 1e-6:
                break
        weights = weights / weights.sum()
    return Decomposition(weights, [random_density(N, rng) for _ in range(M)])


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (Z + Z.conj().T)
