"""Brute-force checks in the enlarged system (x) ancilla-a (x) ancilla-b space.

Everything here builds the full tensor-product objects explicitly and
evolves them with ``scipy.linalg.expm``, so it shares no arithmetic path
with the reduced formulas in :mod:`mixphase.phases`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import numkernel as nk
from .errors import DimensionMismatch, MissingGenerator
from .paths import DecompositionPath
from .phases import PhaseResult, _finish
from .states import Decomposition, EmbeddedState, embed, haar_unitary

MAX_LIFT_DIM = 256


@dataclass(frozen=True)
class LiftedState:
    """Pure state on system (x) ancilla-a (x) ancilla-b.

    Ancilla-b has dimension N*M, one flag per (component, eigenvector) pair
    with index ``k * N + l``.
    """

    vector: np.ndarray
    system_dim: int
    ancilla_dim: int

    @property
    def flag_dim(self) -> int:
        return self.system_dim * self.ancilla_dim

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def project(self) -> EmbeddedState:
        """Tr_b |Psi><Psi| as a system (x) ancilla-a state."""
        NM = self.system_dim * self.ancilla_dim
        X = self.vector.reshape(NM, self.flag_dim)
        return EmbeddedState(X @ X.conj().T, self.system_dim, self.ancilla_dim)


def _check_size(N: int, M: int, max_dim: int):
    if N * M * N * M > max_dim:
        raise ValueError(f"lifted dimension {N * M * N * M} exceeds cap {max_dim}")


def lift(d: Decomposition, max_dim: int = MAX_LIFT_DIM) -> LiftedState:
    """Purification sum_{k,l} sqrt(lambda_k w_l^k) |k_l>|a_k>|b_kl>."""
    N, M = d.dim, d.M
    _check_size(N, M, max_dim)
    psi = np.zeros((N, M, N * M), dtype=np.complex128)
    for k, (lam, rho) in enumerate(d):
        es = rho.eigensystem(nondegenerate=True)
        for l in range(N):
            w = max(es.values[l], 0.0)
            psi[:, k, k * N + l] = np.sqrt(lam * w) * es.vectors[:, l]
    return LiftedState(psi.ravel(), N, M)


def conditional_unitary(unitaries) -> np.ndarray:
    """sum_k U_k (x) |a_k><a_k| on system (x) ancilla-a."""
    M = len(unitaries)
    return sum(np.kron(U, nk.basis_projector(M, k)) for k, U in enumerate(unitaries))


def evolve_lift(psi0: LiftedState, dp: DecompositionPath, t_index: int) -> LiftedState:
    """Apply sum_k U_k(t) (x) |a_k><a_k| (x) I_b at grid node ``t_index``."""
    if (psi0.system_dim, psi0.ancilla_dim) != (dp.base.dim, dp.M):
        raise DimensionMismatch("lifted state does not match the decomposition path")
    U_sa = conditional_unitary([p.unitaries[t_index] for p in dp.component_paths])
    U_sab = np.kron(U_sa, np.eye(psi0.flag_dim))
    return LiftedState(U_sab @ psi0.vector, psi0.system_dim, psi0.ancilla_dim)


def evolved_embedding(dp: DecompositionPath, t_index: int) -> EmbeddedState:
    """U_sa(t) rho_sa(0) U_sa^dagger(t) built on system (x) ancilla-a."""
    rho = embed(dp.base).matrix
    U = conditional_unitary([p.unitaries[t_index] for p in dp.component_paths])
    return EmbeddedState(U @ rho @ U.conj().T, dp.base.dim, dp.M)


def enlarged_relative_phase(d: Decomposition, dp: DecompositionPath) -> PhaseResult:
    """arg Tr(rho_sa(0) U_sa(tau)) from explicit N*M matrices."""
    if d.dim != dp.base.dim or d.M != dp.M:
        raise DimensionMismatch("decomposition does not match the path")
    rho = embed(d).matrix
    U = conditional_unitary(dp.endpoints())
    return _finish(np.array([np.trace(rho @ U)]), "enlarged relative phase")


def _flag_projector_diag(N: int, M: int) -> np.ndarray:
    """Flag index of every basis state of the lifted space."""
    return np.tile(np.arange(N * M), N * M)


def enlarged_geometric_phase(dp: DecompositionPath, max_dim: int = MAX_LIFT_DIM) -> PhaseResult:
    """Holonomy of the lifted pure-state path with flag-resolved dynamical phases removed.

    The lifted state is evolved step by step under
    ``H_sab = sum_k H_k (x) |a_k><a_k| (x) I_b``; the dynamical phase of each
    flag sector is the time integral of its normalized energy. Requires
    lab-frame generators on every component path.
    """
    N, M = dp.base.dim, dp.M
    _check_size(N, M, max_dim)
    if any(p.generators is None for p in dp.component_paths):
        raise MissingGenerator("the enlarged-space oracle needs Hamiltonian paths")
    psi0 = lift(dp.base, max_dim).vector
    flags = _flag_projector_diag(N, M)
    eye_b = np.eye(N * M)
    dts = np.diff(dp.times)
    psi = psi0.copy()
    dyn = np.zeros(N * M)
    prev_key, step = None, None
    sector_w = np.bincount(flags, weights=np.abs(psi0) ** 2, minlength=N * M)
    live = sector_w > 0
    for j, dt in enumerate(dts):
        Hs = [p.generators[j] for p in dp.component_paths]
        H_sab = np.kron(conditional_unitary(Hs), eye_b)
        energy = np.bincount(flags, weights=np.real(psi.conj() * (H_sab @ psi)),
                             minlength=N * M)
        dyn[live] += energy[live] / sector_w[live] * dt
        key = (dt, tuple(h.tobytes() for h in Hs))
        if key != prev_key:
            step = expm(-1j * H_sab * dt)
            prev_key = key
        psi = step @ psi
    overlap = np.zeros(N * M, dtype=np.complex128)
    np.add.at(overlap, flags, psi0.conj() * psi)
    return _finish(overlap * np.exp(1j * dyn), "enlarged geometric phase")


def projection_residual(dp: DecompositionPath, t_index: int) -> float:
    """max|Tr_b |Psi(t)><Psi(t)| - U_sa rho_sa U_sa^dagger| at a node."""
    lifted = evolve_lift(lift(dp.base), dp, t_index).project().matrix
    return float(np.abs(lifted - evolved_embedding(dp, t_index).matrix).max())


def one_term_obstruction(d: Decomposition, seed: int = 0):
    """(lhs, rhs) purities of the ancilla marginals that a one-term correspondence would equate.

    lhs is the purity of Tr_s of the embedded decomposition; rhs that of a
    unitarily rotated single ancilla flag. lhs < 1 = rhs whenever two or more
    weights are nonzero.
    """
    a = embed(d).ancilla_marginal()
    lhs = float(np.real(np.trace(a @ a)))
    V = haar_unitary(d.M, np.random.default_rng(seed))
    flag = V @ nk.basis_projector(d.M, 0) @ V.conj().T
    rhs = float(np.real(np.trace(flag @ flag)))
    return lhs, rhs
