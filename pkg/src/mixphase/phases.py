"""Phase functionals for unitary, decomposition-dependent and Kraus evolutions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numkernel as nk
from .errors import DegenerateSpectrum, DimensionMismatch, UndefinedPhase
from .paths import DecompositionPath, UnitaryPath, accumulated_phases
from .states import Decomposition, DensityOperator

VISIBILITY_FLOOR = 1e-9


def principal(phase: float) -> float:
    """Map an angle into (-pi, pi]."""
    p = float(np.angle(np.exp(1j * phase)))
    return np.pi if p <= -np.pi else p


@dataclass(frozen=True)
class PhaseResult:
    """Argument and modulus of a sum of complex terms.

    ``terms`` keeps the individual contributions (indexed by eigenvector,
    component, or (component, eigenvector)) for diagnostics.
    """

    phase: float
    magnitude: float
    terms: np.ndarray = field(repr=False)
    defined: bool = True

    @classmethod
    def from_terms(cls, terms, floor: float = VISIBILITY_FLOOR) -> "PhaseResult":
        terms = np.asarray(terms, dtype=np.complex128)
        z = complex(terms.sum())
        mag = abs(z)
        if mag < floor:
            return cls(float("nan"), mag, terms, defined=False)
        return cls(principal(np.angle(z)), mag, terms)

    @property
    def amplitude(self) -> complex:
        return complex(self.terms.sum())


def _finish(terms, what: str) -> PhaseResult:
    res = PhaseResult.from_terms(terms)
    if not res.defined:
        raise UndefinedPhase(
            f"{what}: amplitude {res.magnitude:.3e} below floor {VISIBILITY_FLOOR:g}", res)
    return res


def _geometric_terms(rho: DensityOperator, path: UnitaryPath) -> np.ndarray:
    """w_l <l|U(tau)|l> exp(-integral <l|U^dagger dU/dt|l> dt) per eigenvector."""
    if rho.dim != path.dim:
        raise DimensionMismatch(f"state dimension {rho.dim} != path dimension {path.dim}")
    w, B = _weighted_eigenpairs(rho)
    diag = np.einsum("al,ab,bl->l", B.conj(), path.endpoint, B)
    return w * diag * np.exp(-accumulated_phases(path, B))


def _weighted_eigenpairs(rho: DensityOperator):
    """Eigenpairs with nonzero weight; these must be nondegenerate.

    Zero-weight eigenvectors drop out of every sum, so degeneracy among
    them (a pure state with N > 2, say) does not make the phase ambiguous.
    """
    es = rho.spectrum
    keep = es.values > nk.DEGENERACY_GAP
    gaps = -np.diff(es.values)
    if np.any(gaps[keep[:-1]] < nk.DEGENERACY_GAP):
        raise DegenerateSpectrum(
            f"weighted eigenvalues have gap {gaps[keep[:-1]].min():.3e}")
    return es.values[keep], es.vectors[:, keep]


def pancharatnam_phase(rho0: DensityOperator, U) -> PhaseResult:
    """Relative phase arg Tr(rho(0) U) between rho(0) and U rho(0) U^dagger."""
    U = nk.as_matrix(U)
    if U.shape[0] != rho0.dim:
        raise DimensionMismatch(f"unitary size {U.shape[0]} != state dimension {rho0.dim}")
    res = nk.unitarity_residual(U)
    if res > 1e-8:
        raise ValueError(f"U is not unitary (residual {res:.3e})")
    es = rho0.spectrum
    B = es.vectors
    terms = es.values * np.einsum("al,ab,bl->l", B.conj(), U, B)
    return _finish(terms, "Pancharatnam phase")


def mixed_geometric_phase(rho0: DensityOperator, path: UnitaryPath) -> PhaseResult:
    """Geometric phase of a unitarily evolving nondegenerate mixed state."""
    return _finish(_geometric_terms(rho0, path), "mixed-state geometric phase")


def decomposition_relative_phase(dp: DecompositionPath) -> PhaseResult:
    """arg sum_k lambda_k Tr(rho_k U_k(tau)); one term per component."""
    terms = np.array([lam * np.trace(rho.matrix @ p.endpoint)
                      for (lam, rho), p in zip(dp.base, dp.component_paths)])
    return _finish(terms, "decomposition relative phase")


def decomposition_geometric_phase(dp: DecompositionPath) -> PhaseResult:
    """Geometric phase of a path of decompositions; terms have shape (M, N)."""
    terms = np.array([lam * _geometric_terms(rho, p)
                      for (lam, rho), p in zip(dp.base, dp.component_paths)])
    return _finish(terms, "decomposition geometric phase")


def kraus_relative_phase(rho0: DensityOperator, lambda_k: float, path_k: UnitaryPath,
                         t_index: int):
    """(nu_k, Gamma_k) with nu_k exp(i Gamma_k) = sqrt(lambda_k) Tr(rho(0) U_k(t))."""
    if not 0 < lambda_k <= 1:
        raise ValueError("Kraus weight must lie in (0, 1]")
    tr = np.trace(rho0.matrix @ path_k.unitaries[t_index])
    if abs(tr) < VISIBILITY_FLOOR:
        raise UndefinedPhase(f"Tr(rho U_k) vanishes at node {t_index}")
    z = np.sqrt(lambda_k) * tr
    return float(abs(z)), principal(np.angle(z))


def kraus_relative_phase_series(rho0: DensityOperator, lambda_k: float,
                                path_k: UnitaryPath):
    """Magnitudes and phases at every node; phase is NaN where undefined."""
    tr = np.einsum("ab,jba->j", rho0.matrix, path_k.unitaries)
    mag = np.sqrt(lambda_k) * np.abs(tr)
    phase = np.where(np.abs(tr) < VISIBILITY_FLOOR, np.nan, np.angle(tr))
    phase = np.where(phase <= -np.pi, np.pi, phase)
    return mag, phase


def per_kraus_geometric_phase(rho0: DensityOperator, path_k: UnitaryPath) -> PhaseResult:
    """Geometric phase of rho(0) under the single unitary path of one Kraus term."""
    return mixed_geometric_phase(rho0, path_k)


def visibility(rho0: DensityOperator, path_k: UnitaryPath) -> float:
    """Modulus of the mixed-state geometric amplitude (interference contrast)."""
    return float(abs(_geometric_terms(rho0, path_k).sum()))


def cp_decomposition(rho0: DensityOperator, weights, paths) -> DecompositionPath:
    d = Decomposition(weights, [rho0] * len(paths))
    return DecompositionPath(d, tuple(paths))


def cp_geometric_phase(rho0: DensityOperator, weights, paths) -> PhaseResult:
    """Geometric phase of the CP map rho -> sum_k lambda_k U_k rho U_k^dagger."""
    return decomposition_geometric_phase(cp_decomposition(rho0, weights, paths))


def kraus_completeness_residual(weights, paths) -> float:
    """max over nodes of max|sum_k lambda_k U_k^dagger U_k - I|."""
    acc = None
    for lam, p in zip(weights, paths):
        U = p.unitaries
        term = lam * (np.conj(np.swapaxes(U, 1, 2)) @ U)
        acc = term if acc is None else acc + term
    return float(np.abs(acc - np.eye(acc.shape[1])).max())


def recombine(weights, r, gamma) -> PhaseResult:
    """arg sum_k lambda_k r_k exp(i gamma_k)."""
    weights, r, gamma = (np.asarray(x, dtype=float) for x in (weights, r, gamma))
    if not (weights.shape == r.shape == gamma.shape):
        raise DimensionMismatch("weights, visibilities and phases must have equal length")
    return _finish(weights * r * np.exp(1j * gamma), "recombined phase")


def phase_distance(a: float, b: float) -> float:
    """|a - b| modulo 2 pi, in [0, pi]."""
    return abs(float(np.angle(np.exp(1j * (a - b)))))
