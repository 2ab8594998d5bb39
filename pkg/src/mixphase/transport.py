"""Parallel transport of decomposition paths and admissible gauges.

A gauge right-multiplies each component path, ``U_k -> U_k V_k``. It leaves
the path of decompositions unchanged when every ``V_k(t)`` is diagonal in
the eigenbasis of ``rho_k``.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .paths import DecompositionPath, connections, diagonal_phase_path, gauge_compose


def _bases(dp: DecompositionPath):
    return [rho.eigensystem(nondegenerate=True).vectors for rho in dp.base.components]


def transport_residuals(dp: DecompositionPath) -> np.ndarray:
    """(M, N) array of max_j |<k_l|U_k^dagger dU_k/dt|k_l>| over the grid."""
    out = np.zeros((dp.M, dp.base.dim))
    for k, (B, path) in enumerate(zip(_bases(dp), dp.component_paths)):
        c = connections(path, B)
        if len(c):
            out[k] = np.abs(c).max(axis=0)
    return out


def counter_rotation(path, basis):
    """Diagonal gauge cancelling the connection of ``path`` along ``basis``.

    Phases are minus the imaginary part of the integrated connection, which
    keeps the gauge unitary even when finite differences leave a real part.
    """
    c = connections(path, basis)
    acc = np.zeros((path.intervals + 1, basis.shape[1]))
    acc[1:] = np.cumsum(c.imag * path.dts[:, None], axis=0)
    return diagonal_phase_path(path.times, basis, -acc)


def parallelize(dp: DecompositionPath) -> DecompositionPath:
    """Gauge-fix every component so the parallel-transport conditions hold."""
    paths = tuple(gauge_compose(p, counter_rotation(p, B))
                  for B, p in zip(_bases(dp), dp.component_paths))
    return DecompositionPath(dp.base, paths)


def admissible_gauge(d, times, phase_profiles):
    """One diagonal gauge path per component from sampled phase profiles.

    ``phase_profiles[k]`` has shape (len(times), N); column ``l`` is the
    phase applied to the ``l``-th eigenvector of ``rho_k``.
    """
    profiles = np.asarray(phase_profiles, dtype=float)
    if profiles.shape[0] != d.M:
        raise DimensionMismatch(f"{profiles.shape[0]} profiles for {d.M} components")
    return [diagonal_phase_path(times, rho.eigensystem(nondegenerate=True).vectors, prof)
            for rho, prof in zip(d.components, profiles)]


def random_phase_profiles(M: int, N: int, times, rng: np.random.Generator,
                          scale: float = 3.0) -> np.ndarray:
    """Smooth random profiles vanishing at t = 0, shape (M, len(times), N)."""
    t = np.asarray(times, dtype=float)
    tau = t[-1] if t[-1] > 0 else 1.0
    a, b, c = (scale * rng.standard_normal((3, M, 1, N)))
    w = 2 * np.pi * rng.uniform(0.2, 2.0, size=(M, 1, N)) / tau
    s = t[None, :, None]
    return a * np.sin(w * s) + b * (1 - np.cos(0.5 * w * s)) + c * s / tau


def apply_gauge(dp: DecompositionPath, gauges) -> DecompositionPath:
    if len(gauges) != dp.M:
        raise DimensionMismatch(f"{len(gauges)} gauges for {dp.M} components")
    return DecompositionPath(dp.base, tuple(gauge_compose(p, g)
                                            for p, g in zip(dp.component_paths, gauges)))


def commutator_residual(d, gauges) -> float:
    """max over k and nodes of max|[rho_k, V_k(t_j)]|."""
    worst = 0.0
    for rho, g in zip(d.components, gauges):
        R = rho.matrix
        C = R @ g.unitaries - g.unitaries @ R
        worst = max(worst, float(np.abs(C).max()))
    return worst


def orbit_deviation(dp: DecompositionPath, other: DecompositionPath) -> float:
    """max |U_k rho_k U_k^dagger - U'_k rho_k U'_k^dagger| over components and nodes."""
    worst = 0.0
    for rho, p, q in zip(dp.base.components, dp.component_paths, other.component_paths):
        A = p.unitaries @ rho.matrix @ np.conj(np.swapaxes(p.unitaries, 1, 2))
        B = q.unitaries @ rho.matrix @ np.conj(np.swapaxes(q.unitaries, 1, 2))
        worst = max(worst, float(np.abs(A - B).max()))
    return worst
