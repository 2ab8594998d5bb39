"""Discretized unitary paths and the connection coefficients along them.

A :class:`UnitaryPath` stores the unitaries ``U(t_j)`` on a time grid
starting at ``U(0) = I``. Paths built from Hamiltonians also record the
generator ``H_j`` of each interval, ``U(t_{j+1}) = exp(-i H_j dt_j) U(t_j)``.
Generator data make the connection ``<v|U^dagger dU/dt|v>`` exact; without
it a first-order forward difference is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _core
from . import numkernel as nk
from .errors import DimensionMismatch, GridMismatch, IndexOutOfRange, InvalidPath

STEPS_PER_UNIT_TIME = 1000
UNITARITY_TOL = 1e-8
STEP_TOL = 1e-9


class UnitaryPath:
    """Unitaries on a time grid ``0 = t_0 < ... < t_J``.

    ``generators`` are lab-frame Hamiltonians per interval. ``body_generators``
    are Hermitian ``G_j`` with ``U^dagger dU/dt = -i G_j`` just after ``t_j``;
    they are derived from ``generators`` when those exist and are the only
    rate information kept for composite paths.
    """

    __slots__ = ("times", "unitaries", "generators", "_body")

    def __init__(self, times, unitaries, generators=None, body_generators=None,
                 check_steps: bool = True):
        times = np.array(times, dtype=float)
        U = np.array(unitaries, dtype=np.complex128)
        if times.ndim != 1 or len(times) < 1 or times[0] != 0.0:
            raise InvalidPath("time grid must be one-dimensional and start at 0")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise InvalidPath("time grid must be strictly increasing")
        if U.ndim != 3 or U.shape[0] != len(times) or U.shape[1] != U.shape[2]:
            raise DimensionMismatch(f"unitaries of shape {U.shape} do not match grid")
        n = U.shape[1]
        if not np.array_equal(U[0], np.eye(n)):
            raise InvalidPath("U(t_0) must be the identity")
        res = _stack_unitarity(U)
        if res > UNITARITY_TOL:
            raise InvalidPath(f"unitarity residual {res:.3e} exceeds {UNITARITY_TOL:g}")
        J = len(times) - 1
        for name, G in (("generators", generators), ("body_generators", body_generators)):
            if G is not None and np.shape(G) != (J, n, n):
                raise DimensionMismatch(f"{name} must have shape {(J, n, n)}")
        if generators is not None:
            generators = np.array(generators, dtype=np.complex128)
            if check_steps and J:
                steps = nk.step_unitaries(generators, np.diff(times))
                err = float(np.max(np.abs(steps @ U[:-1] - U[1:])))
                if err > STEP_TOL:
                    raise InvalidPath(f"step relation violated by {err:.3e}")
            generators.setflags(write=False)
        if body_generators is not None:
            body_generators = np.array(body_generators, dtype=np.complex128)
            body_generators.setflags(write=False)
        times.setflags(write=False)
        U.setflags(write=False)
        self.times = times
        self.unitaries = U
        self.generators = generators
        self._body = body_generators

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    @property
    def intervals(self) -> int:
        return len(self.times) - 1

    @property
    def dts(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    @property
    def endpoint(self) -> np.ndarray:
        return self.unitaries[-1]

    @property
    def has_rates(self) -> bool:
        return self.generators is not None or self._body is not None

    @property
    def body_generators(self):
        """U_j^dagger H_j U_j per interval, or None for finite-difference paths."""
        if self._body is None and self.generators is not None:
            U = self.unitaries[:-1]
            self._body = np.conj(np.swapaxes(U, 1, 2)) @ self.generators @ U
            self._body.setflags(write=False)
        return self._body

    def __len__(self):
        return len(self.times)

    def __repr__(self):
        mode = "generator" if self.has_rates else "finite-difference"
        return (f"UnitaryPath(dim={self.dim}, intervals={self.intervals}, "
                f"tau={self.duration:.6g}, {mode})")


def _stack_unitarity(U) -> float:
    eye = np.eye(U.shape[1])
    return float(np.max(np.abs(np.conj(np.swapaxes(U, 1, 2)) @ U - eye)))


def identity_path(dim: int, times) -> UnitaryPath:
    times = np.asarray(times, dtype=float)
    J = len(times) - 1
    U = np.broadcast_to(np.eye(dim, dtype=np.complex128), (J + 1, dim, dim))
    return UnitaryPath(times, U, generators=np.zeros((J, dim, dim), dtype=np.complex128),
                       check_steps=False)


def uniform_grid(duration: float, steps: int) -> np.ndarray:
    return np.linspace(0.0, duration, steps + 1)


def steps_for(duration: float, steps_per_unit_time: int = STEPS_PER_UNIT_TIME) -> int:
    return max(1, int(math.ceil(duration * steps_per_unit_time - 1e-9)))


def path_from_hamiltonians(segments: Sequence, steps_per_segment: int | None = None,
                           steps_per_unit_time: int = STEPS_PER_UNIT_TIME) -> UnitaryPath:
    """Piecewise-constant evolution through ``(H, duration)`` segments.

    Each segment is split into ``steps_per_segment`` equal steps, or into
    ``ceil(duration * steps_per_unit_time)`` steps when that is None.
    """
    if not segments:
        raise InvalidPath("need at least one segment")
    if steps_per_segment is not None and steps_per_segment < 1:
        raise ValueError("steps_per_segment must be >= 1")
    times, gens, steps = [np.zeros(1)], [], []
    t = 0.0
    for H, duration in segments:
        H = nk.as_matrix(H)
        if not duration > 0:
            raise InvalidPath(f"segment duration must be positive, got {duration}")
        n = steps_per_segment or steps_for(duration, steps_per_unit_time)
        dt = duration / n
        S = nk.step_unitary(H, dt)
        times.append(t + dt * np.arange(1, n + 1))
        gens.append(np.broadcast_to(H, (n,) + H.shape))
        steps.append(np.broadcast_to(S, (n,) + S.shape))
        t += duration
    dims = {g.shape[1] for g in gens}
    if len(dims) != 1:
        raise DimensionMismatch("segment Hamiltonians differ in dimension")
    times = np.concatenate(times)
    U = _core.cumulative_products(np.concatenate(steps))
    return UnitaryPath(times, U, generators=np.concatenate(gens), check_steps=False)


def path_from_drive(hamiltonian: Callable[[float], np.ndarray], duration: float,
                    steps: int) -> UnitaryPath:
    """Evolution under a time-dependent Hamiltonian, sampled at interval midpoints.

    The exponential midpoint rule is second order in the step size.
    """
    if not duration > 0 or steps < 1:
        raise InvalidPath("need positive duration and at least one step")
    times = uniform_grid(duration, steps)
    mids = 0.5 * (times[:-1] + times[1:])
    gens = np.array([nk.as_matrix(hamiltonian(t)) for t in mids])
    S = nk.step_unitaries(gens, np.diff(times))
    U = _core.cumulative_products(S)
    return UnitaryPath(times, U, generators=gens, check_steps=False)


def _check_vectors(path: UnitaryPath, vecs) -> np.ndarray:
    V = np.asarray(vecs, dtype=np.complex128)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[0] != path.dim:
        raise DimensionMismatch(f"vector length {V.shape[0]} != path dimension {path.dim}")
    norms = np.linalg.norm(V, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise ValueError("vectors must have unit norm")
    return V


def connections(path: UnitaryPath, vecs) -> np.ndarray:
    """Connection ``<v|U^dagger dU/dt|v>`` on every interval, shape (J, L).

    Columns of ``vecs`` are the vectors ``v``.
    """
    V = _check_vectors(path, vecs)
    if path.intervals == 0:
        return np.zeros((0, V.shape[1]), dtype=np.complex128)
    if path._body is None and path.generators is not None:
        return -1j * _core.node_expectations(path.unitaries, path.generators, V)
    G = path.body_generators
    if G is not None:
        return -1j * np.einsum("al,jab,bl->jl", V.conj(), G, V).real
    U = path.unitaries
    psi = U @ V
    ov = np.einsum("jal,jal->jl", psi[:-1].conj(), psi[1:] - psi[:-1])
    return ov / path.dts[:, None]


def connection(path: UnitaryPath, v, j: int) -> complex:
    """Connection on interval ``j`` (evaluated at its left node)."""
    if not 0 <= j < path.intervals:
        raise IndexOutOfRange(f"interval {j} outside 0..{path.intervals - 1}")
    v = _check_vectors(path, v)[:, 0]
    G = path.body_generators
    if G is not None:
        return complex(-1j * np.real(np.vdot(v, G[j] @ v)))
    U0, U1 = path.unitaries[j], path.unitaries[j + 1]
    return complex(np.vdot(U0 @ v, (U1 - U0) @ v) / path.dts[j])


def accumulated_phases(path: UnitaryPath, vecs) -> np.ndarray:
    """Integrated connection ``sum_j c_j dt_j`` per vector."""
    return connections(path, vecs).T @ path.dts


def accumulated_phase_factor(path: UnitaryPath, v) -> complex:
    """exp(-integral of <v|U^dagger dU/dt|v> dt) along the path."""
    return complex(np.exp(-accumulated_phases(path, v)[0]))


def gauge_compose(path: UnitaryPath, gauge: UnitaryPath) -> UnitaryPath:
    """Nodewise ``U(t_j) V(t_j)``.

    Lab-frame generators are not reconstructed; body-frame rates are kept
    when both inputs carry them, ``G = V^dagger G_U V + G_V``.
    """
    if path.dim != gauge.dim:
        raise DimensionMismatch("path and gauge differ in dimension")
    if path.times.shape != gauge.times.shape or not np.allclose(
            path.times, gauge.times, rtol=0, atol=1e-12):
        raise GridMismatch("path and gauge must share the time grid")
    if not np.array_equal(gauge.unitaries[0], np.eye(gauge.dim)):
        raise InvalidPath("gauge must start at the identity")
    U = path.unitaries @ gauge.unitaries
    body = None
    if path.has_rates and gauge.has_rates:
        V = gauge.unitaries[:-1]
        body = (np.conj(np.swapaxes(V, 1, 2)) @ path.body_generators @ V
                + gauge.body_generators)
    return UnitaryPath(path.times, U, body_generators=body, check_steps=False)


def diagonal_phase_path(times, basis, phases) -> UnitaryPath:
    """V(t_j) = sum_l exp(i theta_l(t_j)) |b_l><b_l| with linear phases between nodes.

    ``phases`` has shape (J + 1, N) and must vanish at ``t_0``. The result
    is a Hamiltonian path with generator ``-sum_l theta_l' |b_l><b_l|``.
    """
    times = np.asarray(times, dtype=float)
    theta = np.asarray(phases, dtype=float)
    B = np.asarray(basis, dtype=np.complex128)
    if theta.shape != (len(times), B.shape[1]):
        raise DimensionMismatch(f"phases must have shape {(len(times), B.shape[1])}")
    if np.any(theta[0] != 0):
        raise InvalidPath("phase profiles must vanish at t = 0")
    U = np.einsum("al,jl,bl->jab", B, np.exp(1j * theta), B.conj())
    U[0] = np.eye(B.shape[0])
    rates = np.diff(theta, axis=0) / np.diff(times)[:, None]
    gens = np.einsum("al,jl,bl->jab", B, -rates, B.conj())
    return UnitaryPath(times, U, generators=gens, check_steps=False)


@dataclass(frozen=True)
class DecompositionPath:
    """One unitary path per decomposition component on a shared grid."""

    base: object
    component_paths: tuple

    def __post_init__(self):
        paths = tuple(self.component_paths)
        object.__setattr__(self, "component_paths", paths)
        if len(paths) != self.base.M:
            raise DimensionMismatch(
                f"{len(paths)} paths for {self.base.M} decomposition components")
        t0 = paths[0].times
        for p in paths:
            if p.dim != self.base.dim:
                raise DimensionMismatch("path dimension differs from the system dimension")
            if p.times.shape != t0.shape or not np.allclose(p.times, t0, rtol=0, atol=1e-12):
                raise GridMismatch("component paths must share the time grid")

    @classmethod
    def shared(cls, base, path: UnitaryPath) -> "DecompositionPath":
        return cls(base, (path,) * base.M)

    @property
    def times(self) -> np.ndarray:
        return self.component_paths[0].times

    @property
    def M(self) -> int:
        return len(self.component_paths)

    def endpoints(self):
        return [p.endpoint for p in self.component_paths]
