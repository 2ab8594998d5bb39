"""Closed-form reference models and random instance generators."""
from __future__ import annotations

import numpy as np

from .numkernel import PAULI
from .paths import DecompositionPath, path_from_drive, path_from_hamiltonians
from .states import Decomposition, DensityOperator, haar_unitary, random_hermitian

SIGMA = (PAULI["X"], PAULI["Y"], PAULI["Z"])


def bloch_operator(n) -> np.ndarray:
    return sum(c * s for c, s in zip(n, SIGMA))


def rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def cone_state(r: float, cos_theta: float) -> DensityOperator:
    """Qubit with Bloch vector of length ``r`` at polar angle theta in the x-z plane."""
    s = np.sqrt(max(0.0, 1.0 - cos_theta ** 2))
    return DensityOperator.from_bloch((r * s, 0.0, r * cos_theta))


def cone_solid_angle(cos_theta: float) -> float:
    return 2 * np.pi * (1 - cos_theta)


def cone_loop_amplitude(r: float, cos_theta: float) -> complex:
    """Geometric amplitude of one closed precession about z: cos(O/2) - i r sin(O/2)."""
    half = 0.5 * cone_solid_angle(cos_theta)
    return complex(np.cos(half), -r * np.sin(half))


def cone_loop_phase(r: float, cos_theta: float) -> float:
    """-arctan(r tan(Omega/2)), continued through Omega = pi via the argument."""
    return float(np.angle(cone_loop_amplitude(r, cos_theta)))


def cone_loop_path(cos_theta: float, steps: int, tau: float = 1.0, spin: float = 3.0):
    """One precession loop about z with a smoothstep rate.

    ``spin`` adds a rotation about the instantaneous Bloch axis of the cone
    state. It is a pure gauge, so the continuum geometric phase is that of
    the bare loop, but it makes the drive non-commuting and the midpoint
    discretization error visible at second order.
    """
    s_theta = np.sqrt(max(0.0, 1.0 - cos_theta ** 2))
    axis = bloch_operator((s_theta, 0.0, cos_theta))

    def hamiltonian(t):
        s = t / tau
        phi = 2 * np.pi * (3 * s * s - 2 * s ** 3)
        phi_rate = 12 * np.pi * s * (1 - s) / tau
        R = rz(phi)
        return (0.5 * phi_rate * PAULI["Z"]
                + 0.5 * spin * np.cos(np.pi * s) * (R @ axis @ R.conj().T))

    return path_from_drive(hamiltonian, tau, steps)


def precession_path(omega: float = 1.0, loops: float = 1.0, steps_per_unit_time: int = 1000):
    """Uniform precession about z, H = (omega / 2) sigma_z, for ``loops`` turns."""
    return path_from_hamiltonians([(0.5 * omega * PAULI["Z"], loops * 2 * np.pi / omega)],
                                  steps_per_unit_time=steps_per_unit_time)


def random_segment_path(N: int, rng: np.random.Generator, segments: int = 2,
                        duration: float = 1.0, steps_per_unit_time: int = 1000,
                        scale: float = 1.0):
    segs = [(random_hermitian(N, rng, scale), duration / segments) for _ in range(segments)]
    return path_from_hamiltonians(segs, steps_per_unit_time=steps_per_unit_time)


def random_smooth_path(N: int, rng: np.random.Generator, steps: int, duration: float = 1.0,
                       scale: float = 1.0):
    """Path driven by H(t) = A + cos(w t) B + sin(w' t) C with random Hermitian A, B, C."""
    A, B, C = (random_hermitian(N, rng, scale) for _ in range(3))
    w1, w2 = rng.uniform(1.0, 4.0, size=2)
    return path_from_drive(lambda t: A + np.cos(w1 * t) * B + np.sin(w2 * t) * C,
                           duration, steps)


def random_decomposition_path(d: Decomposition, rng: np.random.Generator,
                              shared: bool = False, **kw) -> DecompositionPath:
    if shared:
        return DecompositionPath.shared(d, random_segment_path(d.dim, rng, **kw))
    return DecompositionPath(d, tuple(random_segment_path(d.dim, rng, **kw) for _ in range(d.M)))


def common_basis_decomposition(N: int, M: int, rng: np.random.Generator,
                               min_gap: float = 1e-2) -> Decomposition:
    """Components sharing one random eigenbasis; the mixture stays nondegenerate."""
    B = haar_unitary(N, rng)
    while True:
        lam = rng.dirichlet(np.ones(M)) if M > 1 else np.ones(1)
        spectra = [np.sort(rng.dirichlet(np.ones(N)))[::-1] for _ in range(M)]
        if min(lam) < 1e-3 or any(np.min(-np.diff(w)) < min_gap for w in spectra):
            continue
        # Shuffle each spectrum so the components disagree on eigenvalue order.
        shuffled = [w[rng.permutation(N)] for w in spectra]
        mixed = sum(l * w for l, w in zip(lam, shuffled))
        if np.min(np.diff(np.sort(mixed))) < min_gap:
            continue
        comps = [(B * w) @ B.conj().T for w in shuffled]
        return Decomposition(lam, comps)


def phase_damping_paths(duration: float = 1.0, strength: float = np.pi / 2,
                        steps_per_unit_time: int = 1000):
    """Kraus unitaries of a dephasing channel: identity and a sigma_z rotation."""
    seg = [(np.zeros((2, 2)), duration)]
    flip = [(strength / duration * PAULI["Z"], duration)]
    return (path_from_hamiltonians(seg, steps_per_unit_time=steps_per_unit_time),
            path_from_hamiltonians(flip, steps_per_unit_time=steps_per_unit_time))
