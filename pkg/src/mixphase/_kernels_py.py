"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def cumulative_products(steps, start):
    """out[0] = start, out[j + 1] = steps[j] @ out[j]."""
    J, n = steps.shape[0], steps.shape[1]
    out = np.empty((J + 1, n, n), dtype=np.complex128)
    out[0] = start
    for j in range(J):
        np.matmul(steps[j], out[j], out=out[j + 1])
    return out


def node_expectations(unitaries, generators, vectors):
    """out[j, l] = Re <U_j v_l | H_j | U_j v_l> for each interval j."""
    J = generators.shape[0]
    psi = unitaries[:J] @ vectors
    return np.einsum("jal,jal->jl", psi.conj(), generators @ psi).real


def evolve_vector(steps, psi0):
    J, n = steps.shape[0], steps.shape[1]
    out = np.empty((J + 1, n), dtype=np.complex128)
    out[0] = psi0
    for j in range(J):
        np.matmul(steps[j], out[j], out=out[j + 1])
    return out
