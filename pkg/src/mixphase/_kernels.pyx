# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror ``_kernels_py``."""
import numpy as np


def cumulative_products(const double complex[:, :, ::1] steps,
                        const double complex[:, ::1] start):
    """out[0] = start, out[j + 1] = steps[j] @ out[j]."""
    cdef Py_ssize_t J = steps.shape[0]
    cdef Py_ssize_t n = steps.shape[1]
    cdef Py_ssize_t j, a, b, c
    cdef double complex acc
    out = np.empty((J + 1, n, n), dtype=np.complex128)
    cdef double complex[:, :, ::1] o = out
    for a in range(n):
        for b in range(n):
            o[0, a, b] = start[a, b]
    for j in range(J):
        for a in range(n):
            for b in range(n):
                acc = 0
                for c in range(n):
                    acc = acc + steps[j, a, c] * o[j, c, b]
                o[j + 1, a, b] = acc
    return out


def node_expectations(const double complex[:, :, ::1] unitaries,
                      const double complex[:, :, ::1] generators,
                      const double complex[:, ::1] vectors):
    """out[j, l] = Re <U_j v_l | H_j | U_j v_l> for each interval j."""
    cdef Py_ssize_t J = generators.shape[0]
    cdef Py_ssize_t n = generators.shape[1]
    cdef Py_ssize_t L = vectors.shape[1]
    cdef Py_ssize_t j, l, a, b
    cdef double complex acc, hpsi
    cdef double total
    out = np.empty((J, L), dtype=np.float64)
    cdef double[:, ::1] o = out
    psi_buf = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] psi = psi_buf
    for j in range(J):
        for l in range(L):
            for a in range(n):
                acc = 0
                for b in range(n):
                    acc = acc + unitaries[j, a, b] * vectors[b, l]
                psi[a] = acc
            total = 0.0
            for a in range(n):
                hpsi = 0
                for b in range(n):
                    hpsi = hpsi + generators[j, a, b] * psi[b]
                total = total + (psi[a].real * hpsi.real + psi[a].imag * hpsi.imag)
            o[j, l] = total
    return out


def evolve_vector(const double complex[:, :, ::1] steps,
                  const double complex[::1] psi0):
    """Trajectory of a state vector: out[0] = psi0, out[j + 1] = steps[j] @ out[j]."""
    cdef Py_ssize_t J = steps.shape[0]
    cdef Py_ssize_t n = steps.shape[1]
    cdef Py_ssize_t j, a, b
    cdef double complex acc
    out = np.empty((J + 1, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    for a in range(n):
        o[0, a] = psi0[a]
    for j in range(J):
        for a in range(n):
            acc = 0
            for b in range(n):
                acc = acc + steps[j, a, b] * o[j, b]
            o[j + 1, a] = acc
    return out
