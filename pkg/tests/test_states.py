import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixphase import numkernel as nk
from mixphase.errors import DimensionMismatch, InvalidState, MalformedEmbedding
from mixphase.states import (Decomposition, DensityOperator, EmbeddedState, conjugate_ancilla,
                             embed, equivalent, haar_unitary, mix, random_decomposition,
                             random_density)

KET0, KET1 = np.array([1, 0]), np.array([0, 1])
PLUS, MINUS = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)


def two_halves():
    a = Decomposition([0.5, 0.5], [DensityOperator.pure(KET0), DensityOperator.pure(KET1)])
    b = Decomposition([0.5, 0.5], [DensityOperator.pure(PLUS), DensityOperator.pure(MINUS)])
    return a, b


def test_density_validation():
    with pytest.raises(InvalidState):
        DensityOperator(np.diag([0.7, 0.4]))
    with pytest.raises(InvalidState):
        DensityOperator(np.diag([1.2, -0.2]))
    with pytest.raises(InvalidState):
        DensityOperator(np.array([[0.5, 0.5], [0.0, 0.5]]))


def test_density_constructors():
    rho = DensityOperator.from_bloch((0, 0, 0.4))
    np.testing.assert_allclose(rho.matrix, np.diag([0.7, 0.3]), atol=1e-15)
    assert DensityOperator.pure([1, 1j]).purity() == pytest.approx(1)
    assert DensityOperator.diagonal([0.5, 0.5]).purity() == pytest.approx(0.5)


def test_spectrum_is_computed_once_under_threads():
    rho = random_density(4, np.random.default_rng(3))
    seen = []
    threads = [threading.Thread(target=lambda: seen.append(rho.spectrum)) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(s is seen[0] for s in seen)


def test_decomposition_validation():
    rho = DensityOperator.diagonal([0.6, 0.4])
    with pytest.raises(InvalidState):
        Decomposition([0.5, 0.4], [rho, rho])
    with pytest.raises(InvalidState):
        Decomposition([1.0, 0.0], [rho, rho])
    with pytest.raises(InvalidState):
        Decomposition([1.0], [rho, rho])
    with pytest.raises(DimensionMismatch):
        Decomposition([0.5, 0.5], [rho, DensityOperator.diagonal([0.2, 0.3, 0.5])])


def test_mix_examples():
    rho = random_density(3, np.random.default_rng(1))
    np.testing.assert_allclose(mix(Decomposition([1.0], [rho])).matrix, rho.matrix)
    a, b = two_halves()
    np.testing.assert_allclose(mix(a).matrix, np.eye(2) / 2, atol=1e-15)
    # explicit 2x2 sum: 1/2 |+><+| + 1/2 |-><-|
    explicit = 0.5 * np.outer(PLUS, PLUS) + 0.5 * np.outer(MINUS, MINUS)
    np.testing.assert_allclose(mix(b).matrix, explicit, atol=1e-15)
    np.testing.assert_allclose(mix(b).matrix, np.eye(2) / 2, atol=1e-15)


def test_embed_single_component():
    rho = random_density(2, np.random.default_rng(2))
    s = embed(Decomposition([1.0], [rho]))
    np.testing.assert_allclose(s.matrix, np.kron(rho.matrix, np.array([[1.0]])))


def test_embed_distinguishes_decompositions():
    a, b = two_halves()
    ea, eb = embed(a), embed(b)
    assert np.abs(ea.matrix - eb.matrix).max() > 0.1
    np.testing.assert_allclose(ea.ancilla_marginal(), eb.ancilla_marginal(), atol=1e-15)
    # direct construction: sum_k lam_k rho_k (x) |k><k|
    direct = 0.5 * np.kron(np.outer(PLUS, PLUS), np.diag([1, 0])) \
        + 0.5 * np.kron(np.outer(MINUS, MINUS), np.diag([0, 1]))
    np.testing.assert_allclose(eb.matrix, direct, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_embed_marginal_is_mixture(N, M, seed):
    d = random_decomposition(N, M, seed)
    s = embed(d)
    np.testing.assert_allclose(s.system_marginal(), mix(d).matrix, atol=1e-13)
    np.testing.assert_allclose(s.ancilla_marginal(), np.diag(d.weights), atol=1e-13)
    back = s.to_decomposition()
    np.testing.assert_allclose(back.weights, d.weights, atol=1e-13)


def test_flags_reject_coherent_ancilla():
    psi = np.kron(KET0, PLUS)
    with pytest.raises(MalformedEmbedding):
        EmbeddedState(np.outer(psi, psi), 2, 2).flags()


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 3), st.integers(2, 4), st.integers(0, 2**31 - 1))
def test_equivalent_under_ancilla_permutation(N, M, seed):
    d = random_decomposition(N, M, seed)
    perm = np.random.default_rng(seed).permutation(M)
    P = np.eye(M)[perm]
    assert equivalent(embed(d), conjugate_ancilla(embed(d), P))


def test_equivalent_negative_cases():
    a, b = two_halves()
    assert not equivalent(embed(a), embed(b))
    d = random_decomposition(2, 3, 9)
    w = d.weights.copy()
    w[0] += 1e-8
    w[1] -= 1e-8
    assert not equivalent(embed(d), embed(Decomposition(w, d.components)), tol=1e-9)


def test_equivalent_exhaustive_oracle():
    # brute-force over all 2! flag permutations agrees with the matcher
    from itertools import permutations
    a, b = two_halves()
    fa, fb = embed(a).flags(), embed(b).flags()
    brute = any(all(abs(x[0] - fb[j][0]) < 1e-9 and np.abs(x[1] - fb[j][1]).max() < 1e-9
                    for x, j in zip(fa, p)) for p in permutations(range(2)))
    assert brute is False
    assert equivalent(embed(a), embed(b)) is brute


def test_random_decomposition_reproducible():
    d = random_decomposition(2, 1, 4)
    assert d.M == 1 and d.weights.tolist() == [1.0]
    x, y = random_decomposition(2, 3, 11), random_decomposition(2, 3, 11)
    assert np.array_equal(x.weights, y.weights)
    assert all(np.array_equal(p.matrix, q.matrix) for p, q in zip(x.components, y.components))
    z = random_decomposition(3, 2, 5)
    assert abs(z.weights.sum() - 1) < 1e-12
    for rho in z.components:
        assert rho.eigensystem().min_gap() > 0
        assert np.linalg.eigvalsh(rho.matrix).min() >= -1e-12


def test_haar_unitary_dimension_and_conjugation():
    U = haar_unitary(3, np.random.default_rng(0))
    s = embed(random_decomposition(2, 3, 0))
    t = conjugate_ancilla(s, U)
    np.testing.assert_allclose(t.system_marginal(), s.system_marginal(), atol=1e-13)
    assert nk.unitarity_residual(U) < 1e-13
