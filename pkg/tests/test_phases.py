import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixphase import models, oracle
from mixphase import numkernel as nk
from mixphase.errors import DimensionMismatch, UndefinedPhase
from mixphase.paths import DecompositionPath, identity_path, path_from_hamiltonians, uniform_grid
from mixphase.phases import (PhaseResult, cp_geometric_phase, decomposition_geometric_phase,
                             decomposition_relative_phase, kraus_completeness_residual,
                             kraus_relative_phase, kraus_relative_phase_series,
                             mixed_geometric_phase, pancharatnam_phase, per_kraus_geometric_phase,
                             phase_distance, principal, recombine, visibility)
from mixphase.states import (Decomposition, DensityOperator, mix, random_decomposition,
                             random_density)

X, Z = nk.PAULI["X"], nk.PAULI["Z"]


def cone_oracle(r, cos_theta):
    """Per-eigenstate holonomies -+Omega/2 weighted by (1 +- r)/2."""
    omega = 2 * math.pi * (1 - cos_theta)
    return 0.5 * (1 + r) * cmath.exp(-0.5j * omega) + 0.5 * (1 - r) * cmath.exp(0.5j * omega)


def test_principal_range():
    assert principal(-math.pi) == math.pi
    assert principal(3 * math.pi) == pytest.approx(math.pi)
    assert principal(0.25) == 0.25


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=6))
def test_phase_result_in_principal_range(terms):
    res = PhaseResult.from_terms(terms)
    if res.defined:
        assert -math.pi < res.phase <= math.pi


def test_pancharatnam_examples():
    rho = DensityOperator.diagonal([0.7, 0.3])
    assert pancharatnam_phase(rho, np.eye(2)).phase == 0
    U = np.diag([cmath.exp(1j * math.pi / 3), cmath.exp(-1j * math.pi / 3)])
    expect = cmath.phase(0.7 * cmath.exp(1j * math.pi / 3) + 0.3 * cmath.exp(-1j * math.pi / 3))
    res = pancharatnam_phase(rho, U)
    assert res.phase == pytest.approx(expect, abs=1e-14)
    assert res.phase == pytest.approx(0.605891, abs=1e-6)
    with pytest.raises(UndefinedPhase) as info:
        pancharatnam_phase(DensityOperator.diagonal([0.5, 0.5]), X)
    assert info.value.result.magnitude < 1e-12
    with pytest.raises(DimensionMismatch):
        pancharatnam_phase(rho, np.eye(3))


def test_geometric_phase_vanishes_for_diagonal_precession():
    rho = DensityOperator.diagonal([0.9, 0.1])
    p = path_from_hamiltonians([(0.7 * Z, 2.5)])
    assert abs(mixed_geometric_phase(rho, p).phase) < 1e-12


def test_cone_loop_closed_form():
    r, c = 0.5, 2 / 3
    rho = models.cone_state(r, c)
    p = models.precession_path(omega=1.0)
    res = mixed_geometric_phase(rho, p)
    assert res.phase == pytest.approx(-math.atan(0.5 * math.tan(math.pi / 3)), abs=1e-9)
    assert res.phase == pytest.approx(cmath.phase(cone_oracle(r, c)), abs=1e-9)
    assert res.phase == pytest.approx(-0.7137243789, abs=1e-9)
    assert visibility(rho, p) == pytest.approx(abs(cone_oracle(r, c)), abs=1e-6)
    assert models.cone_loop_phase(r, c) == pytest.approx(cmath.phase(cone_oracle(r, c)))


def test_cone_loop_pure_limit():
    c = 2 / 3
    rho = models.cone_state(1.0, c)
    res = mixed_geometric_phase(rho, models.precession_path())
    assert res.phase == pytest.approx(-0.5 * models.cone_solid_angle(c), abs=1e-9)


@pytest.mark.parametrize("r,c", [(0.3, 0.2), (0.8, -0.4), (0.5, 0.9)])
def test_gauge_spun_cone_loop_matches_oracle(r, c):
    res = mixed_geometric_phase(models.cone_state(r, c), models.cone_loop_path(c, 8000))
    assert res.phase == pytest.approx(cmath.phase(cone_oracle(r, c)), abs=1e-5)


def test_geometric_phase_converges_second_order_on_smooth_paths():
    for seed in (1, 2, 3):
        rho = random_density(3, np.random.default_rng(seed + 100))

        def phase(n):
            path = models.random_smooth_path(3, np.random.default_rng(seed), n, scale=0.7)
            return mixed_geometric_phase(rho, path).phase

        ref = phase(32000)
        errs = np.array([phase(n) - ref for n in (500, 1000, 2000)])
        orders = np.log2(np.abs(errs[:-1] / errs[1:]))
        assert orders.min() >= 1.9, (seed, orders)


def test_decomposition_relative_phase_reductions(rng):
    d = random_decomposition(2, 3, 5)
    t = uniform_grid(1.0, 10)
    assert decomposition_relative_phase(DecompositionPath.shared(d, identity_path(2, t))).phase == 0
    p = models.random_segment_path(2, rng)
    dp = DecompositionPath.shared(d, p)
    assert decomposition_relative_phase(dp).phase == pytest.approx(
        pancharatnam_phase(mix(d), p.endpoint).phase, abs=1e-13)


def test_decomposition_relative_phase_diagonal_endpoints():
    d = Decomposition([0.4, 0.6], [DensityOperator.diagonal([0.7, 0.3]),
                                   DensityOperator.diagonal([0.2, 0.8])])
    paths = (path_from_hamiltonians([(np.diag([0.5, -1.0]), 1.0)]),
             path_from_hamiltonians([(np.diag([-0.3, 0.9]), 1.0)]))
    dp = DecompositionPath(d, paths)
    direct = (0.4 * (0.7 * cmath.exp(-0.5j) + 0.3 * cmath.exp(1j))
              + 0.6 * (0.2 * cmath.exp(0.3j) + 0.8 * cmath.exp(-0.9j)))
    assert decomposition_relative_phase(dp).phase == pytest.approx(cmath.phase(direct), abs=1e-12)
    assert oracle.enlarged_relative_phase(d, dp).phase == pytest.approx(cmath.phase(direct),
                                                                        abs=1e-10)


def test_single_component_reduces_exactly(rng):
    d = random_decomposition(3, 1, 7)
    p = models.random_segment_path(3, rng)
    a = decomposition_geometric_phase(DecompositionPath(d, (p,)))
    b = mixed_geometric_phase(d.components[0], p)
    assert a.phase == b.phase and a.magnitude == b.magnitude


def test_common_eigenbasis_identity(rng):
    for N, M in ((2, 2), (3, 3), (4, 2)):
        d = models.common_basis_decomposition(N, M, rng)
        p = models.random_segment_path(N, rng)
        # the mixture's eigenvalues are the weighted sums of component eigenvalues
        w = sum(lam * np.sort(np.linalg.eigvalsh(rho.matrix)) for lam, rho in d)
        assert np.all(w > 0)
        gd = decomposition_geometric_phase(DecompositionPath.shared(d, p)).phase
        gc = mixed_geometric_phase(mix(d), p).phase
        assert phase_distance(gd, gc) <= 1e-6


def test_noncommuting_witness_differs():
    from mixphase.selftest import find_witness
    witness, gap = find_witness()
    assert witness is not None and gap > 1e-3


def test_kraus_relative_phase():
    rho = DensityOperator.diagonal([0.7, 0.3])
    t = uniform_grid(1.0, 10)
    p = path_from_hamiltonians([(np.diag([-math.pi / 3, math.pi / 3]), 1.0)])
    assert kraus_relative_phase(rho, 0.25, p, 0) == (pytest.approx(0.5), 0.0)
    mag, ph = kraus_relative_phase(rho, 1.0, p, p.intervals)
    z = 0.7 * cmath.exp(1j * math.pi / 3) + 0.3 * cmath.exp(-1j * math.pi / 3)
    assert mag == pytest.approx(abs(z), abs=1e-12)
    assert ph == pytest.approx(cmath.phase(z), abs=1e-12)
    mags, phases = kraus_relative_phase_series(rho, 1.0, p)
    assert phases[-1] == pytest.approx(ph) and mags[0] == pytest.approx(1.0)
    q = path_from_hamiltonians([(math.pi / 2 * X, 1.0)])
    with pytest.raises(UndefinedPhase):
        kraus_relative_phase(DensityOperator.diagonal([0.5, 0.5]), 1.0, q, q.intervals)
    assert identity_path(2, t).endpoint.shape == (2, 2)


def test_per_kraus_phase_and_visibility_limits(rng):
    rho = random_density(3, rng)
    t = uniform_grid(1.0, 10)
    assert per_kraus_geometric_phase(rho, identity_path(3, t)).phase == 0
    assert visibility(rho, identity_path(3, t)) == pytest.approx(1.0)
    # a pure state has a single weighted term of modulus |<psi|U(tau)|psi>|,
    # which is 1 once the state returns to its ray
    psi = np.array([1, 0, 0])
    p = models.random_segment_path(3, rng)
    expect = abs(np.vdot(psi, p.endpoint @ psi))
    assert visibility(DensityOperator.pure(psi), p) == pytest.approx(expect, abs=1e-12)
    loop = models.precession_path()
    assert visibility(models.cone_state(1.0, 0.3), loop) == pytest.approx(1.0, abs=1e-12)


def test_recombine_examples():
    assert recombine([1.0], [1.0], [0.4]).phase == pytest.approx(0.4)
    assert recombine([0.5, 0.5], [1, 1], [1.2, -1.2]).phase == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(UndefinedPhase):
        recombine([0.5, 0.5], [1, 1], [math.pi / 2, -math.pi / 2])
    with pytest.raises(DimensionMismatch):
        recombine([1.0], [1.0, 1.0], [0.0])


def test_phase_damping_recombination():
    rho = models.cone_state(0.5, 2 / 3)
    paths = models.phase_damping_paths()
    for p in (0.1, 0.4, 0.7):
        lam = [1 - p, p]
        gd = cp_geometric_phase(rho, lam, paths)
        r = [visibility(rho, q) for q in paths]
        g = [per_kraus_geometric_phase(rho, q).phase for q in paths]
        assert math.isfinite(gd.phase)
        assert phase_distance(gd.phase, recombine(lam, r, g).phase) <= 1e-10
        assert kraus_completeness_residual(lam, paths) <= 1e-12
    assert cp_geometric_phase(rho, [1.0], paths[1:]).phase == \
        mixed_geometric_phase(rho, paths[1]).phase


def test_phase_distance():
    assert phase_distance(math.pi - 0.1, -math.pi + 0.1) == pytest.approx(0.2)
    assert phase_distance(1.0, 1.0) == 0
