"""Invariant suite run by ``mixphase selftest`` and by the acceptance tests.

Each check returns a :class:`Criterion`; ``run_all`` prints one line per
criterion and returns whether all passed.
"""
from __future__ import annotations

import contextlib
import io
import json
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from . import models, oracle, transport
from .errors import UndefinedPhase
from .paths import DecompositionPath, path_from_hamiltonians
from .phases import (cp_decomposition, decomposition_geometric_phase,
                     decomposition_relative_phase, kraus_completeness_residual,
                     mixed_geometric_phase, per_kraus_geometric_phase, phase_distance,
                     recombine, visibility)
from .states import Decomposition, mix, random_decomposition, random_density, random_hermitian
from .oracle import one_term_obstruction


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d}. {self.name}: {self.detail} ({self.seconds:.1f}s)"


def reduction_identity(n: int = 100, seed: int = 1) -> Criterion:
    rng = np.random.default_rng(seed)
    exact, worst = True, 0.0
    for i in range(n):
        N = 2 + i % 3
        d = random_decomposition(N, 1, rng)
        path = models.random_segment_path(N, rng)
        dp = DecompositionPath(d, (path,))
        dgp = decomposition_geometric_phase(dp)
        mgp = mixed_geometric_phase(d.components[0], path)
        exact &= dgp.phase == mgp.phase and dgp.magnitude == mgp.magnitude
        worst = max(worst, phase_distance(dgp.phase, oracle.enlarged_geometric_phase(dp).phase))
    return Criterion(1, "reduction identity (M=1)", exact and worst <= 1e-6,
                     f"{n} instances, bitwise equal={exact}, max |dGamma[D] - oracle| = {worst:.2e}"
                     f" <= 1e-6")


def relative_phase_oracle(n: int = 100, seed: int = 2) -> Criterion:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        N, M = 2 + i % 2, 1 + i % 4
        d = random_decomposition(N, M, rng)
        dp = models.random_decomposition_path(d, rng, steps_per_unit_time=200)
        worst = max(worst, phase_distance(decomposition_relative_phase(dp).phase,
                                          oracle.enlarged_relative_phase(d, dp).phase))
    return Criterion(2, "relative phase vs enlarged-space trace", worst <= 1e-10,
                     f"{n} instances (N<=3, M<=4), max difference {worst:.2e} <= 1e-10")


def gauge_invariance(instances: int = 4, gauges: int = 50, seed: int = 3) -> Criterion:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(instances):
        N, M = 2 + i % 2, 2 + i % 2
        d = random_decomposition(N, M, rng)
        dp = models.random_decomposition_path(d, rng, steps_per_unit_time=1000)
        ref = decomposition_geometric_phase(dp).phase
        for _ in range(gauges):
            prof = transport.random_phase_profiles(M, N, dp.times, rng)
            g = transport.admissible_gauge(d, dp.times, prof)
            val = decomposition_geometric_phase(transport.apply_gauge(dp, g)).phase
            worst = max(worst, phase_distance(ref, val))
    return Criterion(3, "gauge invariance of Gamma[D]", worst <= 1e-6,
                     f"{instances} instances x {gauges} admissible gauges, "
                     f"max change {worst:.2e} <= 1e-6")


def parallel_transport(n: int = 20, seed: int = 4) -> Criterion:
    rng = np.random.default_rng(seed)
    res_worst, phase_worst = 0.0, 0.0
    for i in range(n):
        N, M = 2 + i % 3, 1 + i % 3
        d = random_decomposition(N, M, rng)
        par = transport.parallelize(models.random_decomposition_path(d, rng))
        res_worst = max(res_worst, float(transport.transport_residuals(par).max()))
        phase_worst = max(phase_worst, phase_distance(
            decomposition_geometric_phase(par).phase, decomposition_relative_phase(par).phase))
    ok = res_worst <= 1e-8 and phase_worst <= 1e-6
    return Criterion(4, "parallel transport", ok,
                     f"{n} instances, max residual {res_worst:.2e} <= 1e-8, "
                     f"max |Gamma[D] - Gamma| {phase_worst:.2e} <= 1e-6")


def _segment_scenario(d: Decomposition, segments, steps: int) -> dict:
    def mat(A):
        return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(A)]

    return {
        "name": "noncommuting witness",
        "description": "Common unitary path, components with non-commuting eigenbases.",
        "system_dim": d.dim,
        "components": [{"weight": float(lam), "density": mat(rho.matrix)} for lam, rho in d],
        "paths": {"shared": True,
                  "segments": [{"hamiltonian": mat(H), "duration": float(t)}
                               for H, t in segments]},
        "steps_per_unit_time": steps,
        "checks": ["common_basis", "oracle", "gauge", "transport"],
    }


def find_witness(seed: int = 5, tries: int = 200, threshold: float = 1e-3):
    """Qubit decomposition whose Gamma[D] differs from the mixed-state phase."""
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        d = Decomposition([0.5, 0.5], [random_density(2, rng, 0.1), random_density(2, rng, 0.1)])
        comm = d.components[0].matrix @ d.components[1].matrix
        if np.abs(comm - comm.conj().T).max() < 1e-3:
            continue
        segments = [(random_hermitian(2, rng, 2.0), 0.5) for _ in range(2)]
        path = path_from_hamiltonians(segments, steps_per_unit_time=1000)
        try:
            gd = decomposition_geometric_phase(DecompositionPath.shared(d, path)).phase
            gc = mixed_geometric_phase(mix(d), path).phase
        except (UndefinedPhase, ValueError):
            continue
        if phase_distance(gd, gc) > threshold:
            return _segment_scenario(d, segments, 1000), phase_distance(gd, gc)
    return None, 0.0


def common_eigenbasis(n: int = 50, seed: int = 6, witness_path: str | None = None) -> Criterion:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        N, M = 2 + i % 3, 2 + i % 3
        d = models.common_basis_decomposition(N, M, rng)
        path = models.random_segment_path(N, rng)
        gd = decomposition_geometric_phase(DecompositionPath.shared(d, path)).phase
        gc = mixed_geometric_phase(mix(d), path).phase
        worst = max(worst, phase_distance(gd, gc))
    witness, gap = find_witness(seed)
    if witness is not None:
        target = witness_path or os.path.join(tempfile.gettempdir(), "mixphase_witness.json")
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(witness, fh, indent=1)
    else:
        target = None
    ok = worst <= 1e-6 and witness is not None
    return Criterion(5, "common-eigenbasis identity", ok,
                     f"{n} instances, max |Gamma[D] - gamma[C]| {worst:.2e} <= 1e-6; "
                     f"witness gap {gap:.3e} > 1e-3 stored at {target}",
                     data={"witness": witness, "witness_path": target})


def _cp_instances(n: int, seed: int):
    rng = np.random.default_rng(seed)
    for i in range(n):
        N, M = 2 + i % 2, 2 + i % 3
        rho0 = random_density(N, rng)
        lam = rng.dirichlet(np.ones(M))
        paths = [models.random_segment_path(N, rng) for _ in range(M)]
        yield rho0, lam, paths
    yield (models.cone_state(0.5, 2 / 3), np.array([0.7, 0.3]), list(models.phase_damping_paths()))


def recombination(n: int = 50, seed: int = 7) -> Criterion:
    worst = 0.0
    for rho0, lam, paths in _cp_instances(n, seed):
        gd = decomposition_geometric_phase(cp_decomposition(rho0, lam, paths)).phase
        r, g = [], []
        for p in paths:
            r.append(visibility(rho0, p))
            try:
                g.append(per_kraus_geometric_phase(rho0, p).phase)
            except UndefinedPhase:
                g.append(0.0)
        worst = max(worst, phase_distance(gd, recombine(lam, r, g).phase))
    return Criterion(6, "recombination identity", worst <= 1e-6,
                     f"{n + 1} CP instances, max |Gamma[D] - arg sum lambda r e^(i gamma)| "
                     f"{worst:.2e} <= 1e-6")


def cone_benchmark(r: float = 0.5, cos_theta: float = 2 / 3) -> Criterion:
    rho = models.cone_state(r, cos_theta)
    exact = models.cone_loop_phase(r, cos_theta)
    grids = (1250, 2500, 5000, 10000)
    errs = [abs(mixed_geometric_phase(rho, models.cone_loop_path(cos_theta, n)).phase - exact)
            for n in grids]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    ok = errs[-1] <= 1e-4 and orders.min() >= 1.9
    return Criterion(7, "cone-loop closed form", ok,
                     f"exact {exact:.6f}, error at 1e4 steps {errs[-1]:.2e} <= 1e-4, "
                     f"observed orders {np.array2string(orders, precision=3)} >= 1.9",
                     data={"errors": errs, "orders": orders.tolist()})


def obstruction(n: int = 50, seed: int = 8) -> Criterion:
    rng = np.random.default_rng(seed)
    worst, all_below = 0.0, True
    for i in range(n):
        M = 2 + i % 6
        while True:
            lam = rng.dirichlet(np.ones(M))
            if lam.min() >= 0.05:
                break
        d = Decomposition(lam, [random_density(2, rng) for _ in range(M)])
        lhs, rhs = one_term_obstruction(d)
        worst = max(worst, abs(lhs - float(np.sum(lam ** 2))))
        all_below &= lhs < 1.0 and abs(rhs - 1.0) <= 1e-12
    ok = worst <= 1e-12 and all_below
    return Criterion(8, "one-term obstruction", ok,
                     f"{n} instances (M>=2, lambda>=0.05), max |lhs - sum lambda^2| {worst:.1e}"
                     f" <= 1e-12, lhs < 1 = rhs: {all_below}")


def kraus_completeness(n: int = 50, seed: int = 7) -> Criterion:
    worst = max(kraus_completeness_residual(lam, paths) for _, lam, paths in _cp_instances(n, seed))
    return Criterion(9, "Kraus completeness", worst <= 1e-8,
                     f"{n + 1} CP instances, max residual {worst:.2e} <= 1e-8 at all nodes")


def corrupted_scenario_exit() -> Criterion:
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        bad = os.path.join(tmp, "corrupt.json")
        with open(bad, "w", encoding="utf-8") as fh:
            fh.write('{"system_dim": 2,\n "components": [\n')
        buf = io.StringIO()
        with contextlib.redirect_stderr(buf), contextlib.redirect_stdout(io.StringIO()):
            code = main(["run", bad])
    return Criterion(10, "CLI corrupted scenario", code == 2,
                     f"exit code {code} (expected 2); {buf.getvalue().strip()}")


CRITERIA = (reduction_identity, relative_phase_oracle, gauge_invariance, parallel_transport,
            common_eigenbasis, recombination, cone_benchmark, obstruction, kraus_completeness,
            corrupted_scenario_exit)


def evaluate(fn, **kw) -> Criterion:
    t0 = time.perf_counter()
    c = fn(**kw)
    c.seconds = time.perf_counter() - t0
    return c


def run_all(out=print, witness_path: str | None = None) -> bool:
    ok = True
    for fn in CRITERIA:
        kw = {"witness_path": witness_path} if fn is common_eigenbasis else {}
        c = evaluate(fn, **kw)
        out(c.line())
        ok &= c.passed
    out("selftest: " + ("all criteria passed" if ok else "FAILURES"))
    return ok
