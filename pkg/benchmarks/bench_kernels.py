"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py --steps 20000 --dim 4 --repeat 5
"""
import argparse
import timeit

import numpy as np

from mixphase import _kernels_py, numkernel as nk
from mixphase.states import haar_unitary, random_hermitian

try:
    from mixphase import _kernels as compiled
except ImportError:
    compiled = None


def make_inputs(steps, dim, seed):
    rng = np.random.default_rng(seed)
    H = np.array([random_hermitian(dim, rng) for _ in range(steps)])
    S = nk.step_unitaries(H, np.full(steps, 1e-3))
    U = _kernels_py.cumulative_products(S, np.eye(dim, dtype=complex))
    V = np.ascontiguousarray(haar_unitary(dim, rng))
    return S, U, H, V, np.ascontiguousarray(V[:, 0])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--dim", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    S, U, H, V, psi = make_inputs(args.steps, args.dim, args.seed)
    eye = np.eye(args.dim, dtype=complex)
    cases = {
        "cumulative_products": lambda m: m.cumulative_products(S, eye),
        "node_expectations": lambda m: m.node_expectations(U, H, V),
        "evolve_vector": lambda m: m.evolve_vector(S, psi),
    }
    backends = [("python", _kernels_py)] + ([("cython", compiled)] if compiled else [])
    print(f"steps={args.steps} dim={args.dim} best of {args.repeat}")
    print(f"{'kernel':<22}" + "".join(f"{name:>12}" for name, _ in backends) + f"{'speedup':>10}")
    for label, fn in cases.items():
        times = [min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat))
                 for _, m in backends]
        if compiled:
            diff = np.abs(np.asarray(fn(compiled)) - np.asarray(fn(_kernels_py))).max()
            assert diff < 1e-10, f"{label}: backends disagree by {diff:.2e}"
        speed = f"{times[0] / times[-1]:9.1f}x" if compiled else ""
        print(f"{label:<22}" + "".join(f"{t * 1e3:10.2f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
