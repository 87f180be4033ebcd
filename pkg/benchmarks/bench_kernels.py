"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--nx 128] [--steps 200]

Both backends run the same inputs; the script also reports the largest
difference between their outputs.
"""

import argparse
import time

import numpy as np

from rvlbm import _backend
from rvlbm.lattice import SchemeSpec, collision_matrices, collision_matrix, lattice_shifts
from rvlbm.simulator import init_spot
from rvlbm.vonneumann import phase_factors


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_spot(kern, spec, nx, steps, repeat):
    f0 = init_spot(spec, nx).f
    C = np.ascontiguousarray(collision_matrix(spec))
    shifts = np.ascontiguousarray(lattice_shifts(spec.variant))

    def go():
        f = f0.copy()
        kern.spot_run(f, C, shifts, steps, np.inf)
        return f

    return best_of(go, repeat)


def bench_radius(kern, n_v, n_k, repeat):
    V = np.random.default_rng(0).uniform(-1.2, 1.2, (n_v, 2))
    C = np.ascontiguousarray(collision_matrices("twisted", 1.0, 1.6, 0.7, V, np.zeros_like(V),
                                                "non-intrinsic"))
    a = phase_factors("twisted", n_k)
    return best_of(lambda: kern.max_spectral_radius(C, a)[0], repeat)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--nx", type=int, default=128)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--n-v", dest="n_v", type=int, default=200)
    p.add_argument("--n-k", dest="n_k", type=int, default=64)
    args = p.parse_args()

    if _backend.name != "compiled":
        print("compiled extension not built; only the fallback is available")
    names = ["python"] + (["compiled"] if _backend.name == "compiled" else [])
    spec = SchemeSpec.relative("V", (0.4, 0.3), s_q=1.8, s_xy=1.1)

    rows = []
    spot = {n: bench_spot(_backend.get(n), spec, args.nx, args.steps, args.repeat)
            for n in names}
    rows.append((f"spot_run {args.nx}^2 x {args.steps} steps", spot))
    rad = {n: bench_radius(_backend.get(n), args.n_v, args.n_k, args.repeat) for n in names}
    rows.append((f"max_spectral_radius {args.n_v} V x {args.n_k}^2 k", rad))

    print(f"{'kernel':<40} {'python [s]':>11} {'compiled [s]':>13} {'speedup':>8} {'max diff':>9}")
    for label, res in rows:
        tp, op = res["python"]
        if "compiled" in res:
            tc, oc = res["compiled"]
            diff = float(np.abs(np.asarray(op) - np.asarray(oc)).max())
            print(f"{label:<40} {tp:11.4f} {tc:13.4f} {tp / tc:8.1f} {diff:9.1e}")
        else:
            print(f"{label:<40} {tp:11.4f} {'-':>13} {'-':>8} {'-':>9}")


if __name__ == "__main__":
    main()
