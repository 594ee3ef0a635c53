"""Benchmark the compiled stepping kernel against the numpy fallback.

Run from the repository root:

    OPENBLAS_NUM_THREADS=1 python benchmarks/benchmark_backends.py

The gap is widest for small Hilbert spaces, where per-step Python
overhead dominates the BLAS work.
"""

import os
import time

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import numpy as np

from nlcavity import DensityMatrix, build_chi2, build_kerr, build_qubit_limit, build_tpa
from nlcavity._backend import available_backends
from nlcavity.master import drift_matrix, jump_operators

SCENARIOS = [
    ("two-level, t=2", build_qubit_limit(0.0, 0.5, 0.0, 10.0), 2.0),
    ("Kerr chi=-100, dim 15, t=2", build_kerr(0.0, -100.0, 0.5, 0.0, 15, 10.0), 2.0),
    ("TPA gamma=200, dim 16, t=2", build_tpa(0.0, 0.5, 0.0, 200.0, 10.0, 16), 2.0),
    ("chi2 g=-3000 kb=5000, dims [10,5], t=0.25",
     build_chi2(0.0, -3000.0, 0.5, 0.0, 5000.0, 10.0, (10, 5)), 0.25),
]


def main():
    backends = available_backends()
    if "compiled" not in backends:
        print("compiled extension not available; nothing to compare")
    print(f"{'scenario':44s} {'backend':9s} {'steps':>8s} {'time':>9s} {'speedup':>8s}")
    for label, model, t_end in SCENARIOS:
        g = drift_matrix(model)
        cs = jump_operators(model)
        rho0 = DensityMatrix.vacuum(model.sig).mat
        grid = np.linspace(0.0, t_end, 101)
        times = {}
        states = {}
        for name in ("python", "compiled"):
            if name not in backends:
                continue
            t0 = time.perf_counter()
            st, info = backends[name].propagate_rk45(g, cs, rho0, grid, 1e-8, 1e-10)
            times[name] = time.perf_counter() - t0
            states[name] = st
            speedup = (f"{times['python'] / times[name]:7.1f}x"
                       if name == "compiled" and "python" in times else "")
            print(f"{label:44s} {name:9s} {info['n_steps']:8d} "
                  f"{times[name]:8.3f}s {speedup:>8s}")
        if len(states) == 2:
            # small controller divergence on stiff runs stays inside rtol
            diff = np.abs(states["compiled"] - states["python"]).max()
            assert diff < 1e-7, f"backend mismatch {diff:.2e}"
    print("\nbackends agree to < 1e-7 on all scenarios")


if __name__ == "__main__":
    main()
