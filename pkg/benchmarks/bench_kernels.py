"""Time the compiled kernels against their numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat R]
"""
import argparse
import timeit

import numpy as np

from toalab import _backend
from toalab.oracle import Grid1D, GridState, evolve_crank_nicolson
from toalab.scenario import FIG3
from toalab.wavetrain import packet_amplitude


def _cases(backend):
    rng = np.random.default_rng(0)
    z = 6 * (rng.random(200_000) - 0.5) + 6j * rng.random(200_000)
    zs = 1.5 * (rng.random(200_000) - 0.5) + 1.5j * (rng.random(200_000) - 0.5)
    n = 200_000
    solver = _backend.TridiagonalSolver(2.0 + 0.1j, 0.5 - 0.2j, n, backend=backend)
    rhs = rng.random(n) + 1j * rng.random(n)
    out = np.empty(n, dtype=complex)

    tp = FIG3.train().single()
    p = tp.packet
    g = Grid1D.for_train(tp, dx=0.005, dt=0.05)
    s0 = GridState.from_function(g, lambda x: packet_amplitude(p, x, 0.0))

    return {
        "faddeeva (2e5 points)": lambda: _backend.faddeeva(z, backend=backend),
        "erf series (2e5 points)": lambda: _backend.erf_series(zs, backend=backend),
        "tridiagonal solve (n=2e5)": lambda: solver.solve_inplace(rhs.copy()),
        "tridiagonal matvec (n=2e5)": lambda: _backend.tridiag_matvec(2.0, 0.5, rhs, out, backend=backend),
        f"Crank-Nicolson 200 steps (n={g.n_x})":
            lambda: evolve_crank_nicolson(s0, 200 * g.dt, p.epsilon, backend=backend, check_edges=False),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["numpy"] + (["cython"] if _backend.BACKEND == "cython" else [])
    if len(backends) == 1:
        print("compiled kernels not built; timing the numpy fallback only")
    times = {}
    for b in backends:
        for name, fn in _cases(b).items():
            fn()  # warm up
            times[(name, b)] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
    names = list(_cases(backends[0]))
    print(f"{'kernel':42s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name in names:
        row = f"{name:42s}" + "".join(f"{times[(name, b)] * 1e3:10.1f}ms" for b in backends)
        if len(backends) > 1:
            row += f"{times[(name, 'numpy')] / times[(name, 'cython')]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
