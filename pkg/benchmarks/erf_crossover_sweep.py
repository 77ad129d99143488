"""Accuracy of the two erf branches across the switch-over region.

For each radius shell the Maclaurin series and the continued-fraction
(Faddeeva) branch are compared with a 50-digit reference. The switch
point used by ``complex_erf`` should sit where both are still accurate.

Usage: python3 benchmarks/erf_crossover_sweep.py [--points N]
"""
import argparse

import mpmath
import numpy as np

from toalab import _backend
from toalab.numerics import complex_erf


def reference(z):
    with mpmath.workdps(50):
        return complex(mpmath.erf(mpmath.mpc(z)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200)
    args = ap.parse_args()
    rng = np.random.default_rng(1)
    print(f"{'|z|':>6s}{'series':>12s}{'faddeeva':>12s}{'complex_erf':>13s}")
    for r in np.arange(0.5, 4.01, 0.25):
        # first quadrant, where both branches are evaluated
        phi = 0.5 * np.pi * rng.random(args.points)
        z = r * np.exp(1j * phi)
        ref = np.array([reference(zi) for zi in z])
        scale = np.maximum(np.abs(ref), 1.0)
        ser = _backend.erf_series(z)
        fad = 1.0 - np.exp(-z * z) * _backend.faddeeva(1j * z)
        errs = [np.max(np.abs(v - ref) / scale) for v in (ser, fad, complex_erf(z))]
        print(f"{r:6.2f}" + "".join(f"{e:12.1e}" for e in errs))


if __name__ == "__main__":
    main()
