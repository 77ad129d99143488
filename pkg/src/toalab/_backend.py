"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy twin.
Set ``TOALAB_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _kernels_py

_compiled = None
if os.environ.get("TOALAB_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "numpy"


def _flat(z):
    return np.ascontiguousarray(np.ravel(np.asarray(z, dtype=np.complex128)))


def faddeeva(z, backend=None):
    """w(z) for an array of any shape."""
    z = np.asarray(z, dtype=np.complex128)
    mod = _select(backend)
    return mod.faddeeva(_flat(z)).reshape(z.shape)


def erf_series(z, backend=None):
    z = np.asarray(z, dtype=np.complex128)
    mod = _select(backend)
    return mod.erf_series(_flat(z)).reshape(z.shape)


def _select(backend):
    if backend is None:
        backend = BACKEND
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    if backend == "numpy":
        return _kernels_py
    raise ValueError(f"unknown backend {backend!r}")


class TridiagonalSolver:
    """Solves ``tri(off, diag, off) x = rhs`` for a fixed matrix.

    ``diag`` is a scalar (Toeplitz) or a length-``n`` array; ``off`` is a scalar.
    """

    def __init__(self, diag, off, n, backend=None):
        self.n = int(n)
        self.diag = np.ascontiguousarray(np.broadcast_to(np.asarray(diag, dtype=np.complex128), (self.n,)))
        self.off = complex(off)
        self.backend = backend or BACKEND
        self._mod = _select(self.backend)
        if self.backend == "cython":
            self._cp, self._inv_piv = self._mod.tridiag_factor(self.diag, self.off)
        else:
            self._ab = _kernels_py.banded_form(self.diag, self.off)

    def solve_inplace(self, rhs):
        if self.backend == "cython":
            self._mod.tridiag_solve(self.off, self._cp, self._inv_piv, rhs)
        else:
            _kernels_py.tridiag_solve_banded(self._ab, rhs)
        return rhs


def tridiag_matvec(diag, off, x, out, backend=None):
    _select(backend).tridiag_matvec(complex(diag), complex(off), x, out)
    return out
