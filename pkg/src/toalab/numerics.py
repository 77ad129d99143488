"""Special functions and quadrature shared by the physics modules."""
from dataclasses import dataclass

import numpy as np

from . import _backend

SQRT_PI = np.sqrt(np.pi)
ERF_MAX_ABS = 12.0

# erf(z) in the first quadrant: Maclaurin series where its cancellation
# stays below ~1e-14, otherwise 1 - exp(-z^2) w(iz).
_SERIES_MAX_REAL = 1.5
_SERIES_MAX_ABS = 2.0


class DomainError(ValueError):
    """Argument outside the validated domain of a special function."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    est_error: float

    def __post_init__(self):
        if not self.est_error >= 0:
            raise ValueError("est_error must be non-negative")


def faddeeva(z, backend=None):
    """Faddeeva function ``w(z) = exp(-z**2) * erfc(-1j*z)``.

    Valid on the whole complex plane, but for ``Im z < 0`` the result grows
    like ``exp(-z**2)`` and may overflow.
    """
    return _backend.faddeeva(z, backend=backend)


def complex_erf(z, backend=None):
    """Error function of a complex argument.

    Parameters
    ----------
    z : complex or array_like
        Argument(s) with ``|z| <= 12``.

    Returns
    -------
    complex or ndarray
        ``erf(z)``; odd and conjugate symmetries hold bitwise because every
        argument is folded into the first quadrant before evaluation.
    """
    arr = np.asarray(z, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise DomainError("complex_erf needs finite arguments")
    if np.any(np.abs(arr) > ERF_MAX_ABS):
        raise DomainError(f"|z| exceeds the validated range {ERF_MAX_ABS}")
    x = arr.real
    y = arr.imag
    q = np.abs(x) + 1j * np.abs(y)
    out = np.empty_like(q)
    use_series = (q.real < _SERIES_MAX_REAL) | (np.abs(q) < _SERIES_MAX_ABS)
    if use_series.any():
        out[use_series] = _backend.erf_series(q[use_series], backend=backend)
    rest = ~use_series
    if rest.any():
        qr = q[rest]
        out[rest] = 1.0 - np.exp(-qr * qr) * _backend.faddeeva(1j * qr, backend=backend)
    flip_conj = np.signbit(x) ^ np.signbit(y)
    out = np.where(flip_conj, np.conj(out), out)
    out = np.where(np.signbit(x), -out, out)
    if np.ndim(z) == 0:
        return complex(out)
    return out


def gaussian_halfline_moment(a, b, upper, c=0.0, backend=None):
    r"""Closed form of :math:`\int_{-\infty}^{u} \exp(-a x^2 + b x + c)\,dx`.

    Evaluated as ``sqrt(pi/a) exp(b^2/4a + c) (1 + erf(z)) / 2`` with
    ``z = sqrt(a) u - b / (2 sqrt(a))``, rearranged through the Faddeeva
    function so that no huge exponential ever multiplies a tiny erfc:

    * ``Re z <= 0``: ``sqrt(pi)/(2 sqrt(a)) exp(q(u)) w(-iz)``
    * ``Re z > 0``:  full-line value minus ``sqrt(pi)/(2 sqrt(a)) exp(q(u)) w(iz)``

    where ``q(u)`` is the exponent at the upper limit. Arguments broadcast;
    ``upper = +inf`` gives the full-line integral.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    c = np.asarray(c, dtype=np.complex128)
    u = np.asarray(upper, dtype=np.float64)
    if np.any(a.real <= 0):
        raise ValueError("gaussian_halfline_moment requires Re(a) > 0")
    a, b, c, u = np.broadcast_arrays(a, b, c, u)
    shape = a.shape
    a, b, c, u = (np.atleast_1d(v).ravel() for v in (a, b, c, u))
    sa = np.sqrt(a)  # principal branch, Re(sa) > 0
    full = SQRT_PI / sa * np.exp(b * b / (4.0 * a) + c)

    finite = np.isfinite(u)
    out = full.copy()
    if finite.any():
        af, bf, cf, uf, saf = a[finite], b[finite], c[finite], u[finite], sa[finite]
        z = saf * uf - bf / (2.0 * saf)
        q = -af * uf * uf + bf * uf + cf
        left = z.real <= 0
        arg = np.where(left, -1j * z, 1j * z)
        tail = 0.5 * SQRT_PI / saf * np.exp(q) * _backend.faddeeva(arg, backend=backend)
        out[finite] = np.where(left, tail, full[finite] - tail)
    if shape == ():
        return complex(out[0])
    return out.reshape(shape)


def _check_grid(t, f):
    t = np.asarray(t, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if t.ndim != 1 or t.shape != f.shape:
        raise ValueError("t and f must be 1-D arrays of equal length")
    if t.size < 2:
        raise ValueError("cumulative_integral needs at least 2 samples")
    if np.any(np.diff(t) <= 0):
        raise ValueError("sample times must be strictly increasing")
    return t, f


def is_uniform(t, rtol=1e-9):
    d = np.diff(np.asarray(t, dtype=np.float64))
    return bool(np.all(np.abs(d - d.mean()) <= rtol * abs(d.mean())))


def cumulative_integral(t, f, method="simpson"):
    """Running integral ``F(t_i) = int_{t_0}^{t_i} f``.

    ``simpson`` needs a uniform grid and at least 3 samples. Even-indexed
    points come from composite Simpson panels; odd-indexed points from the
    three-point half-panel rule. For ``f >= 0`` each half-panel value is
    clamped into its panel so ``F`` stays non-decreasing.
    ``trapezoid`` accepts any strictly increasing grid.
    """
    t, f = _check_grid(t, f)
    if method == "trapezoid":
        out = np.zeros_like(f)
        out[1:] = np.cumsum(0.5 * np.diff(t) * (f[1:] + f[:-1]))
        return out
    if method != "simpson":
        raise ValueError(f"unknown method {method!r}")
    if t.size < 3:
        raise ValueError("simpson needs at least 3 samples")
    if not is_uniform(t):
        raise ValueError("simpson needs a uniform grid; use method='trapezoid'")

    n = f.size
    h = (t[-1] - t[0]) / (n - 1)
    out = np.zeros_like(f)
    n_panels = (n - 1) // 2
    f0 = f[0:2 * n_panels:2]
    f1 = f[1:2 * n_panels:2]
    f2 = f[2:2 * n_panels + 1:2]
    panel = h / 3.0 * (f0 + 4.0 * f1 + f2)
    out[2:2 * n_panels + 1:2] = np.cumsum(panel)
    half = h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2)
    nonneg = bool(np.all(f >= 0))
    if nonneg:
        half = np.clip(half, 0.0, panel)
    out[1:2 * n_panels:2] = out[0:2 * n_panels - 1:2] + half
    if n % 2 == 0:
        last = h / 12.0 * (-f[-3] + 8.0 * f[-2] + 5.0 * f[-1])
        if nonneg:
            last = max(last, 0.0)
        out[-1] = out[-2] + last
    return out


def quadrature(t, f):
    """Definite integral over the whole grid with a Richardson error estimate."""
    t, f = _check_grid(t, f)
    if t.size >= 3 and is_uniform(t):
        value = cumulative_integral(t, f, "simpson")[-1]
        if t.size >= 5 and (t.size - 1) % 2 == 0:
            coarse = cumulative_integral(t[::2], f[::2], "simpson")[-1]
            err = abs(value - coarse) / 15.0
        else:
            err = abs(value - cumulative_integral(t, f, "trapezoid")[-1])
    else:
        value = cumulative_integral(t, f, "trapezoid")[-1]
        idx = np.unique(np.r_[0:t.size:2, t.size - 1])
        coarse = cumulative_integral(t[idx], f[idx], "trapezoid")[-1]
        err = abs(value - coarse) / 3.0
    return QuadratureResult(float(value), float(err))
