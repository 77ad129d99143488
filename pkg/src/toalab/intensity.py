"""Detection-rate functions lambda(t) of the three exponential detector models.

W   : lambda0 |psi(L, t)|^2
MS  : (lambda' eps / pi) |d psi_bar/dx (L, t)|^2
JN  : (1/dt) int_L^{L+dL} |psi_c(x, t)|^2 dx

All are evaluated from the exact train amplitude; nothing assumes the
packets stay separated.
"""
from dataclasses import dataclass

import numpy as np

from .halfline import psi_bar_derivative_at_L, psi_c
from .numerics import quadrature
from .wavetrain import train_amplitude

JN_MODES = ("exact_integral", "small_dL")
_JN_START_POINTS = 33
_JN_RTOL = 1e-8
_JN_MAX_POINTS = 4097


@dataclass(frozen=True)
class DetectorModel:
    """Detector at ``L`` and the coupling constants of the three models.

    ``lambda0`` has units of rate x length so that ``lambda0 |psi|^2`` is a rate.
    """

    L: float
    lambda0: float = 2.0
    lambda_prime: float = 0.01
    dL: float = 2.5
    dt_jn: float = 0.5

    def __post_init__(self):
        for name in ("L", "lambda0", "lambda_prime", "dL", "dt_jn"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def scaled(self, **factors):
        """Copy with some fields multiplied, e.g. ``scaled(lambda0=2)``."""
        vals = {k: getattr(self, k) for k in ("L", "lambda0", "lambda_prime", "dL", "dt_jn")}
        for k, f in factors.items():
            vals[k] *= f
        return DetectorModel(**vals)


@dataclass(frozen=True)
class IntensityTrace:
    grid: object  # TimeGrid
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.grid.times.shape:
            raise ValueError("one intensity sample per grid point required")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("intensity samples must be finite and non-negative")
        object.__setattr__(self, "values", vals)


def lambda_wlodarz(tp, d, t):
    """lambda0 |psi(L, t)|^2."""
    return d.lambda0 * np.abs(train_amplitude(tp, d.L, t)) ** 2


def lambda_ms(tp, d, t):
    """(lambda' eps / pi) |2 dpsi/dx(L, t)|^2."""
    eps = tp.packet.epsilon
    return d.lambda_prime * eps / np.pi * np.abs(psi_bar_derivative_at_L(tp, t)) ** 2


def _jn_slab(tp, d, t):
    """int_L^{L+dL} |psi_c|^2 dx at one time, Simpson doubled until it settles."""
    n = _JN_START_POINTS
    prev = None
    while True:
        x = np.linspace(d.L, d.L + d.dL, n)
        val = quadrature(x, np.abs(psi_c(tp, d.dt_jn, x, t)) ** 2).value
        if prev is not None and abs(val - prev) <= _JN_RTOL * abs(val):
            return val
        if n >= _JN_MAX_POINTS:
            return val
        prev = val
        n = 2 * n - 1


def lambda_jn(tp, d, t, mode="small_dL"):
    """JN rate at times ``t >= dt_jn``.

    ``small_dL`` uses ``(dL/dt) |psi_c(L, t)|^2``; ``exact_integral`` integrates
    ``|psi_c|^2`` across the detector slab.
    """
    if mode not in JN_MODES:
        raise ValueError(f"mode must be one of {JN_MODES}")
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < d.dt_jn):
        raise ValueError("the JN rate needs t >= dt_jn")
    if mode == "small_dL":
        return d.dL / d.dt_jn * np.abs(psi_c(tp, d.dt_jn, d.L, t)) ** 2
    slab = np.vectorize(lambda ti: _jn_slab(tp, d, ti), otypes=[float])(t)
    out = slab / d.dt_jn
    return float(out) if out.ndim == 0 else out


KINDS = {"w": "Wlodarz", "ms": "Marchewka-Schuss", "jn": "Jurman-Nikolic"}


def intensity_trace(kind, tp, d, grid, jn_mode="small_dL"):
    """Tabulate one model's rate on ``grid``.

    The JN model is undefined before ``dt_jn``; those samples are set to 0,
    i.e. the detector is taken to be off until the first complete step.
    """
    t = grid.times
    if kind == "w":
        vals = lambda_wlodarz(tp, d, t)
    elif kind == "ms":
        vals = lambda_ms(tp, d, t)
    elif kind == "jn":
        vals = np.zeros_like(t)
        on = t >= d.dt_jn
        vals[on] = lambda_jn(tp, d, t[on], mode=jn_mode)
    else:
        raise ValueError(f"unknown intensity kind {kind!r}")
    return IntensityTrace(grid, vals, label=kind)
