"""Dirichlet half-line waves behind a detector at x = L.

``psi_bar`` is the image-method solution on x <= L. ``psi_c`` evolves it
freely for a further ``delta_t``; every Gaussian term of ``psi_bar`` is
pushed through the free propagator in closed form, so no spatial grid is
involved.
"""
import numpy as np

from .numerics import gaussian_halfline_moment
from .wavetrain import (complex_width, exponent_coefficients, packet_amplitude,
                        train_amplitude, train_gradient)


def psi_bar(tp, x, t):
    """psi(x, t) - psi(2L - x, t) on x <= L; exactly zero at x = L."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x > tp.L):
        raise ValueError("psi_bar is defined on x <= L only")
    return train_amplitude(tp, x, t) - train_amplitude(tp, 2.0 * tp.L - x, t)


def psi_bar_derivative_at_L(tp, t):
    """Left derivative of psi_bar at L; the image doubles it to 2 dpsi/dx(L, t)."""
    return 2.0 * train_gradient(tp, tp.L, t)


def packet_derivative_sq(p, x, t):
    """|dphi/dx|^2 in the factorised form |phi/sigma(t)|^2 [(y/sigma)^2 + (v sigma/eps)^2]."""
    x = np.asarray(x, dtype=np.float64)
    y = x - p.x0
    phi = packet_amplitude(p, x, t)
    bracket = (y / p.sigma) ** 2 + (p.v * p.sigma / p.epsilon) ** 2
    return np.abs(phi / complex_width(p, t)) ** 2 * bracket


def _image_terms(tp, s):
    """Quadratic-exponent coefficients of the 2N Gaussian terms of psi_bar(x', s).

    Yields ``(sign, P, alpha, lin, const)`` with each term equal to
    ``sign * P * exp(-alpha x'^2 + lin x' + const) / sqrt(N)``.
    """
    pre, alpha, beta, gamma = exponent_coefficients(tp.packet, s)
    L = tp.L
    for k in range(tp.N):
        # phi(x' + kL): y = x' + kL
        d = k * L
        yield 1.0, pre, alpha, beta - 2.0 * alpha * d, -alpha * d * d + beta * d + gamma
        # phi(2L - x' + kL): y = m - x' with m = (k + 2) L
        m = (k + 2) * L
        yield -1.0, pre, alpha, 2.0 * alpha * m - beta, -alpha * m * m + beta * m + gamma


def psi_c(tp, delta_t, x, t, backend=None):
    """Free evolution for ``delta_t`` of the half-line wave ``psi_bar(., t - delta_t)``.

    Parameters
    ----------
    tp : TrainParams
    delta_t : float
        Duration of the final free step, > 0.
    x, t : array_like
        Broadcast together; requires ``t >= delta_t``.

    Returns
    -------
    complex ndarray
        ``int_{-inf}^{L} K(x, x'; delta_t) psi_bar(x', t - delta_t) dx'`` with
        the free kernel ``K = exp(i (x - x')^2 / (2 eps delta_t)) / sqrt(2 pi i eps delta_t)``.
    """
    if not delta_t > 0:
        raise ValueError("delta_t must be positive")
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < delta_t):
        raise ValueError("psi_c is undefined for t < delta_t")
    x, t = np.broadcast_arrays(x, t)
    s = t - delta_t
    eps = tp.packet.epsilon
    kappa = 1.0 / (2.0 * eps * delta_t)
    norm = 1.0 / np.sqrt(2j * np.pi * eps * delta_t)
    total = np.zeros(x.shape, dtype=np.complex128)
    for sign, pre, alpha, lin, const in _image_terms(tp, s):
        # exp(i kappa (x - x')^2) merged into the x' quadratic
        moment = gaussian_halfline_moment(alpha - 1j * kappa, lin - 2j * kappa * x, tp.L,
                                          c=const + 1j * kappa * x * x, backend=backend)
        total += sign * pre * moment
    out = norm * total / np.sqrt(tp.N)
    if out.ndim == 0:
        return complex(out)
    return out
