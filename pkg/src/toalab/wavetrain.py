"""Free evolution of a Gaussian packet and of an N-packet train.

All amplitudes are closed-form. Units are arbitrary; the only kinematic
constant is ``epsilon = hbar/m``, so the Schrodinger equation reads
``i dpsi/dt = -(epsilon/2) d^2psi/dx^2``.
"""
from dataclasses import dataclass

import numpy as np

SQRT_PI = np.sqrt(np.pi)


@dataclass(frozen=True)
class GaussianPacket:
    """Minimum-uncertainty packet ``phi(x - x0, 0)`` with carrier velocity ``v``."""

    sigma: float
    v: float
    epsilon: float
    x0: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def k0(self):
        """Carrier wavenumber v/epsilon."""
        return self.v / self.epsilon


@dataclass(frozen=True)
class TrainParams:
    """N copies of ``packet`` centred at ``-k L`` (k = 0..N-1), detector at ``L``."""

    packet: GaussianPacket
    N: int
    L: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.packet.x0 != 0:
            raise ValueError("train packets are referenced to x0 = 0")
        if not self.packet.v > 0:
            raise ValueError("the train must move towards the detector (v > 0)")

    @classmethod
    def build(cls, N, sigma, L, v, epsilon):
        return cls(GaussianPacket(sigma=sigma, v=v, epsilon=epsilon), int(N), L)

    @property
    def tau0(self):
        """Hitting time of one packet centre, L/v."""
        return self.L / self.packet.v

    def single(self):
        """The same geometry with one packet."""
        return TrainParams(self.packet, 1, self.L)

    def with_N(self, N):
        return TrainParams(self.packet, int(N), self.L)


def complex_width(p, t):
    """sigma(t) = sigma (1 + i epsilon t / sigma^2)."""
    t = np.asarray(t, dtype=np.float64)
    return p.sigma * (1.0 + 1j * p.epsilon * t / p.sigma**2)


def _check_time(t):
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("evolution time must be non-negative")
    return t


def exponent_coefficients(p, t):
    """Coefficients of ``phi(y, t) = P exp(-alpha y^2 + beta y + gamma)``, ``y = x - x0``.

    Returned arrays follow the shape of ``t``.
    """
    t = _check_time(t)
    r = 1.0 / (1.0 + 1j * p.epsilon * t / p.sigma**2)  # sigma / sigma(t)
    prefactor = 1.0 / np.sqrt(complex_width(p, t) * SQRT_PI)
    alpha = r / (2.0 * p.sigma**2)
    beta = 1j * r * p.k0
    gamma = -1j * r * p.k0 * p.v * t / 2.0
    return prefactor, alpha, beta, gamma


def packet_amplitude(p, x, t):
    """phi(x - x0, t) of the freely evolving packet; broadcasts over x and t."""
    x = np.asarray(x, dtype=np.float64)
    pre, alpha, beta, gamma = exponent_coefficients(p, t)
    y = x - p.x0
    return pre * np.exp(-alpha * y * y + beta * y + gamma)


def packet_gradient(p, x, t):
    """d/dx of :func:`packet_amplitude`."""
    x = np.asarray(x, dtype=np.float64)
    pre, alpha, beta, gamma = exponent_coefficients(p, t)
    y = x - p.x0
    return (beta - 2.0 * alpha * y) * pre * np.exp(-alpha * y * y + beta * y + gamma)


def _train_sum(fn, tp, x, t):
    x = np.asarray(x, dtype=np.float64)
    total = 0.0
    for k in range(tp.N):
        total = total + fn(tp.packet, x + k * tp.L, t)
    return total / np.sqrt(tp.N)


def train_amplitude(tp, x, t):
    """psi(x, t) = N^{-1/2} sum_k phi(x + kL, t), no non-overlap approximation."""
    return _train_sum(packet_amplitude, tp, x, t)


def train_gradient(tp, x, t):
    """d psi / dx of the train."""
    return _train_sum(packet_gradient, tp, x, t)


def train_momentum_amplitude(tp, k):
    """Fourier transform of psi(x, 0) with the unitary 1/sqrt(2 pi) convention.

    Exact: each packet contributes ``sqrt(sigma/sqrt(pi)) exp(-sigma^2 (k - v/eps)^2 / 2)``
    times the phase ``exp(i k j L)`` of its offset.
    """
    k = np.asarray(k, dtype=np.float64)
    p = tp.packet
    envelope = np.sqrt(p.sigma / SQRT_PI) * np.exp(-0.5 * p.sigma**2 * (k - p.k0) ** 2)
    phases = 0.0
    for j in range(tp.N):
        phases = phases + np.exp(1j * k * j * tp.L)
    return envelope * phases / np.sqrt(tp.N)


def velocity_density(tp, v):
    """Momentum density on the velocity axis, |psi~(v/eps)|^2 / eps."""
    eps = tp.packet.epsilon
    return np.abs(train_momentum_amplitude(tp, np.asarray(v) / eps)) ** 2 / eps


def no_spreading_margin(tp):
    """N tau0 eps / sigma^2; the non-overlap picture needs this to be << 1."""
    p = tp.packet
    return tp.N * tp.tau0 * p.epsilon / p.sigma**2


def spatial_domain(tp):
    """Interval containing all of psi(., t) for 0 <= t <= tau0 up to 1e-12 tails."""
    p = tp.packet
    return (-(tp.N + 6 * p.sigma / tp.L) * tp.L, tp.L + 10 * p.sigma)


def train_norm(tp, t, n_points=None):
    """Integral of |psi(x, t)|^2 over a domain that follows the train."""
    lo, hi = spatial_domain(tp)
    p = tp.packet
    shift = p.v * float(t)
    width = abs(complex_width(p, t)) / p.sigma
    lo, hi = lo + shift - 6 * p.sigma * (width - 1), hi + shift + 6 * p.sigma * (width - 1)
    if n_points is None:
        n_points = int((hi - lo) / (p.sigma / 40)) | 1
    x = np.linspace(lo, hi, n_points)
    dens = np.abs(train_amplitude(tp, x, t)) ** 2
    # Gaussian-localised integrand: the trapezoid rule is spectrally accurate
    return float(np.sum(dens) * (x[1] - x[0]))
