"""Arrival-time densities at a detector at x = L.

Exponential (Poisson) detection models turn a rate trace into a density and
a non-detection probability. The flux and semiclassical densities come
straight from the analytic train. Helpers build the N-equal-peaks benchmark,
locate peaks, and map a density onto the velocity axis via tau = L / v.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .numerics import cumulative_integral, quadrature
from .wavetrain import train_amplitude, train_gradient

SC_MODES = ("closed_form", "numeric_ft")
_SINGULAR_SIN = 1e-8
_ZERO_TAU_TOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples t_i = i t_max / n_steps, i = 0..n_steps."""

    t_max: float
    n_steps: int

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ValueError("n_steps must be an integer >= 2")

    @classmethod
    def for_train(cls, tp):
        """Figure default: t_max = (N+1) tau0, 200 N tau0 v / sigma steps."""
        p = tp.packet
        return cls((tp.N + 1) * tp.tau0, int(round(200 * tp.N * tp.tau0 * p.v / p.sigma)))

    @property
    def times(self):
        return np.arange(self.n_steps + 1) * (self.t_max / self.n_steps)

    @property
    def dt(self):
        return self.t_max / self.n_steps

    def samples_per_width(self, tp):
        """Grid points per sigma/v, the time a packet takes to pass."""
        return tp.packet.sigma / tp.packet.v / self.dt


@dataclass(frozen=True)
class ArrivalTimeDensity:
    """Sampled density Pi(t_i) plus the probability of never being detected.

    ``backflow`` is set when any sample is negative (only the flux can do
    that); such samples are kept, not clamped.
    """

    grid: TimeGrid
    pi: np.ndarray
    p_nondetect: float
    label: str = ""
    backflow: bool = field(default=False)

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.float64)
        if pi.shape != self.grid.times.shape:
            raise ValueError("one density sample per grid point required")
        if not 0.0 <= self.p_nondetect <= 1.0:
            raise ValueError("p_nondetect must lie in [0, 1]")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "backflow", bool(np.any(pi < 0)))

    @property
    def times(self):
        return self.grid.times

    def mass(self):
        return quadrature(self.grid.times, self.pi)

    def normalization_defect(self):
        """quadrature(Pi) + P(inf) - 1."""
        return self.mass().value + self.p_nondetect - 1.0


def exponential_density(lam, method="simpson"):
    """Pi = lambda exp(-int_0^t lambda) and P(inf) = survival at the grid end.

    Truncating at ``t_max`` is harmless when lambda has died off there: the
    neglected tail of int Pi is bounded by int_{t_max}^inf lambda.
    """
    lam_vals = np.asarray(lam.values)
    if np.any(lam_vals < 0):
        raise ValueError("negative intensity sample")
    cum = cumulative_integral(lam.grid.times, lam_vals, method=method)
    survival = np.exp(-cum)
    return ArrivalTimeDensity(lam.grid, lam_vals * survival, float(survival[-1]),
                              label=getattr(lam, "label", ""))


def discrete_detection_probability(lam, n):
    """Chance of the first click falling in step n: lambda_{n-1} dt prod_{j<n-1}(1 - lambda_j dt)."""
    n = int(n)
    vals = np.asarray(lam.values)
    if n < 1 or n > vals.size:
        raise ValueError("n must lie in 1..len(grid)")
    p = vals[:n] * lam.grid.dt
    if np.any(p >= 1.0):
        raise ValueError("lambda * dt >= 1: step too coarse for a Bernoulli probability")
    return float(p[n - 1] * np.prod(1.0 - p[:n - 1]))


def flux_density(tp, t):
    """Probability current eps Im[psi* dpsi/dx] at x = L; may be negative."""
    psi = train_amplitude(tp, tp.L, t)
    dpsi = train_gradient(tp, tp.L, t)
    return tp.packet.epsilon * np.imag(np.conj(psi) * dpsi)


def flux_trace(tp, grid):
    """Flux density on ``grid``; P(inf) is whatever mass the grid misses."""
    pi = flux_density(tp, grid.times)
    missing = 1.0 - quadrature(grid.times, pi).value
    return ArrivalTimeDensity(grid, pi, float(np.clip(missing, 0.0, 1.0)), label="qf")


# pi split so that m * _PI_A is exact for m < 2**20 (Cody-Waite reduction)
_PI_A = 3.14159265346825122834e+00
_PI_B = 1.215420101301238449864e-10


def _comb_ratio(N, theta):
    """sin^2(N theta) / sin^2(theta), replaced by its limit N^2 near the poles.

    theta is first reduced modulo pi; the ratio is pi-periodic, and N theta
    would otherwise be rounded far from the poles' flat tops.
    """
    theta = np.asarray(theta, dtype=np.float64)
    m = np.rint(theta / np.pi)
    exact = np.abs(m) < 2.0**20
    d = np.where(exact, (theta - m * _PI_A) - m * _PI_B, theta)
    s = np.sin(d)
    sing = np.abs(s) < _SINGULAR_SIN
    safe = np.where(sing, 1.0, s)
    return np.where(sing, float(N) ** 2, (np.sin(N * d) / safe) ** 2)


def _momentum_amplitude_numeric(tp, k):
    # trapezoid sum of psi(x, 0) exp(-i k x); the integrand is a Gaussian
    # times a plane wave, so aliasing is the only error and this spacing
    # puts it below exp(-70)
    p = tp.packet
    lo = -(tp.N - 1) * tp.L - 14 * p.sigma
    hi = 14 * p.sigma
    h = 2 * np.pi / (abs(k - p.k0) + 12.0 / p.sigma)
    n = int(np.ceil((hi - lo) / h)) + 1
    x = np.linspace(lo, hi, n)
    f = train_amplitude(tp, x, 0.0) * np.exp(-1j * k * x)
    return np.sum(f) * (x[1] - x[0]) / np.sqrt(2 * np.pi)


def semiclassical_density(tp, tau, mode="closed_form"):
    """Momentum distribution pushed through classical flight times tau = L/v.

    ``closed_form`` uses the exact comb x Gaussian-envelope expression;
    ``numeric_ft`` Fourier-transforms psi(x, 0) by quadrature instead and
    applies (L / (eps tau^2)) |psi~(L / (eps tau))|^2.
    """
    if mode not in SC_MODES:
        raise ValueError(f"mode must be one of {SC_MODES}")
    tau = np.asarray(tau, dtype=np.float64)
    if np.any(tau <= 0):
        raise ValueError("tau must be positive")
    p = tp.packet
    eps, L, N = p.epsilon, tp.L, tp.N
    if mode == "closed_form":
        theta = L * L / (2 * eps * tau)
        envelope = np.exp(-(p.sigma * p.v / eps) ** 2 * (1.0 - tp.tau0 / tau) ** 2)
        out = p.sigma * L / (N * np.sqrt(np.pi) * eps * tau**2) * _comb_ratio(N, theta) * envelope
    else:
        k = L / (eps * tau)
        amp = np.vectorize(lambda kk: _momentum_amplitude_numeric(tp, kk), otypes=[complex])(k)
        out = L / (eps * tau**2) * np.abs(amp) ** 2
    return float(out) if np.ndim(out) == 0 else out


def semiclassical_trace(tp, grid):
    t = grid.times
    pi = np.zeros_like(t)
    pi[1:] = semiclassical_density(tp, t[1:])
    missing = 1.0 - quadrature(t, pi).value
    return ArrivalTimeDensity(grid, pi, float(np.clip(missing, 0.0, 1.0)), label="sc")


def _shift(times, values, delay):
    """values(t - delay) on the same grid, zero before the start."""
    dt = times[1] - times[0]
    steps = delay / dt
    m = int(round(steps))
    out = np.zeros_like(values)
    if abs(steps - m) < 1e-9:
        if m < values.size:
            out[m:] = values[:values.size - m]
        return out
    spline = CubicSpline(times, values, extrapolate=False)
    src = times - delay
    ok = src >= times[0]
    out[ok] = np.nan_to_num(spline(src[ok]))
    return out


def expected_form(single, N, tau0, support_tol=1e-6):
    """Benchmark with N identical peaks: (1/N) sum_{k=0}^{N-1} Pi_1(tau - k tau0).

    ``single`` is the one-packet density, itself peaked at tau0, so the
    result has peaks at tau0, 2 tau0, ..., N tau0.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    t = single.times
    pi = single.pi
    absmass = quadrature(t, np.abs(pi)).value
    outside = (t < 0.5 * tau0) | (t > 1.5 * tau0)
    leak = quadrature(t, np.where(outside, np.abs(pi), 0.0)).value
    if absmass > 0 and leak > support_tol * absmass:
        raise ValueError("single-packet density spills outside one period; peaks would overlap")
    total = np.zeros_like(pi)
    for k in range(N):
        total += _shift(t, pi, k * tau0)
    return ArrivalTimeDensity(single.grid, total / N, single.p_nondetect, label="expected")


class Peak(NamedTuple):
    k: int
    location: float
    height: float


def peak_analysis(d, tau0, N):
    """Highest point of Pi in each window [k tau0 - tau0/2, k tau0 + tau0/2], k = 1..N.

    A parabola through the best sample and its neighbours refines the
    location and height.
    """
    t, pi = d.times, d.pi
    peaks = []
    for k in range(1, int(N) + 1):
        idx = np.nonzero((t >= (k - 0.5) * tau0) & (t <= (k + 0.5) * tau0))[0]
        if idx.size < 3:
            raise ValueError(f"window {k} holds fewer than 3 samples")
        w = pi[idx]
        if np.ptp(w) <= 0:
            raise ValueError(f"window {k} is flat; no peak to locate")
        j = idx[np.argmax(w)]
        loc, height = t[j], pi[j]
        if 0 < j < t.size - 1:
            y0, y1, y2 = pi[j - 1], pi[j], pi[j + 1]
            denom = y0 - 2 * y1 + y2
            if denom < 0:
                off = 0.5 * (y0 - y2) / denom
                loc = t[j] + off * (t[1] - t[0])
                height = y1 - 0.25 * (y0 - y2) * off
        peaks.append(Peak(k, float(loc), float(height)))
    return peaks


def momentum_reconstruction(d, L, epsilon, axis="velocity"):
    """Time-of-flight inversion: density over v_p = L/tau is (L/v_p^2) Pi(L/v_p).

    Returns ``(v_p, density)`` sorted by increasing v_p. With
    ``axis='wavenumber'`` the abscissa is v_p/eps and the density is scaled
    by eps accordingly. The tau = 0 sample is dropped; it must carry no
    density.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    t, pi = d.times, d.pi
    if t[0] <= 0:
        if abs(pi[0]) > _ZERO_TAU_TOL * np.max(np.abs(pi)):
            raise ValueError("density at tau = 0 cannot be mapped to a finite velocity")
        t, pi = t[1:], pi[1:]
    v = L / t
    dens = L / v**2 * pi
    order = np.argsort(v)
    v, dens = v[order], dens[order]
    if axis == "wavenumber":
        return v / epsilon, dens * epsilon
    if axis != "velocity":
        raise ValueError("axis must be 'velocity' or 'wavenumber'")
    return v, dens


def total_variation(x, f, g):
    """0.5 int |f - g| dx on sample points x (trapezoid)."""
    return 0.5 * quadrature(np.asarray(x), np.abs(np.asarray(f) - np.asarray(g))).value


def semiclassical_support(tp, decades=17):
    """Interval of tau outside which the semiclassical envelope is below 10^-decades."""
    p = tp.packet
    w = np.sqrt(decades * np.log(10.0)) * p.epsilon / (p.sigma * p.v)
    lo = tp.tau0 / (1.0 + w)
    hi = tp.tau0 / (1.0 - w) if w < 1 else np.inf
    return lo, hi


def semiclassical_step(tp, tau, per_peak=20):
    """Time step resolving the comb's narrowest features near ``tau``."""
    eps = tp.packet.epsilon
    dtheta = tp.L**2 / (2 * eps * tau**2)
    return np.pi / (tp.N * dtheta) / per_peak


def reconstruction_distance(tp, d):
    """Total-variation gap between the TOF-reconstructed and true velocity densities.

    The change of variables v = L / tau preserves total variation, so the
    distance is taken on the tau axis, where the true density is the exact
    semiclassical one. Inside that density's support a dedicated fine grid
    resolves its comb and ``d`` is spline-interpolated onto it; outside, the
    true density vanishes and only |Pi_d| contributes.
    """
    t, pi = d.times, d.pi
    lo, hi = semiclassical_support(tp)
    lo, hi = max(lo, t[1]), min(hi, t[-1])
    if lo >= hi:
        return 0.5 * quadrature(t, np.abs(pi)).value + 0.5
    n = int(np.ceil((hi - lo) / semiclassical_step(tp, lo))) + 1
    tf = np.linspace(lo, hi, n)
    rec = CubicSpline(t, pi)(tf)
    inside = quadrature(tf, np.abs(rec - semiclassical_density(tp, tf))).value
    rec_inside = quadrature(tf, np.abs(rec)).value
    total_rec = quadrature(t, np.abs(pi)).value
    true_inside = quadrature(tf, semiclassical_density(tp, tf)).value
    # outside the support: |Pi_d - 0| plus any true mass the window missed
    outside = max(total_rec - rec_inside, 0.0) + max(1.0 - true_inside, 0.0)
    return 0.5 * (inside + outside)
