from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from toalab.wavetrain import (GaussianPacket, TrainParams, complex_width, exponent_coefficients,
                              no_spreading_margin, packet_amplitude, packet_gradient,
                              spatial_domain, train_amplitude, train_gradient,
                              train_momentum_amplitude, train_norm, velocity_density)


def _residual(p, x, t, ht, hx):
    dt = (packet_amplitude(p, x, t + ht) - packet_amplitude(p, x, t - ht)) / (2 * ht)
    dxx = (packet_amplitude(p, x + hx, t) - 2 * packet_amplitude(p, x, t)
           + packet_amplitude(p, x - hx, t)) / hx**2
    return 1j * dt + 0.5 * p.epsilon * dxx


def test_solves_free_schrodinger():
    p = GaussianPacket(sigma=1.0, v=2.0, epsilon=0.3)
    x = np.linspace(-3, 9, 41)
    t = 2.0
    r1 = _residual(p, x, t, 1e-3, 1e-3)
    r2 = _residual(p, x, t, 5e-4, 5e-4)
    # residual is pure truncation error: it falls like h^2
    assert np.max(np.abs(r2)) < 0.3 * np.max(np.abs(r1))
    assert np.max(np.abs(r2)) < 1e-5


def test_initial_state():
    p = GaussianPacket(sigma=2.0, v=1.5, epsilon=0.1)
    x = np.linspace(-8, 8, 101)
    ref = (np.pi * p.sigma**2) ** -0.25 * np.exp(-x**2 / (2 * p.sigma**2) + 1j * p.k0 * x)
    assert np.allclose(packet_amplitude(p, x, 0.0), ref, rtol=1e-14, atol=0)


def test_exponent_coefficients_at_zero():
    p = GaussianPacket(sigma=2.0, v=1.5, epsilon=0.1)
    P, a, b, g = exponent_coefficients(p, 0.0)
    assert a == pytest.approx(1 / 8)
    assert b == pytest.approx(1j * p.k0)
    assert g == 0


def test_complex_width():
    p = GaussianPacket(sigma=2.0, v=1.0, epsilon=0.5)
    assert complex_width(p, 4.0) == pytest.approx(2 + 1j)


@pytest.mark.parametrize("t", [0.0, 50.0, 250.0])
def test_packet_norm(t):
    p = GaussianPacket(sigma=5.0, v=1.0, epsilon=0.01)
    w = abs(complex_width(p, t))
    x = np.linspace(p.v * t - 14 * w, p.v * t + 14 * w, 20001)
    assert np.sum(np.abs(packet_amplitude(p, x, t)) ** 2) * (x[1] - x[0]) == pytest.approx(1, abs=1e-8)


def test_gradient_matches_finite_difference():
    p = GaussianPacket(sigma=1.0, v=1.0, epsilon=0.2)
    x = np.linspace(-2, 4, 13)
    h = 1e-5
    fd = (packet_amplitude(p, x + h, 1.3) - packet_amplitude(p, x - h, 1.3)) / (2 * h)
    assert np.allclose(packet_gradient(p, x, 1.3), fd, rtol=1e-8, atol=1e-10)


def test_centre_moves_with_v(small_train):
    p = small_train.packet
    x = np.linspace(-5, 15, 20001)
    t = 3.0
    rho = np.abs(packet_amplitude(p, x, t)) ** 2
    assert np.sum(x * rho) / np.sum(rho) == pytest.approx(p.v * t, abs=1e-8)


def test_translation_covariance():
    p = GaussianPacket(sigma=1.0, v=1.0, epsilon=0.2)
    x = np.linspace(-3, 3, 31)
    shifted = replace(p, x0=2.5)
    assert np.allclose(packet_amplitude(shifted, x + 2.5, 1.7), packet_amplitude(p, x, 1.7),
                       rtol=1e-13, atol=0)


def test_train_is_normalised_sum(small_train):
    x = np.linspace(-15, 10, 11)
    manual = sum(packet_amplitude(small_train.packet, x + k * small_train.L, 1.0)
                 for k in range(small_train.N)) / np.sqrt(small_train.N)
    assert np.allclose(train_amplitude(small_train, x, 1.0), manual)
    g = sum(packet_gradient(small_train.packet, x + k * small_train.L, 1.0)
            for k in range(small_train.N)) / np.sqrt(small_train.N)
    assert np.allclose(train_gradient(small_train, x, 1.0), g)


def _overlap_norm(tp):
    """Exact train norm: 1 + (2/N) sum_{j<k} Re <phi_j|phi_k>, constant in time."""
    p = tp.packet
    extra = 0.0
    for j in range(tp.N):
        for k in range(j + 1, tp.N):
            d = (k - j) * tp.L
            extra += np.exp(-d**2 / (4 * p.sigma**2)) * np.cos(p.k0 * d)
    return 1.0 + 2.0 * extra / tp.N


@pytest.mark.parametrize("t", [0.0, 1.0, 10.0])
def test_train_norm_includes_overlap(small_train, t):
    # packets 5 sigma apart overlap, so the 1/sqrt(N) sum is not unit norm
    expected = _overlap_norm(small_train)
    assert abs(expected - 1) > 1e-3
    assert train_norm(small_train, t) == pytest.approx(expected, abs=1e-10)


def test_train_norm_fig3(fig3_train):
    for t in (0.0, fig3_train.tau0, 5 * fig3_train.tau0):
        assert train_norm(fig3_train, t) == pytest.approx(1.0, abs=1e-8)


def test_momentum_amplitude_is_fourier_transform(small_train):
    tp = small_train
    lo, hi = spatial_domain(tp)
    x = np.linspace(lo, hi, 40001)
    psi0 = train_amplitude(tp, x, 0.0)
    for k in (tp.packet.k0 - 1.0, tp.packet.k0, tp.packet.k0 + 0.7):
        ft = np.sum(psi0 * np.exp(-1j * k * x)) * (x[1] - x[0]) / np.sqrt(2 * np.pi)
        assert ft == pytest.approx(train_momentum_amplitude(tp, k), abs=1e-10)


def test_velocity_density_parseval(small_train):
    p = small_train.packet
    v = np.linspace(p.v - 12 * p.epsilon / p.sigma, p.v + 12 * p.epsilon / p.sigma, 200001)
    mass = integrate.trapezoid(velocity_density(small_train, v), v)
    assert mass == pytest.approx(_overlap_norm(small_train), abs=1e-8)


def test_no_spreading_margin(fig3_train):
    assert no_spreading_margin(fig3_train) == pytest.approx(0.2)


def test_phase_relation_small_k(fig3_train):
    # one period later the packet has moved by L and picked up exp(i v L / 2 eps)
    tp = fig3_train
    p = tp.packet
    x = np.linspace(-3, 3, 301) * p.sigma
    ref = packet_amplitude(p, x, 0.0)
    for k in (1, 2):
        got = packet_amplitude(p, x + k * tp.L, k * tp.tau0)
        pred = ref * np.exp(1j * k * p.v * tp.L / (2 * p.epsilon))
        assert np.max(np.abs(got - pred)) / np.max(np.abs(ref)) <= 0.05


@pytest.mark.parametrize("kw", [dict(sigma=0, v=1, epsilon=1), dict(sigma=1, v=1, epsilon=-1)])
def test_packet_validation(kw):
    with pytest.raises(ValueError):
        GaussianPacket(**kw)


@pytest.mark.parametrize("N,L,v", [(0, 1, 1), (2, -1, 1), (2, 1, -1), (1.5, 1, 1)])
def test_train_validation(N, L, v):
    with pytest.raises(ValueError):
        TrainParams(GaussianPacket(1.0, v, 1.0), N, L)


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        packet_amplitude(GaussianPacket(1.0, 1.0, 1.0), 0.0, -1.0)


def test_single_and_with_n(fig3_train):
    assert fig3_train.single().N == 1
    assert fig3_train.with_N(3).N == 3
    assert fig3_train.tau0 == 50.0


@given(st.floats(0.3, 3), st.floats(0.2, 3), st.floats(0.05, 2), st.floats(0, 10))
@settings(max_examples=50, deadline=None)
def test_density_is_gaussian_of_growing_width(sigma, v, eps, t):
    p = GaussianPacket(sigma, v, eps)
    w = abs(complex_width(p, t))
    y = np.array([0.0, 0.5, 1.0, 2.0]) * w
    rho = np.abs(packet_amplitude(p, v * t + y, t)) ** 2
    ref = np.exp(-(y / w) ** 2) / (np.sqrt(np.pi) * w)
    assert np.allclose(rho, ref, rtol=1e-10)
