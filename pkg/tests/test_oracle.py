import csv

import numpy as np
import pytest

from toalab import _backend
from toalab.halfline import psi_bar
from toalab.oracle import (Grid1D, GridState, ReflectionError, dump_snapshot, evolve_crank_nicolson,
                           flux_at, l2_error, mean_energy, with_dt)
from toalab.toa import flux_density
from toalab.wavetrain import GaussianPacket, TrainParams, packet_amplitude, train_amplitude

BACKENDS = ["numpy"] + (["cython"] if _backend.BACKEND == "cython" else [])


@pytest.fixture(scope="module")
def slow_packet():
    # k0 = 4: cheap to resolve, still a moving carrier
    return TrainParams.build(N=1, sigma=1.0, L=5.0, v=2.0, epsilon=0.5)


def _state(tp, dx, dt, boundary="periodic_far_field", order=4):
    g = Grid1D.for_train(tp, dx, dt, boundary, order)
    return GridState.from_function(g, lambda x: train_amplitude(tp, x, 0.0))


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("boundary", ["periodic_far_field", "dirichlet_at_L"])
@pytest.mark.parametrize("order", [2, 4])
def test_unitary(slow_packet, backend, boundary, order):
    s = _state(slow_packet, 0.05, 0.05, boundary, order)
    n0 = s.norm()
    out = evolve_crank_nicolson(s, 2.0, 0.5, backend=backend)
    assert abs(out.norm() - n0) <= 1e-12
    assert out.t == 2.0


def test_backends_agree(slow_packet):
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    for boundary in ("periodic_far_field", "dirichlet_at_L"):
        s = _state(slow_packet, 0.02, 0.02, boundary)
        a = evolve_crank_nicolson(s, 1.0, 0.5, backend="numpy")
        b = evolve_crank_nicolson(s, 1.0, 0.5, backend="cython")
        assert np.max(np.abs(a.psi - b.psi)) <= 1e-12


def test_plane_wave_is_stationary_on_periodic_grid():
    g = Grid1D(0.0, 2 * np.pi, 64, 0.01)
    s = GridState.from_function(g, lambda x: np.exp(3j * x))
    out = evolve_crank_nicolson(s, 1.0, 0.7, check_edges=False)
    ratio = out.psi / s.psi
    assert np.allclose(np.abs(ratio), 1.0, atol=1e-12)
    assert np.allclose(ratio, ratio[0], atol=1e-12)
    # phase close to the continuum eps k^2 t / 2
    assert np.angle(ratio[0]) == pytest.approx(np.angle(np.exp(-0.5j * 0.7 * 9)), abs=2e-3)


def test_converges_to_analytic(slow_packet):
    p = slow_packet.packet
    errs = []
    for dx in (0.04, 0.02):
        s = _state(slow_packet, dx, dx / 4)
        out = evolve_crank_nicolson(s, 2.0, p.epsilon)
        errs.append(l2_error(out, lambda x: packet_amplitude(p, x, 2.0)))
    assert errs[1] < errs[0] / 3.5
    assert errs[1] < 2e-4


def test_second_order_in_dx_without_compact_operator(slow_packet):
    p = slow_packet.packet
    errs = []
    for dx in (0.04, 0.02):
        s = _state(slow_packet, dx, 0.002, order=2)
        out = evolve_crank_nicolson(s, 1.0, p.epsilon)
        errs.append(l2_error(out, lambda x: packet_amplitude(p, x, 1.0)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)


def test_dirichlet_matches_image_method():
    tp = TrainParams.build(N=2, sigma=1.0, L=5.0, v=2.0, epsilon=0.5)
    t = tp.tau0 + 1.0  # first packet in the middle of its reflection
    errs = []
    for dx in (0.02, 0.01):
        s = _state(tp, dx, dx / 2, boundary="dirichlet_at_L")
        out = evolve_crank_nicolson(s, t, 0.5)
        errs.append(l2_error(out, lambda x: psi_bar(tp, np.minimum(x, tp.L), t)))
    # dt-limited: second order in the joint refinement
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)
    assert errs[1] <= 2e-4


def test_flux_at_matches_analytic(slow_packet):
    p = slow_packet.packet
    t = 2.0
    s = _state(slow_packet, 0.01, 0.0025)
    out = evolve_crank_nicolson(s, t, p.epsilon)
    got = flux_at(out, slow_packet.L, p.epsilon)
    assert got == pytest.approx(float(flux_density(slow_packet, t)), rel=1e-4)


def test_flux_at_edge_rejected():
    g = Grid1D(0.0, 1.0, 11, 0.1)
    s = GridState(g, np.ones(11, dtype=complex))
    with pytest.raises(ValueError):
        flux_at(s, 0.05, 1.0)


def test_reflection_detected():
    p = GaussianPacket(sigma=1.0, v=2.0, epsilon=0.5)
    g = Grid1D(-10.0, 10.0, 800, 0.01)
    s = GridState.from_function(g, lambda x: packet_amplitude(p, x, 0.0))
    with pytest.raises(ReflectionError):
        evolve_crank_nicolson(s, 6.0, 0.5, check_every=20)


def test_step_guard():
    g = Grid1D(0.0, 1.0, 10, 1e-9)
    s = GridState.from_function(g, lambda x: np.exp(-((x - 0.5) * 10) ** 2))
    with pytest.raises(OverflowError):
        evolve_crank_nicolson(s, 1.0, 1.0)


def test_no_backwards_evolution(slow_packet):
    s = _state(slow_packet, 0.05, 0.05)
    with pytest.raises(ValueError):
        evolve_crank_nicolson(s, -1.0, 0.5)
    assert evolve_crank_nicolson(s, 0.0, 0.5) is s


def test_mean_energy():
    p = GaussianPacket(sigma=1.0, v=2.0, epsilon=0.5)
    g = Grid1D(-10.0, 10.0, 4000, 0.01)
    s = GridState.from_function(g, lambda x: packet_amplitude(p, x, 0.0))
    exact = 0.5 * p.epsilon * (p.k0**2 + 0.5 / p.sigma**2)
    assert mean_energy(s, p.epsilon) == pytest.approx(exact, rel=1e-3)


def test_grid_geometry():
    g = Grid1D(0.0, 1.0, 10, 0.1)
    assert g.dx == pytest.approx(0.1) and g.x[-1] < 1.0
    d = Grid1D(0.0, 1.0, 11, 0.1, boundary="dirichlet_at_L")
    assert d.dx == pytest.approx(0.1) and d.x[-1] == 1.0
    assert d.courant(2.0) == pytest.approx(2.0 * 0.1 / 0.01)
    assert with_dt(d, 0.5).dt == 0.5


@pytest.mark.parametrize("kw", [dict(x_max=-1.0), dict(n_x=2), dict(dt=0.0), dict(boundary="open"),
                                dict(order=3)])
def test_grid_validation(kw):
    args = dict(x_min=0.0, x_max=1.0, n_x=10, dt=0.1)
    args.update(kw)
    with pytest.raises(ValueError):
        Grid1D(**args)


def test_state_validation():
    with pytest.raises(ValueError):
        GridState(Grid1D(0.0, 1.0, 10, 0.1), np.zeros(9))


def test_dirichlet_nodes_pinned(slow_packet):
    s = _state(slow_packet, 0.05, 0.05, boundary="dirichlet_at_L")
    assert s.psi[0] == 0 and s.psi[-1] == 0
    out = evolve_crank_nicolson(s, 1.0, 0.5)
    assert out.psi[0] == 0 and out.psi[-1] == 0


def test_snapshot_roundtrip(tmp_path, slow_packet):
    s = _state(slow_packet, 0.1, 0.1)
    path = tmp_path / "snap.csv"
    dump_snapshot(s, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "re", "im"]
    data = np.array(rows[1:], dtype=float)
    assert np.array_equal(data[:, 0], s.grid.x)
    assert np.array_equal(data[:, 1] + 1j * data[:, 2], s.psi)


def test_mass_left_of(slow_packet):
    s = _state(slow_packet, 0.01, 0.01)
    # x = 0 is a node and is excluded: half of its cell is missing
    rho0 = abs(train_amplitude(slow_packet, 0.0, 0.0)) ** 2
    assert s.mass_left_of(0.0) + 0.5 * rho0 * s.grid.dx == pytest.approx(0.5, abs=1e-6)
    assert s.edge_mass() < 1e-12
