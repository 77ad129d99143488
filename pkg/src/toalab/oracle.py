"""Grid Schrodinger solver used to cross-check the analytic amplitudes.

Crank-Nicolson in Cayley form, so every step is exactly unitary in exact
arithmetic. The default spatial operator is the compact fourth-order
(Numerov) Laplacian ``M^{-1} delta^2 / h^2`` with ``M = 1 + delta^2/12``;
both ``M`` and ``delta^2`` are tridiagonal and commute, so a step costs one
tridiagonal solve and unitarity survives. ``order=2`` drops ``M``.

Fast carriers (k0 = v/eps of order 100) make the plain Cayley phase error
large, so the state is advanced in a frame rotating at a reference
frequency close to its mean energy and the phase is restored afterwards.
The only effect is a global phase; dynamics and densities are untouched.

Nothing in the production pipeline depends on this module.
"""
import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from ._backend import TridiagonalSolver, tridiag_matvec

BOUNDARIES = ("periodic_far_field", "dirichlet_at_L")
MAX_STEPS = 10_000_000
EDGE_FRACTION = 0.02
EDGE_MASS_LIMIT = 1e-6


class ReflectionError(RuntimeError):
    """Probability reached an artificial domain edge."""


@dataclass(frozen=True)
class Grid1D:
    """Spatial grid plus the largest allowed time step.

    ``dirichlet_at_L`` places the wall at ``x_max`` (psi pinned to zero there)
    and also zeroes the far-field node at ``x_min``. ``periodic_far_field``
    wraps ``x_max`` onto ``x_min``; nodes exclude the duplicate endpoint.

    Crank-Nicolson is unconditionally stable, so ``dt`` is set by accuracy,
    not by the explicit-scheme limit ``dx^2 / (2 eps)``; see ``courant``.
    """

    x_min: float
    x_max: float
    n_x: int
    dt: float
    boundary: str = "periodic_far_field"
    order: int = 4

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n_x < 3:
            raise ValueError("n_x must be >= 3")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")
        if self.order not in (2, 4):
            raise ValueError("order must be 2 or 4")

    @property
    def periodic(self):
        return self.boundary == "periodic_far_field"

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.n_x, endpoint=not self.periodic)

    @property
    def dx(self):
        span = self.x_max - self.x_min
        return span / self.n_x if self.periodic else span / (self.n_x - 1)

    def courant(self, epsilon):
        """eps dt / dx^2; an explicit scheme would need this below 1/2."""
        return epsilon * self.dt / self.dx**2

    @classmethod
    def for_train(cls, tp, dx, dt, boundary="periodic_far_field", order=4):
        """Domain [-(N-1)L - 8 sigma, L + v N tau0 + 8 sigma] (or up to L with the wall)."""
        p = tp.packet
        lo = -(tp.N - 1) * tp.L - 8 * p.sigma
        hi = tp.L if boundary == "dirichlet_at_L" else tp.L + p.v * tp.N * tp.tau0 + 8 * p.sigma
        if boundary == "dirichlet_at_L":
            n = int(round((hi - lo) / dx)) + 1
        else:
            n = int(round((hi - lo) / dx))
        return cls(lo, hi, n, dt, boundary, order)


@dataclass(frozen=True)
class GridState:
    grid: Grid1D
    psi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=np.complex128)
        if psi.shape != (self.grid.n_x,):
            raise ValueError("psi must have one value per grid node")
        object.__setattr__(self, "psi", psi)

    @classmethod
    def from_function(cls, grid, f, t=0.0):
        """Sample ``f(x)`` on the grid, zeroing any Dirichlet nodes."""
        psi = np.asarray(f(grid.x), dtype=np.complex128).copy()
        if not grid.periodic:
            psi[0] = psi[-1] = 0.0
        return cls(grid, psi, t)

    def norm(self):
        return math.sqrt(float(np.sum(np.abs(self.psi) ** 2)) * self.grid.dx)

    def mass_left_of(self, a):
        """Probability on nodes with x < a (rectangle rule)."""
        x = self.grid.x
        return float(np.sum(np.abs(self.psi[x < a]) ** 2)) * self.grid.dx

    def edge_mass(self):
        """Probability within EDGE_FRACTION of each artificial edge."""
        g = self.grid
        w = EDGE_FRACTION * (g.x_max - g.x_min)
        dens = np.abs(self.psi) ** 2 * g.dx
        x = g.x
        left = float(np.sum(dens[x < g.x_min + w]))
        right = float(np.sum(dens[x > g.x_max - w])) if g.periodic else 0.0
        return left + right


def mean_energy(state, epsilon):
    """<H> = (eps/2) int |psi'|^2 / int |psi|^2, by finite differences."""
    psi = state.psi
    nrm = float(np.sum(np.abs(psi) ** 2))
    if nrm == 0:
        return 0.0
    dpsi = np.diff(psi) / state.grid.dx
    return 0.5 * epsilon * float(np.sum(np.abs(dpsi) ** 2)) / nrm


class _Stepper:
    """One Cayley step ``(Mf - i a M - i b D) u' = (Mf + i a M + i b D) u``."""

    def __init__(self, grid, epsilon, dt, omega, backend):
        n = grid.n_x if grid.periodic else grid.n_x - 2
        self.n = n
        self.periodic = grid.periodic
        b = epsilon * dt / (4.0 * grid.dx**2)  # kinetic half-step weight
        a = omega * dt / 2.0                    # reference-frame half-step weight
        if grid.order == 4:
            m_diag, m_off = 10.0 / 12.0, 1.0 / 12.0
        else:
            m_diag, m_off = 1.0, 0.0
        # H' = -(eps/2) M^-1 delta^2/h^2 - omega; multiply through by M
        self.l_diag = m_diag * (1 - 1j * a) + 2j * b
        self.l_off = m_off * (1 - 1j * a) - 1j * b
        self.r_diag = m_diag * (1 + 1j * a) - 2j * b
        self.r_off = m_off * (1 + 1j * a) + 1j * b
        self.backend = backend
        self.rhs = np.empty(n, dtype=np.complex128)
        if self.periodic:
            # cyclic matrix = T + u w^T (Sherman-Morrison), gamma = -diag
            g = -self.l_diag
            diag = np.full(n, self.l_diag, dtype=np.complex128)
            diag[0] -= g
            diag[-1] -= self.l_off * self.l_off / g
            self.solver = TridiagonalSolver(diag, self.l_off, n, backend=backend)
            u = np.zeros(n, dtype=np.complex128)
            u[0], u[-1] = g, self.l_off
            self.w0, self.w1 = 1.0, self.l_off / g
            z = self.solver.solve_inplace(u)
            self.zfac = 1.0 + self.w0 * z[0] + self.w1 * z[-1]
            # z decays geometrically from both ends; keeping only its
            # significant entries avoids slow subnormal arithmetic
            self.z_idx = np.nonzero(np.abs(z) > 1e-30 * np.abs(z).max())[0]
            self.z = z[self.z_idx]
        else:
            self.solver = TridiagonalSolver(self.l_diag, self.l_off, n, backend=backend)

    def __call__(self, u):
        """Return the advanced state; ``u``'s buffer is recycled."""
        rhs = self.rhs
        tridiag_matvec(self.r_diag, self.r_off, u, rhs, backend=self.backend)
        if self.periodic:
            rhs[0] += self.r_off * u[-1]
            rhs[-1] += self.r_off * u[0]
            self.solver.solve_inplace(rhs)
            coef = (self.w0 * rhs[0] + self.w1 * rhs[-1]) / self.zfac
            rhs[self.z_idx] -= coef * self.z
        else:
            self.solver.solve_inplace(rhs)
        self.rhs = u
        return rhs


def evolve_crank_nicolson(s, t_target, epsilon, omega_ref=None, backend=None,
                          check_every=200, check_edges=True):
    """Advance ``s`` to ``t_target`` with unitary Crank-Nicolson steps.

    Parameters
    ----------
    s : GridState
    t_target : float
        Final time, ``>= s.t``. The step is shrunk so the run lands on it exactly.
    epsilon : float
        hbar/m.
    omega_ref : float, optional
        Rotating-frame frequency; defaults to the state's mean energy.
    check_every : int
        Steps between edge-contamination checks.
    check_edges : bool
        Disable for states that are meant to wrap around a periodic domain.

    Raises
    ------
    ReflectionError
        If more than ``EDGE_MASS_LIMIT`` of probability sits next to an
        artificial edge.
    """
    if t_target < s.t:
        raise ValueError("t_target must not precede the state time")
    g = s.grid
    span = t_target - s.t
    n_steps = int(math.ceil(span / g.dt - 1e-9)) if span > 0 else 0
    if n_steps > MAX_STEPS:
        raise OverflowError(f"{n_steps} steps exceed the guard of {MAX_STEPS}")
    if n_steps == 0:
        return s
    dt = span / n_steps
    if omega_ref is None:
        omega_ref = mean_energy(s, epsilon)
    step = _Stepper(g, epsilon, dt, omega_ref, backend)
    psi = s.psi.copy()
    u = psi if g.periodic else psi[1:-1].copy()
    for i in range(1, n_steps + 1):
        u = step(u)
        if g.periodic:
            psi = u
        if check_edges and (i % check_every == 0 or i == n_steps):
            if not g.periodic:
                psi[1:-1] = u
            probe = GridState(g, psi, s.t)
            if probe.edge_mass() > EDGE_MASS_LIMIT:
                raise ReflectionError(f"edge mass {probe.edge_mass():.3g} at step {i}")
    if not g.periodic:
        psi[1:-1] = u
        psi[0] = psi[-1] = 0.0
    psi *= np.exp(-1j * omega_ref * span)
    return GridState(g, psi, t_target)


def _local_fit(state, x):
    """Value and slope at ``x`` from the quartic through the 5 nearest nodes."""
    g = state.grid
    j = int(round((x - g.x_min) / g.dx))
    if j < 2 or j > g.n_x - 3:
        raise ValueError("x must lie at least 2 cells inside the grid")
    idx = np.arange(j - 2, j + 3)
    s = (g.x[idx] - x) / g.dx
    coef = np.polynomial.polynomial.polyfit(s, state.psi[idx], 4)
    return coef[0], coef[1] / g.dx


def flux_at(s, x, epsilon):
    """eps Im[psi* dpsi/dx] at ``x`` with fourth-order accurate differences."""
    val, slope = _local_fit(s, x)
    return float(epsilon * np.imag(np.conj(val) * slope))


def l2_error(s, reference):
    """sqrt(sum |psi - ref|^2 dx) against a callable or array on the same nodes."""
    ref = reference(s.grid.x) if callable(reference) else np.asarray(reference)
    return math.sqrt(float(np.sum(np.abs(s.psi - ref) ** 2)) * s.grid.dx)


def dump_snapshot(s, path):
    """Write x, Re psi, Im psi with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "re", "im"])
        for xi, pv in zip(s.grid.x, s.psi):
            w.writerow([f"{xi:.17g}", f"{pv.real:.17g}", f"{pv.imag:.17g}"])


def with_dt(grid, dt):
    return replace(grid, dt=dt)
