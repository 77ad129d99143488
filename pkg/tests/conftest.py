import mpmath
import numpy as np
import pytest

from toalab.scenario import FIG2, FIG3


def erf_series_mp(z, dps=60):
    """erf by its Maclaurin series in high-precision arithmetic."""
    with mpmath.workdps(dps):
        z = mpmath.mpc(complex(z))
        z2 = z * z
        term = z
        total = z
        n = 0
        tol = mpmath.mpf(10) ** (-dps + 5)
        while True:
            n += 1
            term *= -z2 / n
            add = term / (2 * n + 1)
            total += add
            if abs(add) < tol * max(abs(total), 1):
                break
        return complex(2 / mpmath.sqrt(mpmath.pi) * total)


def disc_points(n, radius, seed):
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


@pytest.fixture(scope="session")
def fig3():
    return FIG3.resolved()


@pytest.fixture(scope="session")
def fig2():
    return FIG2.resolved()


@pytest.fixture(scope="session")
def fig3_train(fig3):
    return fig3.train()


@pytest.fixture(scope="session")
def small_train():
    """Few packets, visible spreading: cheap and non-trivial."""
    from toalab.wavetrain import TrainParams
    return TrainParams.build(N=3, sigma=1.0, L=5.0, v=1.0, epsilon=0.5)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import lines
    out = lines()
    if out:
        terminalreporter.section("acceptance")
        for ln in out:
            terminalreporter.write_line(ln)
