import numpy as np
import pytest

from antenna_sps import SpaceConfig, SystemParams

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def baseline_values(**overrides) -> SystemParams:
    base = dict(
        kappa1=5.73e11, kappa2=5.76e11, drive=5e11,
        gamma_rad1=6.8e13, gamma_nonrad1=6.8e13, gamma_rad2=1.0e14, gamma_nonrad2=2.2e14,
        gamma_sp_e1=1e8, gamma_sp_e2=1e8, gamma_12=1e7,
        gamma_deph_1e=1e9, gamma_deph_2e=1e9, gamma_deph_12=1e8,
    )
    base.update(overrides)
    return SystemParams(**base)


@pytest.fixture
def baseline():
    return baseline_values()


@pytest.fixture
def small_space():
    return SpaceConfig(2, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_density(rng, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
