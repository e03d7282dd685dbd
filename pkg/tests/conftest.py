import numpy as np
import pytest

from aerokin.collision import InelasticDiffuse, Resolution

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def inelastic():
    return InelasticDiffuse(1.0)


@pytest.fixture(scope="session")
def coarse():
    """Cheaper grids for pointwise collision integrals."""
    return Resolution(offset_radial=8, offset_theta=10, offset_phi=6, relative_radial=12,
                      relative_theta=10, relative_phi=8, sphere_order=17, patch_radial=12,
                      patch_theta=12, patch_phi=8)
