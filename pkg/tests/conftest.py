import pytest

from steklov_fem.geometry import DomainSpec, ProfileSpec
from steklov_fem.mesh import MeshResolution, build_disk_mesh, build_strip_mesh


@pytest.fixture(scope="session")
def strip16():
    return build_strip_mesh(DomainSpec(), MeshResolution(16, 16))


@pytest.fixture(scope="session")
def wavy_strip():
    """alpha = 1, eps = 1/8 triangle wave, 8 columns per period."""
    return build_strip_mesh(DomainSpec(1.0, 1 / 8, ProfileSpec("triangle-wave")), MeshResolution(64, 32))


@pytest.fixture(scope="session")
def small_disk():
    return build_disk_mesh(8, 32)


# criterion number -> (passed, summary); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key:2d}: {text}")
