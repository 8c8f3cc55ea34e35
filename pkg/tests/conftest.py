import pytest

from steklov import build_disk_mesh, build_cylinder_mesh, build_mobius_mesh


@pytest.fixture(scope="session")
def disk_mesh():
    return build_disk_mesh(0.05)


@pytest.fixture(scope="session")
def coarse_disk_mesh():
    return build_disk_mesh(0.1)


@pytest.fixture(scope="session")
def cylinder_mesh():
    return build_cylinder_mesh(1.0, 1.0, 0.06)


@pytest.fixture(scope="session")
def mobius_mesh():
    return build_mobius_mesh(1.0, 0.06)
