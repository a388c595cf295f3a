import numpy as np
import pytest

from levelset_topopt.grid import build_grid_map, build_mesh


@pytest.fixture
def unit_mesh():
    return build_mesh(1.0, 1.0, 1, 1)


@pytest.fixture
def small_mesh():
    mesh = build_mesh(2.0, 1.0, 4, 2)
    return mesh, build_grid_map(mesh)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_force_tags(mesh, phi_mesh):
    """Tag oracle: loop over triangles and test each vertex sign."""
    tags = []
    for tri in mesh.triangles:
        tags.append(1 if all(phi_mesh[v] < 0 for v in tri) else 0)
    return np.array(tags)


def polygon_area(pts):
    x, y = np.asarray(pts).T
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


# acceptance criteria report --------------------------------------------------

_CRITERIA: dict[int, tuple[bool, str]] = {}


def report(number: int, passed: bool, detail: str) -> bool:
    """Record the outcome of an acceptance criterion; returns ``passed``."""
    _CRITERIA[number] = (bool(passed), detail)
    print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        passed, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
