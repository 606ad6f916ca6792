import numpy as np
import pytest

from rics.camera import CameraModel
from rics.geometry import build_bvh, build_mesh, shapes


def random_camera(rng, center=(0.0, 0.0, 0.0), dist=(3.0, 5.0), size=64, vfov=(35.0, 55.0)):
    """Camera on a random sphere point looking (roughly) at ``center``."""
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-6:
            break
    eye = np.asarray(center) + v / n * rng.uniform(*dist)
    target = np.asarray(center) + rng.uniform(-0.15, 0.15, size=3)
    up = rng.normal(size=3)
    fwd = (target - eye) / np.linalg.norm(target - eye)
    if np.linalg.norm(np.cross(fwd, up / np.linalg.norm(up))) < 0.1:
        up = np.array([0.0, 0.0, 1.0]) if abs(fwd[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    return CameraModel.look_at(eye, target, up, rng.uniform(*vfov), size, size)


def brute_ray_triangle(o, d, p0, p1, p2, t_min=0.0, t_max=np.inf):
    """Vectorized per-triangle intersection for many rays against all triangles.

    Returns the (n_rays, n_tri) matrix of hit distances (inf on miss). Uses the
    same determinant test conventions as the library (|det| < 1e-12 is a miss,
    open interval on t) but is written in plain numpy.
    """
    o = np.asarray(o, dtype=np.float64)[:, None, :]
    d = np.asarray(d, dtype=np.float64)[:, None, :]
    e1 = (p1 - p0)[None]
    e2 = (p2 - p0)[None]
    px = d[..., 1] * e2[..., 2] - d[..., 2] * e2[..., 1]
    py = d[..., 2] * e2[..., 0] - d[..., 0] * e2[..., 2]
    pz = d[..., 0] * e2[..., 1] - d[..., 1] * e2[..., 0]
    det = e1[..., 0] * px + e1[..., 1] * py + e1[..., 2] * pz
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / det
        s = o - p0[None]
        u = (s[..., 0] * px + s[..., 1] * py + s[..., 2] * pz) * inv
        qx = s[..., 1] * e1[..., 2] - s[..., 2] * e1[..., 1]
        qy = s[..., 2] * e1[..., 0] - s[..., 0] * e1[..., 2]
        qz = s[..., 0] * e1[..., 1] - s[..., 1] * e1[..., 0]
        v = (d[..., 0] * qx + d[..., 1] * qy + d[..., 2] * qz) * inv
        t = (e2[..., 0] * qx + e2[..., 1] * qy + e2[..., 2] * qz) * inv
        ok = (np.abs(det) >= 1e-12) & (u >= 0) & (u <= 1) & (v >= 0) & (u + v <= 1) & (t > t_min) & (t < t_max)
    return np.where(ok, t, np.inf)


@pytest.fixture(scope="session")
def ico3():
    return shapes.icosphere(3)


@pytest.fixture(scope="session")
def ico3_accel(ico3):
    return build_bvh(ico3)


@pytest.fixture(scope="session")
def cube():
    return shapes.unit_cube()


@pytest.fixture(scope="session")
def cube_accel(cube):
    return build_bvh(cube)


@pytest.fixture(scope="session")
def empty_accel():
    # a single zero-area triangle: every query misses
    return build_bvh(build_mesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]]))


# ---------------------------------------------------------------- acceptance reporting

_CRITERIA: list[tuple[str, bool, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion listed in the run summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        _CRITERIA.append((mark.args[0], rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        terminalreporter.write_line(f"{line}  ({detail})" if detail else line)
