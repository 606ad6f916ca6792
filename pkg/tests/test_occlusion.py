import itertools
import time

import numpy as np
import pytest

from conftest import brute_ray_triangle, random_camera
from rics.camera import CameraModel, primary_hit_map
from rics.geometry import build_bvh, build_mesh, shapes
from rics.occlusion import (
    COVERAGE_BIT,
    OcclusionMap,
    RicsFormatError,
    compute_rics_map,
    default_epsilon,
    from_bytes,
    occlusion_bits,
    pack,
    pack_words,
    popcount,
    read_rics,
    sample_directions,
    to_bytes,
    unpack,
    unpack_words,
    write_rics,
)
from rics.oracle import brute_force_rics_map


# ---------------------------------------------------------------- directions


def test_direction_set_layout():
    ds = sample_directions()
    v = ds.vectors
    assert v.shape == (62, 3) and len(ds) == 62
    np.testing.assert_array_equal(v[0], [0, 0, 1])
    np.testing.assert_array_equal(v[61], [0, 0, -1])
    # theta = 90 ring starts at phi = 0
    i = 1 + 2 * 12
    assert (ds.theta_deg[i], ds.phi_deg[i]) == (90, 0)
    np.testing.assert_array_equal(v[i], [1, 0, 0])
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-15)
    assert np.linalg.norm(v.sum(axis=0)) < 1e-9
    assert len({tuple(x) for x in v}) == 62
    assert np.all(np.diff(ds.theta_deg) >= 0)


def test_ring_order_is_theta_outer_phi_inner():
    ds = sample_directions()
    for k, (t, p) in enumerate(itertools.product((30, 60, 90, 120, 150), range(0, 360, 30))):
        assert (ds.theta_deg[k + 1], ds.phi_deg[k + 1]) == (t, p)
        th, ph = np.radians(t), np.radians(p)
        np.testing.assert_allclose(ds.vectors[k + 1], [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)],
                                   atol=1e-15)


def test_antipodes_are_exact_negations():
    ds = sample_directions()
    seen = set()
    for i in range(62):
        j = ds.antipode(i)
        np.testing.assert_array_equal(ds.vectors[j], -ds.vectors[i])
        assert ds.antipode(j) == i
        seen.add(j)
    assert seen == set(range(62))


def test_direction_set_is_fast():
    sample_directions.cache_clear()
    t0 = time.perf_counter()
    sample_directions()
    assert time.perf_counter() - t0 < 1e-3


def test_directions_ride_the_camera_rotation():
    cam = CameraModel.look_at([0, -3, 0], [0, 0, 0], up=[0, 0, 1])
    w = sample_directions().in_world(cam)
    # camera looks along +y, so camera +z (index 0) is world -y
    np.testing.assert_allclose(w[0], [0, -1, 0], atol=1e-15)


# ---------------------------------------------------------------- pack / unpack


def test_pack_examples():
    zeros = np.zeros(62, dtype=bool)
    assert pack(zeros, False) == 0
    assert pack(zeros, True) == 2 ** 62
    ones = np.ones(62, dtype=bool)
    assert pack(ones, True) == 2 ** 63 - 1
    bits, cov = unpack(2 ** 62 + 0b101)
    assert cov and bits[0] and not bits[1] and bits[2] and bits.sum() == 2


def test_pack_roundtrip_random_patterns():
    rng = np.random.default_rng(0)
    bits = rng.random((100_000, 62)) < rng.random((100_000, 1))
    covered = rng.random(100_000) < 0.8
    words = pack_words(bits, covered)
    assert words.dtype == np.uint64
    assert not np.any(words >> np.uint64(63))
    b2, c2 = unpack_words(words)
    np.testing.assert_array_equal(b2, bits)
    np.testing.assert_array_equal(c2, covered)
    np.testing.assert_array_equal(popcount(words), bits.sum(axis=1))
    for k in range(0, 100_000, 9973):
        assert pack(bits[k], covered[k]) == int(words[k])


def test_unpack_rejects_reserved_bit():
    with pytest.raises(RicsFormatError):
        unpack(2 ** 63)
    with pytest.raises(ValueError):
        pack(np.zeros(61, dtype=bool), True)


# ---------------------------------------------------------------- occlusion_bits


def exhaustive_bits(point, mesh, dirs, eps):
    p0, p1, p2 = mesh.corners()
    t = brute_ray_triangle(np.repeat([point], len(dirs), axis=0), dirs, p0, p1, p2, t_min=eps)
    return np.isfinite(t).any(axis=1)


def test_isolated_triangle_point_off_plane_sees_nothing():
    acc = build_bvh(shapes.single_triangle())
    bits = occlusion_bits([0.25, 0.25, 0.0], acc, sample_directions().vectors, default_epsilon(acc))
    assert not bits.any()
    bits = occlusion_bits([0.2, 0.3, 0.5], acc, sample_directions().vectors, default_epsilon(acc))
    assert bits.sum() > 0  # directly below hits the triangle


def test_point_inside_cube_is_fully_occluded(cube_accel):
    bits = occlusion_bits([0, 0, 0], cube_accel, sample_directions().vectors, default_epsilon(cube_accel))
    assert bits.all()


@pytest.mark.parametrize("point", [[0, 0, 0.5], [0.1, -0.2, 0.5], [0.5, 0.3, 0.1], [-0.25, 0.25, -0.5]])
def test_cube_face_points_match_exhaustive_oracle(cube, cube_accel, point):
    dirs = sample_directions().vectors
    eps = default_epsilon(cube)
    got = occlusion_bits(point, cube_accel, dirs, eps)
    np.testing.assert_array_equal(got, exhaustive_bits(np.asarray(point, float), cube, dirs, eps))


def test_top_face_center_pattern(cube_accel):
    bits = occlusion_bits([0, 0, 0.5], cube_accel, sample_directions().vectors, default_epsilon(cube_accel))
    ds = sample_directions()
    # upper hemisphere free; equator rays run in the face plane and catch the side faces' top edges
    assert not bits[ds.theta_deg < 90].any()
    assert bits[ds.theta_deg >= 90].all()


def test_epsilon_must_be_positive(cube_accel):
    with pytest.raises(ValueError):
        occlusion_bits([0, 0, 0], cube_accel, sample_directions().vectors, 0.0)


# ---------------------------------------------------------------- compute_rics_map


def test_empty_scene_map_is_zero(empty_accel):
    omap = compute_rics_map(CameraModel(np.eye(4), 60.0, 12, 10), empty_accel)
    assert omap.words.shape == (10, 12)
    assert not omap.words.any()


def test_uncovered_pixels_are_zero_and_covered_have_flag(ico3_accel):
    omap = compute_rics_map(random_camera(np.random.default_rng(5), size=48), ico3_accel)
    cov = omap.covered
    assert 0 < cov.sum() < cov.size
    assert not omap.words[~cov].any()
    assert np.all((omap.words[cov] >> np.uint64(COVERAGE_BIT)) == 1)


def test_convexity_on_icosphere(ico3, ico3_accel):
    cam = random_camera(np.random.default_rng(12), size=96)
    omap = compute_rics_map(cam, ico3_accel)
    hits = primary_hit_map(cam, ico3_accel)
    cov = hits.covered
    n_out = ico3.normals[hits.triangle[cov]]
    dots = n_out @ sample_directions().in_world(cam).T
    bits = omap.bits()[cov]
    good = ~np.any((dots > 0.05) & bits, axis=1) & ~np.any((dots < -0.05) & ~bits, axis=1)
    assert good.mean() >= 0.995


def test_oracle_equivalence_small_scenes(cube):
    rng = np.random.default_rng(21)
    for mesh in (shapes.single_triangle(), cube, shapes.random_soup(300, seed=4)):
        acc = build_bvh(mesh)
        for _ in range(3):
            cam = random_camera(rng, center=(mesh.bbox_min + mesh.bbox_max) / 2, size=24)
            assert compute_rics_map(cam, acc) == brute_force_rics_map(cam, mesh)


def test_oracle_with_custom_epsilon(cube, cube_accel):
    cam = random_camera(np.random.default_rng(2), size=20)
    assert compute_rics_map(cam, cube_accel, epsilon_t=0.3) == brute_force_rics_map(cam, cube, epsilon_t=0.3)


def test_thread_count_does_not_change_map(ico3_accel):
    cam = random_camera(np.random.default_rng(13), size=40)
    a = compute_rics_map(cam, ico3_accel, threads=1)
    b = compute_rics_map(cam, ico3_accel, threads=4)
    assert to_bytes(a) == to_bytes(b)


def test_rigid_rotation_keeps_map_bit_identical():
    mesh = shapes.uv_torus(n_major=32, n_minor=16)
    cam = random_camera(np.random.default_rng(14), size=40)
    g = np.eye(4)
    g[:3, :3] = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
    a = compute_rics_map(cam, build_bvh(mesh))
    b = compute_rics_map(cam.with_extrinsic(g @ cam.cam_to_world), build_bvh(mesh.transformed(g)))
    assert a.covered.sum() > 100
    assert a == b


# ---------------------------------------------------------------- file format


def test_rics_file_roundtrip_is_byte_identical(tmp_path, cube_accel):
    omap = compute_rics_map(random_camera(np.random.default_rng(16), size=17), cube_accel)
    p = tmp_path / "m.rics"
    write_rics(omap, p)
    raw = p.read_bytes()
    assert raw[:4] == b"RICS" and len(raw) == 20 + 8 * 17 * 17
    back = read_rics(p)
    assert back == omap
    assert to_bytes(back) == raw


def _bytes_with(words, **hdr):
    import struct

    h = dict(magic=b"RICS", version=1, width=words.shape[1], height=words.shape[0], ndir=62)
    h.update(hdr)
    return struct.pack("<4sIIII", h["magic"], h["version"], h["width"], h["height"], h["ndir"]) + \
        words.astype("<u8").tobytes()


@pytest.mark.parametrize(
    "mutate",
    [
        lambda w: _bytes_with(w, magic=b"RICX"),
        lambda w: _bytes_with(w, version=2),
        lambda w: _bytes_with(w, ndir=64),
        lambda w: _bytes_with(w, width=3),
        lambda w: _bytes_with(w)[:-1],
        lambda w: b"RIC",
        lambda w: _bytes_with(np.full_like(w, np.uint64(1 << 63))),
        lambda w: _bytes_with(np.full_like(w, np.uint64(5))),
    ],
)
def test_malformed_rics_rejected(mutate):
    words = np.full((2, 2), np.uint64(1 << 62), dtype=np.uint64)
    assert from_bytes(_bytes_with(words)).words.shape == (2, 2)
    with pytest.raises(RicsFormatError):
        from_bytes(mutate(words))


def test_occlusion_map_equality():
    w = np.zeros((2, 3), dtype=np.uint64)
    a = OcclusionMap(w, sample_directions())
    assert a == OcclusionMap(w.copy(), sample_directions())
    assert a != OcclusionMap(np.zeros((3, 2), dtype=np.uint64), sample_directions())
    assert a.height == 2 and a.width == 3


def test_degenerate_mesh_default_epsilon():
    m = build_mesh([[0, 0, 0], [0, 0, 0], [0, 0, 0]], [[0, 1, 2]])
    assert default_epsilon(m) > 0
