import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harpipe.goodfeat import (
    StructureTensor,
    detect_good_features,
    min_eigenvalue,
    min_eigenvalue_map,
    spatial_gradients,
    structure_tensor_at,
)

from conftest import make_frame
from oracles import brute_force_good_features


class TestSpatialGradients:
    def test_constant_frame(self):
        ix, iy = spatial_gradients(make_frame(np.full((5, 5), 42, dtype=np.uint8)))
        assert not ix.any() and not iy.any()

    def test_horizontal_ramp(self):
        img = np.tile(np.arange(0, 80, 10, dtype=np.uint8), (5, 1))
        ix, iy = spatial_gradients(make_frame(img))
        assert (ix[:, 1:-1] == 10).all()
        assert not iy.any()
        assert not ix[:, 0].any() and not ix[:, -1].any()

    def test_vertical_step(self):
        img = np.zeros((6, 5), dtype=np.uint8)
        img[3:] = 100
        _, iy = spatial_gradients(make_frame(img))
        assert (iy[2] == 50).all() and (iy[3] == 50).all()
        assert not iy[1].any() and not iy[4].any()

    def test_too_small(self):
        with pytest.raises(ValueError):
            spatial_gradients(make_frame(np.zeros((2, 2), dtype=np.uint8)))


class TestStructureTensor:
    def test_constant_region(self):
        f = make_frame(np.full((7, 7), 9, dtype=np.uint8))
        ix, iy = spatial_gradients(f)
        z = structure_tensor_at(ix, iy, 3, 3, 1)
        assert (z.zxx, z.zxy, z.zyy) == (0.0, 0.0, 0.0)

    def test_horizontal_ramp_window(self):
        img = np.tile(np.arange(0, 140, 20, dtype=np.uint8), (7, 1))
        ix, iy = spatial_gradients(make_frame(img))
        z = structure_tensor_at(ix, iy, 3, 3, 1)
        assert z.zxx == 9 * 20.0**2
        assert z.zxy == 0.0 and z.zyy == 0.0

    def test_out_of_bounds(self):
        f = make_frame(np.zeros((5, 5), dtype=np.uint8))
        ix, iy = spatial_gradients(f)
        with pytest.raises(ValueError):
            structure_tensor_at(ix, iy, 0, 2, 1)

    def test_checkerboard_matches_brute_force(self):
        rng = np.random.default_rng(3)
        tile = np.array([[0, 255], [255, 0]], dtype=np.uint8)
        img = np.tile(tile, (6, 6))
        img[:6, :6] = rng.integers(0, 256, (6, 6))
        f = make_frame(img)
        ix, iy = spatial_gradients(f)
        for (x, y) in [(4, 4), (6, 6), (5, 7)]:
            z = structure_tensor_at(ix, iy, x, y, 2)
            zxx = zxy = zyy = 0.0
            for dy in range(-2, 3):
                for dx in range(-2, 3):
                    gx, gy = ix[y + dy, x + dx], iy[y + dy, x + dx]
                    zxx += gx * gx
                    zxy += gx * gy
                    zyy += gy * gy
            assert (z.zxx, z.zxy, z.zyy) == (zxx, zxy, zyy)
            assert min_eigenvalue(z) > 0

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_positive_semidefinite(self, seed):
        rng = np.random.default_rng(seed)
        f = make_frame(rng.integers(0, 256, (9, 9), dtype=np.uint8))
        ix, iy = spatial_gradients(f)
        z = structure_tensor_at(ix, iy, 4, 4, 2)
        scale = max(z.zxx, z.zyy, 1.0)
        assert z.zxx >= 0 and z.zyy >= 0
        assert z.zxx * z.zyy - z.zxy**2 >= -1e-6 * scale


class TestMinEigenvalue:
    def test_identity(self):
        assert min_eigenvalue(StructureTensor(1, 0, 1)) == 1.0

    def test_diagonal(self):
        assert min_eigenvalue(StructureTensor(2, 0, 5)) == 2.0

    def test_zero(self):
        assert min_eigenvalue(StructureTensor(0, 0, 0)) == 0.0

    @given(st.floats(0, 1e6), st.floats(-1e3, 1e3), st.floats(0, 1e6))
    def test_interlacing(self, zxx, zxy, zyy):
        lam = min_eigenvalue(StructureTensor(zxx, zxy, zyy))
        assert lam <= min(zxx, zyy) + 1e-9 * max(1.0, zxx, zyy)


class TestDetectGoodFeatures:
    def test_uniform_frame_empty(self):
        f = make_frame(np.full((32, 32), 77, dtype=np.uint8))
        assert detect_good_features(f, 10) == []

    def test_white_square_corners(self):
        img = np.zeros((40, 40), dtype=np.uint8)
        img[10:30, 10:30] = 255
        points = detect_good_features(make_frame(img), 4)
        assert len(points) == 4
        corners = {(10, 10), (10, 29), (29, 10), (29, 29)}
        for p in points:
            assert any(abs(p.x - cx) <= 1 and abs(p.y - cy) <= 1
                       for cx, cy in corners)

    def test_max_n_one_is_global_max(self):
        rng = np.random.default_rng(11)
        f = make_frame(rng.integers(0, 256, (24, 24), dtype=np.uint8))
        points = detect_good_features(f, 1)
        lam = min_eigenvalue_map(f)
        assert len(points) == 1
        assert points[0].score == lam.max()

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_sorted_and_spaced(self, seed):
        rng = np.random.default_rng(seed)
        f = make_frame(rng.integers(0, 256, (32, 32), dtype=np.uint8))
        points = detect_good_features(f, 10)
        scores = [p.score for p in points]
        assert scores == sorted(scores, reverse=True)
        for i, p in enumerate(points):
            for q in points[i + 1:]:
                assert (p.x - q.x) ** 2 + (p.y - q.y) ** 2 >= 7.0**2

    @given(st.integers(0, 10_000), st.integers(1, 12))
    @settings(max_examples=25, deadline=None)
    def test_matches_brute_force_exactly(self, seed, max_n):
        rng = np.random.default_rng(seed)
        img = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        points = detect_good_features(make_frame(img), max_n)
        expected = brute_force_good_features(img.tolist(), max_n)
        assert [(p.x, p.y, p.score) for p in points] == expected
