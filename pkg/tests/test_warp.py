"""Tests for coarse view synthesis (forward warping) and hole statistics."""

import pytest
import numpy as np

from panowarp.errors import InputValidationError, InvalidDepthError
from panowarp.models import CameraPose
from panowarp.rasters import DepthMap, EquirectImage, HoleMask
from panowarp.warp import (
    HOLE_VALUE,
    composite_replace,
    cvs_warp,
    hole_ratio,
    hole_ratio_sweep,
    splat_points,
    warp_mask,
    warp_points,
)
from panowarp.sphere import pixel_directions
from panowarp.timing import benchmark_warp

from oracles import reference_warp, render_room


@pytest.fixture
def bumpy_scene():
    """Small panorama whose depth varies, so splats collide and occlude."""
    rng = np.random.default_rng(3)
    image = rng.integers(0, 256, size=(12, 24, 3), dtype=np.uint8)
    ys, xs = np.mgrid[0:12, 0:24]
    depth = (1.0 + 0.4 * np.sin(xs * 0.7) * np.cos(ys * 0.5)).astype(np.float32)
    depth[4:7, 5:9] = 0.45
    return EquirectImage(image), DepthMap(depth)


class TestCvsWarp:
    """Test cvs_warp."""

    def test_zero_pose_is_identity(self, room):
        """Test warping to the same viewpoint reproduces the input."""
        image, depth = room
        result = cvs_warp(image, depth, CameraPose())

        np.testing.assert_array_equal(result.image.data, image.data)
        np.testing.assert_allclose(result.depth.data, depth.data, rtol=1e-6)
        assert result.hole_ratio == 0.0

    def test_matches_scalar_reference(self, bumpy_scene):
        """Test the vectorized kernel agrees with a per-pixel loop."""
        image, depth = bumpy_scene
        pose = (0.05, 0.02, -0.03)
        result = cvs_warp(image, depth, pose)
        ref_img, ref_depth, ref_mask = reference_warp(image.data, depth.data, pose)

        np.testing.assert_array_equal(result.mask.data, ref_mask)
        np.testing.assert_array_equal(result.image.data, ref_img)
        np.testing.assert_allclose(result.depth.data, ref_depth, rtol=1e-6)

    def test_holes_are_marked_consistently(self, room):
        """Test hole pixels are white with zero depth, observed pixels are not."""
        image, depth = room
        result = cvs_warp(image, depth, (0.3, 0.0, 0.0))
        holes = result.mask.data.astype(bool)

        assert holes.any()
        assert np.all(result.image.data[holes] == HOLE_VALUE)
        assert np.all(result.depth.data[holes] == 0.0)
        assert np.all(result.depth.data[~holes] > 0.0)

    def test_thread_count_does_not_change_result(self, bumpy_scene):
        """Test chunked execution is deterministic across thread counts."""
        image, depth = bumpy_scene
        single = cvs_warp(image, depth, (0.1, 0.0, 0.05), threads=1)
        multi = cvs_warp(image, depth, (0.1, 0.0, 0.05), threads=5)

        np.testing.assert_array_equal(single.image.data, multi.image.data)
        np.testing.assert_array_equal(single.depth.data, multi.depth.data)
        np.testing.assert_array_equal(single.mask.data, multi.mask.data)

    def test_warped_depth_matches_ground_truth(self):
        """Test new depths equal the true distances from the moved camera."""
        image, depth = render_room((0.0, 0.0, 0.0), 128, 64)
        pose = (0.1, 0.0, 0.0)
        result = cvs_warp(image, depth, pose)
        _, truth = render_room(pose, 128, 64)
        known = result.mask.data == 0

        # Nearest-pixel splatting shifts samples by at most half a pixel.
        np.testing.assert_allclose(result.depth.data[known], truth.data[known], rtol=0.03)

    def test_near_surface_wins_collisions(self):
        """Test the z-buffer keeps the nearest surface."""
        depth = np.full((16, 32), 2.0, dtype=np.float32)
        depth[6:10, 2:6] = 0.3
        image = np.zeros((16, 32, 3), dtype=np.uint8)
        image[6:10, 2:6] = (255, 0, 0)
        result = cvs_warp(EquirectImage(image), DepthMap(depth), (0.05, 0.0, 0.0))

        near = result.depth.data < 1.0
        assert near.any()
        assert np.all(result.image.data[near] == (255, 0, 0))

    def test_size_mismatch_rejected(self, room):
        """Test image and depth must share dimensions."""
        image, _ = room
        with pytest.raises(InputValidationError):
            cvs_warp(image, DepthMap(np.ones((16, 32), dtype=np.float32)), (0.1, 0, 0))

    def test_non_positive_depth_rejected(self, room):
        """Test zero depth in the source is refused."""
        image, depth = room
        data = depth.data.copy()
        data[0, 0] = 0.0
        with pytest.raises(InvalidDepthError):
            cvs_warp(image, DepthMap(data), (0.1, 0, 0))

    def test_bad_pose_rejected(self, room):
        """Test the pose needs three finite components."""
        image, depth = room
        with pytest.raises(InputValidationError):
            cvs_warp(image, depth, (0.1, 0.0))


class TestHoleStatistics:
    """Test warp_mask, hole_ratio and sweeps."""

    def test_warp_mask_matches_cvs_warp(self, room):
        """Test the mask-only warp agrees with the full warp."""
        image, depth = room
        pose = (0.0, 0.1, 0.2)

        np.testing.assert_array_equal(warp_mask(depth, pose).data, cvs_warp(image, depth, pose).mask.data)

    def test_hole_ratio_counts_pixels(self):
        """Test hole_ratio is the fraction of set pixels."""
        mask = HoleMask.zeros(4, 8)
        mask.data[0, :4] = 1

        assert hole_ratio(mask) == pytest.approx(4 / 32)

    def test_hole_ratio_grows_with_distance(self, room):
        """Test longer moves open more holes."""
        _, depth = room
        rows = hole_ratio_sweep(depth, "x", [0.02, 0.3, 0.6])
        ratios = [r for _, r in rows]

        assert [d for d, _ in rows] == [0.02, 0.3, 0.6]
        assert ratios[0] < ratios[1] < ratios[2]

    def test_sweep_axis_selection(self, room):
        """Test the sweep moves along the requested axis."""
        _, depth = room
        (_, ratio_z), = hole_ratio_sweep(depth, "Z", [0.3])

        assert ratio_z == pytest.approx(hole_ratio(warp_mask(depth, (0.0, 0.0, 0.3))))


class TestCompositeReplace:
    """Test composite_replace."""

    def test_keeps_observed_pixels(self, room):
        """Test only hole pixels come from the inpainted raster."""
        image, depth = room
        warped = cvs_warp(image, depth, (0.3, 0.0, 0.0))
        painted = EquirectImage(np.full_like(image.data, 7))
        out = composite_replace(painted, warped)
        holes = warped.mask.data.astype(bool)

        np.testing.assert_array_equal(out.data[~holes], warped.image.data[~holes])
        assert np.all(out.data[holes] == 7)


class TestWarpPoints:
    """Test splatting arbitrary scene points."""

    def test_lifted_pixels_match_cvs_warp(self, room):
        """Test warping a view's own lifted pixels reproduces cvs_warp."""
        image, depth = room
        dirs = pixel_directions(64, 32)
        points = (dirs * depth.data[..., None].astype(np.float64)).reshape(-1, 3)
        pose = (0.1, -0.05, 0.2)
        result = warp_points(points, image.data.reshape(-1, 3), pose, 64, 32)
        expected = cvs_warp(image, depth, pose)

        np.testing.assert_array_equal(result.image.data, expected.image.data)
        np.testing.assert_array_equal(result.mask.data, expected.mask.data)
        np.testing.assert_array_equal(result.depth.data, expected.depth.data)

    def test_first_point_wins_exact_tie(self):
        """Test coincident points resolve to the one listed first."""
        points = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.0, 0.0]])
        colors = np.array([[10, 10, 10], [20, 20, 20], [30, 30, 30]], dtype=np.uint8)
        splat = splat_points(points[:2], (0.0, 0.0, 0.0), 16, 8)
        result = warp_points(points, colors, (0.0, 0.0, 0.0), 16, 8)

        assert splat.source.tolist() == [0]
        assert result.hole_ratio == pytest.approx(1.0 - 1.0 / 128)
        assert np.all(result.image.data[result.mask.data == 0] == 30)

    def test_length_mismatch_rejected(self):
        """Test every point needs a color."""
        with pytest.raises(InputValidationError):
            warp_points(np.zeros((3, 3)), np.zeros((2, 3), dtype=np.uint8), (0, 0, 0), 16, 8)

    def test_no_points_is_all_holes(self):
        """Test an empty point set leaves every pixel a hole."""
        result = warp_points(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.uint8), (0, 0, 0), 16, 8)

        assert result.hole_ratio == 1.0


class TestAtScale:
    """Full-resolution checks."""

    @pytest.mark.slow
    def test_matches_scalar_reference_on_many_scenes(self):
        """Test the kernel agrees with the per-pixel loop on ten 1024x512 scenes."""
        rng = np.random.default_rng(21)
        for _ in range(10):
            eye = rng.uniform(-0.3, 0.3, 3)
            _, depth = render_room(eye, 1024, 512)
            image = rng.integers(0, 256, size=(512, 1024, 3), dtype=np.uint8)
            pose = tuple(rng.uniform(-0.15, 0.15, 3))
            result = cvs_warp(EquirectImage(image), depth, pose)
            ref_img, ref_depth, ref_mask = reference_warp(image, depth.data, pose)

            np.testing.assert_array_equal(result.mask.data, ref_mask)
            np.testing.assert_array_equal(result.image.data, ref_img)
            np.testing.assert_allclose(result.depth.data, ref_depth, rtol=1e-6)

    @pytest.mark.slow
    def test_single_thread_speed(self):
        """Test one 1024x512 warp takes under 100 ms on one thread."""
        image, depth = render_room((0.05, -0.02, 0.03), 1024, 512)
        (row,) = benchmark_warp(image, depth, CameraPose(tx=0.1), thread_counts=[1], repeats=5)

        assert row["seconds"] < 0.1

    def test_hole_ratio_strictly_increases_with_distance(self):
        """Test each longer move along X opens more holes in a constant-depth room."""
        _, depth = render_room((0.0, 0.0, 0.0), 512, 256)
        distances = [0.02, 0.03, 0.09, 0.15, 0.21, 0.27, 0.33]
        ratios = [r for _, r in hole_ratio_sweep(depth, "x", distances)]

        assert np.allclose(depth.data, 1.0)
        assert ratios[0] > 0.0
        assert all(a < b for a, b in zip(ratios, ratios[1:]))
