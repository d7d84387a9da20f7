"""Tests for equirectangular <-> cubemap conversion."""

import math
import pytest
import numpy as np

from panowarp.cubemap import FACE_ROTATIONS, c2e, camera_rays, dominant_face, e2c, focal_length, render_view
from panowarp.errors import InputValidationError
from panowarp.rasters import CubemapSet, EquirectImage, FACE_NAMES, HoleMask
from panowarp.sphere import pixel_directions

from oracles import render_room, render_room_face


def longitude_bands(w: int = 128, h: int = 64) -> EquirectImage:
    """Side faces get distinct colors: front red, right green, back blue, left white."""
    phi = 2 * math.pi * (np.arange(w) + 0.5) / w
    colors = np.zeros((w, 3), dtype=np.uint8)
    quadrant = np.floor(((phi + math.pi / 4) % (2 * math.pi)) / (math.pi / 2)).astype(int)
    palette = np.array([(255, 0, 0), (0, 255, 0), (0, 0, 255), (255, 255, 255)], dtype=np.uint8)
    colors[:] = palette[quadrant]
    return EquirectImage(np.ascontiguousarray(np.broadcast_to(colors, (h, w, 3))))


class TestFaceFrames:
    """Test face rotations and selection."""

    def test_rotations_are_proper(self):
        """Test every face frame is a right-handed rotation."""
        for name, rot in FACE_ROTATIONS.items():
            np.testing.assert_allclose(rot.T @ rot, np.eye(3), atol=1e-12)
            assert np.linalg.det(rot) == pytest.approx(1.0)

    @pytest.mark.parametrize("direction,face", [
        ((1, 0, 0), "front"),
        ((0, 0, -1), "right"),
        ((-1, 0, 0), "back"),
        ((0, 0, 1), "left"),
        ((0, 1, 0), "up"),
        ((0, -1, 0), "down"),
    ])
    def test_dominant_face(self, direction, face):
        """Test the face looking along each axis is selected."""
        idx = dominant_face(np.array([direction], dtype=np.float64))

        assert FACE_NAMES[int(idx[0])] == face

    def test_focal_length_for_90_degrees(self):
        """Test a 90 degree view has focal length R/2."""
        assert focal_length(64, 90.0) == pytest.approx(32.0)

    def test_camera_rays_centered(self):
        """Test rays are symmetric about the optical axis."""
        rays = camera_rays(4, 90.0)

        assert rays.shape == (4, 4, 3)
        np.testing.assert_allclose(rays[..., 0] + rays[:, ::-1, 0], 0.0, atol=1e-12)
        np.testing.assert_allclose(rays[..., 2], 1.0)


class TestE2C:
    """Test e2c."""

    def test_face_layout(self, room):
        """Test six square faces of the requested size."""
        image, _ = room
        cube = e2c(image, 16)

        assert len(cube.faces) == 6
        assert cube.face_size == 16
        assert all(f.shape == (16, 16, 3) and f.dtype == np.uint8 for f in cube.faces)

    def test_side_face_orientation(self):
        """Test each side face is centered on its longitude."""
        cube = e2c(longitude_bands(), 32)

        assert tuple(cube.face("front")[16, 16]) == (255, 0, 0)
        assert tuple(cube.face("right")[16, 16]) == (0, 255, 0)
        assert tuple(cube.face("back")[16, 16]) == (0, 0, 255)
        assert tuple(cube.face("left")[16, 16]) == (255, 255, 255)

    def test_pole_faces(self):
        """Test 'up' shows the bottom rows (+Y) and 'down' the top rows."""
        data = np.full((64, 128, 3), 128, dtype=np.uint8)
        data[:16] = (10, 10, 10)
        data[48:] = (240, 240, 240)
        cube = e2c(EquirectImage(data), 32)

        assert tuple(cube.face("up")[16, 16]) == (240, 240, 240)
        assert tuple(cube.face("down")[16, 16]) == (10, 10, 10)

    def test_faces_match_analytic_render(self):
        """Test faces agree with rendering the room directly through each face."""
        image, _ = render_room((0, 0, 0), 256, 128)
        cube = e2c(image, 32)
        for name in FACE_NAMES:
            truth = render_room_face(name, 32, (0, 0, 0))
            err = np.abs(cube.face(name).astype(int) - truth.astype(int)).mean()
            assert err < 4.0, name

    def test_invalid_face_size(self, room):
        """Test a non-positive face size is rejected."""
        image, _ = room
        with pytest.raises(InputValidationError):
            e2c(image, 0)

    def test_mask_stays_binary(self, room):
        """Test mask faces only hold 0 and 1."""
        rng = np.random.default_rng(0)
        mask = HoleMask((rng.random((32, 64)) < 0.1).astype(np.uint8))
        cube = e2c(mask, 16)

        assert cube.is_mask
        for face in cube.faces:
            assert face.shape == (16, 16)
            assert set(np.unique(face)) <= {0, 1}

    def test_empty_mask_gives_empty_faces(self):
        """Test no hole appears from nothing."""
        cube = e2c(HoleMask.zeros(32, 64), 16)

        assert all(not f.any() for f in cube.faces)

    def test_single_hole_survives(self):
        """Test every isolated panorama hole shows up in some face."""
        for y, x in [(0, 0), (31, 63), (16, 10), (2, 40)]:
            mask = HoleMask.zeros(32, 64)
            mask.data[y, x] = 1
            cube = e2c(mask, 8)
            assert any(f.any() for f in cube.faces), (y, x)


class TestC2E:
    """Test c2e."""

    def test_round_trip_rgb(self):
        """Test e2c followed by c2e reproduces a smooth panorama closely."""
        image, _ = render_room((0, 0, 0), 128, 64)
        back = c2e(e2c(image, 64), 128, 64)

        assert isinstance(back, EquirectImage)
        err = np.abs(back.data.astype(int) - image.data.astype(int)).mean()
        assert err < 4.0

    @pytest.mark.slow
    def test_round_trip_psnr_at_face_512(self):
        """Test a smooth 1024x512 panorama survives e2c at face 512 and back above 35 dB."""
        image, _ = render_room((0.1, -0.05, 0.2), 1024, 512)
        back = c2e(e2c(image, 512), 1024, 512)
        mse = np.mean((back.data.astype(np.float64) - image.data.astype(np.float64)) ** 2)

        assert mse == 0.0 or 10.0 * math.log10(255.0 ** 2 / mse) >= 35.0

    def test_round_trip_keeps_every_hole(self):
        """Test holes survive a mask round trip."""
        rng = np.random.default_rng(5)
        mask = HoleMask((rng.random((32, 64)) < 0.05).astype(np.uint8))
        back = c2e(e2c(mask, 16), 64, 32)

        assert isinstance(back, HoleMask)
        assert np.all(back.data[mask.data == 1] == 1)

    def test_constant_faces(self):
        """Test constant faces give a constant panorama."""
        faces = [np.full((8, 8, 3), 90, dtype=np.uint8) for _ in range(6)]
        pano = c2e(CubemapSet(faces=faces), 32, 16)

        assert np.all(pano.data == 90)

    def test_every_pixel_has_a_face(self):
        """Test the dominant-face grid covers all six faces and every pixel."""
        idx = dominant_face(pixel_directions(64, 32))

        assert set(np.unique(idx)) == set(range(6))

    def test_aspect_ratio_enforced(self):
        """Test the output must satisfy W = 2H."""
        faces = [np.zeros((8, 8, 3), dtype=np.uint8) for _ in range(6)]
        with pytest.raises(InputValidationError):
            c2e(CubemapSet(faces=faces), 30, 16)

    def test_wrong_face_count(self):
        """Test a cubemap needs exactly six faces."""
        with pytest.raises(InputValidationError):
            CubemapSet(faces=[np.zeros((8, 8, 3), dtype=np.uint8)] * 5)


class TestRenderView:
    """Test pinhole sampling."""

    def test_grids_are_cached(self, room):
        """Test repeated views reuse the sampling grid."""
        from panowarp import instances

        image, _ = room
        render_view(image.data, FACE_ROTATIONS["front"], 90.0, 8)
        misses = instances.grid_cache.stats["misses"]
        render_view(image.data, FACE_ROTATIONS["front"], 90.0, 8)

        assert instances.grid_cache.stats["misses"] == misses
        assert instances.grid_cache.stats["hits"] >= 1
