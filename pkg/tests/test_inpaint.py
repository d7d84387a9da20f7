"""Tests for pull-push filling, inpainting backends and depth completion."""

import sys
import pytest
import numpy as np
import httpx

from panowarp.errors import BackendFailureError, DegenerateInputError, InputValidationError
from panowarp.inpaint import (
    ConstantBackend,
    ExternalCommandBackend,
    ExternalDepthHook,
    HttpBackend,
    InpaintBackend,
    InpaintRequest,
    PullPushBackend,
    inpaint,
    inpaint_depth,
    resolve_backend,
)
from panowarp.inpaint_client import InpaintAPIClient, decode_png, encode_png
from panowarp.pullpush import fill_rgb, pull_push_fill
from panowarp.rasters import DepthMap, HoleMask


def square_hole(h=16, w=32):
    mask = np.zeros((h, w), dtype=np.uint8)
    mask[4:10, 8:20] = 1
    return mask


class TestPullPush:
    """Test the pull-push fill."""

    def test_known_pixels_untouched(self, random_rgb):
        """Test fill_rgb only writes inside the holes."""
        mask = square_hole()
        out = fill_rgb(random_rgb, mask.astype(bool))

        np.testing.assert_array_equal(out[mask == 0], random_rgb[mask == 0])

    def test_fill_stays_within_known_range(self):
        """Test every fill is a convex combination of known values."""
        rng = np.random.default_rng(11)
        values = rng.uniform(-3.0, 5.0, size=(37, 23))
        known = rng.random((37, 23)) < 0.05
        known[0, 0] = True
        out = pull_push_fill(values, known)

        lo, hi = values[known].min(), values[known].max()
        assert np.all(out >= lo - 1e-12)
        assert np.all(out <= hi + 1e-12)
        np.testing.assert_array_equal(out[known], values[known])

    def test_single_known_pixel_floods(self):
        """Test one known value propagates everywhere."""
        values = np.zeros((9, 13))
        values[8, 12] = 4.5
        known = np.zeros((9, 13), dtype=bool)
        known[8, 12] = True

        np.testing.assert_allclose(pull_push_fill(values, known), 4.5)

    def test_nothing_known(self):
        """Test an all-hole raster cannot be filled."""
        with pytest.raises(DegenerateInputError):
            pull_push_fill(np.zeros((4, 4)), np.zeros((4, 4), dtype=bool))

    def test_smooth_gradient_is_recovered(self):
        """Test a small hole in a linear ramp is filled close to the ramp."""
        ramp = np.tile(np.linspace(0.0, 1.0, 32), (16, 1))
        known = np.ones((16, 32), dtype=bool)
        known[7:9, 15:17] = False
        out = pull_push_fill(ramp, known)

        np.testing.assert_allclose(out, ramp, atol=0.05)


class TestInpaintRequest:
    """Test InpaintRequest validation."""

    def test_mask_shape_must_match(self, random_rgb):
        """Test the mask must cover the image."""
        with pytest.raises(InputValidationError):
            InpaintRequest(random_rgb, np.zeros((8, 8), dtype=np.uint8))

    def test_mask_must_be_binary(self, random_rgb):
        """Test 0/255 masks are rejected (callers normalize first)."""
        with pytest.raises(InputValidationError):
            InpaintRequest(random_rgb, square_hole() * 255)

    def test_known_count(self, random_rgb):
        """Test known_count counts non-hole pixels."""
        request = InpaintRequest(random_rgb, square_hole())

        assert request.known_count == 16 * 32 - 6 * 12


class TestInpaint:
    """Test the inpaint operation across backends."""

    async def test_constant_fills_with_mean(self, random_rgb):
        """Test the constant backend paints the known mean color."""
        mask = square_hole()
        out = await inpaint(InpaintRequest(random_rgb, mask), "constant")
        mean = np.rint(random_rgb[mask == 0].astype(float).mean(axis=0)).astype(np.uint8)

        np.testing.assert_array_equal(out[mask == 0], random_rgb[mask == 0])
        assert np.all(out[mask == 1] == mean)

    async def test_no_holes_returns_copy(self, random_rgb):
        """Test an empty mask never calls the backend."""
        out = await inpaint(InpaintRequest(random_rgb, np.zeros((16, 32), dtype=np.uint8)), "http://unused.invalid")

        np.testing.assert_array_equal(out, random_rgb)
        assert out is not random_rgb

    async def test_constant_on_all_holes(self, random_rgb):
        """Test the constant backend handles a raster with nothing known."""
        out = await inpaint(InpaintRequest(random_rgb, np.ones((16, 32), dtype=np.uint8)), ConstantBackend())

        assert np.all(out == 0)

    async def test_pullpush_needs_known_pixels(self, random_rgb):
        """Test diffusion refuses an all-hole raster."""
        with pytest.raises(DegenerateInputError):
            await inpaint(InpaintRequest(random_rgb, np.ones((16, 32), dtype=np.uint8)), "pullpush")

    async def test_pullpush_preserves_known(self, random_rgb):
        """Test known pixels pass through the pull-push backend bit-exact."""
        mask = square_hole()
        out = await inpaint(InpaintRequest(random_rgb, mask), PullPushBackend())

        np.testing.assert_array_equal(out[mask == 0], random_rgb[mask == 0])

    async def test_backend_cannot_alter_known_pixels(self, random_rgb):
        """Test whatever a backend returns, observed pixels are restored."""

        class Scribbler(InpaintBackend):
            name = "scribbler"

            async def fill(self, request):
                return np.full_like(request.image, 3)

        mask = square_hole()
        out = await inpaint(InpaintRequest(random_rgb, mask), Scribbler())

        np.testing.assert_array_equal(out[mask == 0], random_rgb[mask == 0])
        assert np.all(out[mask == 1] == 3)

    async def test_wrong_output_shape(self, random_rgb):
        """Test a backend returning the wrong raster fails loudly."""

        class Cropper(InpaintBackend):
            async def fill(self, request):
                return request.image[:-1]

        with pytest.raises(BackendFailureError):
            await inpaint(InpaintRequest(random_rgb, square_hole()), Cropper())

    async def test_wrong_output_dtype(self, random_rgb):
        """Test float output is rejected."""

        class Floater(InpaintBackend):
            async def fill(self, request):
                return request.image.astype(np.float32)

        with pytest.raises(BackendFailureError):
            await inpaint(InpaintRequest(random_rgb, square_hole()), Floater())


@pytest.mark.integration
class TestExternalCommandBackend:
    """Test the subprocess backend against a stub command."""

    async def test_fills_holes(self, random_rgb, stub_inpainter):
        """Test the command's output is composited into the holes."""
        mask = square_hole()
        out = await inpaint(InpaintRequest(random_rgb, mask), ExternalCommandBackend(stub_inpainter("fill")))

        np.testing.assert_array_equal(out[mask == 0], random_rgb[mask == 0])
        assert np.all(out[mask == 1] == (10, 20, 30))

    async def test_failure_carries_stderr(self, random_rgb, stub_inpainter):
        """Test a non-zero exit surfaces the command's diagnostics."""
        with pytest.raises(BackendFailureError) as exc_info:
            await inpaint(InpaintRequest(random_rgb, square_hole()), ExternalCommandBackend(stub_inpainter("fail")))

        assert "status 3" in str(exc_info.value)
        assert "model weights not found" in exc_info.value.diagnostics

    async def test_timeout(self, random_rgb, stub_inpainter):
        """Test a hung command is killed after the timeout."""
        backend = ExternalCommandBackend(stub_inpainter("sleep"), timeout=0.5)
        with pytest.raises(BackendFailureError) as exc_info:
            await inpaint(InpaintRequest(random_rgb, square_hole()), backend)

        assert "timed out" in str(exc_info.value)

    async def test_missing_output(self, random_rgb, stub_inpainter):
        """Test a command that writes nothing is a backend failure."""
        with pytest.raises(BackendFailureError):
            await inpaint(InpaintRequest(random_rgb, square_hole()), ExternalCommandBackend(stub_inpainter("nooutput")))

    async def test_wrong_size_output(self, random_rgb, stub_inpainter):
        """Test a resized result is rejected."""
        with pytest.raises(BackendFailureError):
            await inpaint(InpaintRequest(random_rgb, square_hole()), ExternalCommandBackend(stub_inpainter("wrongsize")))

    async def test_unknown_executable(self, random_rgb):
        """Test a command that cannot start is a backend failure."""
        backend = ExternalCommandBackend("/nonexistent/inpainter-binary")
        with pytest.raises(BackendFailureError):
            await inpaint(InpaintRequest(random_rgb, square_hole()), backend)

    def test_empty_command(self):
        """Test 'external:' without a command is invalid."""
        with pytest.raises(InputValidationError):
            ExternalCommandBackend("   ")


class TestHttpBackend:
    """Test the HTTP inpainting client with a mocked transport."""

    @staticmethod
    def client_for(handler, token=None):
        return InpaintAPIClient("https://inpaint.test/fill", auth_token=token,
                                transport=httpx.MockTransport(handler))

    async def test_fill_round_trip(self, random_rgb):
        """Test a multipart request yields the decoded response image."""
        seen = {}

        def handler(request: httpx.Request) -> httpx.Response:
            seen["auth"] = request.headers.get("Authorization")
            seen["body"] = request.content
            return httpx.Response(200, content=encode_png(np.full((16, 32, 3), 77, dtype=np.uint8)))

        backend = HttpBackend("https://inpaint.test/fill", client=self.client_for(handler, token="secret"))
        mask = square_hole()
        out = await inpaint(InpaintRequest(random_rgb, mask), backend)
        await backend.close()

        assert seen["auth"] == "Bearer secret"
        assert b'name="image"' in seen["body"]
        assert b'name="mask"' in seen["body"]
        assert np.all(out[mask == 1] == 77)
        np.testing.assert_array_equal(out[mask == 0], random_rgb[mask == 0])

    async def test_http_error_status(self, random_rgb):
        """Test an error status becomes a backend failure with the body as diagnostics."""

        def handler(request):
            return httpx.Response(503, text="GPU busy")

        backend = HttpBackend("https://inpaint.test/fill", client=self.client_for(handler))
        with pytest.raises(BackendFailureError) as exc_info:
            await inpaint(InpaintRequest(random_rgb, square_hole()), backend)

        assert "503" in str(exc_info.value)
        assert "GPU busy" in exc_info.value.diagnostics

    async def test_non_image_body(self, random_rgb):
        """Test a body that is not a PNG is rejected."""

        def handler(request):
            return httpx.Response(200, content=b"not an image")

        backend = HttpBackend("https://inpaint.test/fill", client=self.client_for(handler))
        with pytest.raises(BackendFailureError):
            await inpaint(InpaintRequest(random_rgb, square_hole()), backend)

    async def test_connection_error(self, random_rgb):
        """Test transport errors become backend failures."""

        def handler(request):
            raise httpx.ConnectError("connection refused")

        backend = HttpBackend("https://inpaint.test/fill", client=self.client_for(handler))
        with pytest.raises(BackendFailureError):
            await inpaint(InpaintRequest(random_rgb, square_hole()), backend)

    async def test_client_close(self):
        """Test close releases the underlying httpx client."""
        client = InpaintAPIClient("https://inpaint.test/fill")
        assert isinstance(await client.get_client(), httpx.AsyncClient)

        await client.close()

        assert client._client is None

    def test_decode_png_rejects_garbage(self):
        """Test decode_png returns None for empty or invalid payloads."""
        assert decode_png(b"") is None
        assert decode_png(b"\x00\x01\x02") is None


class TestResolveBackend:
    """Test backend id resolution."""

    def test_known_ids(self):
        """Test each backend id maps to its class."""
        assert isinstance(resolve_backend("constant"), ConstantBackend)
        assert isinstance(resolve_backend("pullpush"), PullPushBackend)
        assert isinstance(resolve_backend("external:my-inpainter --fast"), ExternalCommandBackend)
        assert isinstance(resolve_backend("https://example.test/inpaint"), HttpBackend)

    def test_instances_pass_through(self):
        """Test backend instances are returned unchanged."""
        backend = ConstantBackend()

        assert resolve_backend(backend) is backend

    def test_timeout_comes_from_settings(self, panowarp_settings):
        """Test the configured timeout applies to command backends."""
        panowarp_settings.backend_timeout_sec = 7.5

        assert resolve_backend("external:tool").timeout == 7.5
        assert resolve_backend("external:tool", timeout=2.0).timeout == 2.0

    def test_unknown_id(self):
        """Test unknown ids are a validation error."""
        with pytest.raises(InputValidationError):
            resolve_backend("lama")


class TestInpaintDepth:
    """Test depth completion."""

    def test_fills_holes_with_positive_depth(self, room):
        """Test hole depths are filled and known depths kept."""
        _, depth = room
        data = depth.data.copy()
        mask = np.zeros(data.shape, dtype=np.uint8)
        mask[10:14, 20:30] = 1
        data[mask == 1] = 0.0
        out = inpaint_depth(DepthMap(data), HoleMask(mask))

        assert out.is_complete()
        np.testing.assert_array_equal(out.data[mask == 0], data[mask == 0])
        np.testing.assert_allclose(out.data[mask == 1], depth.data[mask == 1], rtol=0.05)

    def test_zero_depth_outside_mask_is_filled(self, room):
        """Test stray invalid depths are treated as holes too."""
        _, depth = room
        data = depth.data.copy()
        data[3, 3] = 0.0
        out = inpaint_depth(DepthMap(data), HoleMask.zeros(32, 64))

        assert out.data[3, 3] > 0

    def test_all_holes(self, room):
        """Test a depth map with nothing valid cannot be completed."""
        _, depth = room
        with pytest.raises(DegenerateInputError):
            inpaint_depth(depth, HoleMask(np.ones((32, 64), dtype=np.uint8)))


DEPTH_HOOK_SOURCE = '''
import argparse
import cv2
import numpy as np

p = argparse.ArgumentParser()
p.add_argument("--image")
p.add_argument("--out")
a = p.parse_args()
h, w = cv2.imread(a.image).shape[:2]
with open(a.out, "wb") as fh:
    fh.write(b"Pf\\n%d %d\\n-1.0\\n" % (w, h))
    fh.write(np.full((h, w), VALUE, dtype="<f4").tobytes())
'''


@pytest.mark.integration
class TestExternalDepthHook:
    """Test the depth re-estimation hook."""

    @staticmethod
    def hook_command(tmp_path, value: float) -> str:
        script = tmp_path / f"depth_hook_{value:g}.py"
        script.write_text(DEPTH_HOOK_SOURCE.replace("VALUE", repr(value)))
        return f"{sys.executable} {script}"

    async def test_hook_output_is_used(self, tmp_path, room):
        """Test the hook's PFM is read back at the image size."""
        image, _ = room
        depth = await ExternalDepthHook(self.hook_command(tmp_path, 2.5)).estimate(image)

        assert depth.data.shape == (32, 64)
        np.testing.assert_allclose(depth.data, 2.5)

    async def test_hook_returning_zeros_fails(self, tmp_path, room):
        """Test non-positive hook depth is a backend failure."""
        image, _ = room
        with pytest.raises(BackendFailureError):
            await ExternalDepthHook(self.hook_command(tmp_path, 0.0)).estimate(image)
