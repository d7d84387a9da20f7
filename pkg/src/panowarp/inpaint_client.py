from typing import Optional
import cv2
import httpx
import numpy as np

from .errors import BackendFailureError
from .raster_io import PNG_PARAMS

# ==================== INPAINTING SERVICE CLIENT ====================

class InpaintAPIClient:
    """Async client for an HTTP inpainting service.

    The service receives a multipart POST with `image` (RGB PNG) and `mask`
    (PNG, 255 = fill) and answers with the filled RGB PNG as the body.
    """

    def __init__(self, url: str, auth_token: Optional[str] = None, timeout: float = 120.0,
                 transport: Optional[httpx.AsyncBaseTransport] = None):
        self.url = url
        self.auth_token = auth_token
        self.timeout = timeout
        self._transport = transport
        self._client: Optional[httpx.AsyncClient] = None

    async def get_client(self) -> httpx.AsyncClient:
        """Get or create async HTTP client."""
        if self._client is None:
            headers = {"Accept": "image/png"}
            if self.auth_token:
                headers["Authorization"] = f"Bearer {self.auth_token}"
            self._client = httpx.AsyncClient(timeout=self.timeout, headers=headers, transport=self._transport)
        return self._client

    async def fill(self, image: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """POST one image/mask pair and decode the returned RGB raster."""
        client = await self.get_client()
        files = {
            "image": ("image.png", encode_png(image), "image/png"),
            "mask": ("mask.png", encode_png(mask.astype(np.uint8) * 255), "image/png"),
        }
        try:
            response = await client.post(self.url, files=files)
            response.raise_for_status()
        except httpx.HTTPStatusError as e:
            raise BackendFailureError(
                f"inpainting service returned HTTP {e.response.status_code}",
                diagnostics=e.response.text[:2000]
            ) from e
        except httpx.TimeoutException as e:
            raise BackendFailureError(f"inpainting service timed out after {self.timeout:g}s") from e
        except httpx.HTTPError as e:
            raise BackendFailureError(f"cannot reach inpainting service at {self.url}", diagnostics=str(e)) from e

        rgb = decode_png(response.content)
        if rgb is None:
            raise BackendFailureError("inpainting service returned a body that is not a PNG image")
        return rgb

    async def close(self):
        """Close the HTTP client."""
        if self._client:
            await self._client.aclose()
            self._client = None


def encode_png(data: np.ndarray) -> bytes:
    """Encode an RGB (HxWx3) or gray (HxW) uint8 raster as PNG bytes."""
    if data.ndim == 3:
        data = cv2.cvtColor(np.ascontiguousarray(data), cv2.COLOR_RGB2BGR)
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(data), PNG_PARAMS)
    if not ok:
        raise BackendFailureError("cannot encode PNG for the inpainting service")
    return buf.tobytes()


def decode_png(payload: bytes) -> Optional[np.ndarray]:
    """Decode PNG bytes to RGB, or None when the payload is not an image."""
    if not payload:
        return None
    try:
        img = cv2.imdecode(np.frombuffer(payload, dtype=np.uint8), cv2.IMREAD_COLOR)
    except cv2.error:
        return None
    if img is None:
        return None
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)
