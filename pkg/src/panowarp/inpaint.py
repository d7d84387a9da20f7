"""
Pluggable inpainting backends.

Backend ids:
    constant            fill holes with the mean color of the known pixels
    pullpush            multi-resolution diffusion of known pixels
    external:<cmd>      `<cmd> --image in.png --mask mask.png --out out.png`
    http(s)://...       multipart POST to an inpainting service

Whatever a backend returns, known pixels are copied back from the request, so a
backend can never alter observed content.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union
import asyncio
import shlex
import sys
import tempfile
import numpy as np

from .errors import BackendFailureError, DegenerateInputError, InputValidationError, PanowarpError
from .inpaint_client import InpaintAPIClient
from .models import CameraPose
from .pullpush import fill_rgb, pull_push_fill
from .raster_io import read_pfm, read_rgb, write_mask, write_rgb
from .rasters import DepthMap, EquirectImage, HoleMask, check_same_size

DEFAULT_TIMEOUT_SEC = 120.0

# ==================== REQUEST ====================

@dataclass(frozen=True)
class InpaintRequest:
    """One raster to fill: a cubemap face, or a whole panorama in direct mode.

    `face` and `pose` describe where the raster comes from; backends that only
    look at pixels ignore them.
    """
    image: np.ndarray
    mask: np.ndarray
    face: Optional[str] = None
    pose: Optional[CameraPose] = None

    def __post_init__(self):
        if self.image.ndim != 3 or self.image.shape[2] != 3 or self.image.dtype != np.uint8:
            raise InputValidationError("inpaint image must be HxWx3 uint8")
        if self.mask.shape != self.image.shape[:2]:
            raise InputValidationError(
                f"mask {self.mask.shape[::-1]} does not match image {self.image.shape[1::-1]}"
            )
        if self.mask.size and self.mask.max() > 1:
            raise InputValidationError("inpaint mask must be binary (0 = keep, 1 = fill)")

    @property
    def holes(self) -> np.ndarray:
        return self.mask.astype(bool)

    @property
    def known_count(self) -> int:
        return int(self.mask.size - np.count_nonzero(self.mask))

# ==================== BACKENDS ====================

class InpaintBackend(ABC):
    """Fills the holes of one request; may also supply depth for new views."""

    name: str = "backend"
    requires_known: bool = True

    @abstractmethod
    async def fill(self, request: InpaintRequest) -> np.ndarray:
        """Return an RGB raster of the request's size."""

    async def fill_depth(self, depth: DepthMap, mask: HoleMask, pose: CameraPose) -> Optional[DepthMap]:
        """Depth for the hole pixels of a warped view, or None to use diffusion."""
        return None

    async def close(self) -> None:
        pass


class ConstantBackend(InpaintBackend):
    """Mean color of the known pixels; `fill_value` when nothing is known."""

    name = "constant"
    requires_known = False

    def __init__(self, fill_value: int = 0):
        self.fill_value = fill_value

    async def fill(self, request: InpaintRequest) -> np.ndarray:
        known = ~request.holes
        out = request.image.copy()
        if known.any():
            mean = request.image[known].astype(np.float64).mean(axis=0)
            color = np.clip(np.rint(mean), 0, 255).astype(np.uint8)
        else:
            color = np.full(3, self.fill_value, dtype=np.uint8)
        out[request.holes] = color
        return out


class PullPushBackend(InpaintBackend):
    name = "pullpush"

    async def fill(self, request: InpaintRequest) -> np.ndarray:
        return await asyncio.to_thread(fill_rgb, request.image, request.holes)


class ExternalCommandBackend(InpaintBackend):
    """Runs `<cmd> --image <in.png> --mask <mask.png> --out <out.png>` per request."""

    name = "external"

    def __init__(self, command: str, timeout: float = DEFAULT_TIMEOUT_SEC):
        self.argv = shlex.split(command)
        if not self.argv:
            raise InputValidationError("external backend needs a command: 'external:<cmd>'")
        self.timeout = timeout

    async def fill(self, request: InpaintRequest) -> np.ndarray:
        with tempfile.TemporaryDirectory(prefix="panowarp-inpaint-") as tmp:
            image_path = Path(tmp) / "image.png"
            mask_path = Path(tmp) / "mask.png"
            out_path = Path(tmp) / "out.png"
            write_rgb(image_path, request.image)
            write_mask(mask_path, request.mask)

            await run_command(
                self.argv + ["--image", str(image_path), "--mask", str(mask_path), "--out", str(out_path)],
                self.timeout
            )
            if not out_path.exists():
                raise BackendFailureError(f"external backend wrote no output file ({self.argv[0]})")
            try:
                return read_rgb(out_path)
            except PanowarpError as e:
                raise BackendFailureError("external backend output is not a readable PNG", diagnostics=str(e)) from e


class HttpBackend(InpaintBackend):
    """Delegates to an inpainting service (e.g. a served learned inpainter)."""

    name = "http"

    def __init__(self, url: str, timeout: float = DEFAULT_TIMEOUT_SEC, token: Optional[str] = None,
                 client: Optional[InpaintAPIClient] = None):
        self.client = client or InpaintAPIClient(url, auth_token=token, timeout=timeout)

    async def fill(self, request: InpaintRequest) -> np.ndarray:
        return await self.client.fill(request.image, request.mask)

    async def close(self) -> None:
        await self.client.close()


BackendLike = Union[str, InpaintBackend]


def resolve_backend(backend: BackendLike, timeout: Optional[float] = None) -> InpaintBackend:
    """Turn a backend id into a backend instance; instances pass through."""
    if isinstance(backend, InpaintBackend):
        return backend
    from . import instances
    settings = instances.settings
    if timeout is None:
        timeout = settings.backend_timeout_sec if settings else DEFAULT_TIMEOUT_SEC

    backend_id = (backend or "").strip()
    if backend_id == "constant":
        return ConstantBackend()
    if backend_id == "pullpush":
        return PullPushBackend()
    if backend_id.startswith("external:"):
        return ExternalCommandBackend(backend_id[len("external:"):], timeout=timeout)
    if backend_id.startswith(("http://", "https://")):
        token = settings.inpaint_token if settings else None
        return HttpBackend(backend_id, timeout=timeout, token=token)
    raise InputValidationError(
        f"unknown inpainting backend '{backend_id}'; use constant, pullpush, external:<cmd> or an http(s) URL"
    )

# ==================== OPERATIONS ====================

async def inpaint(request: InpaintRequest, backend: BackendLike) -> np.ndarray:
    """Fill the request's holes; known pixels come back bit-exact."""
    if not request.holes.any():
        return request.image.copy()
    impl = resolve_backend(backend)
    if impl.requires_known and request.known_count == 0:
        raise DegenerateInputError(f"backend '{impl.name}' has no known pixels to propagate from")

    try:
        filled = await impl.fill(request)
    finally:
        if impl is not backend:
            await impl.close()
    if not isinstance(filled, np.ndarray) or filled.shape != request.image.shape:
        shape = getattr(filled, "shape", None)
        raise BackendFailureError(f"backend '{impl.name}' returned shape {shape}, expected {request.image.shape}")
    if filled.dtype != np.uint8:
        raise BackendFailureError(f"backend '{impl.name}' returned dtype {filled.dtype}, expected uint8")
    return np.where(request.holes[..., None], filled, request.image)


def inpaint_depth(depth: DepthMap, mask: HoleMask) -> DepthMap:
    """Diffuse valid depths into the holes (and any zero-depth pixels)."""
    check_same_size(depth, mask)
    holes = mask.data.astype(bool) | (depth.data <= 0)
    if not holes.any():
        return DepthMap(depth.data.copy())
    if holes.all():
        raise DegenerateInputError("depth has no valid pixel to diffuse from")
    filled = pull_push_fill(depth.data, ~holes)
    out = depth.data.copy()
    out[holes] = filled[holes].astype(np.float32)
    return DepthMap(out)

# ==================== EXTERNAL COMMANDS ====================

class ExternalDepthHook:
    """Re-estimates depth for a new view: `<cmd> --image <in.png> --out <out.pfm>`."""

    def __init__(self, command: str, timeout: float = DEFAULT_TIMEOUT_SEC):
        self.argv = shlex.split(command)
        if not self.argv:
            raise InputValidationError("depth hook needs a command")
        self.timeout = timeout

    async def estimate(self, image: EquirectImage) -> DepthMap:
        with tempfile.TemporaryDirectory(prefix="panowarp-depth-") as tmp:
            image_path = Path(tmp) / "image.png"
            out_path = Path(tmp) / "depth.pfm"
            write_rgb(image_path, image.data)
            await run_command(self.argv + ["--image", str(image_path), "--out", str(out_path)], self.timeout)
            try:
                data = read_pfm(out_path)
            except (PanowarpError, OSError) as e:
                raise BackendFailureError("depth hook output is not a readable PFM", diagnostics=str(e)) from e
        if data.shape != (image.height, image.width):
            raise BackendFailureError(f"depth hook returned {data.shape[::-1]}, expected {image.width}x{image.height}")
        try:
            depth = DepthMap(data.astype(np.float32))
        except PanowarpError as e:
            raise BackendFailureError("depth hook returned invalid depth", diagnostics=str(e)) from e
        if not depth.is_complete():
            raise BackendFailureError("depth hook returned non-positive depth values")
        return depth


async def run_command(argv: List[str], timeout: float) -> None:
    """Run a backend process; non-zero exit or timeout raise BackendFailureError with stderr."""
    try:
        proc = await asyncio.create_subprocess_exec(
            *argv,
            stdin=asyncio.subprocess.DEVNULL,
            stdout=asyncio.subprocess.PIPE,
            stderr=asyncio.subprocess.PIPE
        )
    except OSError as e:
        raise BackendFailureError(f"cannot start backend command '{argv[0]}'", diagnostics=str(e)) from e

    try:
        _, stderr = await asyncio.wait_for(proc.communicate(), timeout=timeout)
    except asyncio.TimeoutError:
        proc.kill()
        await proc.wait()
        raise BackendFailureError(f"backend command '{argv[0]}' timed out after {timeout:g}s")

    if proc.returncode != 0:
        diagnostics = stderr.decode(errors="replace").strip()
        print(f"[inpaint] {argv[0]} exited with {proc.returncode}", file=sys.stderr, flush=True)
        raise BackendFailureError(
            f"backend command '{argv[0]}' exited with status {proc.returncode}",
            diagnostics=diagnostics
        )
