from typing import Any, Dict
import numpy as np

from ..inpaint import InpaintRequest, inpaint, resolve_backend
from ..models import InpaintInput
from ..raster_io import read_mask, read_rgb, write_rgb
from ..utils import ResponseFormatter, handle_error, log

# ==================== RUNNERS ====================

async def run_inpaint(params: InpaintInput) -> Dict[str, Any]:
    """Fill the masked pixels of one image with the chosen backend."""
    image = read_rgb(params.image)
    mask = (read_mask(params.mask) > 0).astype(np.uint8)
    request = InpaintRequest(image, mask)
    backend = resolve_backend(params.backend, timeout=params.timeout_sec)
    try:
        filled = await inpaint(request, backend)
    finally:
        await backend.close()
    write_rgb(params.out, filled)
    holes = int(np.count_nonzero(mask))
    log(f"[inpaint] {backend.name}: filled {holes} pixels")
    return {"out": params.out, "backend": params.backend, "filled_pixels": holes}

# ==================== TOOLS ====================

async def panowarp_inpaint(params: InpaintInput) -> str:
    """Inpaint one raster: known pixels pass through unchanged, holes are filled by the backend.

    Backends: constant, pullpush, external:<cmd> (called as
    `<cmd> --image in.png --mask mask.png --out out.png`) or an http(s) URL.
    """
    try:
        return ResponseFormatter.render("Inpainting", await run_inpaint(params), params.response_format)
    except Exception as e:
        return handle_error(e)
