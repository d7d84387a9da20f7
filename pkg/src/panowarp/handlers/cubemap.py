from pathlib import Path
from typing import Any, Dict
import numpy as np

from ..cubemap import c2e, e2c
from ..models import C2EInput, E2CInput
from ..raster_io import read_mask, read_rgb, write_mask, write_rgb
from ..rasters import CubemapSet, EquirectImage, FACE_NAMES, HoleMask
from ..utils import ResponseFormatter, handle_error

# ==================== RUNNERS ====================

def run_e2c(params: E2CInput) -> Dict[str, Any]:
    """Split a panorama into faces/{front,right,back,left,up,down}.png."""
    if params.mask:
        pano = HoleMask((read_mask(params.input) > 0).astype(np.uint8))
    else:
        pano = EquirectImage(read_rgb(params.input))
    cube = e2c(pano, params.face_size)

    out = Path(params.out_dir)
    written = []
    for name, face in zip(FACE_NAMES, cube.faces):
        path = out / f"{name}.png"
        if params.mask:
            write_mask(path, face)
        else:
            write_rgb(path, face)
        written.append(str(path))
    return {"face_size": params.face_size, "mask": params.mask, "faces": written}


def run_c2e(params: C2EInput) -> Dict[str, Any]:
    """Reassemble a panorama from the six face PNGs in `in_dir`."""
    in_dir = Path(params.in_dir)
    faces = []
    for name in FACE_NAMES:
        path = in_dir / f"{name}.png"
        faces.append((read_mask(path) > 0).astype(np.uint8) if params.mask else read_rgb(path))
    pano = c2e(CubemapSet(faces=faces, is_mask=params.mask), params.width, params.width // 2)

    if params.mask:
        write_mask(params.out, pano.data)
    else:
        write_rgb(params.out, pano.data)
    return {"out": params.out, "width": params.width, "height": params.width // 2, "mask": params.mask}

# ==================== TOOLS ====================

async def panowarp_e2c(params: E2CInput) -> str:
    """Convert an equirectangular panorama (RGB or hole mask) into six cubemap faces.

    Face order front(+X), right(-Z), back(-X), left(+Z), up(+Y), down(-Y);
    masks stay binary and holes are never dropped.
    """
    try:
        return ResponseFormatter.render("Cubemap faces", run_e2c(params), params.response_format)
    except Exception as e:
        return handle_error(e)


async def panowarp_c2e(params: C2EInput) -> str:
    """Convert six cubemap faces back into an equirectangular panorama."""
    try:
        return ResponseFormatter.render("Equirectangular panorama", run_c2e(params), params.response_format)
    except Exception as e:
        return handle_error(e)
