import os
import re
from pathlib import Path
from typing import Union
import cv2
import numpy as np

from .errors import InputValidationError
from .models import DepthFormat
from .rasters import EquirectImage, DepthMap, HoleMask

PathLike = Union[str, os.PathLike]

# Pinned so repeated runs produce byte-identical files.
PNG_PARAMS = [cv2.IMWRITE_PNG_COMPRESSION, 3]

# ==================== PNG ====================

def read_rgb(path: PathLike) -> np.ndarray:
    """Read an 8-bit PNG as HxWx3 RGB."""
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise InputValidationError(f"cannot read image '{path}'")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


def write_rgb(path: PathLike, rgb: np.ndarray) -> None:
    _ensure_parent(path)
    if not cv2.imwrite(str(path), cv2.cvtColor(np.ascontiguousarray(rgb), cv2.COLOR_RGB2BGR), PNG_PARAMS):
        raise InputValidationError(f"cannot write image '{path}'")


def read_mask(path: PathLike) -> np.ndarray:
    """Read a mask PNG; any nonzero value counts as a hole."""
    img = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
    if img is None:
        raise InputValidationError(f"cannot read mask '{path}'")
    return (img > 127).astype(np.uint8)


def write_mask(path: PathLike, mask: np.ndarray) -> None:
    """Masks are stored as 0/255 so they are visible in ordinary viewers."""
    _ensure_parent(path)
    if not cv2.imwrite(str(path), (mask.astype(np.uint8) * 255), PNG_PARAMS):
        raise InputValidationError(f"cannot write mask '{path}'")

# ==================== DEPTH ====================

def read_pfm(path: PathLike) -> np.ndarray:
    """Read a PFM file into an HxW float32 array (first channel for color PFMs)."""
    with open(path, "rb") as fid:
        header = fid.readline().strip()
        if header not in (b"Pf", b"PF"):
            raise InputValidationError(f"'{path}' is not a PFM file")
        channels = 3 if header == b"PF" else 1
        dims = fid.readline()
        while dims.startswith(b"#"):
            dims = fid.readline()
        match = re.match(rb"^\s*(\d+)\s+(\d+)\s*$", dims)
        if not match:
            raise InputValidationError(f"malformed PFM header in '{path}'")
        width, height = int(match.group(1)), int(match.group(2))
        scale = float(fid.readline().strip())
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(fid.read(), dtype=dtype)
    expected = width * height * channels
    if data.size != expected:
        raise InputValidationError(f"PFM '{path}' holds {data.size} values, expected {expected}")
    data = data.reshape(height, width, channels)[..., 0]
    # PFM rows are stored bottom-to-top
    return np.ascontiguousarray(np.flipud(data)).astype(np.float32)


def write_pfm(path: PathLike, depth: np.ndarray) -> None:
    """Write an HxW float32 array as little-endian PFM (scale -1.0)."""
    _ensure_parent(path)
    depth = np.asarray(depth, dtype="<f4")
    h, w = depth.shape
    with open(path, "wb") as fid:
        fid.write(b"Pf\n")
        fid.write(f"{w} {h}\n".encode("ascii"))
        fid.write(b"-1.0\n")
        fid.write(np.ascontiguousarray(np.flipud(depth)).tobytes())


def read_png16mm(path: PathLike) -> np.ndarray:
    """Read a 16-bit millimeter PNG into meters."""
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise InputValidationError(f"cannot read depth '{path}'")
    if img.dtype != np.uint16 or img.ndim != 2:
        raise InputValidationError(f"'{path}' is not a 16-bit grayscale PNG")
    return (img.astype(np.float32) / 1000.0).astype(np.float32)


def write_png16mm(path: PathLike, depth: np.ndarray) -> None:
    _ensure_parent(path)
    mm = np.clip(np.rint(np.asarray(depth, dtype=np.float64) * 1000.0), 0, 65535).astype(np.uint16)
    if not cv2.imwrite(str(path), mm, PNG_PARAMS):
        raise InputValidationError(f"cannot write depth '{path}'")


def read_depth(path: PathLike, fmt: DepthFormat = DepthFormat.PFM) -> np.ndarray:
    if fmt == DepthFormat.PNG16MM:
        return read_png16mm(path)
    return read_pfm(path)


def write_depth(path: PathLike, depth: np.ndarray, fmt: DepthFormat = DepthFormat.PFM) -> None:
    if fmt == DepthFormat.PNG16MM:
        write_png16mm(path, depth)
    else:
        write_pfm(path, depth)


def depth_suffix(fmt: DepthFormat) -> str:
    return ".png" if fmt == DepthFormat.PNG16MM else ".pfm"

# ==================== PANORAMA HELPERS ====================

def load_panorama(image_path: PathLike, depth_path: PathLike, fmt: DepthFormat = DepthFormat.PFM,
                  flip_v: bool = False):
    """Load an (EquirectImage, DepthMap) pair, validating the pairing."""
    rgb = read_rgb(image_path)
    depth = read_depth(depth_path, fmt)
    if flip_v:
        rgb, depth = np.flipud(rgb), np.flipud(depth)
    image = EquirectImage(np.ascontiguousarray(rgb))
    depth_map = DepthMap(np.ascontiguousarray(depth))
    if depth_map.data.shape != image.data.shape[:2]:
        raise InputValidationError(
            f"depth {depth_map.width}x{depth_map.height} does not match image {image.width}x{image.height}"
        )
    return image, depth_map


def save_panorama(image_path: PathLike, image: EquirectImage, depth_path: PathLike = None,
                  depth: DepthMap = None, fmt: DepthFormat = DepthFormat.PFM, flip_v: bool = False) -> None:
    rgb = np.flipud(image.data) if flip_v else image.data
    write_rgb(image_path, rgb)
    if depth is not None and depth_path is not None:
        write_depth(depth_path, np.flipud(depth.data) if flip_v else depth.data, fmt)


def save_hole_mask(path: PathLike, mask: HoleMask, flip_v: bool = False) -> None:
    write_mask(path, np.flipud(mask.data) if flip_v else mask.data)


def _ensure_parent(path: PathLike) -> None:
    parent = Path(path).parent
    if str(parent):
        parent.mkdir(parents=True, exist_ok=True)
