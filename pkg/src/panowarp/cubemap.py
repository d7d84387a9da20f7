"""
Equirectangular <-> cubemap conversion and pinhole view sampling.

Face frames are camera-to-world rotations whose columns are the camera x (image
right), y (image down) and z (forward) axes in scene coordinates:

    front  looks +X    right  looks -Z    back  looks -X
    left   looks +Z    up     looks +Y    down  looks -Y

Side faces keep +Y as image-down, matching the panorama rows. RGB is sampled
bilinearly; masks use nearest-neighbor with hole-wins semantics so a hole never
turns into known content.
"""
from typing import Dict, Tuple, Union
import math
import numpy as np

from . import instances
from .errors import InputValidationError
from .rasters import CubemapSet, EquirectImage, HoleMask, FACE_NAMES
from .sphere import directions_to_pixels, pixel_directions

# Scene +Y points down (row 0 looks along -Y), so "up" covers the panorama's bottom rows.
FACE_ROTATIONS: Dict[str, np.ndarray] = {
    "front": np.array([[0, 0, 1], [0, 1, 0], [-1, 0, 0]], dtype=np.float64),
    "right": np.array([[-1, 0, 0], [0, 1, 0], [0, 0, -1]], dtype=np.float64),
    "back":  np.array([[0, 0, -1], [0, 1, 0], [1, 0, 0]], dtype=np.float64),
    "left":  np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=np.float64),
    "up":    np.array([[0, -1, 0], [0, 0, 1], [-1, 0, 0]], dtype=np.float64),
    "down":  np.array([[0, 1, 0], [0, 0, -1], [-1, 0, 0]], dtype=np.float64),
}

DEFAULT_FACE_SIZE = 512

# ==================== PINHOLE GEOMETRY ====================

def focal_length(size: int, fov_deg: float) -> float:
    """Focal length in pixels of a size x size view with horizontal fov."""
    return (size / 2.0) / math.tan(math.radians(fov_deg) / 2.0)


def camera_rays(size: int, fov_deg: float) -> np.ndarray:
    """(size, size, 3) camera-frame rays through pixel centers (z = 1)."""
    f = focal_length(size, fov_deg)
    c = np.arange(size, dtype=np.float64) + 0.5 - size / 2.0
    u = np.broadcast_to(c[None, :] / f, (size, size))
    v = np.broadcast_to(c[:, None] / f, (size, size))
    return np.stack([u, v, np.ones((size, size))], axis=-1)


def view_sample_coords(rotation: np.ndarray, fov_deg: float, size: int, w: int, h: int) -> Tuple[np.ndarray, np.ndarray]:
    """Continuous panorama coordinates sampled by every pixel of a pinhole view."""
    key = ("view", size, float(fov_deg), np.asarray(rotation, dtype=np.float64).tobytes(), w, h)

    def build():
        rays = camera_rays(size, fov_deg) @ np.asarray(rotation, dtype=np.float64).T
        x, y = directions_to_pixels(rays, w, h)
        return np.asarray(x), np.asarray(y)

    return instances.grid_cache.get(key, build)

# ==================== SAMPLING ====================

def sample_bilinear(img: np.ndarray, x: np.ndarray, y: np.ndarray, wrap_x: bool = True) -> np.ndarray:
    """Bilinear lookup at continuous pixel coordinates; rows clamp, columns wrap (or clamp)."""
    h, w = img.shape[:2]
    x0 = np.floor(x)
    y0 = np.floor(y)
    fx = x - x0
    fy = y - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    if wrap_x:
        xa, xb = x0 % w, (x0 + 1) % w
    else:
        xa, xb = np.clip(x0, 0, w - 1), np.clip(x0 + 1, 0, w - 1)
    ya, yb = np.clip(y0, 0, h - 1), np.clip(y0 + 1, 0, h - 1)

    src = img.astype(np.float64)
    if img.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    top = src[ya, xa] * (1.0 - fx) + src[ya, xb] * fx
    bottom = src[yb, xa] * (1.0 - fx) + src[yb, xb] * fx
    out = top * (1.0 - fy) + bottom * fy
    if img.dtype == np.uint8:
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return out.astype(img.dtype)


def sample_mask(mask: np.ndarray, x: np.ndarray, y: np.ndarray, wrap_x: bool = True) -> np.ndarray:
    """Hole-wins lookup: a hole if any bilinear neighbor with nonzero weight is a hole."""
    h, w = mask.shape
    x0 = np.floor(x)
    y0 = np.floor(y)
    has_x1 = (x - x0) > 0
    has_y1 = (y - y0) > 0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    if wrap_x:
        xa, xb = x0 % w, (x0 + 1) % w
    else:
        xa, xb = np.clip(x0, 0, w - 1), np.clip(x0 + 1, 0, w - 1)
    ya, yb = np.clip(y0, 0, h - 1), np.clip(y0 + 1, 0, h - 1)

    m = mask.astype(bool)
    out = m[ya, xa].copy()
    out |= m[ya, xb] & has_x1
    out |= m[yb, xa] & has_y1
    out |= m[yb, xb] & has_x1 & has_y1
    return out.astype(np.uint8)


def render_view(pano: np.ndarray, rotation: np.ndarray, fov_deg: float, size: int, is_mask: bool = False) -> np.ndarray:
    """Sample one pinhole view (camera-to-world `rotation`) out of a panorama raster."""
    h, w = pano.shape[:2]
    x, y = view_sample_coords(rotation, fov_deg, size, w, h)
    if is_mask:
        return sample_mask(pano, x, y)
    return sample_bilinear(pano, x, y)

# ==================== E2C / C2E ====================

def e2c(pano: Union[EquirectImage, HoleMask], face_size: int = DEFAULT_FACE_SIZE) -> CubemapSet:
    """Split a panorama (RGB or hole mask) into six 90-degree faces."""
    if face_size <= 0:
        raise InputValidationError("face_size must be positive")
    is_mask = isinstance(pano, HoleMask)
    data = pano.data
    faces = [render_view(data, FACE_ROTATIONS[name], 90.0, face_size, is_mask=is_mask) for name in FACE_NAMES]

    if is_mask and np.any(data):
        # Also splat every panorama hole into its own face so thin polar holes
        # that no face pixel samples still survive.
        h, w = data.shape
        face_idx, u, v = _c2e_grid(face_size, w, h)
        holes = data.astype(bool)
        fi = face_idx[holes]
        ui = np.clip(np.floor(u[holes] + 0.5).astype(np.int64), 0, face_size - 1)
        vi = np.clip(np.floor(v[holes] + 0.5).astype(np.int64), 0, face_size - 1)
        for k in range(6):
            sel = fi == k
            faces[k][vi[sel], ui[sel]] = 1

    return CubemapSet(faces=faces, is_mask=is_mask)


def c2e(cube: CubemapSet, w: int, h: int) -> Union[EquirectImage, HoleMask]:
    """Reassemble a panorama from six faces by dominant-axis face selection."""
    if w != 2 * h or h <= 0:
        raise InputValidationError(f"panorama size must satisfy W = 2H > 0, got {w}x{h}")
    size = cube.face_size
    face_idx, u, v = _c2e_grid(size, w, h)

    if cube.is_mask:
        out = np.zeros((h, w), dtype=np.uint8)
    else:
        out = np.zeros((h, w, 3), dtype=np.uint8)
    for k, face in enumerate(cube.faces):
        sel = face_idx == k
        if not np.any(sel):
            continue
        if cube.is_mask:
            out[sel] = sample_mask(face, u[sel], v[sel], wrap_x=False)
        else:
            out[sel] = sample_bilinear(face, u[sel], v[sel], wrap_x=False)

    if cube.is_mask:
        return HoleMask(out)
    return EquirectImage(out)


def dominant_face(dirs: np.ndarray) -> np.ndarray:
    """Face index per direction; ties resolve in FACE_NAMES order."""
    forwards = np.stack([FACE_ROTATIONS[name][:, 2] for name in FACE_NAMES])
    scores = dirs @ forwards.T
    return np.argmax(scores, axis=-1)


def _c2e_grid(size: int, w: int, h: int):
    """Face index and continuous face coordinates of every panorama pixel."""
    def build():
        dirs = instances.grid_cache.get(("pixel_directions", w, h), lambda: pixel_directions(w, h))
        face_idx = dominant_face(dirs)
        f = focal_length(size, 90.0)
        u = np.empty((h, w), dtype=np.float64)
        v = np.empty((h, w), dtype=np.float64)
        for k, name in enumerate(FACE_NAMES):
            sel = face_idx == k
            cam = dirs[sel] @ FACE_ROTATIONS[name]
            u[sel] = f * cam[:, 0] / cam[:, 2] + size / 2.0 - 0.5
            v[sel] = f * cam[:, 1] / cam[:, 2] + size / 2.0 - 0.5
        return face_idx, u, v

    return instances.grid_cache.get(("c2e", size, w, h), build)
