"""
Coarse view synthesis: forward-warp a panorama and its depth to a new camera
translation.

Each source pixel is lifted with its depth, re-centered on the new camera,
reprojected and splatted into the nearest target pixel. Collisions keep the
smallest new depth; exact ties keep the lowest source row-major index. Target
pixels receiving nothing are holes (color 255, depth 0, mask 1).
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union
import numpy as np

from . import instances
from .config import resolve_threads
from .errors import InputValidationError, InvalidDepthError
from .models import CameraPose
from .rasters import EquirectImage, DepthMap, HoleMask, check_same_size
from .sphere import HALF_PI, TWO_PI, pixel_directions

HOLE_VALUE = 255

PoseArg = Union[CameraPose, Sequence[float]]

# ==================== TYPES ====================

@dataclass(frozen=True)
class WarpResult:
    """Corrupted panorama, its depth at the new viewpoint, and the hole mask."""
    image: EquirectImage
    depth: DepthMap
    mask: HoleMask

    @property
    def hole_ratio(self) -> float:
        return hole_ratio(self.mask)


@dataclass(frozen=True)
class Splat:
    """Winning source -> target assignments of one forward warp."""
    source: np.ndarray  # flat source indices
    target: np.ndarray  # flat target indices
    depth: np.ndarray   # new depth d_n of each winner (float64)

# ==================== OPERATIONS ====================

def cvs_warp(src: EquirectImage, depth: DepthMap, pose: PoseArg, threads: Optional[int] = None) -> WarpResult:
    """Forward-warp `src` with `depth` to the camera translated by `pose`."""
    check_same_size(src, depth)
    _require_positive(depth)
    splat = forward_splat(depth, pose, threads=threads)
    return _assemble(splat, src.data.reshape(-1, 3), depth.width, depth.height)


def warp_points(points: np.ndarray, colors: np.ndarray, center: PoseArg, w: int, h: int,
                threads: Optional[int] = None) -> WarpResult:
    """Forward-warp colored scene points into the w x h panorama centered at `center`."""
    colors = np.asarray(colors, dtype=np.uint8).reshape(-1, 3)
    if colors.shape[0] != np.asarray(points).reshape(-1, 3).shape[0]:
        raise InputValidationError("points and colors must have the same length")
    splat = splat_points(points, center, w, h, threads=threads)
    return _assemble(splat, colors, w, h)


def warp_mask(depth: DepthMap, pose: PoseArg, threads: Optional[int] = None) -> HoleMask:
    """Hole mask of cvs_warp without moving any color."""
    _require_positive(depth)
    h, w = depth.height, depth.width
    splat = forward_splat(depth, pose, threads=threads)
    mask = np.ones(h * w, dtype=np.uint8)
    mask[splat.target] = 0
    return HoleMask(mask.reshape(h, w))


def hole_ratio(mask: HoleMask) -> float:
    """Fraction of pixels marked as holes."""
    if mask.data.size == 0:
        return 0.0
    return float(np.count_nonzero(mask.data)) / mask.data.size


def composite_replace(inpainted: EquirectImage, warped: WarpResult) -> EquirectImage:
    """Keep warped pixels where observed, inpainted pixels only inside holes."""
    check_same_size(inpainted, warped.image)
    holes = warped.mask.data.astype(bool)[..., None]
    return EquirectImage(np.where(holes, inpainted.data, warped.image.data))


def hole_ratio_sweep(depth: DepthMap, axis: str, distances: Sequence[float],
                     threads: Optional[int] = None) -> List[Tuple[float, float]]:
    """Hole ratio for moves of each distance along one axis."""
    index = "xyz".index(axis.lower())
    rows = []
    for distance in distances:
        t = [0.0, 0.0, 0.0]
        t[index] = float(distance)
        rows.append((float(distance), hole_ratio(warp_mask(depth, t, threads=threads))))
    return rows


def _assemble(splat: Splat, colors: np.ndarray, w: int, h: int) -> WarpResult:
    image = np.full((h * w, 3), HOLE_VALUE, dtype=np.uint8)
    new_depth = np.zeros(h * w, dtype=np.float32)
    mask = np.ones(h * w, dtype=np.uint8)

    image[splat.target] = colors[splat.source]
    new_depth[splat.target] = splat.depth.astype(np.float32)
    mask[splat.target] = 0

    return WarpResult(
        image=EquirectImage(image.reshape(h, w, 3)),
        depth=DepthMap(new_depth.reshape(h, w)),
        mask=HoleMask(mask.reshape(h, w))
    )

# ==================== KERNEL ====================

def forward_splat(depth: DepthMap, pose: PoseArg, threads: Optional[int] = None) -> Splat:
    """Resolve the z-buffered nearest-pixel splat of every source pixel.

    Projection runs in chunks on a thread pool when more than one thread is
    allowed; the z-buffer is resolved once over all chunks, so the result
    does not depend on the thread count.
    """
    h, w = depth.height, depth.width
    t = _pose_vector(pose)
    dirs = instances.grid_cache.get(("pixel_directions", w, h), lambda: pixel_directions(w, h)).reshape(-1, 3)
    d = depth.data.astype(np.float64).ravel()

    def relative(a: int, b: int):
        return d[a:b] * dirs[a:b, 0] - t[0], d[a:b] * dirs[a:b, 1] - t[1], d[a:b] * dirs[a:b, 2] - t[2]

    return _splat(relative, h * w, w, h, threads)


def splat_points(points: np.ndarray, center: PoseArg, w: int, h: int, threads: Optional[int] = None) -> Splat:
    """Z-buffered nearest-pixel splat of scene points into the panorama centered at `center`.

    `Splat.source` indexes `points`; exact depth ties keep the point listed first.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    t = _pose_vector(center)

    def relative(a: int, b: int):
        return pts[a:b, 0] - t[0], pts[a:b, 1] - t[1], pts[a:b, 2] - t[2]

    return _splat(relative, pts.shape[0], w, h, threads)


def _splat(relative: Callable[[int, int], Tuple[np.ndarray, np.ndarray, np.ndarray]], n: int, w: int, h: int,
           threads: Optional[int]) -> Splat:
    chunks = _chunks(n, resolve_threads(threads))

    def run(bounds: Tuple[int, int]):
        return _project(*relative(*bounds), w, h)

    if len(chunks) <= 1:
        parts = [run((0, n))]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(run, chunks))

    target = np.concatenate([p[0] for p in parts])
    new_depth = np.concatenate([p[1] for p in parts])
    return _zbuffer(target, new_depth, w * h)


def _project(cx: np.ndarray, cy: np.ndarray, cz: np.ndarray, w: int, h: int) -> Tuple[np.ndarray, np.ndarray]:
    """Flat target index (-1 where nothing lands) and new depth of camera-relative points."""
    d_n = np.sqrt(cx * cx + cy * cy + cz * cz)
    theta = np.arctan2(cy, np.sqrt(cx * cx + cz * cz))
    phi = np.arctan2(-cz, cx)
    phi = np.where(phi < 0.0, phi + TWO_PI, phi)
    x_n = phi * w / TWO_PI - 0.5
    y_n = (theta + HALF_PI) * h / np.pi - 0.5
    ix = np.floor(x_n + 0.5).astype(np.int64) % w
    iy = np.floor(y_n + 0.5).astype(np.int64)
    valid = (d_n > 0.0) & (iy >= 0) & (iy < h)
    return np.where(valid, iy * w + ix, -1), d_n


def _zbuffer(target: np.ndarray, new_depth: np.ndarray, size: int) -> Splat:
    """Nearest depth wins each target; exact ties go to the lowest source index."""
    source = np.flatnonzero(target >= 0)
    target = target[source]
    new_depth = new_depth[source]
    if source.size == 0:
        return Splat(source=source, target=target, depth=new_depth)

    nearest = np.full(size, np.inf)
    np.minimum.at(nearest, target, new_depth)
    front = new_depth == nearest[target]
    source, target, new_depth = source[front], target[front], new_depth[front]

    if np.bincount(target, minlength=size).max() > 1:
        first = np.full(size, np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(first, target, source)
        keep = first[target] == source
        source, target, new_depth = source[keep], target[keep], new_depth[keep]
    return Splat(source=source, target=target, depth=new_depth)


def _chunks(n: int, k: int) -> List[Tuple[int, int]]:
    k = max(1, min(k, n))
    bounds = np.linspace(0, n, k + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _pose_vector(pose: PoseArg) -> np.ndarray:
    if isinstance(pose, CameraPose):
        return np.array(pose.as_tuple(), dtype=np.float64)
    t = np.asarray(pose, dtype=np.float64)
    if t.shape != (3,) or not np.all(np.isfinite(t)):
        raise InputValidationError("pose must be three finite numbers")
    return t


def _require_positive(depth: DepthMap) -> None:
    if not depth.is_complete():
        raise InvalidDepthError("source depth must be strictly positive at every pixel")
