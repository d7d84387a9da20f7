"""
Multi-view projection: slice panoramas into pinhole views with known rotations,
lift a seed point cloud from depth, and export a sparse model that Gaussian
splatting tools can train from without feature matching.

Exported world frame is the front view's camera frame (x right, y down, z
forward), so the front view at the source center has the identity rotation.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
import math
import re
import numpy as np

from . import instances
from .config import resolve_threads
from .cubemap import FACE_ROTATIONS, focal_length, render_view
from .errors import ContractViolationError, InputValidationError
from .models import CameraPose, PoseConvention
from .raster_io import write_rgb
from .rasters import DepthMap, EquirectImage, FACE_NAMES, check_same_size
from .sparse_model import SparseCamera, SparseImage, SparseModel, SparsePoint, rotation_to_qvec, write_cameras, write_model
from .sphere import directions_to_pixels, pixel_directions

# Scene -> exported world.
WORLD_FROM_SCENE = FACE_ROTATIONS["front"].T

# Relative slack when comparing a point's range to the panorama depth it is seen through.
OCCLUSION_TOLERANCE = 0.02

DEFAULT_LAYOUT = "cube6+ring8"

# ==================== CAMERAS ====================

@dataclass(frozen=True)
class PerspectiveCamera:
    """R x R pinhole view; `rotation` maps camera axes to scene axes."""
    name: str
    size: int
    fov: float
    rotation: np.ndarray
    translation: CameraPose

    def __post_init__(self):
        if not (0.0 < self.fov <= 120.0):
            raise ContractViolationError(f"fov must lie in (0, 120] degrees, got {self.fov}")
        if self.size <= 0:
            raise ContractViolationError("view size must be positive")
        r = np.asarray(self.rotation, dtype=np.float64)
        if r.shape != (3, 3) or not np.allclose(r.T @ r, np.eye(3), atol=1e-9, rtol=0):
            raise ContractViolationError(f"rotation of view '{self.name}' is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ContractViolationError(f"rotation of view '{self.name}' is not proper (det != +1)")

    @property
    def focal(self) -> float:
        return focal_length(self.size, self.fov)

    @property
    def principal_point(self) -> Tuple[float, float]:
        return (self.size / 2.0, self.size / 2.0)

    def project(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Scene points -> (u, v, z); u, v in the sparse-model pixel convention (top-left corner at 0)."""
        cam = (np.asarray(points, dtype=np.float64) - np.array(self.translation.as_tuple())) @ self.rotation
        z = cam[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.focal * cam[:, 0] / z + self.size / 2.0
            v = self.focal * cam[:, 1] / z + self.size / 2.0
        return u, v, z


def layout_rotations(layout: str) -> List[Tuple[str, np.ndarray]]:
    """Named camera-to-scene rotations for a layout such as 'cube6', 'ring8' or 'cube6+ring8'."""
    views = []
    for part in (p.strip().lower() for p in layout.split("+")):
        if part == "cube6":
            views.extend((name, FACE_ROTATIONS[name]) for name in FACE_NAMES)
            continue
        m = re.fullmatch(r"ring(\d+)", part)
        if not m or int(m.group(1)) < 1:
            raise InputValidationError(f"unknown view layout '{part}'; use cube6, ring<N> or combinations with '+'")
        n = int(m.group(1))
        for k in range(n):
            views.append((f"{part}_{k:02d}", yaw_rotation(2.0 * math.pi * k / n)))
    if not views:
        raise InputValidationError("view layout is empty")
    return views


def yaw_rotation(yaw: float) -> np.ndarray:
    """Horizontal view looking at longitude `yaw` with zero pitch."""
    c, s = math.cos(yaw), math.sin(yaw)
    x_axis = [-s, 0.0, -c]
    y_axis = [0.0, 1.0, 0.0]
    z_axis = [c, 0.0, -s]
    return np.array([x_axis, y_axis, z_axis], dtype=np.float64).T

# ==================== OPERATIONS ====================

@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray  # (N, 3) scene coordinates, meters
    colors: np.ndarray  # (N, 3) uint8
    pixels: np.ndarray  # (N, 2) source (x, y)

    def __len__(self) -> int:
        return self.points.shape[0]


def extract_views(pano: EquirectImage, pose: CameraPose, layout: str = DEFAULT_LAYOUT, fov: float = 90.0,
                  size: int = 512, threads: Optional[int] = None) -> List[Tuple[PerspectiveCamera, np.ndarray]]:
    """Render every view of `layout` out of one panorama taken at `pose`."""
    if size <= 0:
        raise InputValidationError("view size must be positive")
    cameras = [PerspectiveCamera(name, size, float(fov), rot, pose) for name, rot in layout_rotations(layout)]

    def render(cam: PerspectiveCamera) -> np.ndarray:
        return render_view(pano.data, cam.rotation, cam.fov, cam.size)

    n_threads = resolve_threads(threads)
    if n_threads == 1:
        rasters = [render(cam) for cam in cameras]
    else:
        with ThreadPoolExecutor(max_workers=min(n_threads, len(cameras))) as pool:
            rasters = list(pool.map(render, cameras))
    return list(zip(cameras, rasters))


def lift_point_cloud(pano: EquirectImage, depth: DepthMap, pose: CameraPose, stride: int = 4) -> PointCloud:
    """Lift every stride-th pixel with its depth and offset it by `pose`; zero depths are skipped."""
    check_same_size(pano, depth)
    if stride < 1:
        raise InputValidationError("stride must be >= 1")
    h, w = depth.height, depth.width
    dirs = instances.grid_cache.get(("pixel_directions", w, h), lambda: pixel_directions(w, h))

    ys, xs = np.mgrid[0:h:stride, 0:w:stride]
    ys, xs = ys.ravel(), xs.ravel()
    d = depth.data[ys, xs].astype(np.float64)
    keep = d > 0
    ys, xs, d = ys[keep], xs[keep], d[keep]
    points = dirs[ys, xs] * d[:, None] + np.array(pose.as_tuple())
    return PointCloud(points=points, colors=pano.data[ys, xs].copy(), pixels=np.stack([xs, ys], axis=1))

# ==================== EXPORT ====================

@dataclass
class PanoramaViews:
    """Views cut from one panorama, plus the depth used for occlusion tests."""
    name: str
    pose: CameraPose
    views: List[Tuple[PerspectiveCamera, np.ndarray]]
    depth: Optional[DepthMap] = None


def export_sparse_model(panoramas: Sequence[PanoramaViews], cloud: Optional[PointCloud], out_dir: Union[str, Path],
                        convention: PoseConvention = PoseConvention.W2C, images_only: bool = False) -> SparseModel:
    """Write images/*.png, cameras.txt, images.txt and points3D.txt under `out_dir`.

    In images-only mode only the images and cameras.txt are written, leaving
    pose estimation to the reconstruction tool.
    """
    if not panoramas or not any(p.views for p in panoramas):
        raise InputValidationError("nothing to export: no views")
    if not images_only and (cloud is None or len(cloud) == 0):
        raise InputValidationError("nothing to export: empty point cloud")
    out = Path(out_dir)
    try:
        (out / "images").mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InputValidationError(f"cannot create output directory '{out}': {e}") from e

    model = SparseModel(convention=PoseConvention(convention))
    camera_ids: Dict[Tuple[int, float], int] = {}
    placed: List[Tuple[int, PerspectiveCamera, PanoramaViews]] = []

    for pano in panoramas:
        for cam, raster in pano.views:
            key = (cam.size, cam.fov)
            if key not in camera_ids:
                cid = len(camera_ids) + 1
                cx, cy = cam.principal_point
                camera_ids[key] = cid
                model.cameras[cid] = SparseCamera(cid, cam.size, cam.size, (cam.focal, cam.focal, cx, cy))
            image_id = len(placed) + 1
            name = f"{pano.name}_{cam.name}.png"
            write_rgb(out / "images" / name, raster)
            qvec, tvec = export_extrinsics(cam, model.convention)
            model.images[image_id] = SparseImage(image_id, qvec, tvec, camera_ids[key], name)
            placed.append((image_id, cam, pano))

    if not images_only:
        _add_points(model, cloud, placed)
        model.validate()
    if images_only:
        write_cameras(model, out / "cameras.txt")
    else:
        write_model(model, out)
    return model


def export_extrinsics(cam: PerspectiveCamera, convention: PoseConvention = PoseConvention.W2C):
    """Quaternion and translation of one view in the exported world frame."""
    c2w = WORLD_FROM_SCENE @ cam.rotation
    center = WORLD_FROM_SCENE @ np.array(cam.translation.as_tuple())
    if PoseConvention(convention) == PoseConvention.C2W:
        return rotation_to_qvec(c2w), tuple(float(v) for v in center)
    w2c = c2w.T
    return rotation_to_qvec(w2c), tuple(float(v) for v in -w2c @ center)


def _add_points(model: SparseModel, cloud: PointCloud, placed) -> None:
    """Track each point in every view whose frustum holds it and whose panorama sees it."""
    n = len(cloud)
    tracks: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
    point_ids = np.arange(1, n + 1)
    visible_cache: Dict[int, np.ndarray] = {}

    for image_id, cam, pano in placed:
        if id(pano) not in visible_cache:
            visible_cache[id(pano)] = _visible_from(cloud.points, pano)
        visible = visible_cache[id(pano)]

        u, v, z = cam.project(cloud.points)
        inside = visible & (z > 0) & (u >= 0) & (u < cam.size) & (v >= 0) & (v < cam.size)
        image = model.images[image_id]
        for idx in np.flatnonzero(inside):
            tracks[idx].append((image_id, len(image.points2d)))
            image.points2d.append((float(u[idx]), float(v[idx]), int(point_ids[idx])))

    for idx in range(n):
        if not tracks[idx]:
            continue
        pid = int(point_ids[idx])
        xyz = WORLD_FROM_SCENE @ cloud.points[idx]
        model.points[pid] = SparsePoint(
            point_id=pid,
            xyz=tuple(float(c) for c in xyz),
            rgb=tuple(int(c) for c in cloud.colors[idx]),
            error=0.0,
            track=tracks[idx],
        )


def _visible_from(points: np.ndarray, pano: PanoramaViews) -> np.ndarray:
    """Points not hidden behind the surface recorded in the panorama's depth map."""
    if pano.depth is None:
        return np.ones(points.shape[0], dtype=bool)
    rel = points - np.array(pano.pose.as_tuple())
    rng = np.linalg.norm(rel, axis=1)
    visible = np.zeros(points.shape[0], dtype=bool)
    ok = rng > 0
    h, w = pano.depth.height, pano.depth.width
    x, y = directions_to_pixels(rel[ok], w, h)
    ix = np.floor(np.asarray(x) + 0.5).astype(np.int64) % w
    iy = np.clip(np.floor(np.asarray(y) + 0.5).astype(np.int64), 0, h - 1)
    surface = pano.depth.data[iy, ix].astype(np.float64)
    visible[ok] = (surface > 0) & (rng[ok] <= surface * (1.0 + OCCLUSION_TOLERANCE))
    return visible
