"""
Reader and writer for the text sparse-model layout used by structure-from-motion
and Gaussian-splatting tools (cameras.txt, images.txt, points3D.txt).

Floats are written with 17 significant digits so a write/read round trip is
lossless. images.txt carries a header line naming the pose convention.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union
import numpy as np
from scipy.spatial.transform import Rotation

from .errors import InputValidationError
from .models import PoseConvention

CONVENTION_TAG = "# Pose convention:"

# ==================== TYPES ====================

@dataclass
class SparseCamera:
    camera_id: int
    width: int
    height: int
    params: Tuple[float, ...]  # PINHOLE: fx, fy, cx, cy
    model: str = "PINHOLE"


@dataclass
class SparseImage:
    image_id: int
    qvec: Tuple[float, float, float, float]  # (w, x, y, z)
    tvec: Tuple[float, float, float]
    camera_id: int
    name: str
    points2d: List[Tuple[float, float, int]] = field(default_factory=list)


@dataclass
class SparsePoint:
    point_id: int
    xyz: Tuple[float, float, float]
    rgb: Tuple[int, int, int]
    error: float = 0.0
    track: List[Tuple[int, int]] = field(default_factory=list)  # (image_id, point2d index)


@dataclass
class SparseModel:
    cameras: Dict[int, SparseCamera] = field(default_factory=dict)
    images: Dict[int, SparseImage] = field(default_factory=dict)
    points: Dict[int, SparsePoint] = field(default_factory=dict)
    convention: PoseConvention = PoseConvention.W2C

    def validate(self) -> None:
        """Raise InputValidationError on dangling references or untracked points."""
        for image in self.images.values():
            if image.camera_id not in self.cameras:
                raise InputValidationError(f"image {image.image_id} references missing camera {image.camera_id}")
        for point in self.points.values():
            if not point.track:
                raise InputValidationError(f"point {point.point_id} has no observations")
            for image_id, idx in point.track:
                if image_id not in self.images:
                    raise InputValidationError(f"point {point.point_id} references missing image {image_id}")
                if idx >= len(self.images[image_id].points2d):
                    raise InputValidationError(f"point {point.point_id} references missing 2D point {idx}")

# ==================== ROTATIONS ====================

def rotation_to_qvec(rotation: np.ndarray) -> Tuple[float, float, float, float]:
    """Unit quaternion (w, x, y, z) with w >= 0."""
    x, y, z, w = Rotation.from_matrix(np.asarray(rotation, dtype=np.float64)).as_quat()
    q = np.array([w, x, y, z])
    if q[0] < 0:
        q = -q
    return tuple(float(v) for v in q)


def qvec_to_rotation(qvec) -> np.ndarray:
    w, x, y, z = qvec
    return Rotation.from_quat([x, y, z, w]).as_matrix()

# ==================== WRITER ====================

def _g(v: float) -> str:
    return f"{float(v):.17g}"


def write_model(model: SparseModel, out_dir: Union[str, Path], include_points: bool = True) -> List[Path]:
    """Write cameras.txt, images.txt and (optionally) points3D.txt; returns the paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InputValidationError(f"cannot create output directory '{out}': {e}") from e

    paths = [write_cameras(model, out / "cameras.txt")]
    if model.images:
        paths.append(write_images(model, out / "images.txt"))
    if include_points:
        paths.append(write_points(model, out / "points3D.txt"))
    return paths


def write_cameras(model: SparseModel, path: Path) -> Path:
    lines = [
        "# Camera list with one line of data per camera:",
        "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]",
        f"# Number of cameras: {len(model.cameras)}",
    ]
    for cam in sorted(model.cameras.values(), key=lambda c: c.camera_id):
        params = " ".join(_g(p) for p in cam.params)
        lines.append(f"{cam.camera_id} {cam.model} {cam.width} {cam.height} {params}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_images(model: SparseModel, path: Path) -> Path:
    n_obs = sum(len(i.points2d) for i in model.images.values())
    lines = [
        "# Image list with two lines of data per image:",
        "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME",
        "#   POINTS2D[] as (X, Y, POINT3D_ID)",
        f"# Number of images: {len(model.images)}, mean observations per image: "
        f"{(n_obs / len(model.images)) if model.images else 0:g}",
        f"{CONVENTION_TAG} {model.convention.value}",
    ]
    for img in sorted(model.images.values(), key=lambda i: i.image_id):
        q = " ".join(_g(v) for v in img.qvec)
        t = " ".join(_g(v) for v in img.tvec)
        lines.append(f"{img.image_id} {q} {t} {img.camera_id} {img.name}")
        lines.append(" ".join(f"{_g(x)} {_g(y)} {pid}" for x, y, pid in img.points2d))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_points(model: SparseModel, path: Path) -> Path:
    lengths = [len(p.track) for p in model.points.values()]
    lines = [
        "# 3D point list with one line of data per point:",
        "#   POINT3D_ID, X, Y, Z, R, G, B, ERROR, TRACK[] as (IMAGE_ID, POINT2D_IDX)",
        f"# Number of points: {len(model.points)}, mean track length: "
        f"{(sum(lengths) / len(lengths)) if lengths else 0:g}",
    ]
    for p in sorted(model.points.values(), key=lambda p: p.point_id):
        xyz = " ".join(_g(v) for v in p.xyz)
        rgb = " ".join(str(int(c)) for c in p.rgb)
        track = " ".join(f"{i} {j}" for i, j in p.track)
        lines.append(f"{p.point_id} {xyz} {rgb} {_g(p.error)} {track}".rstrip())
    path.write_text("\n".join(lines) + "\n")
    return path

# ==================== READER ====================

def read_model(model_dir: Union[str, Path]) -> SparseModel:
    """Parse a text sparse model; points3D.txt and images.txt are optional."""
    d = Path(model_dir)
    model = SparseModel()
    model.cameras = read_cameras(d / "cameras.txt")
    if (d / "images.txt").exists():
        model.images, convention = read_images(d / "images.txt")
        if convention is not None:
            model.convention = convention
    if (d / "points3D.txt").exists():
        model.points = read_points(d / "points3D.txt")
    return model


def read_cameras(path: Path) -> Dict[int, SparseCamera]:
    cameras = {}
    for line in _data_lines(path):
        parts = line.split()
        try:
            cam = SparseCamera(
                camera_id=int(parts[0]),
                model=parts[1],
                width=int(parts[2]),
                height=int(parts[3]),
                params=tuple(float(v) for v in parts[4:]),
            )
        except (IndexError, ValueError) as e:
            raise InputValidationError(f"malformed camera line in '{path}': {line!r}") from e
        cameras[cam.camera_id] = cam
    return cameras


def read_images(path: Path) -> Tuple[Dict[int, SparseImage], Optional[PoseConvention]]:
    text = _read(path)
    convention = None
    lines = []
    for line in text.split("\n"):
        if line.startswith(CONVENTION_TAG):
            convention = PoseConvention(line[len(CONVENTION_TAG):].strip())
        elif not line.startswith("#"):
            lines.append(line.strip())

    images = {}
    i = 0
    while i < len(lines):
        header = lines[i]
        if not header:
            i += 1
            continue
        points_line = lines[i + 1] if i + 1 < len(lines) else ""
        i += 2
        parts = header.split()
        try:
            points = points_line.split()
            points2d = [
                (float(points[k]), float(points[k + 1]), int(points[k + 2]))
                for k in range(0, len(points), 3)
            ]
            img = SparseImage(
                image_id=int(parts[0]),
                qvec=tuple(float(v) for v in parts[1:5]),
                tvec=tuple(float(v) for v in parts[5:8]),
                camera_id=int(parts[8]),
                name=" ".join(parts[9:]),
                points2d=points2d,
            )
        except (IndexError, ValueError) as e:
            raise InputValidationError(f"malformed image entry in '{path}': {header!r}") from e
        images[img.image_id] = img
    return images, convention


def read_points(path: Path) -> Dict[int, SparsePoint]:
    points = {}
    for line in _data_lines(path):
        parts = line.split()
        try:
            track_raw = parts[8:]
            point = SparsePoint(
                point_id=int(parts[0]),
                xyz=tuple(float(v) for v in parts[1:4]),
                rgb=tuple(int(v) for v in parts[4:7]),
                error=float(parts[7]),
                track=[(int(track_raw[k]), int(track_raw[k + 1])) for k in range(0, len(track_raw), 2)],
            )
        except (IndexError, ValueError) as e:
            raise InputValidationError(f"malformed point line in '{path}': {line!r}") from e
        points[point.point_id] = point
    return points


def _read(path: Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputValidationError(f"cannot read '{path}': {e}") from e


def _data_lines(path: Path) -> List[str]:
    return [line.strip() for line in _read(path).split("\n") if line.strip() and not line.startswith("#")]
