"""
Spherical mask dataset synthesis.

For every panorama: one warp mask per (direction, unit) pose, then the RGB and
each mask are cut into cubemap faces. With 8 directions and 2 units that is
6 RGB faces and 96 mask faces per panorama. Panoramas are processed by a worker
pool; the JSON-lines manifest is written by the calling thread only.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union
import json
import math
import numpy as np

from .config import resolve_threads
from .cubemap import e2c
from .errors import InputValidationError
from .models import CameraPose, DepthFormat
from .raster_io import load_panorama, write_mask, write_rgb
from .rasters import DepthMap, EquirectImage, FACE_NAMES, HoleMask, check_same_size
from .warp import hole_ratio, warp_mask

DEFAULT_UNITS = (0.02, 0.04)
MANIFEST_NAME = "manifest.jsonl"

_S = 1.0 / math.sqrt(2.0)
DIRECTION_PRESETS = {
    # Horizontal axes plus horizontal diagonals.
    "default8": [
        (1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 0.0, 1.0), (0.0, 0.0, -1.0),
        (_S, 0.0, _S), (_S, 0.0, -_S), (-_S, 0.0, _S), (-_S, 0.0, -_S),
    ],
    "axes6": [
        (1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0),
        (0.0, -1.0, 0.0), (0.0, 0.0, 1.0), (0.0, 0.0, -1.0),
    ],
}

Direction = Tuple[float, float, float]

# ==================== DIRECTIONS ====================

def parse_directions(value: Union[str, Sequence[Sequence[float]]]) -> List[Direction]:
    """Preset name, 'x,y,z;x,y,z;...' or a list of vectors; results are unit length."""
    if isinstance(value, str):
        key = value.strip().lower()
        if key in DIRECTION_PRESETS:
            return list(DIRECTION_PRESETS[key])
        try:
            vectors = [[float(c) for c in item.split(",")] for item in key.split(";") if item.strip()]
        except ValueError as e:
            raise InputValidationError(f"cannot parse directions '{value}'") from e
    else:
        vectors = [list(map(float, v)) for v in value]

    out = []
    for v in vectors:
        if len(v) != 3 or not all(math.isfinite(c) for c in v):
            raise InputValidationError(f"direction {v} must have 3 finite components")
        n = math.sqrt(sum(c * c for c in v))
        if n == 0.0:
            raise InputValidationError("direction vectors must be nonzero")
        out.append(tuple(c / n for c in v))
    if not out:
        raise InputValidationError("at least one movement direction is required")
    return out

# ==================== MASKS ====================

def gen_masks(depth: DepthMap, units: Sequence[float] = DEFAULT_UNITS,
              directions: Union[str, Sequence[Sequence[float]]] = "default8",
              threads: Optional[int] = None) -> List[Tuple[CameraPose, HoleMask]]:
    """One hole mask per (direction, unit), direction-major."""
    if not units:
        raise InputValidationError("at least one movement unit is required")
    dirs = parse_directions(directions)
    masks = []
    for direction in dirs:
        for unit in units:
            pose = CameraPose(tx=unit * direction[0], ty=unit * direction[1], tz=unit * direction[2])
            masks.append((pose, warp_mask(depth, pose, threads=threads)))
    return masks

# ==================== EXPORT ====================

@dataclass(frozen=True)
class PanoSource:
    """A panorama on disk, loaded only when a worker picks it up."""
    image_path: Path
    depth_path: Path
    depth_format: DepthFormat = DepthFormat.PFM

    def load(self) -> Tuple[EquirectImage, DepthMap]:
        return load_panorama(self.image_path, self.depth_path, self.depth_format)


@dataclass(frozen=True)
class DatasetManifest:
    path: Path
    panoramas: int
    rgb_faces: int
    mask_faces: int


PanoItem = Union[Tuple[EquirectImage, DepthMap], PanoSource]


def read_pano_list(list_path: Union[str, Path], depth_format: DepthFormat = DepthFormat.PFM) -> List[PanoSource]:
    """'<image> <depth>' per line; relative paths resolve against the list file; '#' starts a comment."""
    path = Path(list_path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise InputValidationError(f"cannot read panorama list '{path}': {e}") from e
    sources = []
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputValidationError(f"{path}:{lineno}: expected '<image> <depth>'")
        image, depth = (p if Path(p).is_absolute() else path.parent / p for p in parts)
        sources.append(PanoSource(Path(image), Path(depth), depth_format))
    if not sources:
        raise InputValidationError(f"panorama list '{path}' is empty")
    return sources


def export_dataset(panos: Sequence[PanoItem], out_dir: Union[str, Path],
                   units: Sequence[float] = DEFAULT_UNITS,
                   directions: Union[str, Sequence[Sequence[float]]] = "default8",
                   face_size: int = 512, workers: Optional[int] = None) -> DatasetManifest:
    """Write rgb/ and mask/ faces for every panorama plus manifest.jsonl."""
    if not panos:
        raise InputValidationError("no panoramas to export")
    if not units:
        raise InputValidationError("at least one movement unit is required")
    dirs = parse_directions(directions)
    out = Path(out_dir)
    try:
        (out / "rgb").mkdir(parents=True, exist_ok=True)
        (out / "mask").mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InputValidationError(f"cannot create output directory '{out}': {e}") from e

    n_workers = min(resolve_threads(workers), len(panos))
    warp_threads = 1 if n_workers > 1 else None
    jobs = [(f"pano_{i:06d}", item) for i, item in enumerate(panos)]

    def run(job):
        pano_id, item = job
        return _export_one(pano_id, item, out, units, dirs, face_size, warp_threads)

    if n_workers == 1:
        results = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run, jobs))

    manifest = out / MANIFEST_NAME
    rgb_count = mask_count = 0
    with manifest.open("w") as fh:
        for records in results:
            for record in records:
                if record["kind"] == "rgb":
                    rgb_count += 1
                else:
                    mask_count += 1
                fh.write(json.dumps(record) + "\n")
    return DatasetManifest(manifest, len(panos), rgb_count, mask_count)


def _export_one(pano_id: str, item: PanoItem, out: Path, units, dirs, face_size: int,
                threads: Optional[int]) -> List[dict]:
    image, depth = item.load() if isinstance(item, PanoSource) else item
    check_same_size(image, depth)
    records = []

    rgb = e2c(image, face_size)
    for face_name, face in zip(FACE_NAMES, rgb.faces):
        rel = f"rgb/{pano_id}_{face_name}.png"
        write_rgb(out / rel, face)
        records.append({"file": rel, "kind": "rgb", "pano": pano_id, "face": face_name})

    for di, direction in enumerate(dirs):
        for ui, unit in enumerate(units):
            pose = CameraPose(tx=unit * direction[0], ty=unit * direction[1], tz=unit * direction[2])
            mask = warp_mask(depth, pose, threads=threads)
            faces = e2c(mask, face_size)
            for face_name, face in zip(FACE_NAMES, faces.faces):
                rel = f"mask/{pano_id}_d{di}_u{ui}_{face_name}.png"
                write_mask(out / rel, face)
                records.append({
                    "file": rel,
                    "kind": "mask",
                    "pano": pano_id,
                    "direction": list(direction),
                    "direction_index": di,
                    "unit": float(unit),
                    "unit_index": ui,
                    "face": face_name,
                    "hole_ratio": float(np.count_nonzero(face)) / face.size,
                    "pano_hole_ratio": hole_ratio(mask),
                })
    return records
