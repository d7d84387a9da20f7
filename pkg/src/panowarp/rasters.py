from dataclasses import dataclass, field
from typing import List, Union
import numpy as np

from .errors import InputValidationError

# Face order and names are shared by e2c/c2e, pnvi and the dataset writer.
FACE_NAMES = ("front", "right", "back", "left", "up", "down")

# ==================== PANORAMA RASTERS ====================

@dataclass(frozen=True)
class EquirectImage:
    """W x H 8-bit RGB raster in equirectangular projection (W = 2H)."""
    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] != 3:
            raise InputValidationError(f"equirect image must be HxWx3, got shape {d.shape}")
        if d.dtype != np.uint8:
            raise InputValidationError(f"equirect image must be uint8, got {d.dtype}")
        h, w = d.shape[:2]
        if h <= 0 or w != 2 * h:
            raise InputValidationError(f"equirect image must satisfy W = 2H > 0, got {w}x{h}")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel metric depth (float32, meters); 0.0 marks invalid/unfilled."""
    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 2:
            raise InputValidationError(f"depth map must be HxW, got shape {d.shape}")
        if d.dtype != np.float32:
            raise InputValidationError(f"depth map must be float32, got {d.dtype}")
        if not np.all(np.isfinite(d)):
            raise InputValidationError("depth map contains non-finite values")
        if np.any(d < 0):
            raise InputValidationError("depth map contains negative values")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def is_complete(self) -> bool:
        """True when every pixel carries a valid (positive) depth."""
        return bool(np.all(self.data > 0))


@dataclass(frozen=True)
class HoleMask:
    """Binary raster, 1 = hole/unseen, 0 = observed."""
    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 2:
            raise InputValidationError(f"hole mask must be HxW, got shape {d.shape}")
        if d.dtype != np.uint8:
            raise InputValidationError(f"hole mask must be uint8, got {d.dtype}")
        if d.size and d.max() > 1:
            raise InputValidationError("hole mask values must be 0 or 1")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def zeros(cls, height: int, width: int) -> "HoleMask":
        return cls(np.zeros((height, width), dtype=np.uint8))


def check_same_size(*rasters) -> None:
    """Raise InputValidationError unless all rasters share height and width."""
    sizes = {(r.data.shape[0], r.data.shape[1]) for r in rasters}
    if len(sizes) > 1:
        raise InputValidationError(f"raster dimensions differ: {sorted(sizes)}")

# ==================== CUBEMAP ====================

@dataclass(frozen=True)
class CubemapSet:
    """Six square faces ordered front(+X), right(-Z), back(-X), left(+Z), up(+Y), down(-Y).

    Faces are HxWx3 uint8 for RGB sets and HxW uint8 {0,1} for mask sets.
    """
    faces: List[np.ndarray] = field(default_factory=list)
    is_mask: bool = False

    def __post_init__(self):
        if len(self.faces) != 6:
            raise InputValidationError(f"a cubemap needs 6 faces, got {len(self.faces)}")
        size = self.faces[0].shape[0]
        for name, face in zip(FACE_NAMES, self.faces):
            if face.shape[0] != size or face.shape[1] != size:
                raise InputValidationError(f"face '{name}' is {face.shape[1]}x{face.shape[0]}, expected {size}x{size}")
            if self.is_mask and face.ndim != 2:
                raise InputValidationError(f"mask face '{name}' must be single-channel")
            if not self.is_mask and (face.ndim != 3 or face.shape[2] != 3):
                raise InputValidationError(f"RGB face '{name}' must be HxWx3")

    @property
    def face_size(self) -> int:
        return self.faces[0].shape[0]

    def face(self, name: str) -> np.ndarray:
        return self.faces[FACE_NAMES.index(name)]


Panorama = Union[EquirectImage, HoleMask]
