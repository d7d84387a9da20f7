import math
from typing import Optional, List, Union, Any
from enum import Enum
from pydantic import BaseModel, Field, ConfigDict, field_validator, model_validator

# ==================== ENUMS ====================

class ResponseFormat(str, Enum):
    """Output format options."""
    MARKDOWN = "markdown"
    JSON = "json"

class DepthFormat(str, Enum):
    """On-disk depth encodings."""
    PFM = "pfm"              # little-endian float32, meters
    PNG16MM = "png16mm"      # 16-bit grayscale PNG, millimeters

class PnviStrategy(str, Enum):
    """How a camera move is inpainted."""
    PROGRESSIVE = "progressive"  # small steps, per-face cubemap inpainting
    DIRECT = "direct"            # small steps, whole-panorama inpainting
    LARGE_STEP = "large-step"    # one move straight to the target

class PoseConvention(str, Enum):
    """Extrinsics convention written to images.txt."""
    W2C = "w2c"  # world-to-camera (reconstruction tool default)
    C2W = "c2w"  # camera-to-world

class PosePreset(str, Enum):
    """Built-in multi-view pose sets."""
    DEFAULT = "default"  # ±0.15 m along each axis + 4 horizontal diagonals
    AXES = "axes"        # ±0.15 m along each axis

_STRICT = ConfigDict(
    str_strip_whitespace=True,
    validate_assignment=True,
    extra='forbid'
)

# ==================== CAMERA POSE ====================

class CameraPose(BaseModel):
    """Translation of a viewpoint from the original panorama center, meters."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    tx: float = 0.0
    ty: float = 0.0
    tz: float = 0.0

    @model_validator(mode='before')
    @classmethod
    def _coerce(cls, value: Any) -> Any:
        if isinstance(value, str):
            return cls.parse(value).model_dump()
        if isinstance(value, (list, tuple)):
            if len(value) != 3:
                raise ValueError("pose needs exactly 3 components")
            return {"tx": value[0], "ty": value[1], "tz": value[2]}
        return value

    @field_validator('tx', 'ty', 'tz')
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("pose components must be finite")
        return v

    @classmethod
    def parse(cls, text: str) -> "CameraPose":
        """Parse 'x,y,z' (meters)."""
        parts = [p.strip() for p in text.split(',')]
        if len(parts) != 3:
            raise ValueError(f"expected 'x,y,z', got '{text}'")
        return cls(tx=float(parts[0]), ty=float(parts[1]), tz=float(parts[2]))

    def as_tuple(self) -> tuple:
        return (self.tx, self.ty, self.tz)

    def norm(self) -> float:
        return math.sqrt(self.tx * self.tx + self.ty * self.ty + self.tz * self.tz)

    def is_origin(self) -> bool:
        return self.tx == 0.0 and self.ty == 0.0 and self.tz == 0.0

    def __str__(self) -> str:
        return f"{self.tx:g},{self.ty:g},{self.tz:g}"


# ==================== INPUT MODELS ====================

class WarpInput(BaseModel):
    """Input for coarse view synthesis of one panorama."""
    model_config = _STRICT

    image: str = Field(..., description="Equirectangular RGB PNG (W = 2H)", min_length=1)
    depth: str = Field(..., description="Depth map aligned with the image", min_length=1)
    pose: CameraPose = Field(..., description="Target translation 'x,y,z' in meters")
    out_prefix: str = Field(..., description="Output prefix; writes <prefix>.png/.pfm/.mask.png", min_length=1)
    depth_format: DepthFormat = Field(default=DepthFormat.PFM, description="Depth file encoding")
    flip_v: bool = Field(default=False, description="Flip inputs/outputs vertically")
    threads: Optional[int] = Field(default=None, description="Worker cap for the warp kernel", ge=1)
    benchmark: bool = Field(default=False, description="Also time the warp at several thread counts")
    response_format: ResponseFormat = Field(default=ResponseFormat.MARKDOWN, description="'markdown' or 'json'")

class StatsInput(BaseModel):
    """Input for hole statistics (single mask or per-axis sweep)."""
    model_config = _STRICT

    mask: Optional[str] = Field(None, description="Hole mask PNG to measure")
    image: Optional[str] = Field(None, description="Sweep mode: panorama to warp")
    depth: Optional[str] = Field(None, description="Sweep mode: depth of the panorama")
    axis: str = Field(default="x", description="Sweep axis: x, y or z", pattern="^[xyzXYZ]$")
    distances: List[float] = Field(
        default_factory=lambda: [0.33, 0.27, 0.21, 0.15, 0.09, 0.03, -0.02],
        description="Sweep distances in meters"
    )
    depth_format: DepthFormat = Field(default=DepthFormat.PFM)
    response_format: ResponseFormat = Field(default=ResponseFormat.MARKDOWN)

    @model_validator(mode='after')
    def _one_mode(self) -> "StatsInput":
        if self.mask is None and (self.image is None or self.depth is None):
            raise ValueError("give either 'mask' or both 'image' and 'depth' for a sweep")
        return self

class E2CInput(BaseModel):
    """Input for equirectangular to cubemap conversion."""
    model_config = _STRICT

    input: str = Field(..., description="Panorama PNG (RGB or mask)", min_length=1)
    out_dir: str = Field(..., description="Directory receiving the six face PNGs", min_length=1)
    face_size: int = Field(default=512, description="Face edge length in pixels", ge=1, le=8192)
    mask: bool = Field(default=False, description="Treat input as a binary hole mask")
    response_format: ResponseFormat = Field(default=ResponseFormat.MARKDOWN)

class C2EInput(BaseModel):
    """Input for cubemap to equirectangular conversion."""
    model_config = _STRICT

    in_dir: str = Field(..., description="Directory holding front/right/back/left/up/down PNGs", min_length=1)
    out: str = Field(..., description="Output panorama PNG", min_length=1)
    width: int = Field(default=1024, description="Output width; height is width/2", ge=2, le=16384)
    mask: bool = Field(default=False, description="Treat faces as binary hole masks")
    response_format: ResponseFormat = Field(default=ResponseFormat.MARKDOWN)

    @field_validator('width')
    @classmethod
    def _even(cls, v: int) -> int:
        if v % 2:
            raise ValueError("width must be even (W = 2H)")
        return v

class InpaintInput(BaseModel):
    """Input for filling one raster's holes."""
    model_config = _STRICT

    image: str = Field(..., description="RGB PNG with holes", min_length=1)
    mask: str = Field(..., description="Mask PNG (nonzero = fill)", min_length=1)
    out: str = Field(..., description="Output PNG", min_length=1)
    backend: str = Field(default="pullpush", description="constant | pullpush | external:<cmd> | http(s)://...")
    timeout_sec: Optional[float] = Field(default=None, description="Backend timeout in seconds", gt=0)
    response_format: ResponseFormat = Field(default=ResponseFormat.MARKDOWN)

class PnviInput(BaseModel):
    """Input for progressive novel view inpainting toward one target pose."""
    model_config = _STRICT

    image: str = Field(..., description="Source panorama PNG", min_length=1)
    depth: str = Field(..., description="Source depth map", min_length=1)
    target: CameraPose = Field(..., description="Target translation 'x,y,z' in meters")
    out_dir: str = Field(..., description="Directory for views and manifest.json", min_length=1)
    step: float = Field(default=0.02, description="Maximum move per step, meters", gt=0)
    backend: str = Field(default="pullpush", description="Inpainting backend id")
    strategy: PnviStrategy = Field(default=PnviStrategy.PROGRESSIVE)
    face_size: int = Field(default=512, description="Cubemap face size for per-face inpainting", ge=8, le=8192)
    max_hole_ratio: float = Field(default=0.30, description="Per-step hole ratio guard", gt=0, le=1)
    keep_intermediate: bool = Field(default=False, description="Also write intermediate step views")
    depth_format: DepthFormat = Field(default=DepthFormat.PFM)
    depth_hook: Optional[str] = Field(None, description="Command re-estimating depth: <cmd> --image in.png --out out.pfm")
    flip_v: bool = Field(default=False)
    overwrite: bool = Field(default=False, description="Allow writing into a non-empty out_dir")
    response_format: ResponseFormat = Field(default=ResponseFormat.MARKDOWN)

class MvpInput(BaseModel):
    """Input for multi-view projection and sparse-model export."""
    model_config = _STRICT

    manifest: str = Field(..., description="views/manifest.json produced by pnvi or pipeline", min_length=1)
    out_dir: str = Field(..., description="Sparse model output directory", min_length=1)
    layout: str = Field(default="cube6+ring8", description="View layout, e.g. cube6, ring8, cube6+ring8")
    fov: float = Field(default=90.0, description="Field of view in degrees", gt=0, le=120)
    size: int = Field(default=512, description="Perspective view edge length", ge=8, le=8192)
    stride: int = Field(default=4, description="Point cloud pixel stride", ge=1)
    pose_convention: PoseConvention = Field(default=PoseConvention.W2C)
    images_only: bool = Field(default=False, description="Skip points3D (let the reconstruction tool estimate)")
    overwrite: bool = Field(default=False)
    response_format: ResponseFormat = Field(default=ResponseFormat.MARKDOWN)

class DatasetInput(BaseModel):
    """Input for synthesizing the spherical mask dataset."""
    model_config = _STRICT

    list_path: str = Field(..., description="Text file, one '<image> <depth>' pair per line", min_length=1)
    out_dir: str = Field(..., description="Dataset output directory", min_length=1)
    units: List[float] = Field(default_factory=lambda: [0.02, 0.04], description="Movement units in meters")
    directions: str = Field(default="default8", description="default8 | axes6 | 'x,y,z;x,y,z;...'")
    face_size: int = Field(default=512, ge=8, le=8192)
    workers: Optional[int] = Field(default=None, ge=1)
    depth_format: DepthFormat = Field(default=DepthFormat.PFM)
    overwrite: bool = Field(default=False)
    response_format: ResponseFormat = Field(default=ResponseFormat.MARKDOWN)

    @field_validator('units')
    @classmethod
    def _units(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("at least one movement unit is required")
        if any(u < 0 or not math.isfinite(u) for u in v):
            raise ValueError("movement units must be finite and non-negative")
        return v

class PipelineConfig(BaseModel):
    """Single JSON document driving the end-to-end pipeline."""
    model_config = _STRICT

    image: str = Field(..., min_length=1)
    depth: str = Field(..., min_length=1)
    out_dir: str = Field(..., min_length=1)
    depth_format: DepthFormat = Field(default=DepthFormat.PFM)
    poses: Union[PosePreset, List[CameraPose]] = Field(default=PosePreset.DEFAULT)
    step: float = Field(default=0.02, gt=0)
    backend: str = Field(default="pullpush")
    strategy: PnviStrategy = Field(default=PnviStrategy.PROGRESSIVE)
    face_size: int = Field(default=512, ge=8, le=8192)
    max_hole_ratio: float = Field(default=0.30, gt=0, le=1)
    keep_intermediate: bool = Field(default=False)
    depth_hook: Optional[str] = Field(None)
    layout: str = Field(default="cube6+ring8")
    fov: float = Field(default=90.0, gt=0, le=120)
    size: int = Field(default=512, ge=8, le=8192)
    stride: int = Field(default=4, ge=1)
    pose_convention: PoseConvention = Field(default=PoseConvention.W2C)
    images_only: bool = Field(default=False)
    flip_v: bool = Field(default=False)
    overwrite: bool = Field(default=False)

class PipelineInput(BaseModel):
    """Input for the one-shot pipeline: a config file plus flag overrides."""
    model_config = _STRICT

    config: str = Field(..., description="Path to the pipeline JSON config", min_length=1)
    overrides: dict = Field(default_factory=dict, description="Config keys overridden by flags")
    dry_run: bool = Field(default=False, description="Print the plan without writing")
    response_format: ResponseFormat = Field(default=ResponseFormat.MARKDOWN)
