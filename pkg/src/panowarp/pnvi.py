"""
Progressive novel view inpainting.

A camera move is cut into short collinear steps. Each step forward-warps
everything observed so far to the next pose, inpaints the holes (per cubemap
face, or on the whole panorama for the `direct` strategy), keeps every warped
pixel as it was, and fills depth into the holes. Inpainted pixels become
observed points of their own, so later steps re-project them instead of
re-sampling the previous step's raster. Steps are sequential; faces within a
step are inpainted concurrently.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union
import asyncio
import json
import math
import numpy as np

from . import instances
from .cubemap import c2e, e2c
from .errors import InputValidationError, InvalidDepthError, PnviStepError, StepTooLargeError
from .inpaint import BackendLike, ExternalDepthHook, InpaintRequest, inpaint, inpaint_depth, resolve_backend
from .models import CameraPose, DepthFormat, PnviStrategy, PosePreset
from .raster_io import depth_suffix, read_depth, read_rgb, save_panorama
from .rasters import CubemapSet, DepthMap, EquirectImage, FACE_NAMES, check_same_size
from .sphere import pixel_directions
from .warp import WarpResult, composite_replace, warp_points

DEFAULT_STEP_LENGTH = 0.02
DEFAULT_MAX_HOLE_RATIO = 0.30
PRESET_DISTANCE = 0.15
MANIFEST_NAME = "manifest.json"

PoseArg = Union[CameraPose, Sequence[float], str]

# ==================== TYPES ====================

@dataclass(frozen=True)
class PnviPlan:
    """Ordered poses visited on the way from start_pose to target_pose."""
    start_pose: CameraPose
    target_pose: CameraPose
    step_length: float
    steps: Tuple[CameraPose, ...]
    strategy: PnviStrategy = PnviStrategy.PROGRESSIVE

    @property
    def distance(self) -> float:
        return _distance(self.start_pose, self.target_pose)


@dataclass(frozen=True)
class ObservedPoints:
    """Scene points with the color they had when first observed or inpainted."""
    points: np.ndarray  # (N, 3) scene coordinates, meters
    colors: np.ndarray  # (N, 3) uint8

    def __len__(self) -> int:
        return self.points.shape[0]

    @classmethod
    def lift(cls, pose: CameraPose, image: EquirectImage, depth: DepthMap,
             where: Optional[np.ndarray] = None) -> "ObservedPoints":
        """Lift the pixels of a view (all of them, or those selected by `where`) to scene points."""
        h, w = depth.height, depth.width
        dirs = instances.grid_cache.get(("pixel_directions", w, h), lambda: pixel_directions(w, h))
        select = np.ones((h, w), dtype=bool) if where is None else np.asarray(where, dtype=bool)
        d = depth.data[select].astype(np.float64)
        points = dirs[select] * d[:, None] + np.array(pose.as_tuple())
        return cls(points=points, colors=image.data[select].copy())

    def extend(self, other: "ObservedPoints") -> "ObservedPoints":
        """Append `other`; existing points keep priority on exact depth ties."""
        if len(other) == 0:
            return self
        return ObservedPoints(np.concatenate([self.points, other.points]),
                              np.concatenate([self.colors, other.colors]))


@dataclass(frozen=True)
class PnviState:
    """A hole-free panorama and its depth at `pose`.

    `observed` holds every scene point seen so far; when absent the state's
    own pixels are the only observation.
    """
    pose: CameraPose
    image: EquirectImage
    depth: DepthMap
    observed: Optional[ObservedPoints] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        check_same_size(self.image, self.depth)
        if not self.depth.is_complete():
            raise InvalidDepthError("PNVI state depth must be strictly positive everywhere")

    def observations(self) -> ObservedPoints:
        if self.observed is not None:
            return self.observed
        return ObservedPoints.lift(self.pose, self.image, self.depth)


@dataclass(frozen=True)
class StepReport:
    """What one step did: where it went and how much it had to inpaint."""
    index: int
    pose: CameraPose
    hole_ratio: float


@dataclass
class PnviOptions:
    """Per-run knobs shared by every step of a plan."""
    face_size: int = 512
    max_hole_ratio: float = DEFAULT_MAX_HOLE_RATIO
    threads: Optional[int] = None
    depth_hook: Optional[str] = None
    max_concurrent: Optional[int] = None
    timeout: Optional[float] = None

StepCallback = Callable[[StepReport, PnviState], None]

# ==================== PLANNING ====================

def plan_path(start: PoseArg, target: PoseArg, step_length: float = DEFAULT_STEP_LENGTH,
              strategy: PnviStrategy = PnviStrategy.PROGRESSIVE) -> PnviPlan:
    """Split start -> target into ceil(distance / step_length) equal steps.

    The large-step strategy always uses a single step.
    """
    start, target = as_pose(start), as_pose(target)
    if not (isinstance(step_length, (int, float)) and math.isfinite(step_length) and step_length > 0):
        raise InputValidationError(f"step_length must be a positive number, got {step_length}")
    strategy = PnviStrategy(strategy)

    dist = _distance(start, target)
    if dist == 0.0:
        steps: Tuple[CameraPose, ...] = ()
    elif strategy == PnviStrategy.LARGE_STEP:
        steps = (target,)
    else:
        # Tolerance keeps exact multiples (0.05 / 0.05) from rounding up.
        n = max(1, math.ceil(dist / step_length - 1e-9))
        s, t = np.array(start.as_tuple()), np.array(target.as_tuple())
        steps = tuple(_pose_from(s + (t - s) * (k / n)) for k in range(1, n)) + (target,)
    return PnviPlan(start_pose=start, target_pose=target, step_length=float(step_length),
                    steps=steps, strategy=strategy)


def pose_preset(preset: Union[PosePreset, str], distance: float = PRESET_DISTANCE) -> List[CameraPose]:
    """Built-in target pose sets around the source panorama center."""
    preset = PosePreset(preset)
    poses = []
    for axis in range(3):
        for sign in (1.0, -1.0):
            t = [0.0, 0.0, 0.0]
            t[axis] = sign * distance
            poses.append(_pose_from(t))
    if preset == PosePreset.DEFAULT:
        d = distance / math.sqrt(2.0)
        for sx, sz in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            poses.append(_pose_from((sx * d, 0.0, sz * d)))
    return poses


def as_pose(pose: PoseArg) -> CameraPose:
    if isinstance(pose, CameraPose):
        return pose
    try:
        return CameraPose.model_validate(pose)
    except ValueError as e:
        raise InputValidationError(f"invalid pose {pose!r}: {e}") from e

# ==================== STEPPING ====================

async def pnvi_step(state: PnviState, next_pose: PoseArg, backend: BackendLike,
                    strategy: PnviStrategy = PnviStrategy.PROGRESSIVE,
                    options: Optional[PnviOptions] = None, enforce_guard: bool = True) -> PnviState:
    """Advance one step: warp, inpaint holes, composite, fill depth."""
    impl = resolve_backend(backend, timeout=(options.timeout if options else None))
    try:
        new_state, _ = await _advance(state, as_pose(next_pose), impl, PnviStrategy(strategy),
                                      options or PnviOptions(), enforce_guard)
    finally:
        if impl is not backend:
            await impl.close()
    return new_state


async def pnvi_run(initial: PnviState, plan: PnviPlan, backend: BackendLike,
                   options: Optional[PnviOptions] = None,
                   on_step: Optional[StepCallback] = None) -> PnviState:
    """Fold pnvi_step over the plan; failures carry the 0-based step index."""
    options = options or PnviOptions()
    if plan.start_pose != initial.pose:
        raise InputValidationError(f"plan starts at {plan.start_pose} but the state is at {initial.pose}")
    if not plan.steps:
        return initial

    impl = resolve_backend(backend, timeout=options.timeout)
    enforce_guard = plan.strategy != PnviStrategy.LARGE_STEP
    state = initial
    try:
        for index, pose in enumerate(plan.steps):
            try:
                state, ratio = await _advance(state, pose, impl, plan.strategy, options, enforce_guard)
            except StepTooLargeError as e:
                raise PnviStepError(index, StepTooLargeError(e.hole_ratio, e.max_hole_ratio, plan.step_length)) from e
            except Exception as e:
                raise PnviStepError(index, e) from e
            if on_step is not None:
                on_step(StepReport(index=index, pose=pose, hole_ratio=ratio), state)
    finally:
        if impl is not backend:
            await impl.close()
    return state


async def _advance(state: PnviState, next_pose: CameraPose, backend, strategy: PnviStrategy,
                   options: PnviOptions, enforce_guard: bool) -> Tuple[PnviState, float]:
    if next_pose == state.pose:
        return state, 0.0

    # Every observed point is projected from where it was first seen, so
    # content is quantized once per output view and never re-sampled.
    observed = state.observations()
    warped = warp_points(observed.points, observed.colors, next_pose,
                         state.depth.width, state.depth.height, threads=options.threads)
    ratio = warped.hole_ratio
    if enforce_guard and ratio > options.max_hole_ratio:
        raise StepTooLargeError(ratio, options.max_hole_ratio, _distance(state.pose, next_pose))

    if ratio == 0.0:
        return PnviState(next_pose, warped.image, warped.depth, observed), ratio

    if strategy == PnviStrategy.DIRECT:
        request = InpaintRequest(warped.image.data, warped.mask.data, pose=next_pose)
        inpainted = EquirectImage(await inpaint(request, backend))
    else:
        inpainted = await _inpaint_faces(warped, next_pose, backend, options)
    image = composite_replace(inpainted, warped)
    depth = await _fill_depth(warped, image, next_pose, backend, options)
    born = ObservedPoints.lift(next_pose, image, depth, where=warped.mask.data.astype(bool))
    return PnviState(next_pose, image, depth, observed.extend(born)), ratio


async def _inpaint_faces(warped: WarpResult, pose: CameraPose, backend, options: PnviOptions) -> EquirectImage:
    rgb = e2c(warped.image, options.face_size)
    masks = e2c(warped.mask, options.face_size)
    limit = options.max_concurrent or _settings_value("max_concurrent_backends", 6)
    semaphore = asyncio.Semaphore(limit)

    async def one(name: str, face: np.ndarray, mask: np.ndarray) -> np.ndarray:
        async with semaphore:
            return await inpaint(InpaintRequest(face, mask, face=name, pose=pose), backend)

    faces = await asyncio.gather(*(one(n, f, m) for n, f, m in zip(FACE_NAMES, rgb.faces, masks.faces)))
    return c2e(CubemapSet(faces=list(faces)), warped.image.width, warped.image.height)


async def _fill_depth(warped: WarpResult, image: EquirectImage, pose: CameraPose, backend,
                      options: PnviOptions) -> DepthMap:
    holes = warped.mask.data.astype(bool)
    if options.depth_hook:
        hook = ExternalDepthHook(options.depth_hook, timeout=options.timeout or _settings_value("backend_timeout_sec", 120.0))
        source = await hook.estimate(image)
    else:
        source = await backend.fill_depth(warped.depth, warped.mask, pose)
    if source is None:
        return inpaint_depth(warped.depth, warped.mask)
    check_same_size(source, warped.depth)
    return DepthMap(np.where(holes, source.data, warped.depth.data).astype(np.float32))


def _settings_value(name: str, default):
    if instances.settings is None:
        return default
    return getattr(instances.settings, name)

# ==================== EVALUATION ====================

def endpoint_error(result: EquirectImage, reference: EquirectImage) -> float:
    """Mean absolute per-channel difference, in 8-bit levels."""
    check_same_size(result, reference)
    return float(np.mean(np.abs(result.data.astype(np.float64) - reference.data.astype(np.float64))))


async def compare_strategies(initial: PnviState, target: PoseArg, backend: BackendLike,
                             reference: EquirectImage, step_length: float = DEFAULT_STEP_LENGTH,
                             strategies: Sequence[PnviStrategy] = tuple(PnviStrategy),
                             options: Optional[PnviOptions] = None) -> Dict[str, float]:
    """Endpoint error of each strategy against a reference render at `target`."""
    errors = {}
    for strategy in strategies:
        plan = plan_path(initial.pose, target, step_length, PnviStrategy(strategy))
        final = await pnvi_run(initial, plan, backend, options)
        errors[PnviStrategy(strategy).value] = endpoint_error(final.image, reference)
    return errors

# ==================== ARTIFACTS ====================

@dataclass
class ViewWriter:
    """Writes clean views under `out_dir` and keeps the manifest that lists them."""
    out_dir: Path
    depth_format: DepthFormat = DepthFormat.PFM
    flip_v: bool = False
    views: List[dict] = field(default_factory=list)

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)

    @property
    def manifest_path(self) -> Path:
        return self.out_dir / MANIFEST_NAME

    def write(self, name: str, state: PnviState, intermediate: bool = False, **extra) -> dict:
        image_name = f"{name}.png"
        depth_name = f"{name}{depth_suffix(self.depth_format)}"
        save_panorama(self.out_dir / image_name, state.image, self.out_dir / depth_name, state.depth,
                      self.depth_format, self.flip_v)
        entry = {
            "name": name,
            "pose": list(state.pose.as_tuple()),
            "image": image_name,
            "depth": depth_name,
            "depth_format": self.depth_format.value,
            "intermediate": intermediate,
        }
        entry.update(extra)
        self.views.append(entry)
        return entry

    def save_manifest(self) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        payload = {"flip_v": self.flip_v, "views": self.views}
        self.manifest_path.write_text(json.dumps(payload, indent=2) + "\n")
        return self.manifest_path


@dataclass(frozen=True)
class ManifestView:
    name: str
    pose: CameraPose
    image_path: Path
    depth_path: Path
    depth_format: DepthFormat
    intermediate: bool = False


def read_manifest(path: Union[str, Path]) -> Tuple[List[ManifestView], bool]:
    """Views listed in a manifest (paths resolved against its directory) and its flip_v flag."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, ValueError) as e:
        raise InputValidationError(f"cannot read manifest '{path}': {e}") from e
    views = []
    for item in payload.get("views", []):
        try:
            views.append(ManifestView(
                name=str(item["name"]),
                pose=CameraPose.model_validate(item["pose"]),
                image_path=path.parent / item["image"],
                depth_path=path.parent / item["depth"],
                depth_format=DepthFormat(item.get("depth_format", "pfm")),
                intermediate=bool(item.get("intermediate", False)),
            ))
        except (KeyError, ValueError) as e:
            raise InputValidationError(f"malformed manifest entry in '{path}': {e}") from e
    if not views:
        raise InputValidationError(f"manifest '{path}' lists no views")
    return views, bool(payload.get("flip_v", False))


def load_view(view: ManifestView, flip_v: bool = False) -> PnviState:
    """Load a manifest view back into a state (files are stored flipped if flip_v)."""
    rgb = read_rgb(view.image_path)
    depth = read_depth(view.depth_path, view.depth_format)
    if flip_v:
        rgb, depth = np.flipud(rgb), np.flipud(depth)
    return PnviState(view.pose, EquirectImage(np.ascontiguousarray(rgb)), DepthMap(np.ascontiguousarray(depth)))


def _pose_from(values) -> CameraPose:
    x, y, z = (float(v) for v in values)
    return CameraPose(tx=x, ty=y, tz=z)


def _distance(a: CameraPose, b: CameraPose) -> float:
    return math.sqrt(sum((q - p) ** 2 for p, q in zip(a.as_tuple(), b.as_tuple())))
