import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..errors import InputValidationError, PipelineStageError, PnviStepError
from ..inpaint import InpaintBackend, resolve_backend
from ..models import CameraPose, PipelineConfig, PipelineInput, PosePreset, ResponseFormat
from ..pnvi import PnviOptions, PnviState, ViewWriter, load_view, plan_path, pose_preset, read_manifest
from ..raster_io import load_panorama
from ..timing import StageTimer
from ..utils import ResponseFormatter, handle_error, log, prepare_out_dir
from .mvp import build_sparse_model
from .pnvi import ORIGIN_VIEW, run_branch

# Config keys holding paths; relative values resolve against the config file's directory.
PATH_KEYS = ("image", "depth", "out_dir")

# ==================== CONFIG ====================

def load_pipeline_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> PipelineConfig:
    """Read the JSON config, apply flag overrides, validate."""
    config_path = Path(path)
    try:
        raw = json.loads(config_path.read_text())
    except OSError as e:
        raise InputValidationError(f"cannot read pipeline config '{config_path}': {e}") from e
    except ValueError as e:
        raise InputValidationError(f"pipeline config '{config_path}' is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise InputValidationError("pipeline config must be a JSON object")

    for key in PATH_KEYS:
        value = raw.get(key)
        if isinstance(value, str) and value and not Path(value).is_absolute():
            raw[key] = str(config_path.parent / value)
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    return PipelineConfig.model_validate(raw)


def target_poses(config: PipelineConfig) -> List[CameraPose]:
    if isinstance(config.poses, PosePreset):
        return pose_preset(config.poses)
    return list(config.poses)

# ==================== RUNNERS ====================

def plan_pipeline(config: PipelineConfig) -> Dict[str, Any]:
    """Pose set and step counts, without touching any file."""
    origin = CameraPose()
    branches = []
    for i, pose in enumerate(target_poses(config)):
        plan = plan_path(origin, pose, config.step, config.strategy)
        branches.append({"name": f"view_{i:02d}", "target": str(pose), "distance": plan.distance,
                         "steps": len(plan.steps)})
    return {
        "strategy": config.strategy.value,
        "step": config.step,
        "branches": branches,
        "total_steps": sum(b["steps"] for b in branches),
        "layout": config.layout,
        "out_dir": config.out_dir,
    }


async def run_pipeline(params: PipelineInput, backend: Optional[InpaintBackend] = None) -> Dict[str, Any]:
    """Clean panorama + depth -> PNVI over the pose set -> sparse-model export, with timing.json."""
    config = load_pipeline_config(params.config, params.overrides)
    plan = plan_pipeline(config)
    if params.dry_run:
        plan["dry_run"] = True
        return plan

    timer = StageTimer()
    with timer.stage("load"):
        try:
            image, depth = load_panorama(config.image, config.depth, config.depth_format, config.flip_v)
            initial = PnviState(CameraPose(), image, depth)
        except Exception as e:
            raise PipelineStageError("load", e) from e
    impl = backend or resolve_backend(config.backend)
    out = prepare_out_dir(config.out_dir, config.overwrite)

    writer = ViewWriter(out / "views", config.depth_format, config.flip_v)
    writer.write(ORIGIN_VIEW, initial, branch=ORIGIN_VIEW, step=0)
    options = PnviOptions(face_size=config.face_size, max_hole_ratio=config.max_hole_ratio,
                          depth_hook=config.depth_hook)
    states = [(ORIGIN_VIEW, initial)]
    try:
        with timer.stage("pnvi"):
            for i, pose in enumerate(target_poses(config)):
                name = f"view_{i:02d}"
                log(f"[pipeline] branch {name} -> {pose}")
                branch_plan = plan_path(initial.pose, pose, config.step, config.strategy)
                try:
                    final = await run_branch(initial, branch_plan, name, impl, writer, options,
                                             config.keep_intermediate)
                except Exception as e:
                    writer.save_manifest()
                    step = e.step_index if isinstance(e, PnviStepError) else None
                    cause = e.cause if isinstance(e, PnviStepError) else e
                    raise PipelineStageError(f"pnvi:{name}", cause, step, str(writer.manifest_path)) from e
                states.append((name, final))
    finally:
        if impl is not backend:
            await impl.close()
    manifest = writer.save_manifest()

    if config.keep_intermediate:
        # Kept intermediates are clean panoramas too; feed them to the export.
        states = _states_from_writer(writer, states)
    with timer.stage("mvp"):
        try:
            sparse = build_sparse_model(states, out / "sparse", config.layout, config.fov, config.size,
                                        config.stride, config.pose_convention, config.images_only)
        except Exception as e:
            raise PipelineStageError("mvp", e, manifest_path=str(manifest)) from e

    timing = timer.write(out / "timing.json")
    log(f"[pipeline] done in {timer.total_sec:.1f}s")
    return {
        "out_dir": str(out),
        "views": len(writer.views),
        "manifest": str(manifest),
        "sparse": sparse,
        "timing": str(timing),
    }


def _states_from_writer(writer: ViewWriter, finals):
    known = {name for name, _ in finals}
    views, flip_v = read_manifest(writer.manifest_path)
    extra = [(v.name, load_view(v, flip_v)) for v in views if v.name not in known]
    return list(finals) + extra

# ==================== TOOLS ====================

async def panowarp_pipeline(params: PipelineInput) -> str:
    """Run the whole flow from one JSON config: PNVI over the pose set, then sparse-model export.

    With dry_run set, only the plan (targets and step counts) is returned.
    """
    try:
        report = await run_pipeline(params)
        if report.get("dry_run") and params.response_format == ResponseFormat.MARKDOWN:
            return "# Pipeline plan\n\n" + ResponseFormatter.format_plan(report["branches"])
        return ResponseFormatter.render("Pipeline", report, params.response_format)
    except Exception as e:
        return handle_error(e)
