from typing import Any, Dict, Optional

from ..inpaint import InpaintBackend, resolve_backend
from ..models import CameraPose, PnviInput
from ..pnvi import PnviOptions, PnviPlan, PnviState, StepReport, ViewWriter, plan_path, pnvi_run
from ..raster_io import load_panorama
from ..utils import ResponseFormatter, handle_error, log, prepare_out_dir

ORIGIN_VIEW = "origin"

# ==================== HELPERS ====================

async def run_branch(initial: PnviState, plan: PnviPlan, name: str, backend: InpaintBackend,
                     writer: ViewWriter, options: PnviOptions, keep_intermediate: bool = False) -> PnviState:
    """Run one plan and record its views.

    Step k of n is written as `<name>_step<k>` when intermediates are kept; the
    last step is always written as `<name>`.
    """
    n = len(plan.steps)

    def on_step(report: StepReport, state: PnviState) -> None:
        k = report.index + 1
        log(f"[pnvi] {name}: step {k}/{n} at {report.pose} (holes {report.hole_ratio * 100:.1f}%)")
        if keep_intermediate and k < n:
            writer.write(f"{name}_step{k:03d}", state, intermediate=True, branch=name, step=k)

    final = await pnvi_run(initial, plan, backend, options, on_step=on_step)
    writer.write(name, final, intermediate=False, branch=name, step=n)
    return final

# ==================== RUNNERS ====================

async def run_pnvi(params: PnviInput, backend: Optional[InpaintBackend] = None) -> Dict[str, Any]:
    """Progressively move from the source panorama to `params.target` and write the views."""
    image, depth = load_panorama(params.image, params.depth, params.depth_format, params.flip_v)
    initial = PnviState(CameraPose(), image, depth)
    plan = plan_path(initial.pose, params.target, params.step, params.strategy)
    impl = backend or resolve_backend(params.backend)
    out = prepare_out_dir(params.out_dir, params.overwrite)

    writer = ViewWriter(out, params.depth_format, params.flip_v)
    writer.write(ORIGIN_VIEW, initial, intermediate=False, branch=ORIGIN_VIEW, step=0)
    options = PnviOptions(face_size=params.face_size, max_hole_ratio=params.max_hole_ratio,
                          depth_hook=params.depth_hook)
    try:
        await run_branch(initial, plan, "target", impl, writer, options, params.keep_intermediate)
    finally:
        writer.save_manifest()
        if impl is not backend:
            await impl.close()

    return {
        "target": list(plan.target_pose.as_tuple()),
        "strategy": plan.strategy.value,
        "steps": len(plan.steps),
        "views": len(writer.views),
        "manifest": str(writer.manifest_path),
    }

# ==================== TOOLS ====================

async def panowarp_pnvi(params: PnviInput) -> str:
    """Progressive novel view inpainting toward one target pose.

    Splits the move into steps of at most `step` meters; each step warps,
    inpaints the holes per cubemap face and keeps observed pixels bit-exact.
    Writes views plus manifest.json into `out_dir`.
    """
    try:
        return ResponseFormatter.render("PNVI", await run_pnvi(params), params.response_format)
    except Exception as e:
        return handle_error(e)

