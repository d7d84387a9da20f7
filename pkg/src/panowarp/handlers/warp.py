from typing import Any, Dict
import numpy as np

from ..models import ResponseFormat, WarpInput, StatsInput
from ..raster_io import depth_suffix, load_panorama, read_mask, save_hole_mask, save_panorama
from ..rasters import HoleMask
from ..timing import benchmark_warp
from ..utils import ResponseFormatter, handle_error, log
from ..warp import cvs_warp, hole_ratio, hole_ratio_sweep

# ==================== RUNNERS ====================

def run_warp(params: WarpInput) -> Dict[str, Any]:
    """Warp one panorama to `params.pose` and write image, depth and mask."""
    image, depth = load_panorama(params.image, params.depth, params.depth_format, params.flip_v)
    result = cvs_warp(image, depth, params.pose, threads=params.threads)

    prefix = params.out_prefix
    paths = {
        "image": f"{prefix}.png",
        "depth": f"{prefix}{depth_suffix(params.depth_format)}",
        "mask": f"{prefix}.mask.png",
    }
    save_panorama(paths["image"], result.image, paths["depth"], result.depth, params.depth_format, params.flip_v)
    save_hole_mask(paths["mask"], result.mask, params.flip_v)
    log(f"[warp] {params.pose} -> hole ratio {ResponseFormatter.format_percent(result.hole_ratio)}%")

    report: Dict[str, Any] = {"pose": list(params.pose.as_tuple()), "hole_ratio": result.hole_ratio, **paths}
    if params.benchmark:
        report["benchmark"] = benchmark_warp(image, depth, params.pose)
    return report


def run_stats(params: StatsInput) -> Dict[str, Any]:
    """Hole ratio of one mask, or a per-axis sweep over distances."""
    if params.mask is not None:
        mask = HoleMask((read_mask(params.mask) > 0).astype(np.uint8))
        ratio = hole_ratio(mask)
        return {"mask": params.mask, "hole_ratio": ratio, "hole_percent": ResponseFormatter.format_percent(ratio)}

    _, depth = load_panorama(params.image, params.depth, params.depth_format)
    rows = hole_ratio_sweep(depth, params.axis, params.distances)
    return {
        "axis": params.axis.lower(),
        "rows": [{"distance": d, "hole_ratio": r} for d, r in rows],
        "table": ResponseFormatter.format_sweep_table(rows, params.axis),
    }

# ==================== TOOLS ====================

async def panowarp_warp(params: WarpInput) -> str:
    """Coarse view synthesis: forward-warp a panorama with its depth to a new camera translation.

    Writes the corrupted panorama (holes painted white), its depth at the new
    viewpoint and the binary hole mask.

    Args:
        params (WarpInput): Input files, target pose and output prefix

    Returns:
        str: Output paths and the hole-to-image ratio
    """
    try:
        return ResponseFormatter.render("Warp", run_warp(params), params.response_format)
    except Exception as e:
        return handle_error(e)


async def panowarp_stats(params: StatsInput) -> str:
    """Hole statistics: ratio of one mask, or a Pose/Mask (%) sweep along one axis."""
    try:
        report = run_stats(params)
        if params.response_format == ResponseFormat.MARKDOWN:
            if "table" in report:
                return f"# Hole ratio sweep\n\n{report['table']}"
            return f"Hole ratio: {report['hole_percent']}%"
        return ResponseFormatter.render("Hole statistics", report, params.response_format)
    except Exception as e:
        return handle_error(e)
