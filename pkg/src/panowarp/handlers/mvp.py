from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
import numpy as np

from ..models import MvpInput, PoseConvention
from ..mvp import PanoramaViews, PointCloud, export_sparse_model, extract_views, lift_point_cloud
from ..pnvi import PnviState, load_view, read_manifest
from ..utils import ResponseFormatter, handle_error, log, prepare_out_dir

# ==================== HELPERS ====================

def build_sparse_model(states: Sequence[Tuple[str, PnviState]], out_dir: Path, layout: str, fov: float,
                       size: int, stride: int, convention: PoseConvention, images_only: bool,
                       threads: Optional[int] = None) -> Dict[str, Any]:
    """Cut every clean panorama into views, lift the merged cloud and export the model."""
    panoramas: List[PanoramaViews] = []
    clouds: List[PointCloud] = []
    for name, state in states:
        views = extract_views(state.image, state.pose, layout, fov, size, threads=threads)
        panoramas.append(PanoramaViews(name, state.pose, views, state.depth))
        if not images_only:
            clouds.append(lift_point_cloud(state.image, state.depth, state.pose, stride))
        log(f"[mvp] {name}: {len(views)} views")

    cloud = None
    if clouds:
        cloud = PointCloud(
            points=np.concatenate([c.points for c in clouds]),
            colors=np.concatenate([c.colors for c in clouds]),
            pixels=np.concatenate([c.pixels for c in clouds]),
        )
    model = export_sparse_model(panoramas, cloud, out_dir, convention, images_only)
    return {
        "out_dir": str(out_dir),
        "cameras": len(model.cameras),
        "images": len(model.images),
        "points": len(model.points),
        "pose_convention": model.convention.value,
        "images_only": images_only,
    }

# ==================== RUNNERS ====================

def run_mvp(params: MvpInput) -> Dict[str, Any]:
    """Export a sparse model from every view listed in a PNVI manifest."""
    views, flip_v = read_manifest(params.manifest)
    states = [(view.name, load_view(view, flip_v)) for view in views]
    out = prepare_out_dir(params.out_dir, params.overwrite)
    return build_sparse_model(states, out, params.layout, params.fov, params.size, params.stride,
                              params.pose_convention, params.images_only)

# ==================== TOOLS ====================

async def panowarp_mvp(params: MvpInput) -> str:
    """Multi-view projection: perspective views, cameras, poses and a depth-lifted point cloud.

    Writes images/*.png, cameras.txt, images.txt and points3D.txt in the text
    sparse-model layout read by Gaussian splatting and SfM tools.
    """
    try:
        return ResponseFormatter.render("Sparse model", run_mvp(params), params.response_format)
    except Exception as e:
        return handle_error(e)
