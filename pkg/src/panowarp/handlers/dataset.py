from typing import Any, Dict

from ..dataset import export_dataset, read_pano_list
from ..errors import InputValidationError
from ..models import DatasetInput
from ..utils import ResponseFormatter, handle_error, log, prepare_out_dir

# ==================== RUNNERS ====================

def run_dataset(params: DatasetInput) -> Dict[str, Any]:
    """Synthesize RGB and mask cubemap faces for every panorama in the list file."""
    sources = read_pano_list(params.list_path, params.depth_format)
    missing = [str(p) for s in sources for p in (s.image_path, s.depth_path) if not p.exists()]
    if missing:
        raise InputValidationError(f"{len(missing)} listed file(s) do not exist, first: {missing[0]}")
    out = prepare_out_dir(params.out_dir, params.overwrite)

    log(f"[dataset] {len(sources)} panoramas -> {out}")
    manifest = export_dataset(sources, out, params.units, params.directions, params.face_size, params.workers)
    return {
        "manifest": str(manifest.path),
        "panoramas": manifest.panoramas,
        "rgb_faces": manifest.rgb_faces,
        "mask_faces": manifest.mask_faces,
    }

# ==================== TOOLS ====================

async def panowarp_dataset(params: DatasetInput) -> str:
    """Build the spherical mask dataset: per panorama 6 RGB faces and one face set per pose mask."""
    try:
        return ResponseFormatter.render("Mask dataset", run_dataset(params), params.response_format)
    except Exception as e:
        return handle_error(e)
