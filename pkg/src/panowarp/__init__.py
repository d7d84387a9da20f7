"""
panowarp - panoramic novel-view synthesis geometry engine.

Forward-warps 360° panoramas to new viewpoints, measures disocclusion holes,
converts between equirectangular and cubemap layouts, drives progressive
inpainting (PNVI) and exports perspective views plus a sparse model for 3D
reconstruction. The MCP/HTTP server lives in `panowarp.server`.
"""

from .errors import (
    PanowarpError,
    InputValidationError,
    ContractViolationError,
    DegenerateInputError,
    InvalidDepthError,
    BackendFailureError,
    StepTooLargeError,
    PnviStepError,
    PipelineStageError,
    exit_code_for
)
from .models import (
    ResponseFormat,
    DepthFormat,
    PnviStrategy,
    PoseConvention,
    PosePreset,
    CameraPose,
    WarpInput,
    StatsInput,
    E2CInput,
    C2EInput,
    InpaintInput,
    PnviInput,
    MvpInput,
    DatasetInput,
    PipelineConfig,
    PipelineInput
)
from .rasters import EquirectImage, DepthMap, HoleMask, CubemapSet, FACE_NAMES
from .sphere import (
    SphericalCoord,
    Cartesian3,
    pixel_to_spherical,
    spherical_to_pixel,
    spherical_to_cartesian,
    cartesian_to_spherical,
    lift_to_3d
)
from .warp import WarpResult, cvs_warp, warp_mask, hole_ratio, composite_replace, hole_ratio_sweep
from .cubemap import FACE_ROTATIONS, e2c, c2e, render_view
from .inpaint import (
    InpaintRequest,
    InpaintBackend,
    ConstantBackend,
    PullPushBackend,
    ExternalCommandBackend,
    HttpBackend,
    resolve_backend,
    inpaint,
    inpaint_depth
)
from .pnvi import PnviPlan, PnviState, PnviOptions, plan_path, pose_preset, pnvi_step, pnvi_run, compare_strategies
from .mvp import PerspectiveCamera, PointCloud, extract_views, lift_point_cloud, export_sparse_model
from .dataset import gen_masks, export_dataset
from .config import Settings, load_settings

__version__ = "0.1.0"

__all__ = [
    'PanowarpError',
    'InputValidationError',
    'ContractViolationError',
    'DegenerateInputError',
    'InvalidDepthError',
    'BackendFailureError',
    'StepTooLargeError',
    'PnviStepError',
    'PipelineStageError',
    'exit_code_for',
    'ResponseFormat',
    'DepthFormat',
    'PnviStrategy',
    'PoseConvention',
    'PosePreset',
    'CameraPose',
    'WarpInput',
    'StatsInput',
    'E2CInput',
    'C2EInput',
    'InpaintInput',
    'PnviInput',
    'MvpInput',
    'DatasetInput',
    'PipelineConfig',
    'PipelineInput',
    'EquirectImage',
    'DepthMap',
    'HoleMask',
    'CubemapSet',
    'FACE_NAMES',
    'SphericalCoord',
    'Cartesian3',
    'pixel_to_spherical',
    'spherical_to_pixel',
    'spherical_to_cartesian',
    'cartesian_to_spherical',
    'lift_to_3d',
    'WarpResult',
    'cvs_warp',
    'warp_mask',
    'hole_ratio',
    'composite_replace',
    'hole_ratio_sweep',
    'FACE_ROTATIONS',
    'e2c',
    'c2e',
    'render_view',
    'InpaintRequest',
    'InpaintBackend',
    'ConstantBackend',
    'PullPushBackend',
    'ExternalCommandBackend',
    'HttpBackend',
    'resolve_backend',
    'inpaint',
    'inpaint_depth',
    'PnviPlan',
    'PnviState',
    'PnviOptions',
    'plan_path',
    'pose_preset',
    'pnvi_step',
    'pnvi_run',
    'compare_strategies',
    'PerspectiveCamera',
    'PointCloud',
    'extract_views',
    'lift_point_cloud',
    'export_sparse_model',
    'gen_masks',
    'export_dataset',
    'Settings',
    'load_settings'
]
