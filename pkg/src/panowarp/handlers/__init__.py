from .warp import panowarp_warp, panowarp_stats, run_warp, run_stats
from .cubemap import panowarp_e2c, panowarp_c2e, run_e2c, run_c2e
from .inpaint import panowarp_inpaint, run_inpaint
from .pnvi import panowarp_pnvi, run_pnvi, run_branch
from .mvp import panowarp_mvp, run_mvp, build_sparse_model
from .dataset import panowarp_dataset, run_dataset
from .pipeline import panowarp_pipeline, run_pipeline, plan_pipeline, load_pipeline_config

__all__ = [
    'panowarp_warp',
    'panowarp_stats',
    'panowarp_e2c',
    'panowarp_c2e',
    'panowarp_inpaint',
    'panowarp_pnvi',
    'panowarp_mvp',
    'panowarp_dataset',
    'panowarp_pipeline',
    'run_warp',
    'run_stats',
    'run_e2c',
    'run_c2e',
    'run_inpaint',
    'run_pnvi',
    'run_branch',
    'run_mvp',
    'build_sparse_model',
    'run_dataset',
    'run_pipeline',
    'plan_pipeline',
    'load_pipeline_config'
]
