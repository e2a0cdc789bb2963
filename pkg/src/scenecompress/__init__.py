"""Scene compression for visual localization via a capped-simplex QP."""

from .compressor import CompressedScene, compress, extract_support
from .config import CompressionParams, ScoreConfig
from .distinctiveness import (
    compute_scores,
    score_avg_distance,
    score_camera_fraction,
    score_camera_max_fraction,
    score_combination,
)
from .kernel import KernelRowCache, gram_matrix, kernel_row, rbf
from .objective import ObjectiveBreakdown, evaluate, oracle_solve, project_capped_simplex
from .scene import (
    SceneFormatError,
    SceneModel,
    ScenePoint,
    SceneValidationError,
    load_scene,
    make_scene,
    save_scene,
    synth_scene,
)
from .solver import AlphaDistribution, SolverState, initialize, select_pair, smo_step, solve

__version__ = "0.1.0"
