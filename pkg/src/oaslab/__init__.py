"""Block-wise oversampled adaptive sensing of block sparse signals."""

from .glasso import GlassoOptions, fista_solve, tune_lambda
from .harness import ExperimentSpec, ResultTable, preset_fig1, preset_fig2, run_experiment
from .model import BlockSparseSignal, ModelParams, mse, noise_variance, sample_block_sparse, to_db
from .oas import run_basic_oas, run_blockwise_oas

__version__ = "0.1.0"

__all__ = [
    "BlockSparseSignal", "ExperimentSpec", "GlassoOptions", "ModelParams", "ResultTable",
    "fista_solve", "mse", "noise_variance", "preset_fig1", "preset_fig2", "run_basic_oas",
    "run_blockwise_oas", "run_experiment", "sample_block_sparse", "to_db", "tune_lambda",
]
