"""Pre-conditioning for sparse regression when p >> n.

A denoised response is estimated by supervised principal components and then
handed to a variable-selection procedure (LASSO path or forward stepwise).
"""

__version__ = "0.1.0"

from .core import (
    ClassLabels,
    Continuous,
    Dataset,
    SplitDataset,
    SurvivalOutcome,
    read_csv,
    rng_stream,
    split,
    standardize,
    standardize_like,
    to_csv,
)
from .errors import PreconditioningError
from .screen import FeatureSet, ScreenConfig, association_scores, pearson_scores, select
from .spc import SpcModel, fit_spc, latent_scores, precondition, predict

__all__ = [
    "ClassLabels",
    "Continuous",
    "Dataset",
    "FeatureSet",
    "PreconditioningError",
    "ScreenConfig",
    "SpcModel",
    "SplitDataset",
    "SurvivalOutcome",
    "association_scores",
    "fit_spc",
    "latent_scores",
    "pearson_scores",
    "precondition",
    "predict",
    "read_csv",
    "rng_stream",
    "select",
    "split",
    "standardize",
    "standardize_like",
    "to_csv",
]
