"""pagesort: CPU-only scanned-page classification with handcrafted features
and a from-scratch random forest."""

__version__ = "0.1.0"

from .dataset import GROUP_OF, GROUP_ORDER, LABELS
from .features import FEATURE_DIM, extract_features
from .forest import (
    ForestConfig,
    RandomForestModel,
    load_model,
    predict_proba,
    predict_topn,
    save_model,
    train_forest,
)

__all__ = [
    "GROUP_OF",
    "GROUP_ORDER",
    "LABELS",
    "FEATURE_DIM",
    "extract_features",
    "ForestConfig",
    "RandomForestModel",
    "load_model",
    "predict_proba",
    "predict_topn",
    "save_model",
    "train_forest",
]
