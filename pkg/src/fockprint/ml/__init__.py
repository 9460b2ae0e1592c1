"""From-scratch learners: PCA, epsilon-SVR, extremely randomized trees."""

from .ert import ErtModel, ert_fit, ert_predict
from .pca import PcaModel, pca_fit, pca_transform
from .pipeline import LearnerConfig, Pipeline, Standardizer, multi_output_fit, multi_output_predict
from .scoring import RegressionScores, regression_metrics, summarize
from .svr import KernelSpec, SvrModel, svr_fit, svr_predict

__all__ = [
    "ErtModel",
    "KernelSpec",
    "LearnerConfig",
    "PcaModel",
    "Pipeline",
    "RegressionScores",
    "Standardizer",
    "SvrModel",
    "ert_fit",
    "ert_predict",
    "multi_output_fit",
    "multi_output_predict",
    "pca_fit",
    "pca_transform",
    "regression_metrics",
    "summarize",
    "svr_fit",
    "svr_predict",
]
