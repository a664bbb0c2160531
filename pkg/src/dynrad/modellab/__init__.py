from .classifiers import KINDS, TrainedModel, train, train_fnn, train_lda, train_linsvm
from .data import DataMatrix, Standardizer, holdout_split, is_standardized, stratified_folds
from .lasso import LassoResult, LassoSelection, lambda_grid, lambda_max, lasso_fit, lasso_select
from .metrics import Evaluation, auc, evaluate, roc_points
from .pca import PcaResult, pca, pca_scree

__all__ = [
    "KINDS", "TrainedModel", "train", "train_fnn", "train_lda", "train_linsvm",
    "DataMatrix", "Standardizer", "holdout_split", "is_standardized", "stratified_folds",
    "LassoResult", "LassoSelection", "lambda_grid", "lambda_max", "lasso_fit", "lasso_select",
    "Evaluation", "auc", "evaluate", "roc_points", "PcaResult", "pca", "pca_scree",
]
