"""Instance-weight-aware base learners.

Every learner accepts a weight vector in ``[0, 1]`` aligned with the training
set. Weighting follows each algorithm's natural hook: the MLP scales each
instance's error signal, count-based learners (C4.5, RIPPER, naive Bayes and
kNN voting) accumulate weights instead of ones, and the random forest draws
its bootstrap samples proportionally to the weights.
"""

from typing import Optional

import numpy as np

from ..data import Dataset
from .base import (
    COUNT_BASED,
    DEFAULT_PARAMS,
    KINDS,
    LearnerSpec,
    Model,
    check_weights,
)
from .bayes import NaiveBayesModel
from .forest import ForestModel
from .knn import KNNModel
from .mlp import MLPModel
from .ripper import RipperModel
from .serialize import dumps_model, load_model, loads_model, save_model
from .trees import C45Model

MODEL_CLASSES = {
    "mlp": MLPModel,
    "tree_c45": C45Model,
    "knn5": KNNModel,
    "random_forest": ForestModel,
    "ripper": RipperModel,
    "naive_bayes": NaiveBayesModel,
}


def train(spec, d: Dataset, weights=None, **fit_options) -> Model:
    """Train a model of ``spec.kind`` on ``d``.

    Parameters
    ----------
    spec : LearnerSpec or str
        Learner kind, hyperparameters and seed. A bare kind name uses the
        defaults with seed 0.
    d : Dataset
    weights : array of shape (N,), optional
        Per-instance weights in ``[0, 1]``. ``None`` takes the unweighted path.

    Raises
    ------
    DegenerateWeightsError
        If every weight is zero.
    DegenerateClassError
        If fewer than two classes keep positive weight.
    """
    if isinstance(spec, str):
        spec = LearnerSpec(spec)
    w = check_weights(weights, d)
    return MODEL_CLASSES[spec.kind].fit(spec, d, w, **fit_options)


def predict(model: Model, x) -> np.ndarray:
    """Class indices for a feature vector or matrix (ties to the lowest index)."""
    return model.predict(x)


def score(model: Model, x, y: Optional[int] = None):
    """Classifier score of label ``y`` for ``x``; all labels when ``y`` is None."""
    s = model.class_scores(x)
    if y is None:
        return s
    if not 0 <= int(y) < model.n_classes:
        raise ValueError(f"class index {y} out of range")
    return s[:, int(y)]


__all__ = [
    "COUNT_BASED",
    "DEFAULT_PARAMS",
    "KINDS",
    "MODEL_CLASSES",
    "LearnerSpec",
    "Model",
    "check_weights",
    "dumps_model",
    "load_model",
    "loads_model",
    "predict",
    "save_model",
    "score",
    "train",
]
