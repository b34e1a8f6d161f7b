"""Detrimental-instance estimation, instance weighting and noise filtering.

The package estimates, for every training instance, the probability that its
given label is correct, then either weights instances by that estimate or
filters the worst of them before training a base learner.
"""

from .data import (
    Attribute,
    CorruptionRecord,
    Dataset,
    Schema,
    inject_noise,
    load_dataset,
    stratified_kfold,
    stratified_split,
)
from .learners import LearnerSpec, Model, predict, score, train

__all__ = [
    "Attribute",
    "CorruptionRecord",
    "Dataset",
    "LearnerSpec",
    "Model",
    "Schema",
    "inject_noise",
    "load_dataset",
    "predict",
    "score",
    "stratified_kfold",
    "stratified_split",
    "train",
]

__version__ = "0.1.0"
