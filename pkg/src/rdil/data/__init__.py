from .dataset import Attribute, CorruptionRecord, Dataset, Instance, Schema
from .io import dump_dataset, dumps_arff, dumps_csv, load_dataset
from .sampling import (
    inject_noise,
    round_half_up,
    stratified_kfold,
    stratified_split,
    stratified_split_ids,
)

__all__ = [
    "Attribute",
    "CorruptionRecord",
    "Dataset",
    "Instance",
    "Schema",
    "dump_dataset",
    "dumps_arff",
    "dumps_csv",
    "inject_noise",
    "load_dataset",
    "round_half_up",
    "stratified_kfold",
    "stratified_split",
    "stratified_split_ids",
]
