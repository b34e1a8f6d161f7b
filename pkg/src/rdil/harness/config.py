"""Experiment configuration and its YAML file form.

Example file::

    datasets: [iris, wine, {name: local, path: data/local.csv, class_column: label}]
    learners: [mlp, tree_c45]
    methods: [orig, rdil_ensemble, filter_ensemble]
    noise_levels: [0.0, 0.1, 0.2, 0.3, 0.4]
    runs: 10
    train_fraction: 2/3
    master_seed: 1

A bare dataset name refers to a bundled dataset; ``path`` entries are
resolved relative to the config file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import yaml

from ..data import Dataset, load_dataset
from ..datasets import BUNDLED
from ..datasets import load as load_bundled
from ..errors import RDILError
from ..learners import KINDS, LearnerSpec

METHODS = ("orig", "rdil_ensemble", "rdil_biased", "pwem", "filter_ensemble", "filter_biased", "renn")
DEFAULT_NOISE = (0.0, 0.1, 0.2, 0.3, 0.4)
ORACLE_THRESHOLDS = (0.5, 0.7, 0.9)


class ConfigError(RDILError, ValueError):
    pass


@dataclass(frozen=True)
class DatasetRef:
    name: str
    path: Optional[str] = None
    class_column: Optional[str] = None

    def load(self) -> Dataset:
        if self.path is None:
            return load_bundled(self.name)
        return load_dataset(self.path, class_column=self.class_column, relation=self.name)

    def to_dict(self):
        if self.path is None:
            return self.name
        out = {"name": self.name, "path": self.path}
        if self.class_column is not None:
            out["class_column"] = self.class_column
        return out


def _fraction(v) -> Fraction:
    try:
        return Fraction(str(v)) if not isinstance(v, float) else Fraction(v).limit_denominator(10**6)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad train_fraction {v!r}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment's results.

    ``ensemble`` lists the members used by ``rdil_ensemble`` and
    ``filter_ensemble`` (default: all learner kinds). ``biased_voting`` is the
    vote type for ``rdil_biased`` (classifier scores by default, so a single
    learner yields graded weights). With ``oracle_threshold`` the ensemble
    filter picks, per cell, the threshold in ``ORACLE_THRESHOLDS`` with the best
    test accuracy; this peeks at test labels and exists only to reproduce
    that protocol.
    """

    datasets: tuple
    learners: tuple
    methods: tuple = ("orig",)
    noise_levels: tuple = DEFAULT_NOISE
    runs: int = 10
    train_fraction: Fraction = Fraction(2, 3)
    master_seed: int = 0
    folds: int = 10
    ensemble: tuple = tuple(LearnerSpec(k) for k in KINDS)
    voting: str = "delta"
    biased_voting: str = "score"
    filter_threshold: float = 0.5
    oracle_threshold: bool = False

    def __post_init__(self):
        ds = tuple(d if isinstance(d, DatasetRef) else _dataset_ref(d, None) for d in self.datasets)
        object.__setattr__(self, "datasets", ds)
        try:
            learners = tuple(l if isinstance(l, LearnerSpec) else LearnerSpec.from_dict(l) for l in self.learners)
            ensemble = tuple(l if isinstance(l, LearnerSpec) else LearnerSpec.from_dict(l) for l in self.ensemble)
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        object.__setattr__(self, "learners", learners)
        object.__setattr__(self, "ensemble", ensemble)
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "noise_levels", tuple(float(x) for x in self.noise_levels))
        object.__setattr__(self, "train_fraction", _fraction(self.train_fraction))
        if not ds or not learners or not self.methods:
            raise ConfigError("datasets, learners and methods must be non-empty")
        if len({d.name for d in ds}) != len(ds):
            raise ConfigError("dataset names must be unique")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"unknown methods {sorted(unknown)}; expected a subset of {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods must not repeat")
        if len({l.key() for l in learners}) != len(learners):
            raise ConfigError("learners must differ in kind or hyperparameters")
        if not isinstance(self.runs, int) or self.runs < 1:
            raise ConfigError("runs must be a positive integer")
        if any(not 0 <= x < 1 for x in self.noise_levels) or not self.noise_levels:
            raise ConfigError("noise levels must lie in [0, 1)")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if self.voting not in ("delta", "score") or self.biased_voting not in ("delta", "score"):
            raise ConfigError("voting must be delta or score")
        if not 0 < self.filter_threshold <= 1:
            raise ConfigError("filter_threshold must lie in (0, 1]")

    def to_dict(self) -> dict:
        return {
            "datasets": [d.to_dict() for d in self.datasets],
            "learners": [l.to_dict() for l in self.learners],
            "methods": list(self.methods),
            "noise_levels": list(self.noise_levels),
            "runs": self.runs,
            "train_fraction": str(self.train_fraction),
            "master_seed": self.master_seed,
            "folds": self.folds,
            "ensemble": [l.to_dict() for l in self.ensemble],
            "voting": self.voting,
            "biased_voting": self.biased_voting,
            "filter_threshold": self.filter_threshold,
            "oracle_threshold": self.oracle_threshold,
        }

    @classmethod
    def from_dict(cls, d: dict, base_dir: str = ".") -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a mapping")
        allowed = set(cls.__dataclass_fields__)
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        for key in ("datasets", "learners"):
            if key not in d:
                raise ConfigError(f"missing required key {key!r}")
        kw = dict(d)
        kw["datasets"] = tuple(_dataset_ref(x, base_dir) for x in d["datasets"])
        return cls(**kw)


def _dataset_ref(entry, base_dir) -> DatasetRef:
    if isinstance(entry, str):
        if entry in BUNDLED:
            return DatasetRef(entry)
        path = entry if base_dir is None else os.path.join(base_dir, entry)
        return DatasetRef(os.path.splitext(os.path.basename(entry))[0], path)
    if isinstance(entry, dict) and "name" in entry:
        path = entry.get("path")
        if path is not None and base_dir is not None:
            path = os.path.join(base_dir, path)
        if path is None and entry["name"] not in BUNDLED:
            raise ConfigError(f"dataset {entry['name']!r} is not bundled and has no path")
        return DatasetRef(entry["name"], path, entry.get("class_column"))
    raise ConfigError(f"bad dataset entry {entry!r}")


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from exc
    return ExperimentConfig.from_dict(raw or {}, os.path.dirname(os.path.abspath(path)))


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)
