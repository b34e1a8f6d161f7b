"""The noise-sweep experiment: datasets x runs x noise levels x learners x methods.

For every (dataset, run) the data is split once into train and test. Each
noise level corrupts the training part only; every (learner, method) cell then
trains on the corrupted part and is scored on the untouched test part. All
randomness comes from seeds derived from the master seed and the cell's
indices, so adding a method or a learner leaves every other cell unchanged
and the result does not depend on how jobs are scheduled.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from .._seeding import derive_seed
from ..data import Dataset, inject_noise, stratified_split_ids
from ..detrimentality import EnsembleSpec, estimate_biased, estimate_ensemble, member_names
from ..errors import RDILError
from ..filters import biased_filter, ensemble_filter, renn
from ..learners import train
from ..pwem import pwem_weights
from .config import ORACLE_THRESHOLDS, ExperimentConfig
from .stats import noise_identification_metrics

logger = logging.getLogger(__name__)

WEIGHTING = ("rdil_ensemble", "rdil_biased", "pwem")


@dataclass(frozen=True)
class Record:
    dataset: str
    learner: str
    method: str
    noise: float
    run: int
    status: str = "ok"
    accuracy: Optional[float] = None
    n_train: int = 0
    n_test: int = 0
    retained: Optional[int] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    threshold: Optional[float] = None
    reason: str = ""

    @property
    def key(self) -> tuple:
        return (self.dataset, self.learner, self.method, self.noise, self.run)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


FIELDS = [f.name for f in fields(Record)]
_INT = {"run", "n_train", "n_test", "retained"}
_FLOAT = {"noise", "accuracy", "precision", "recall", "threshold"}


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


class ResultsStore:
    """Append-only collection of records keyed by (dataset, learner, method, noise, run).

    ``order`` fixes how datasets, learners and methods are listed; records
    are always reported in that order regardless of insertion order.
    """

    def __init__(self, records=(), order=None):
        self._records = {}
        self.order = order or {}
        self.predictions = {}
        for r in records:
            self.add(r)

    def add(self, rec: Record) -> None:
        if rec.key in self._records:
            raise ValueError(f"duplicate record {rec.key}")
        if rec.accuracy is not None and not 0 <= rec.accuracy <= 1:
            raise ValueError("accuracy must lie in [0, 1]")
        self._records[rec.key] = rec

    def __len__(self) -> int:
        return len(self._records)

    def _sort_key(self, rec: Record):
        def pos(kind, value):
            seq = self.order.get(kind)
            return (seq.index(value), value) if seq and value in seq else (math.inf, value)

        return (pos("datasets", rec.dataset), pos("learners", rec.learner), pos("methods", rec.method),
                rec.noise, rec.run)

    def records(self) -> list:
        return sorted(self._records.values(), key=self._sort_key)

    def get(self, dataset, learner, method, noise, run) -> Record:
        return self._records[(dataset, learner, method, float(noise), int(run))]

    def _values(self, field):
        seen = []
        for r in self.records():
            v = getattr(r, field)
            if v not in seen:
                seen.append(v)
        return seen

    @property
    def datasets(self) -> list:
        return self._values("dataset")

    @property
    def learners(self) -> list:
        return self._values("learner")

    @property
    def methods(self) -> list:
        return self._values("method")

    @property
    def noise_levels(self) -> list:
        return sorted(set(self._values("noise")))

    def mean_accuracy(self, dataset, learner, method, noise) -> Optional[float]:
        """Mean over successful runs, or None when every run failed or is missing."""
        accs = [r.accuracy for r in self._records.values()
                if r.ok and (r.dataset, r.learner, r.method, r.noise) == (dataset, learner, method, noise)]
        return float(np.mean(accs)) if accs else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for r in self.records():
            w.writerow([_cell(getattr(r, f)) for f in FIELDS])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ResultsStore":
        rows = list(csv.DictReader(io.StringIO(text)))
        store = cls()
        for row in rows:
            kw = {}
            for f in FIELDS:
                v = row[f]
                if f in _INT:
                    kw[f] = int(v) if v != "" else None
                elif f in _FLOAT:
                    kw[f] = float(v) if v != "" else None
                else:
                    kw[f] = v
            store.add(Record(**kw))
        for kind, field in (("datasets", "dataset"), ("learners", "learner"), ("methods", "method")):
            store.order[kind] = list(dict.fromkeys(row[field] for row in rows))
        return store


def noise_key(noise: float) -> int:
    return int(round(noise * 1_000_000))


def _text_key(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def _partition(d: Dataset, train_fraction, seed):
    train_ids, test_ids = stratified_split_ids(d, train_fraction, seed)
    return d.subset(train_ids), d.subset(test_ids)


def _accuracy(model, test):
    """The only place test labels are read."""
    pred = model.predict(test.X)
    return float(np.mean(pred == test.y)), pred


class _Cell:
    """Shared state of one (dataset, run, noise) slice: the noisy training set,
    its corruption record and estimates reused across learners."""

    def __init__(self, cfg, d_idx, r_idx, noise, train_set):
        self.cfg = cfg
        self.keys = (cfg.master_seed, d_idx, r_idx, noise_key(noise))
        self.noisy, self.record = inject_noise(train_set, noise, derive_seed(*self.keys))
        self._cache = {}

    def seed(self, *extra) -> int:
        return derive_seed(*self.keys, *extra)

    def cached(self, name, fn):
        if name not in self._cache:
            try:
                self._cache[name] = ("ok", fn())
            except RDILError as exc:
                self._cache[name] = ("failed", exc)
        status, value = self._cache[name]
        if status == "failed":
            raise value
        return value

    def ensemble_estimate(self):
        cfg = self.cfg

        def run():
            members = tuple(m.with_seed(self.seed(_text_key("ensemble"), i)) for i, m in enumerate(cfg.ensemble))
            spec = EnsembleSpec(members, cfg.folds, self.seed(_text_key("folds")))
            return estimate_ensemble(self.noisy, spec, cfg.voting)

        return self.cached("ensemble", run)


def _apply(cell: _Cell, learner, method, test):
    """Train with ``method``; returns (accuracy, predictions, retained, flagged, threshold)."""
    cfg = cell.cfg
    d = cell.noisy
    lseed = cell.seed(_text_key(repr(learner.key())))
    spec = learner.with_seed(lseed)
    if method == "orig":
        acc, pred = _accuracy(train(spec, d), test)
        return acc, pred, len(d), None, None
    if method in WEIGHTING:
        if method == "rdil_ensemble":
            est = cell.ensemble_estimate()
        elif method == "rdil_biased":
            est = estimate_biased(d, spec, cfg.folds, cfg.biased_voting, cell.seed(_text_key("biased"), lseed))
        else:
            est = cell.cached("pwem", lambda: pwem_weights(d, cell.seed(_text_key("pwem"))))
        acc, pred = _accuracy(train(spec, d, est.weights), test)
        return acc, pred, int(np.count_nonzero(est.weights > 0)), np.flatnonzero(est.weights < 0.5), None
    if method == "filter_ensemble":
        est = cell.ensemble_estimate()
        thresholds = ORACLE_THRESHOLDS if cfg.oracle_threshold else (cfg.filter_threshold,)
        best = None
        for t in thresholds:
            res = ensemble_filter(est, t, d.y)
            acc, pred = _accuracy(train(spec, res.apply(d)), test)
            if best is None or acc > best[0]:
                best = (acc, pred, len(res.retained_ids), res.removed_ids, t)
        return best
    if method == "filter_biased":
        res = biased_filter(d, spec, cfg.folds, cell.seed(_text_key("filter_biased"), lseed))
    elif method == "renn":
        res = cell.cached("renn", lambda: renn(d))
    else:
        raise ValueError(f"unknown method {method!r}")
    acc, pred = _accuracy(train(spec, res.apply(d)), test)
    return acc, pred, len(res.retained_ids), res.removed_ids, None


def run_group(cfg: ExperimentConfig, d_idx: int, dataset: Dataset, r_idx: int, keep_predictions=False):
    """All cells of one (dataset, run): returns a list of (Record, predictions or None)."""
    name = cfg.datasets[d_idx].name
    lnames = member_names(cfg.learners)
    train_set, test = _partition(dataset, cfg.train_fraction, derive_seed(cfg.master_seed, d_idx, r_idx))
    out = []
    for noise in cfg.noise_levels:
        cell = _Cell(cfg, d_idx, r_idx, noise, train_set)
        for lname, learner in zip(lnames, cfg.learners):
            for method in cfg.methods:
                base = dict(dataset=name, learner=lname, method=method, noise=noise, run=r_idx,
                            n_train=len(train_set), n_test=len(test))
                try:
                    acc, pred, retained, flagged, thr = _apply(cell, learner, method, test)
                except RDILError as exc:
                    logger.info("cell %s failed: %s", base, exc)
                    out.append((Record(**base, status="failed", reason=f"{type(exc).__name__}: {exc}"), None))
                    continue
                prec = rec = None
                if flagged is not None:
                    prec, rec = noise_identification_metrics(flagged, cell.record)
                out.append((Record(**base, accuracy=acc, retained=retained, precision=prec, recall=rec,
                                   threshold=thr), pred if keep_predictions else None))
    return out


def _group_task(args):
    return run_group(*args)


def load_datasets(cfg: ExperimentConfig) -> list:
    return [ref.load() for ref in cfg.datasets]


def run_experiment(cfg: ExperimentConfig, n_jobs: int = 1, datasets=None,
                   keep_predictions: bool = False) -> ResultsStore:
    """Run every cell of ``cfg``.

    Parameters
    ----------
    n_jobs : int
        Worker processes, one (dataset, run) group per task. The results are
        identical for any value.
    datasets : list of Dataset, optional
        Pre-loaded datasets aligned with ``cfg.datasets``.
    keep_predictions : bool
        Keep each cell's test predictions in ``store.predictions``.
    """
    if datasets is None:
        datasets = load_datasets(cfg)
    tasks = [(cfg, di, d, r, keep_predictions) for di, d in enumerate(datasets) for r in range(cfg.runs)]
    if n_jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            groups = list(pool.map(_group_task, tasks))
    else:
        groups = [_group_task(t) for t in tasks]
    store = ResultsStore(order={
        "datasets": [d.name for d in cfg.datasets],
        "learners": list(member_names(cfg.learners)),
        "methods": list(cfg.methods),
    })
    for group in groups:
        for rec, pred in group:
            store.add(rec)
            if pred is not None:
                store.predictions[rec.key] = pred
    return store


def record_dict(rec: Record) -> dict:
    return asdict(rec)
