"""Seeded stratified partitioning and label-noise injection."""

from __future__ import annotations

import math
from decimal import Decimal
from fractions import Fraction

import numpy as np

from ..errors import DegenerateError
from .dataset import CorruptionRecord, Dataset


def round_half_up(value) -> int:
    """Round to the nearest integer, halves upward.

    Floats are read through their shortest repr, so ``0.1 * 105`` rounds the
    way the decimal 10.5 would.
    """
    if isinstance(value, float):
        value = Decimal(repr(value))
    if isinstance(value, Decimal):
        return int((value + Decimal("0.5")).to_integral_value(rounding="ROUND_FLOOR"))
    return math.floor(Fraction(value) + Fraction(1, 2))


def _scaled_count(fraction, n: int) -> int:
    if isinstance(fraction, Fraction):
        return round_half_up(fraction * n)
    return round_half_up(Decimal(repr(float(fraction))) * n)


def stratified_split(d: Dataset, train_fraction=Fraction(2, 3), seed: int = 0):
    """Split ``d`` into (train, test) keeping class proportions.

    Each class with ``n_c`` members contributes ``round_half_up(train_fraction * n_c)``
    instances to train, chosen by a seeded shuffle. A singleton class goes to train.
    :func:`stratified_split_ids` returns the underlying id arrays.
    """
    train_ids, test_ids = stratified_split_ids(d, train_fraction, seed)
    return d.subset(train_ids), d.subset(test_ids)


def stratified_split_ids(d: Dataset, train_fraction=Fraction(2, 3), seed: int = 0):
    if not 0 < float(train_fraction) < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in range(d.n_classes):
        members = np.flatnonzero(d.y == c)
        if members.size == 0:
            continue
        members = members[rng.permutation(members.size)]
        n_train = max(1, min(members.size, _scaled_count(train_fraction, members.size)))
        train.append(members[:n_train])
        test.append(members[n_train:])
    train_ids = np.sort(np.concatenate(train)) if train else np.empty(0, np.int64)
    test_ids = np.sort(np.concatenate(test)) if test else np.empty(0, np.int64)
    return train_ids, test_ids


def stratified_kfold(d: Dataset, k: int, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Assign every instance to one of ``k`` test folds, stratified by class.

    Classes are shuffled independently and dealt round-robin, the dealing
    position carrying over between classes so fold sizes stay within one of
    each other overall as well as per class.
    """
    n = len(d)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise DegenerateError(f"k={k} exceeds the number of instances ({n})")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=np.int64)
    pos = 0
    for c in range(d.n_classes):
        members = np.flatnonzero(d.y == c)
        if members.size == 0:
            continue
        members = members[rng.permutation(members.size)]
        fold_of[members] = (pos + np.arange(members.size)) % k
        pos = (pos + members.size) % k
    all_ids = np.arange(n)
    return [(all_ids[fold_of != f], all_ids[fold_of == f]) for f in range(k)]


def inject_noise(d: Dataset, rate: float, seed: int = 0) -> tuple[Dataset, CorruptionRecord]:
    """Relabel ``round_half_up(rate * N)`` randomly chosen instances.

    Each chosen instance receives a label drawn uniformly from the other
    ``Y - 1`` classes, so every selected label really changes.
    """
    if not 0 <= rate <= 1:
        raise ValueError("rate must lie in [0, 1]")
    n = len(d)
    n_flip = _scaled_count(rate, n)
    if n_flip == 0:
        return d, CorruptionRecord({}, rate, seed)
    Y = d.n_classes
    if Y < 2:
        raise ValueError("noise injection needs at least two classes")
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(n, size=n_flip, replace=False))
    draws = rng.integers(0, Y - 1, size=n_flip)
    y = d.y.copy()
    flipped = {}
    for i, r in zip(chosen, draws):
        orig = int(y[i])
        new = int(r) if r < orig else int(r) + 1
        y[i] = new
        flipped[int(i)] = (orig, new)
    return d.with_labels(y), CorruptionRecord(flipped, rate, seed)
