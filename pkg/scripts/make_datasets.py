"""Regenerate the bundled ARFF datasets in src/rdil/datasets/.

Three come from scikit-learn's bundled copies of UCI data (iris, wine,
breast cancer Wisconsin); two are synthetic with fixed seeds.
"""

import argparse
from pathlib import Path

import numpy as np
from sklearn.datasets import load_breast_cancer, load_iris, load_wine

from rdil.data import Attribute, Dataset, Schema, dumps_arff

OUT = Path(__file__).resolve().parents[1] / "src" / "rdil" / "datasets"


def _from_sklearn(bunch, relation):
    names = [n.replace(" ", "_") for n in bunch.feature_names]
    schema = Schema(
        tuple(Attribute.numeric(n) for n in names),
        Attribute.nominal("class", [str(c) for c in bunch.target_names]),
        relation,
    )
    return Dataset(schema, np.round(bunch.data, 6), bunch.target)


def blobs(seed=7, n_per_class=100):
    """Three overlapping Gaussian classes in four dimensions."""
    rng = np.random.default_rng(seed)
    centers = np.array([[0, 0, 0, 0], [2.5, 1.0, 0, 1.0], [0.5, 2.5, 1.5, 0]])
    X = np.vstack([rng.normal(c, 1.0, size=(n_per_class, 4)) for c in centers])
    y = np.repeat(np.arange(3), n_per_class)
    schema = Schema(
        tuple(Attribute.numeric(f"x{i}") for i in range(4)),
        Attribute.nominal("class", ["a", "b", "c"]),
        "blobs3",
    )
    return Dataset(schema, np.round(X, 4), y)


def mixed(seed=11, n=240):
    """Two classes described by numeric and nominal attributes, with gaps."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    num = rng.normal(0, 1, size=(n, 3)) + np.where(y[:, None] == 1, [1.2, -0.8, 0.6], 0.0)
    colour_p = np.array([[0.6, 0.3, 0.1], [0.15, 0.35, 0.5]])
    size_p = np.array([[0.5, 0.5], [0.2, 0.8]])
    colour = np.array([rng.choice(3, p=colour_p[c]) for c in y])
    size = np.array([rng.choice(2, p=size_p[c]) for c in y])
    X = np.column_stack([np.round(num, 4), colour, size]).astype(float)
    gaps = rng.random(X.shape) < 0.02
    X[gaps] = np.nan
    schema = Schema(
        (
            Attribute.numeric("m1"),
            Attribute.numeric("m2"),
            Attribute.numeric("m3"),
            Attribute.nominal("colour", ["red", "green", "blue"]),
            Attribute.nominal("size", ["small", "large"]),
        ),
        Attribute.nominal("class", ["neg", "pos"]),
        "mixed",
    )
    return Dataset(schema, X, y)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    sets = [
        _from_sklearn(load_iris(), "iris"),
        _from_sklearn(load_wine(), "wine"),
        _from_sklearn(load_breast_cancer(), "breast_cancer"),
        blobs(),
        mixed(),
    ]
    for d in sets:
        path = args.out / f"{d.schema.relation}.arff"
        path.write_text(dumps_arff(d), encoding="utf-8")
        print(f"{path.name}: {len(d)} instances, {d.schema.n_features} attributes, {d.n_classes} classes")


if __name__ == "__main__":
    main()
