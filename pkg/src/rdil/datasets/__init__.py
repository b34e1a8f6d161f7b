"""Small bundled datasets for tests, examples and the trend benchmark."""

from importlib import resources

from ..data import Dataset, load_dataset

BUNDLED = ("iris", "wine", "breast_cancer", "blobs3", "mixed")


def names() -> tuple[str, ...]:
    return BUNDLED


def load(name: str) -> Dataset:
    if name not in BUNDLED:
        raise KeyError(f"no bundled dataset {name!r}; available: {', '.join(BUNDLED)}")
    with resources.files(__name__).joinpath(f"{name}.arff").open("rb") as fh:
        return load_dataset(fh, "arff")
