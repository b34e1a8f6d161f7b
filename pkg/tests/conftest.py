import numpy as np
import pytest

from rdil import datasets
from rdil.data import Attribute, Dataset, Schema


def numeric_dataset(X, y, n_classes=None, relation="fixture"):
    """Dataset over numeric columns ``a0..`` with classes ``c0..``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=np.int64)
    Y = n_classes or int(y.max()) + 1
    attrs = tuple(Attribute.numeric(f"a{j}") for j in range(X.shape[1]))
    schema = Schema(attrs, Attribute.nominal("class", [f"c{c}" for c in range(Y)]), relation)
    return Dataset(schema, X, y)


def blobs(n_per_class=20, n_classes=2, n_features=2, spread=0.5, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-5, 5, size=(n_classes, n_features))
    X = np.vstack([c + spread * rng.standard_normal((n_per_class, n_features)) for c in centers])
    y = np.repeat(np.arange(n_classes), n_per_class)
    return numeric_dataset(X, y)


@pytest.fixture(scope="session")
def iris():
    return datasets.load("iris")


@pytest.fixture(scope="session")
def mixed():
    return datasets.load("mixed")


@pytest.fixture(scope="session")
def small_sets():
    """Three small fixtures: numeric 3-class, mixed-type with missing values, 2-class blobs."""
    iris = datasets.load("iris")
    mixed = datasets.load("mixed")
    rng = np.random.default_rng(7)
    take = lambda d, n: d.subset(np.sort(rng.choice(len(d), n, replace=False)))  # noqa: E731
    return [take(iris, 60), take(mixed, 60), blobs(15, 2, 3, spread=1.5, seed=3)]


# ---------------------------------------------------------------------------
# one PASS/FAIL line per acceptance criterion

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.module.__name__ != "test_acceptance" or not item.name.startswith("test_criterion"):
        return
    if rep.when == "call" or rep.failed:
        title = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _CRITERIA[item.name] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split("_")[2])):
        title, status = _CRITERIA[name]
        terminalreporter.write_line(f"{status}  {title}")
