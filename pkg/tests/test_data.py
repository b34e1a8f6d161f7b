import csv
import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdil import datasets
from rdil.data import (
    Attribute,
    CorruptionRecord,
    Dataset,
    Schema,
    dumps_arff,
    dumps_csv,
    inject_noise,
    load_dataset,
    round_half_up,
    stratified_kfold,
    stratified_split,
    stratified_split_ids,
)
from rdil.errors import EmptyDatasetError, ParseError

from conftest import numeric_dataset


def arff(text):
    return load_dataset(io.BytesIO(text.encode()), "arff")


def csv_text(text, **kw):
    return load_dataset(io.StringIO(text), "csv", **kw)


# ---------------------------------------------------------------------------
# parsing


def test_arff_nominal_attribute():
    d = arff("@relation t\n@attribute color {r,g,b}\n@attribute class {x,y}\n@data\nr,x\ng,y\nb,x\n")
    assert len(d) == 3
    assert d.schema.n_features == 1
    assert d.schema.attributes[0].values == ("r", "g", "b")
    assert d.X[:, 0].tolist() == [0.0, 1.0, 2.0]
    assert d.y.tolist() == [0, 1, 0]


def test_arff_keywords_case_insensitive_comments_and_missing():
    d = arff(
        "% header comment\n@RELATION 'my data'\n@ATTRIBUTE 'petal len' NUMERIC\n"
        "@Attribute kind {'a b',c}\n@attribute class {p,n}\n@DATA\n% row comment\n"
        "1.5,'a b',p\n?,c,n\n"
    )
    assert d.schema.relation == "my data"
    assert d.schema.attributes[0].name == "petal len"
    assert np.isnan(d.X[1, 0])
    assert d.X[0, 1] == 0.0


def test_csv_numeric_inference_with_missing():
    d = csv_text("x,label\n1.5,a\n2,b\n?,a\n")
    assert d.schema.attributes[0].is_numeric
    assert d.X[:2, 0].tolist() == [1.5, 2.0]
    assert np.isnan(d.X[2, 0])


def test_csv_nominal_inference_and_empty_missing():
    d = csv_text("color,size,label\nred,1,a\n,2,b\nblue,,a\n")
    color, size = d.schema.attributes
    assert color.values == ("blue", "red")
    assert size.is_numeric
    assert np.isnan(d.X[1, 0]) and np.isnan(d.X[2, 1])


def test_csv_quoting():
    d = csv_text('name,label\n"a, b",x\n"say ""hi""",y\n')
    assert set(d.schema.attributes[0].values) == {"a, b", 'say "hi"'}


def test_csv_class_column_override():
    d = csv_text("label,x\na,1\nb,2\n", class_column="label")
    assert d.schema.class_attribute.name == "label"
    assert d.schema.attributes[0].name == "x"
    d = csv_text("label,x\na,1\nb,2\n", class_column=0)
    assert d.schema.class_attribute.name == "label"


def test_arff_arity_error_reports_line():
    text = "@relation t\n@attribute a numeric\n@attribute b numeric\n@attribute c {x,y}\n@data\n1,2,x\n1,2,3,x\n"
    with pytest.raises(ParseError) as err:
        arff(text)
    assert err.value.line == 7
    assert "line 7" in str(err.value)


def test_csv_arity_error_reports_line():
    with pytest.raises(ParseError) as err:
        csv_text("a,b\n1,x\n2,y,3\n")
    assert err.value.line == 3


@pytest.mark.parametrize(
    "text",
    [
        "@relation t\n@attribute c {x,y}\n@data\nz\n",
        "@relation t\n@attribute a {p,q}\n@attribute c {x,y}\n@data\nr,x\n",
    ],
)
def test_unknown_nominal_value(text):
    with pytest.raises(ParseError, match="unknown"):
        arff(text)


def test_empty_dataset():
    with pytest.raises(EmptyDatasetError):
        arff("@relation t\n@attribute a numeric\n@attribute c {x,y}\n@data\n")
    with pytest.raises(EmptyDatasetError):
        csv_text("a,c\n")


@pytest.mark.parametrize(
    "text, match",
    [
        ("@relation t\n@attribute a numeric\n@data\n1\n", "must be nominal"),
        ("@relation t\n@attribute a date\n@attribute c {x}\n@data\n", "unsupported"),
        ("@relation t\n@attribute a {x,x}\n@attribute c {x}\n@data\n", "duplicate"),
        ("@relation t\n@attribute a numeric\n@attribute c {x}\n", "missing @data"),
        ("@relation t\n@attribute a numeric\n@attribute c {x}\n@data\n{0 1}\n", "sparse"),
        ("@relation t\n@attribute a numeric\n@attribute c {x}\n@data\nfoo,x\n", "non-numeric"),
    ],
)
def test_arff_malformed(text, match):
    with pytest.raises(ParseError, match=match):
        arff(text)


def test_missing_class_rows_dropped(caplog):
    d = arff("@relation t\n@attribute a numeric\n@attribute c {x,y}\n@data\n1,x\n2,?\n3,y\n")
    assert len(d) == 2
    assert "dropped 1" in caplog.text


def test_bundled_datasets_load():
    for name in datasets.names():
        d = datasets.load(name)
        assert len(d) >= 100
        assert np.all(d.class_counts() > 0)


# ---------------------------------------------------------------------------
# round trips

_token = st.one_of(
    st.floats(allow_nan=False, allow_infinity=False, width=64).map(repr),
    st.integers(-1000, 1000).map(str),
    st.text(alphabet="abcxyz ,'\"%{}?\\-", min_size=1, max_size=6),
    st.sampled_from(["?", ""]),
)


@st.composite
def csv_tables(draw):
    n_cols = draw(st.integers(1, 4))
    n_rows = draw(st.integers(1, 12))
    rows = [[draw(_token) for _ in range(n_cols)] + [draw(st.sampled_from(["a", "b", "c d"]))]
            for _ in range(n_rows)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"col{j}" for j in range(n_cols)] + ["label"])
    w.writerows(rows)
    return buf.getvalue()


@settings(max_examples=150, deadline=None)
@given(csv_tables())
def test_csv_and_arff_round_trip(text):
    try:
        d = csv_text(text)
    except ParseError:
        return
    again = csv_text(dumps_csv(d))
    assert again == d
    via_arff = arff(dumps_arff(d))
    assert via_arff == d


def test_bundled_round_trip():
    for name in datasets.names():
        d = datasets.load(name)
        assert arff(dumps_arff(d)) == d
        c = csv_text(dumps_csv(d))
        assert np.array_equal(c.X[:, [a.is_numeric for a in c.schema.attributes]],
                              d.X[:, [a.is_numeric for a in d.schema.attributes]], equal_nan=True)
        assert csv_text(dumps_csv(c)) == c


def test_dataset_is_immutable():
    d = numeric_dataset([[0.0], [1.0]], [0, 1])
    with pytest.raises(AttributeError):
        d.y = np.array([1, 0])
    with pytest.raises(ValueError):
        d.y[0] = 1


def test_schema_invariants():
    with pytest.raises(ValueError):
        Attribute.nominal("a", ["x", "x"])
    with pytest.raises(ValueError):
        Schema((), Attribute.numeric("class"))
    with pytest.raises(ValueError):
        numeric_dataset([[0.0]], [3], n_classes=2)


# ---------------------------------------------------------------------------
# splitting


def test_round_half_up():
    assert round_half_up(Fraction(20, 3)) == 7
    assert round_half_up(2.5) == 3
    assert round_half_up(0.1 * 105) == 11
    assert round_half_up(Fraction(1, 2)) == 1


def test_split_rounding_rule_per_class():
    d = numeric_dataset(np.arange(30.0), np.repeat([0, 1, 2], 10))
    tr, te = stratified_split(d, Fraction(2, 3), seed=1)
    assert tr.class_counts().tolist() == [7, 7, 7]
    assert te.class_counts().tolist() == [3, 3, 3]


def test_split_thirty_unbalanced_gives_twenty():
    d = numeric_dataset(np.arange(30.0), np.repeat([0, 1, 2], [9, 12, 9]))
    tr, te = stratified_split(d, Fraction(2, 3), seed=1)
    assert (len(tr), len(te)) == (20, 10)


def test_split_singleton_class_goes_to_train():
    d = numeric_dataset(np.arange(7.0), [0, 0, 0, 1, 1, 1, 2])
    tr_ids, te_ids = stratified_split_ids(d, Fraction(2, 3), seed=0)
    assert 6 in tr_ids and 6 not in te_ids


def test_split_rejects_bad_fraction():
    d = numeric_dataset(np.arange(4.0), [0, 0, 1, 1])
    for f in (0, 1, 1.5):
        with pytest.raises(ValueError):
            stratified_split(d, f)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=80), st.integers(0, 2**32),
       st.sampled_from([Fraction(2, 3), 0.5, 0.8]))
def test_split_properties(labels, seed, frac):
    d = numeric_dataset(np.arange(len(labels), dtype=float), labels, n_classes=4)
    tr, te = stratified_split_ids(d, frac, seed)
    assert np.intersect1d(tr, te).size == 0
    assert np.array_equal(np.union1d(tr, te), np.arange(len(d)))
    tr2, te2 = stratified_split_ids(d, frac, seed)
    assert np.array_equal(tr, tr2) and np.array_equal(te, te2)
    for c in range(4):
        n_c = int(np.sum(d.y == c))
        got = int(np.sum(d.y[tr] == c))
        assert abs(got - float(frac) * n_c) <= 1


def test_kfold_sizes():
    d = numeric_dataset(np.arange(100.0), np.repeat([0, 1], 50))
    folds = stratified_kfold(d, 10, seed=3)
    assert [len(te) for _, te in folds] == [10] * 10
    d = numeric_dataset(np.arange(10.0), np.repeat([0, 1], 5))
    assert [len(te) for _, te in stratified_kfold(d, 10, seed=3)] == [1] * 10


def test_kfold_errors():
    d = numeric_dataset(np.arange(5.0), [0, 0, 1, 1, 1])
    with pytest.raises(ValueError):
        stratified_kfold(d, 6)
    with pytest.raises(ValueError):
        stratified_kfold(d, 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=10, max_size=90), st.integers(2, 10), st.integers(0, 2**32))
def test_kfold_properties(labels, k, seed):
    d = numeric_dataset(np.arange(len(labels), dtype=float), labels, n_classes=3)
    folds = stratified_kfold(d, k, seed)
    tests = [te for _, te in folds]
    assert np.array_equal(np.sort(np.concatenate(tests)), np.arange(len(d)))
    for tr, te in folds:
        assert np.intersect1d(tr, te).size == 0
        assert len(tr) + len(te) == len(d)
    for c in range(3):
        per = [int(np.sum(d.y[te] == c)) for te in tests]
        assert max(per) - min(per) <= 1
    again = stratified_kfold(d, k, seed)
    assert all(np.array_equal(a[1], b[1]) for a, b in zip(folds, again))


# ---------------------------------------------------------------------------
# noise


def test_noise_rate_zero_is_identity(iris):
    noisy, rec = inject_noise(iris, 0.0, seed=1)
    assert noisy == iris
    assert rec.flipped == {}


def test_noise_count_and_change():
    d = numeric_dataset(np.arange(100.0), np.repeat([0, 1, 2, 3], 25))
    noisy, rec = inject_noise(d, 0.10, seed=5)
    assert len(rec.flipped) == 10
    assert np.count_nonzero(noisy.y != d.y) == 10
    for i, (orig, new) in rec.flipped.items():
        assert orig == d.y[i] and new == noisy.y[i] and new != orig


def test_noise_binary_flips_to_other_class():
    d = numeric_dataset(np.arange(50.0), np.repeat([0, 1], 25))
    noisy, rec = inject_noise(d, 0.40, seed=2)
    assert len(rec.flipped) == 20
    for i, (orig, new) in rec.flipped.items():
        assert new == 1 - orig


def test_noise_targets_cover_other_classes():
    d = numeric_dataset(np.arange(900.0), np.zeros(900, dtype=int), n_classes=3)
    _, rec = inject_noise(d, 1.0, seed=0)
    new = np.array([v[1] for v in rec.flipped.values()])
    assert set(new) == {1, 2}
    assert abs(np.mean(new == 1) - 0.5) < 0.06


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([0, 0.1, 0.2, 0.3, 0.4, 0.55, 1.0]), st.integers(2, 120), st.integers(2, 5),
       st.integers(0, 2**32))
def test_noise_properties(rate, n, Y, seed):
    rng = np.random.default_rng(seed)
    d = numeric_dataset(rng.standard_normal((n, 2)), rng.integers(0, Y, n), n_classes=Y)
    noisy, rec = inject_noise(d, rate, seed)
    assert len(rec.flipped) == round_half_up(rate * n)
    assert np.array_equal(noisy.X, d.X)
    assert rec.restore(noisy) == d
    changed = np.flatnonzero(noisy.y != d.y)
    assert np.array_equal(changed, rec.flipped_ids)
    again, rec2 = inject_noise(d, rate, seed)
    assert again == noisy and rec2.flipped == rec.flipped


def test_corruption_record_rejects_non_flip():
    with pytest.raises(ValueError):
        CorruptionRecord({0: (1, 1)}, 0.1, 0)


def test_dataset_pickles(iris):
    import pickle

    assert pickle.loads(pickle.dumps(iris)) == iris


def test_numeric_rounding_is_decimal():
    d = numeric_dataset(np.arange(105.0), np.repeat([0, 1, 2], 35))
    _, rec = inject_noise(d, 0.1, seed=0)
    assert len(rec.flipped) == 11
    assert math.isclose(0.1 * 105, 10.5)
