import math

import numpy as np
import pytest

from gbct.dataset import (
    NOISE_LABEL,
    Dataset,
    DatasetError,
    generate,
    inject_noise,
    load_csv,
    load_labels_csv,
    save_csv,
    save_labels_csv,
    standardize,
)


def _write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_three_rows_without_labels(tmp_path):
    ds = load_csv(_write(tmp_path, "1,2\n3,4\n5,6\n"))
    assert (ds.n, ds.dim) == (3, 2)
    assert ds.labels is None
    np.testing.assert_array_equal(ds.points, [[1, 2], [3, 4], [5, 6]])


def test_load_extracts_label_column(tmp_path):
    p = _write(tmp_path, "1,2,0\n3,4,0\n5,6,1\n")
    ds = load_csv(p, label_col=2)
    assert ds.dim == 2
    assert ds.labels.tolist() == [0, 0, 1]
    assert load_csv(p, label_col=-1).labels.tolist() == [0, 0, 1]


def test_load_header_row_is_skipped(tmp_path):
    ds = load_csv(_write(tmp_path, "x,y\n1,2\n"), has_header=True)
    assert ds.points.tolist() == [[1.0, 2.0]]


def test_non_numeric_cell_names_row_and_column(tmp_path):
    with pytest.raises(DatasetError) as exc:
        load_csv(_write(tmp_path, "1,2\n3,abc\n"))
    msg = str(exc.value)
    # rows are file lines (1-based); columns are 0-based like label_col
    assert "row 2" in msg and "column 1" in msg and "abc" in msg


@pytest.mark.parametrize("text", ["1,2\n3\n", "1,2\n3,4,5\n"])
def test_ragged_rows_rejected(tmp_path, text):
    with pytest.raises(DatasetError, match="row 2"):
        load_csv(_write(tmp_path, text))


def test_label_col_out_of_range(tmp_path):
    with pytest.raises(DatasetError):
        load_csv(_write(tmp_path, "1,2\n3,4\n"), label_col=5)


def test_missing_file(tmp_path):
    with pytest.raises(DatasetError):
        load_csv(tmp_path / "absent.csv")


def test_decimal_comma_is_not_a_number(tmp_path):
    # only comma separators and dot decimals are understood
    with pytest.raises(DatasetError):
        load_csv(_write(tmp_path, "1.5;2\n"))


def test_save_labels_lines(tmp_path):
    p = tmp_path / "labels.csv"
    save_labels_csv(p, [0, 1, 1])
    assert p.read_text().splitlines() == ["0", "1", "1"]


def test_save_labels_empty_rejected(tmp_path):
    with pytest.raises(DatasetError):
        save_labels_csv(tmp_path / "x.csv", [])


def test_labels_round_trip(tmp_path):
    labels = [3, 0, 0, 2, 1, -1]
    p = tmp_path / "labels.csv"
    save_labels_csv(p, labels)
    assert load_labels_csv(p).tolist() == labels
    assert load_csv(p).points[:, 0].astype(int).tolist() == labels


def test_dataset_round_trip(tmp_path):
    ds = generate("moons", 50, seed=3)
    p = tmp_path / "moons.csv"
    save_csv(p, ds)
    back = load_csv(p, label_col=-1)
    np.testing.assert_array_equal(back.points, ds.points)
    np.testing.assert_array_equal(back.labels, ds.labels)


def test_dataset_rejects_nan_and_bad_labels():
    with pytest.raises(DatasetError):
        Dataset(np.array([[0.0, np.nan]]))
    with pytest.raises(DatasetError):
        Dataset(np.zeros((3, 2)), np.array([0, 1]))
    with pytest.raises(DatasetError):
        Dataset(np.zeros((2, 2)), np.array([0.5, 1.0]))


def test_dataset_is_read_only():
    ds = Dataset(np.zeros((2, 2)), [0, 1])
    with pytest.raises(ValueError):
        ds.points[0, 0] = 1.0


def test_blobs_three_centers_even_split():
    ds = generate("blobs", 300, {"centers": 3}, seed=1)
    values, counts = np.unique(ds.labels, return_counts=True)
    assert values.tolist() == [0, 1, 2]
    assert counts.tolist() == [100, 100, 100]


def test_moons_without_jitter_lie_on_unit_half_circles():
    ds = generate("moons", 200, {"jitter": 0.0}, seed=0)
    X, y = ds.points, ds.labels
    outer = X[y == 0]
    inner = X[y == 1]
    np.testing.assert_allclose(np.hypot(outer[:, 0], outer[:, 1]), 1.0, atol=1e-12)
    assert np.all(outer[:, 1] >= -1e-12)
    np.testing.assert_allclose(np.hypot(inner[:, 0] - 1.0, inner[:, 1] - 0.5), 1.0, atol=1e-12)
    assert np.all(inner[:, 1] <= 0.5 + 1e-12)


@pytest.mark.parametrize("shape", ["moons", "circles", "blobs", "spiral"])
def test_generators_deterministic(shape):
    a = generate(shape, 120, seed=11)
    b = generate(shape, 120, seed=11)
    assert a.points.tobytes() == b.points.tobytes()
    assert a.labels.tobytes() == b.labels.tobytes()
    assert a.n == 120
    c = generate(shape, 120, seed=12)
    assert a.points.tobytes() != c.points.tobytes()


@pytest.mark.parametrize("shape,params", [
    ("moons", {"jitter": -0.1}),
    ("blobs", {"centers": 0}),
    ("circles", {"rings": 0}),
    ("spiral", {"jitter": -1}),
])
def test_generator_parameter_errors(shape, params):
    with pytest.raises(ValueError):
        generate(shape, 100, params)


def test_generator_needs_two_points_per_cluster():
    with pytest.raises(ValueError):
        generate("blobs", 5, {"centers": 3})


def test_unknown_shape():
    with pytest.raises(ValueError):
        generate("triangle", 10)


def test_inject_noise_zero_is_identity():
    ds = generate("blobs", 100, seed=0)
    assert inject_noise(ds, 0.0, seed=5) is ds


def test_inject_noise_count_and_originals_untouched():
    ds = generate("blobs", 100, seed=0)
    out = inject_noise(ds, 0.05, seed=5)
    assert out.n == 105
    assert int(np.sum(out.labels == NOISE_LABEL)) == 5
    np.testing.assert_array_equal(out.points[:100], ds.points)
    np.testing.assert_array_equal(out.labels[:100], ds.labels)


@pytest.mark.parametrize("seed", range(20))
def test_inject_noise_inside_bounding_box(seed):
    ds = generate("moons", 200, seed=seed)
    out = inject_noise(ds, 0.3, seed=seed)
    lo, hi = ds.points.min(axis=0), ds.points.max(axis=0)
    extra = out.points[ds.n:]
    assert len(extra) == math.ceil(0.3 * 200)
    assert np.all(extra >= lo) and np.all(extra <= hi)


def test_inject_noise_rejects_bad_fraction():
    ds = generate("blobs", 100, seed=0)
    with pytest.raises(ValueError):
        inject_noise(ds, 1.0)


def test_standardize_two_points():
    out = standardize(Dataset(np.array([[0.0], [2.0]])))
    assert out.points[:, 0].tolist() == [-1.0, 1.0]


def test_standardize_constant_column_unchanged():
    X = np.column_stack([np.arange(5.0), np.full(5, 7.0)])
    out = standardize(Dataset(X))
    assert out.points[:, 1].tolist() == [7.0] * 5


def test_standardize_moments():
    X = np.random.default_rng(0).normal(3.0, 5.0, size=(100, 3))
    Z = standardize(Dataset(X)).points
    assert np.all(np.abs(Z.mean(axis=0)) <= 1e-12)
    assert np.all(np.abs(Z.std(axis=0) - 1.0) <= 1e-12)
