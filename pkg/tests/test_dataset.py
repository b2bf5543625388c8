import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pcbwave.dataset import (LabeledSample, SplitSpec, encode_pgm, load_dataset, load_pgm,
                             read_pgm, save_dataset, split, synth_generate, write_pgm)
from pcbwave.errors import (EmptyClass, InfeasibleSplit, MalformedPgm, MixedDimensions,
                            OutOfRange)
from pcbwave.features import feature_matrix
from pcbwave.labels import Label


def test_p5_parse():
    img = read_pgm(b"P5\n2 2\n255\n" + bytes([0, 128, 255, 7]))
    assert img.dtype == np.float64
    assert img.tolist() == [[0.0, 128.0], [255.0, 7.0]]


def test_p2_with_comment_matches_p5():
    p2 = b"P2\n# made by hand\n2 2\n# another\n255\n0 128\n255 7\n"
    assert np.array_equal(read_pgm(p2), read_pgm(b"P5\n2 2\n255\n" + bytes([0, 128, 255, 7])))


def test_comment_inside_header_p5():
    img = read_pgm(b"P5 # c\n3 # width\n1\n255\n" + bytes([1, 2, 3]))
    assert img.tolist() == [[1.0, 2.0, 3.0]]


@pytest.mark.parametrize("data", [
    b"P6\n2 2\n255\n" + bytes(12),
    b"P5\n2 2\n255\n" + bytes(3),
    b"P5\n2 2\n65535\n" + bytes(8),
    b"P2\n2 2\n255\n1 2 3\n",
    b"P2\n2 2\n15\n1 2 3 16\n",
    b"P5\n2",
    b"P5\nx 2\n255\n" + bytes(4),
])
def test_malformed(data):
    with pytest.raises(MalformedPgm):
        read_pgm(data)


def test_write_constant_image(tmp_path):
    path = tmp_path / "c.pgm"
    write_pgm(np.full((64, 64), 128.0), path)
    data = path.read_bytes()
    header = b"P5\n64 64\n255\n"
    assert data == header + b"\x80" * 4096


def test_write_out_of_range(tmp_path):
    with pytest.raises(OutOfRange):
        write_pgm(np.full((2, 2), 300.0), tmp_path / "x.pgm")
    with pytest.raises(OutOfRange):
        encode_pgm(np.full((2, 2), -1.0))


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 20), st.integers(1, 20))))
def test_round_trip(pix):
    assert np.array_equal(read_pgm(encode_pgm(pix)), pix.astype(float))


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_pgm(tmp_path / "nope.pgm")


def _make_dataset(root, n_true, n_pseudo, shape=(8, 8)):
    for label, n in (("true", n_true), ("pseudo", n_pseudo)):
        (root / label).mkdir(parents=True, exist_ok=True)
        for k in range(n):
            write_pgm(np.full(shape, k % 256), root / label / f"img{k:03d}.pgm")


def test_load_dataset_counts(tmp_path):
    _make_dataset(tmp_path, 51, 50)
    samples = load_dataset(tmp_path)
    assert len(samples) == 101
    assert sum(s.label is Label.TRUE for s in samples) == 51
    assert sum(s.label is Label.PSEUDO for s in samples) == 50
    assert len({s.source_id for s in samples}) == 101


def test_load_dataset_order_independent_of_creation(tmp_path):
    for label in ("true", "pseudo"):
        (tmp_path / label).mkdir()
        for name in ("c.pgm", "a.pgm", "b.pgm"):
            write_pgm(np.zeros((4, 4)), tmp_path / label / name)
    ids = [s.source_id for s in load_dataset(tmp_path)]
    assert ids == ["true/a.pgm", "true/b.pgm", "true/c.pgm",
                   "pseudo/a.pgm", "pseudo/b.pgm", "pseudo/c.pgm"]
    assert ids == [s.source_id for s in load_dataset(tmp_path)]


def test_load_dataset_errors(tmp_path):
    _make_dataset(tmp_path, 2, 0)
    with pytest.raises(EmptyClass):
        load_dataset(tmp_path)
    write_pgm(np.zeros((4, 4)), tmp_path / "pseudo" / "odd.pgm")
    with pytest.raises(MixedDimensions):
        load_dataset(tmp_path)
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path / "missing")


def _fake(n_true, n_pseudo):
    z = np.zeros((2, 2))
    return ([LabeledSample(z, Label.TRUE, f"t{k}") for k in range(n_true)]
            + [LabeledSample(z, Label.PSEUDO, f"p{k}") for k in range(n_pseudo)])


@pytest.mark.parametrize("seed", [0, 1, 12345])
def test_reference_split_counts(seed):
    train, test = split(_fake(51, 50), SplitSpec(26, 24, seed))
    assert len(train) == 50 and len(test) == 51
    assert sum(s.label is Label.TRUE for s in test) == 25
    assert sum(s.label is Label.PSEUDO for s in test) == 26


def test_split_boundary_and_determinism():
    samples = _fake(5, 5)
    train, test = split(samples, SplitSpec(0, 0, 3))
    assert train == [] and len(test) == 10
    a = split(samples, SplitSpec(2, 3, 9))
    b = split(samples, SplitSpec(2, 3, 9))
    assert [s.source_id for s in a[0]] == [s.source_id for s in b[0]]
    with pytest.raises(InfeasibleSplit):
        split(samples, SplitSpec(6, 0, 0))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10), st.integers(0, 10), st.integers(0, 2 ** 63 - 1))
def test_split_disjoint_exhaustive(tt, tp, seed):
    samples = _fake(10, 10)
    train, test = split(samples, SplitSpec(tt, tp, seed))
    ids_train = {s.source_id for s in train}
    ids_test = {s.source_id for s in test}
    assert not ids_train & ids_test
    assert ids_train | ids_test == {s.source_id for s in samples}


def test_synth_counts_and_determinism():
    a = synth_generate(25, seed=42)
    b = synth_generate(25, seed=42)
    assert len(a) == 50
    assert sum(s.label is Label.TRUE for s in a) == 25
    assert all(s.image.shape == (64, 64) for s in a)
    assert all(np.array_equal(x.image, y.image) for x, y in zip(a, b))
    assert all(s.image.min() >= 0 and s.image.max() <= 255 for s in a)
    assert all(np.array_equal(s.image, np.rint(s.image)) for s in a)
    assert not np.array_equal(a[0].image, synth_generate(25, seed=43)[0].image)


def test_synth_class_separation():
    samples = synth_generate(30, seed=7)
    X = feature_matrix([s.image for s in samples], 2)
    y = np.array([s.label is Label.TRUE for s in samples])
    D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
    same = y[:, None] == y[None, :]
    off_diag = ~np.eye(len(y), dtype=bool)
    assert D[~same].mean() > D[same & off_diag].mean()


def test_save_and_reload_synthetic(tmp_path):
    samples = synth_generate(3, seed=1)
    save_dataset(samples, tmp_path)
    assert sorted(os.listdir(tmp_path)) == ["pseudo", "true"]
    loaded = load_dataset(tmp_path)
    assert [s.source_id for s in loaded] == [s.source_id for s in samples]
    assert all(np.array_equal(a.image, b.image) for a, b in zip(loaded, samples))
