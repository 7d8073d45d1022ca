import struct

import numpy as np
import pytest

from src.models.errors import ConfigurationError, DatasetFormatError, DatasetMissingError, InputShapeError
from src.models.kinds import StrategyKind, TransformKind
from src.models.run_config import StreamSettings
from src.models.sample import Sample
from src.services.streams import (
    DriftMap,
    apply_drift_transform,
    build_stream,
    load_fashion_mnist,
    load_fashion_mnist_splits,
    make_fashion_mnist_stream,
    make_synthetic_stream,
    task_view,
)
from src.services.streams.idx import FASHION_MNIST_FILES, read_idx_images
from tests.conftest import write_idx_images, write_idx_labels


def naive_idx_first_image(path) -> list[int]:
    """Byte-by-byte reader of the first image of an uncompressed IDX file."""
    with open(path, "rb") as f:
        raw = f.read()
    rows = int.from_bytes(raw[8:12], "big")
    cols = int.from_bytes(raw[12:16], "big")
    return [raw[16 + k] for k in range(rows * cols)]


def test_synthetic_tasks_hold_consecutive_disjoint_classes(stream_settings):
    stream = make_synthetic_stream(stream_settings, seed=1)
    assert [task.new_classes for task in stream.tasks] == [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)]
    assert sorted(np.unique(stream.train.labels).tolist()) == list(range(10))
    assert stream.dim == 16


def test_no_drift_stream_serves_only_version_zero(stream_settings):
    stream = make_synthetic_stream(stream_settings.model_copy(update={"drift_tasks": []}), seed=1)
    for i in range(stream.num_tasks):
        view = task_view(stream, i, StrategyKind.AMR)
        assert np.all(view.test.versions == 0)
        assert len(view.recurring_pool) == 0


def test_synthetic_stream_is_reproducible(stream_settings):
    a = make_synthetic_stream(stream_settings, seed=5)
    b = make_synthetic_stream(stream_settings, seed=5)
    assert a.train.features.tobytes() == b.train.features.tobytes()
    assert a.test.features.tobytes() == b.test.features.tobytes()
    assert a.drift_events == b.drift_events


def test_train_and_test_ids_never_overlap(stream_settings):
    stream = make_synthetic_stream(stream_settings, seed=0)
    assert set(stream.train.ids.tolist()).isdisjoint(stream.test.ids.tolist())


def test_impossible_class_separation_is_a_config_error():
    settings = StreamSettings(dataset="synthetic", tasks=5, feature_dim=1, mean_scale=1.0)
    with pytest.raises(ConfigurationError):
        make_synthetic_stream(settings, seed=0)


def test_permutation_is_deterministic_per_event_seed():
    sample = Sample(features=np.arange(20, dtype=np.float64), label=3, sample_id=4)
    once = apply_drift_transform(sample, TransformKind.PERMUTE, 5, seed=42)
    again = apply_drift_transform(sample, TransformKind.PERMUTE, 5, seed=42)
    assert np.array_equal(once.features, again.features)
    assert once.drift_version == 1
    assert once.sample_id == sample.sample_id and once.label == sample.label


def test_full_permutation_preserves_feature_multiset():
    features = np.random.default_rng(0).normal(size=50)
    drifted = apply_drift_transform(Sample(features=features, label=0), "permute", 5, seed=3)
    assert np.array_equal(np.sort(drifted.features), np.sort(features))
    assert not np.array_equal(drifted.features, features)


def test_low_severity_permutation_moves_fewer_features():
    drift_map = DriftMap(TransformKind.PERMUTE, 1, seed=0, dim=100)
    assert np.count_nonzero(drift_map.index_map != np.arange(100)) <= 20


def test_gaussian_noise_severity_one_has_expected_spread():
    drifted = apply_drift_transform(Sample(features=np.zeros(784), label=0, sample_id=9), "gaussian_noise", 1, seed=1)
    assert np.std(drifted.features, ddof=1) == pytest.approx(0.05, rel=0.2)


def test_noise_is_reproducible_per_sample_id():
    drift_map = DriftMap(TransformKind.GAUSSIAN_NOISE, 3, seed=8, dim=6)
    x = np.zeros((2, 6))
    first = drift_map.apply(x, np.array([10, 11]))
    second = drift_map.apply(x, np.array([10, 11]))
    assert np.array_equal(first, second)
    assert not np.array_equal(first[0], first[1])


def test_rotation_preserves_norm():
    features = np.random.default_rng(2).normal(size=10)
    drifted = apply_drift_transform(Sample(features=features, label=0), "rotate_pairs", 5, seed=0)
    assert np.linalg.norm(drifted.features) == pytest.approx(np.linalg.norm(features), rel=1e-12)


@pytest.mark.parametrize("transform, severity", [("blur", 3), ("permute", 0), ("permute", 6)])
def test_invalid_transform_arguments_are_rejected(transform, severity):
    with pytest.raises(ConfigurationError):
        apply_drift_transform(Sample(features=np.zeros(4), label=0), transform, severity, seed=0)


def test_drift_task_pool_holds_recurring_classes_at_new_version(stream_settings):
    stream = make_synthetic_stream(stream_settings, seed=0)
    view = task_view(stream, 3, StrategyKind.AMR)
    assert view.recurring_classes == (0, 1, 2, 3, 4, 5)
    assert sorted(np.unique(view.recurring_pool.labels).tolist()) == [0, 1, 2, 3, 4, 5]
    assert np.all(view.recurring_pool.versions == 1)
    for label in range(6):
        assert len(view.recurring_pool.of_class(label)) == len(stream.train.of_class(label))
    assert np.all(view.train.versions == 0)


def test_non_drift_task_and_vanilla_get_no_pool(stream_settings):
    stream = make_synthetic_stream(stream_settings, seed=0)
    assert len(task_view(stream, 2, StrategyKind.FULL_RELEARNING).recurring_pool) == 0
    assert len(task_view(stream, 3, StrategyKind.VANILLA).recurring_pool) == 0


def test_probe_is_identical_across_strategies(stream_settings):
    stream = make_synthetic_stream(stream_settings, seed=0, probe_size=25)
    probes = [task_view(stream, 3, kind).probe for kind in StrategyKind]
    assert all(np.array_equal(p.ids, probes[0].ids) for p in probes)
    assert len(probes[0].of_class(0)) == 25


def test_test_split_after_drift_is_drifted(stream_settings):
    stream = make_synthetic_stream(stream_settings, seed=0)
    view = task_view(stream, 4)
    assert np.all(view.test.of_classes(range(6)).versions == 1)
    assert np.all(view.test.of_classes(range(6, 10)).versions == 0)
    assert len(view.task_tests) == 5


def test_chained_drift_events_compose(stream_settings):
    settings = stream_settings.model_copy(update={"drift_tasks": [2, 4]})
    stream = make_synthetic_stream(settings, seed=0)
    assert stream.class_version(0, 4) == 2
    assert stream.class_version(4, 4) == 1
    twice = stream.versioned("train", 0, 2)
    first_map, second_map = stream._maps
    base = stream.train.of_class(0)
    expected = second_map.apply(first_map.apply(base.features, base.ids), base.ids)
    assert np.array_equal(twice.features, expected)
    assert np.all(twice.versions == 2)


def test_drift_classes_narrow_the_affected_set(stream_settings):
    settings = stream_settings.model_copy(update={"drift_classes": [0, 1]})
    stream = make_synthetic_stream(settings, seed=0)
    assert stream.drift_events[0].affected_classes == (0, 1)
    view = task_view(stream, 3, StrategyKind.AMR)
    assert view.recurring_classes == (0, 1, 2, 3, 4, 5)
    assert np.all(view.recurring_pool.of_class(2).versions == 0)
    assert np.all(view.recurring_pool.of_class(0).versions == 1)


def test_task_view_rejects_out_of_range_index(stream_settings):
    stream = make_synthetic_stream(stream_settings, seed=0)
    with pytest.raises(InputShapeError):
        task_view(stream, 5)


def test_idx_reader_matches_byte_level_reader(tmp_path):
    images = np.random.default_rng(1).integers(0, 256, size=(3, 4, 5))
    path = write_idx_images(tmp_path / "images-idx3-ubyte", images)
    parsed = read_idx_images(path)
    assert parsed.shape == (3, 20)
    assert np.array_equal(np.rint(parsed[0] * 255).astype(int), naive_idx_first_image(path))


def test_idx_pair_loads_plain_and_gzipped(tmp_path):
    images = np.random.default_rng(1).integers(0, 256, size=(6, 2, 2))
    labels = np.array([0, 1, 2, 0, 1, 2])
    plain = load_fashion_mnist(
        write_idx_images(tmp_path / "i", images), write_idx_labels(tmp_path / "l", labels)
    )
    packed = load_fashion_mnist(
        write_idx_images(tmp_path / "i.gz", images, compress=True),
        write_idx_labels(tmp_path / "l.gz", labels, compress=True),
    )
    assert np.array_equal(plain.features, packed.features)
    assert plain.labels.tolist() == labels.tolist()
    assert plain.features.max() <= 1.0


def test_idx_bad_magic_is_a_format_error(tmp_path):
    path = tmp_path / "bad"
    path.write_bytes(struct.pack(">4I", 0x0802, 1, 1, 1) + b"\x00")
    with pytest.raises(DatasetFormatError) as error:
        read_idx_images(path)
    assert error.value.offset == 0


def test_idx_truncated_pixels_are_a_format_error(tmp_path):
    path = tmp_path / "short"
    path.write_bytes(struct.pack(">4I", 0x0803, 2, 2, 2) + b"\x00" * 5)
    with pytest.raises(DatasetFormatError):
        read_idx_images(path)


def test_idx_count_mismatch_is_a_format_error(tmp_path):
    images = write_idx_images(tmp_path / "i", np.zeros((3, 2, 2)))
    labels = write_idx_labels(tmp_path / "l", np.array([0, 1]))
    with pytest.raises(DatasetFormatError):
        load_fashion_mnist(images, labels)


def test_missing_dataset_names_the_download_verb(tmp_path):
    with pytest.raises(DatasetMissingError) as error:
        load_fashion_mnist_splits(tmp_path)
    assert "download" in error.value.message
    assert FASHION_MNIST_FILES["train_images"] in error.value.message


def test_fashion_splits_get_disjoint_ids(fake_fashion_root):
    train, test = load_fashion_mnist_splits(fake_fashion_root)
    assert len(train) == 48 and len(test) == 20
    assert test.ids.min() == 60_000


def test_fashion_stream_caps_classes_in_file_order(fake_fashion_root):
    settings = StreamSettings(dataset="fashion_mnist", tasks=2, classes_per_task=2, drift_tasks=[1], train_per_class=5)
    stream = make_fashion_mnist_stream(settings, seed=0, root=fake_fashion_root)
    assert [t.new_classes for t in stream.tasks] == [(0, 1), (2, 3)]
    assert all(len(stream.train.of_class(c)) == 5 for c in range(4))
    first_zero = stream.train.of_class(0).ids
    assert first_zero.tolist() == sorted(first_zero.tolist())
    assert stream.dim == 16


def test_build_stream_uses_explicit_dataset_root(fake_fashion_root):
    settings = StreamSettings(dataset="fashion_mnist", tasks=2, classes_per_task=2)
    stream = build_stream(settings, seed=0, data_root=str(fake_fashion_root))
    assert stream.num_classes == 4


def test_fashion_stream_rejects_more_than_ten_classes(fake_fashion_root):
    settings = StreamSettings(dataset="fashion_mnist", tasks=6, classes_per_task=2)
    with pytest.raises(ConfigurationError):
        make_fashion_mnist_stream(settings, seed=0, root=fake_fashion_root)
