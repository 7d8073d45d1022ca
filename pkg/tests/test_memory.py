import json

import numpy as np
import pytest

from src.models.errors import ConfigurationError, LabelMismatchError
from src.models.sample import Sample, SampleSet
from src.services.memory import (
    MemoryBuffer,
    amr_flush,
    amr_resample,
    expected_replaced,
    replace_all_probability,
    replacement_probability,
    reservoir_update,
    reservoir_update_set,
    simulate_reservoir_residency,
    simulate_slot_replacement,
    snapshot,
    write_snapshot,
)


def labeled_set(labels, version=0, id_offset=0, dim=3) -> SampleSet:
    labels = np.asarray(labels)
    n = len(labels)
    return SampleSet.build(
        np.arange(n * dim, dtype=np.float64).reshape(n, dim),
        labels,
        versions=np.full(n, version),
        ids=np.arange(n) + id_offset,
    )


def test_warm_up_keeps_first_inserts():
    buffer = MemoryBuffer(3, dim=2, seed=0)
    for i in range(3):
        reservoir_update(buffer, Sample(features=np.full(2, float(i)), label=i, sample_id=i))
    assert len(buffer) == 3
    assert sorted(buffer.residents().ids.tolist()) == [0, 1, 2]
    assert buffer.seen_count == 3


def test_capacity_must_be_positive():
    with pytest.raises(ConfigurationError):
        MemoryBuffer(0, dim=2)


def test_reservoir_keeps_each_item_with_uniform_frequency():
    counts = simulate_reservoir_residency(capacity=5, offers=100, trials=20_000, seed=3)
    frequency = counts / 20_000
    assert counts.sum() == 5 * 20_000
    assert np.all(np.abs(frequency - 0.05) <= 0.01)


def test_buffer_rule_matches_simulated_rule():
    # The in-buffer reservoir and the vectorised simulator share the acceptance rule
    hits = np.zeros(40)
    for trial in range(400):
        buffer = MemoryBuffer(4, dim=1, seed=trial)
        reservoir_update_set(buffer, labeled_set(np.zeros(40, dtype=int), dim=1))
        hits[buffer.residents().ids] += 1
    assert hits.sum() == 4 * 400
    assert np.all(np.abs(hits / 400 - 0.1) <= 0.1)


def test_class_index_partitions_occupied_slots():
    buffer = MemoryBuffer(20, dim=3, seed=1)
    reservoir_update_set(buffer, labeled_set(np.arange(60) % 4))
    assert sum(len(slots) for slots in buffer.class_index.values()) == len(buffer) == 20
    buffer.check_coherence()


def test_evicting_a_resident_keeps_the_buffer_full():
    buffer = MemoryBuffer(20, dim=3, seed=1)
    reservoir_update_set(buffer, labeled_set(np.arange(200) % 4))
    assert buffer.free_slots == []
    assert len(buffer) == 20
    assert buffer.seen_count == 200
    buffer.check_coherence()


def test_buffer_keeps_each_offer_with_uniform_frequency():
    trials, offers = 1000, 100
    hits = np.zeros(offers)
    for trial in range(trials):
        buffer = MemoryBuffer(5, dim=1, seed=trial)
        reservoir_update_set(buffer, labeled_set(np.zeros(offers, dtype=int), dim=1))
        hits[buffer.residents().ids] += 1
    frequency = hits / trials
    assert frequency[:5].mean() == pytest.approx(0.05, abs=0.015)
    assert np.all(np.abs(frequency - 0.05) <= 0.03)


def test_class_samples_hold_only_their_class():
    buffer = MemoryBuffer(200, dim=3, seed=2)
    reservoir_update_set(buffer, labeled_set(np.arange(5000) % 10))
    for label in range(10):
        assert np.all(buffer.class_samples(label).labels == label)


def test_flush_leaves_other_classes_in_place():
    buffer = MemoryBuffer(200, dim=3, seed=2)
    reservoir_update_set(buffer, labeled_set(np.arange(5000) % 10))
    others = len(buffer) - len(buffer.class_samples(3))
    amr_flush(buffer, 3)
    assert len(buffer) == others
    assert 3 not in buffer.class_index
    buffer.check_coherence()


@pytest.mark.parametrize("seed", range(3))
def test_interleaved_operations_keep_the_index_coherent(seed):
    rng = np.random.default_rng(seed)
    buffer = MemoryBuffer(25, dim=3, seed=seed)
    next_id = 0
    for _ in range(800):
        op = rng.random()
        label = int(rng.integers(0, 5))
        if op < 0.8:
            reservoir_update(buffer, Sample(features=np.zeros(3), label=label, sample_id=next_id))
            next_id += 1
        elif op < 0.9:
            amr_flush(buffer, label, fraction=float(rng.choice([0.5, 1.0])))
        else:
            size = int(rng.integers(1, 40))
            pool = labeled_set([label] * size, version=1, id_offset=100_000 + next_id)
            next_id += size
            amr_resample(buffer, label, pool, amr_flush(buffer, label))
        assert len(buffer) <= buffer.capacity
        buffer.check_coherence()


def test_flush_of_absent_class_changes_nothing():
    buffer = MemoryBuffer(10, dim=3, seed=0)
    reservoir_update_set(buffer, labeled_set([0] * 10))
    assert amr_flush(buffer, 5) == []
    assert len(buffer) == 10


def test_flush_frees_every_slot_of_the_class():
    buffer = MemoryBuffer(10, dim=3, seed=0)
    reservoir_update_set(buffer, labeled_set([2] * 7 + [1] * 3))
    freed = amr_flush(buffer, 2)
    assert len(freed) == 7
    assert len(buffer.class_samples(2)) == 0
    assert buffer.free_slots == sorted(freed)
    buffer.check_coherence()


def test_partial_flush_frees_a_fraction():
    buffer = MemoryBuffer(10, dim=3, seed=0)
    reservoir_update_set(buffer, labeled_set([2] * 10))
    freed = amr_flush(buffer, 2, fraction=0.5)
    assert len(freed) == 5
    assert len(buffer.class_samples(2)) == 5


def test_flush_leaves_seen_count_untouched():
    buffer = MemoryBuffer(5, dim=3, seed=0)
    reservoir_update_set(buffer, labeled_set([1] * 8))
    amr_flush(buffer, 1)
    assert buffer.seen_count == 8


def test_resample_fills_freed_slots_from_large_pool():
    buffer = MemoryBuffer(10, dim=3, seed=0)
    reservoir_update_set(buffer, labeled_set([2] * 10))
    freed = amr_flush(buffer, 2)
    placed = amr_resample(buffer, 2, labeled_set([2] * 500, version=1, id_offset=1000), freed)
    assert placed == 10
    residents = buffer.class_samples(2)
    assert np.all(residents.versions == 1)
    assert len(set(residents.ids.tolist())) == 10


def test_resample_from_scarce_pool_leaves_slots_empty():
    buffer = MemoryBuffer(10, dim=3, seed=0)
    reservoir_update_set(buffer, labeled_set([2] * 10))
    freed = amr_flush(buffer, 2)
    assert amr_resample(buffer, 2, labeled_set([2] * 4, version=1), freed) == 4
    assert len(buffer) == 4
    assert len(buffer.free_slots) == 6


def test_empty_slots_are_filled_first_after_scarce_resample():
    buffer = MemoryBuffer(6, dim=3, seed=0)
    reservoir_update_set(buffer, labeled_set([0] * 6))
    amr_resample(buffer, 0, labeled_set([0] * 2, version=1), amr_flush(buffer, 0))
    reservoir_update_set(buffer, labeled_set([1] * 4, id_offset=100))
    assert len(buffer) == 6
    assert len(buffer.class_samples(1)) == 4


def test_realignment_removes_every_old_version():
    buffer = MemoryBuffer(30, dim=3, seed=4)
    reservoir_update_set(buffer, labeled_set(np.arange(90) % 3))
    amr_resample(buffer, 1, labeled_set([1] * 50, version=1, id_offset=500), amr_flush(buffer, 1))
    assert np.all(buffer.class_samples(1).versions == 1)
    assert np.all(buffer.class_samples(0).versions == 0)
    buffer.check_coherence()


def test_resample_rejects_foreign_labels():
    buffer = MemoryBuffer(4, dim=3, seed=0)
    with pytest.raises(LabelMismatchError):
        amr_resample(buffer, 2, labeled_set([2, 3]), [0, 1])


def test_replacement_probability_closed_form():
    assert replacement_probability(500, 0) == 0.0
    assert replacement_probability(500, 50) == pytest.approx(1 - (1 - 1 / 500) ** 50)
    assert expected_replaced(500, 10, 50) == pytest.approx(4.76, abs=0.01)


def test_replace_all_is_impossible_below_class_share():
    assert replace_all_probability(500, 10, 49) == 0.0
    assert replace_all_probability(500, 10, 500) == 1.0
    assert 0.0 < replace_all_probability(20, 4, 15) < 1.0


def test_simulated_slot_replacement_matches_closed_form():
    mean, frequency, _ = simulate_slot_replacement(100, 1, 100, trials=50_000, seed=2)
    assert frequency == pytest.approx(replacement_probability(100, 100), rel=0.1)
    assert mean == pytest.approx(expected_replaced(100, 1, 100), rel=0.1)


def test_draw_is_without_replacement():
    buffer = MemoryBuffer(10, dim=3, seed=0)
    reservoir_update_set(buffer, labeled_set([0] * 10))
    drawn = buffer.draw(32, np.random.default_rng(0))
    assert len(drawn) == 10
    assert len(set(drawn.ids.tolist())) == 10


def test_snapshot_lists_occupied_slots(tmp_path):
    buffer = MemoryBuffer(5, dim=3, seed=0)
    reservoir_update_set(buffer, labeled_set([0, 1, 1]))
    records = snapshot(buffer)
    assert [r["label"] for r in records] == [0, 1, 1]
    path = tmp_path / "snapshot.jsonl"
    write_snapshot(buffer, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    assert json.loads(lines[0])["features"] == [0.0, 1.0, 2.0]
