"""Fixed-capacity replay buffer with reservoir sampling and AMR flush/resample."""

import heapq
import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from src.models.errors import ArtifactIOError, ConfigurationError, LabelMismatchError
from src.models.sample import Sample, SampleSet

logger = logging.getLogger("Memory")

EMPTY = -1


class MemoryBuffer:
    """Episodic memory M with per-class index sets I_c.

    Attributes:
        capacity (int): Number of slots |M|.
        seen_count (int): Samples offered to the reservoir so far.
        class_index (dict[int, set[int]]): Class id -> occupied slot indices.
    """

    def __init__(self, capacity: int, dim: int, seed: int = 0):
        if capacity < 1:
            raise ConfigurationError(f"buffer capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.dim = dim
        self.seen_count = 0
        self.class_index: dict[int, set[int]] = {}
        self.rng = np.random.default_rng(seed)
        self._features = np.zeros((capacity, dim), dtype=np.float64)
        self._labels = np.full(capacity, EMPTY, dtype=np.int64)
        self._versions = np.zeros(capacity, dtype=np.int64)
        self._ids = np.zeros(capacity, dtype=np.int64)
        self._free = list(range(capacity))

    def __len__(self) -> int:
        return self.capacity - len(self._free)

    def __repr__(self) -> str:
        return f"<MemoryBuffer occupied={len(self)}/{self.capacity} seen={self.seen_count}>"

    @property
    def free_slots(self) -> list[int]:
        return sorted(self._free)

    def occupied_slots(self) -> np.ndarray:
        return np.flatnonzero(self._labels != EMPTY)

    def slot(self, j: int) -> Optional[Sample]:
        if self._labels[j] == EMPTY:
            return None
        return Sample(
            features=self._features[j].copy(),
            label=int(self._labels[j]),
            drift_version=int(self._versions[j]),
            sample_id=int(self._ids[j]),
        )

    def _as_set(self, slots: np.ndarray) -> SampleSet:
        return SampleSet(
            features=self._features[slots].copy(),
            labels=self._labels[slots].copy(),
            versions=self._versions[slots].copy(),
            ids=self._ids[slots].copy(),
        )

    def residents(self) -> SampleSet:
        return self._as_set(self.occupied_slots())

    def class_samples(self, label: int) -> SampleSet:
        """Residents of class `label` in slot order (the M_c of the detector)."""
        return self._as_set(np.array(sorted(self.class_index.get(label, ())), dtype=np.int64))

    def draw(self, count: int, rng: np.random.Generator) -> SampleSet:
        """Up to `count` residents drawn uniformly without replacement."""
        occupied = self.occupied_slots()
        if count <= 0 or occupied.size == 0:
            return SampleSet.empty(self.dim)
        chosen = rng.choice(occupied, size=min(count, occupied.size), replace=False)
        return self._as_set(chosen)

    def place(self, j: int, features: np.ndarray, label: int, version: int, sample_id: int) -> None:
        """Writes a sample into slot j, evicting any resident."""
        if self._labels[j] != EMPTY:
            self._evict(j)
        else:
            self._free.remove(j)
            heapq.heapify(self._free)
        self._features[j] = features
        self._labels[j] = label
        self._versions[j] = version
        self._ids[j] = sample_id
        self.class_index.setdefault(label, set()).add(j)

    def _fill_free(self, features: np.ndarray, label: int, version: int, sample_id: int) -> int:
        j = heapq.heappop(self._free)
        self._features[j] = features
        self._labels[j] = label
        self._versions[j] = version
        self._ids[j] = sample_id
        self.class_index.setdefault(label, set()).add(j)
        return j

    def _evict(self, j: int) -> None:
        # slot stays off the free heap; the caller writes into it next
        label = int(self._labels[j])
        members = self.class_index[label]
        members.discard(j)
        if not members:
            del self.class_index[label]
        self._labels[j] = EMPTY
        self._versions[j] = 0
        self._ids[j] = 0
        self._features[j] = 0.0

    def clear_slot(self, j: int) -> None:
        if self._labels[j] == EMPTY:
            return
        self._evict(j)
        heapq.heappush(self._free, j)

    def check_coherence(self) -> None:
        """Full rescan of the index invariants; raises AssertionError on violation."""
        occupied = set(self.occupied_slots().tolist())
        indexed = [j for slots in self.class_index.values() for j in slots]
        assert len(indexed) == len(set(indexed)), "a slot is indexed under two classes"
        assert set(indexed) == occupied, "class_index does not partition the occupied slots"
        for label, slots in self.class_index.items():
            assert all(self._labels[j] == label for j in slots), f"stale index entry for class {label}"
        assert set(self._free) == set(range(self.capacity)) - occupied, "free list out of sync"


def reservoir_update(buffer: MemoryBuffer, sample: Sample) -> Optional[int]:
    """Offers one sample to the reservoir; returns the slot written, if any.

    Free slots are filled first (warm-up, or slots left empty by a short AMR
    pool). Otherwise the sample replaces a uniform slot with probability
    capacity / (seen_count + 1).
    """
    return _offer(buffer, sample.features, sample.label, sample.drift_version, sample.sample_id)


def _offer(buffer: MemoryBuffer, features: np.ndarray, label: int, version: int, sample_id: int) -> Optional[int]:
    written: Optional[int] = None
    if buffer._free:
        written = buffer._fill_free(features, label, version, sample_id)
    else:
        j = int(buffer.rng.integers(0, buffer.seen_count + 1))
        if j < buffer.capacity:
            buffer.place(j, features, label, version, sample_id)
            written = j
    buffer.seen_count += 1
    return written


def reservoir_update_set(buffer: MemoryBuffer, samples: SampleSet) -> int:
    """Offers every row in order; returns how many were written."""
    written = 0
    for row in range(len(samples)):
        slot = _offer(
            buffer,
            samples.features[row],
            int(samples.labels[row]),
            int(samples.versions[row]),
            int(samples.ids[row]),
        )
        written += slot is not None
    return written


def amr_flush(buffer: MemoryBuffer, label: int, fraction: float = 1.0) -> list[int]:
    """Empties the slots of class `label`; returns the freed indices in order.

    With fraction < 1 only ceil(fraction * |I_c|) seeded slots are freed.
    seen_count is left untouched.
    """
    slots = sorted(buffer.class_index.get(label, ()))
    if fraction < 1.0 and slots:
        keep = math.ceil(fraction * len(slots))
        slots = sorted(buffer.rng.choice(slots, size=keep, replace=False).tolist())
    for j in slots:
        buffer.clear_slot(j)
    if slots:
        logger.debug(f"Flushed {len(slots)} slots of class {label}")
    return slots


def amr_resample(buffer: MemoryBuffer, label: int, new_pool: SampleSet, freed_indices: list[int]) -> int:
    """Refills freed slots with samples drawn without replacement from `new_pool`.

    Slots beyond the pool size stay empty and are the first targets of later
    reservoir fills.

    Raises:
        LabelMismatchError: If the pool holds a sample of another class.
    """
    if len(new_pool) and np.any(new_pool.labels != label):
        wrong = sorted(set(new_pool.labels.tolist()) - {label})
        raise LabelMismatchError(f"resample pool for class {label} contains labels {wrong}")
    count = min(len(freed_indices), len(new_pool))
    if count == 0:
        return 0
    chosen = buffer.rng.choice(len(new_pool), size=count, replace=False)
    for j, row in zip(sorted(freed_indices)[:count], chosen):
        buffer.place(
            j,
            new_pool.features[row],
            label,
            int(new_pool.versions[row]),
            int(new_pool.ids[row]),
        )
    return count


def replacement_probability(capacity: int, n_c: int) -> float:
    """P(a given resident is overwritten by n_c random insertions) = 1 - (1 - 1/|M|)^n_c."""
    if n_c <= 0:
        return 0.0
    return 1.0 - (1.0 - 1.0 / capacity) ** n_c


def expected_replaced(capacity: int, num_classes: int, n_c: int) -> float:
    """Expected overwritten residents of one class holding |M|/K slots."""
    return capacity / num_classes * replacement_probability(capacity, n_c)


def class_share(capacity: int, num_classes: int) -> int:
    return int(round(capacity / num_classes))


def replace_all_probability(capacity: int, num_classes: int, n_c: int) -> float:
    """C(|M| - |M_c|, n_c - |M_c|) / C(|M|, n_c), zero when n_c < |M_c|."""
    share = class_share(capacity, num_classes)
    if n_c <= 0 or n_c < share:
        return 0.0
    if n_c >= capacity:
        return 1.0
    return float(Fraction(math.comb(capacity - share, n_c - share), math.comb(capacity, n_c)))


def simulate_reservoir_residency(capacity: int, offers: int, trials: int, seed: int) -> np.ndarray:
    """Per-item residency counts after `offers` offers, over `trials` runs.

    Vectorised over trials; applies the same acceptance rule as
    `reservoir_update` (slot j ~ U{0..t}, written when j < capacity).
    """
    rng = np.random.default_rng(seed)
    slots = np.tile(np.arange(min(capacity, offers)), (trials, 1))
    rows = np.arange(trials)
    for t in range(capacity, offers):
        j = rng.integers(0, t + 1, size=trials)
        hit = j < capacity
        slots[rows[hit], j[hit]] = t
    return np.bincount(slots.ravel(), minlength=offers)


def simulate_slot_replacement(
    capacity: int, num_classes: int, n_c: int, trials: int, seed: int, chunk: int = 5000
) -> tuple[float, float, float]:
    """Monte Carlo of n_c insertions into uniformly random slots.

    Returns (mean replaced residents of the class, per-slot replacement
    frequency, fraction of trials replacing every resident of the class).
    """
    share = class_share(capacity, num_classes)
    if n_c <= 0 or share == 0:
        return 0.0, 0.0, 0.0
    rng = np.random.default_rng(seed)
    replaced_total = 0
    all_total = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        draws = rng.integers(0, capacity, size=(size, n_c))
        hits = np.zeros((size, share), dtype=bool)
        mask = draws < share
        rows = np.broadcast_to(np.arange(size)[:, None], draws.shape)
        hits[rows[mask], draws[mask]] = True
        replaced = hits.sum(axis=1)
        replaced_total += int(replaced.sum())
        all_total += int(np.count_nonzero(replaced == share))
        done += size
    mean_replaced = replaced_total / trials
    return mean_replaced, mean_replaced / share, all_total / trials


def snapshot(buffer: MemoryBuffer) -> list[dict]:
    """Flat record list of occupied slots."""
    return [
        {
            "slot": int(j),
            "label": int(buffer._labels[j]),
            "drift_version": int(buffer._versions[j]),
            "sample_id": int(buffer._ids[j]),
            "features": buffer._features[j].tolist(),
        }
        for j in buffer.occupied_slots()
    ]


def write_snapshot(buffer: MemoryBuffer, path: Path) -> None:
    try:
        with open(path, "w") as f:
            for record in snapshot(buffer):
                f.write(json.dumps(record) + "\n")
    except OSError as e:
        raise ArtifactIOError(str(path), f"cannot write buffer snapshot: {e}") from e
