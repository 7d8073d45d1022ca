import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.models.errors import ConfigurationError, InputShapeError
from src.models.kinds import StrategyKind
from src.models.run_config import StreamSettings
from src.models.sample import SampleSet
from src.models.stream import DriftEvent, TaskSpec
from src.services.streams.transforms import DriftMap

logger = logging.getLogger("Streams")


def consecutive_tasks(num_tasks: int, classes_per_task: int) -> list[TaskSpec]:
    return [
        TaskSpec(index=i, new_classes=tuple(range(i * classes_per_task, (i + 1) * classes_per_task)))
        for i in range(num_tasks)
    ]


def event_seed(stream_seed: int, task_index: int) -> int:
    return int(np.random.SeedSequence([stream_seed, task_index]).generate_state(1)[0])


def build_drift_events(settings: StreamSettings, tasks: list[TaskSpec], seed: int) -> list[DriftEvent]:
    """One event per drift task, affecting every class seen before it.

    `drift_classes`, when set, narrows the affected set; the other seen
    classes still recur at their current version.
    """
    events = []
    for task_index in sorted(settings.drift_tasks):
        seen = sorted(c for task in tasks[:task_index] for c in task.new_classes)
        if settings.drift_classes is not None:
            seen = [c for c in seen if c in settings.drift_classes]
        events.append(
            DriftEvent(
                task_index=task_index,
                transform=settings.transform,
                severity=settings.severity,
                affected_classes=tuple(seen),
                seed=event_seed(seed, task_index),
            )
        )
    return events


class TaskView(BaseModel):
    """Data served to a learner for task T_i under test-then-train.

    Attributes:
        train (SampleSet): New classes of T_i only.
        test (SampleSet): Every class seen so far at its current version.
        task_tests (list[SampleSet]): Test split of each task j <= i at time i.
        recurring_pool (SampleSet): Labeled data of recurring classes at their
            current version; empty for Vanilla and at non-drift tasks.
        probe (SampleSet): Incoming samples of recurring classes used by the
            drift detector, identical for every strategy.
        recurring_classes (tuple[int, ...]): Classes of Y_i that are in Y_past.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    index: int
    train: SampleSet
    test: SampleSet
    task_tests: list[SampleSet]
    recurring_pool: SampleSet
    probe: SampleSet
    recurring_classes: tuple[int, ...]


class TaskStream:
    """Ordered tasks with drift events over fixed train/test pools.

    The stream never mutates after construction; drifted views are derived
    on demand and memoised per (split, class, version).
    """

    def __init__(
        self,
        tasks: list[TaskSpec],
        train: SampleSet,
        test: SampleSet,
        drift_events: list[DriftEvent],
        num_classes: int,
        seed: int = 0,
        probe_size: int = 100,
    ):
        if not tasks:
            raise ConfigurationError("a stream needs at least one task")
        self.tasks = list(tasks)
        self.train = train
        self.test = test
        self.num_classes = num_classes
        self.seed = seed
        self.probe_size = probe_size
        self.drift_events = sorted(drift_events, key=lambda e: e.task_index)
        self._check_tasks()
        self._maps = [DriftMap(e.transform, e.severity, e.seed, train.dim) for e in self.drift_events]
        self._memo: dict[tuple[str, int, int], SampleSet] = {}

    def _check_tasks(self) -> None:
        seen: set[int] = set()
        for task in self.tasks:
            overlap = seen.intersection(task.new_classes)
            if overlap:
                raise ConfigurationError(f"task {task.index} repeats classes {sorted(overlap)}")
            if any(not 0 <= c < self.num_classes for c in task.new_classes):
                raise ConfigurationError(f"task {task.index} has classes outside [0, {self.num_classes})")
            seen.update(task.new_classes)
        for event in self.drift_events:
            if not 1 <= event.task_index < self.num_tasks:
                raise ConfigurationError(f"drift event at task {event.task_index} outside [1, {self.num_tasks})")
            before = set(self.seen_before(event.task_index))
            if not before.issuperset(event.affected_classes):
                raise ConfigurationError(f"drift at task {event.task_index} affects unseen classes")
        if self.test.dim != self.train.dim:
            raise InputShapeError("train and test splits differ in feature dimension")

    @property
    def num_tasks(self) -> int:
        return len(self.tasks)

    @property
    def dim(self) -> int:
        return self.train.dim

    def seen_before(self, task_index: int) -> list[int]:
        return sorted(c for task in self.tasks[:task_index] for c in task.new_classes)

    def events_at(self, task_index: int) -> list[DriftEvent]:
        return [e for e in self.drift_events if e.task_index == task_index]

    def is_drift_task(self, task_index: int) -> bool:
        return bool(self.events_at(task_index))

    def class_version(self, label: int, task_index: int) -> int:
        """Drift version of a class as served at task `task_index`."""
        return sum(
            1 for e in self.drift_events if e.task_index <= task_index and label in e.affected_classes
        )

    def recurring_classes(self, task_index: int) -> list[int]:
        return self.seen_before(task_index) if self.is_drift_task(task_index) else []

    def versioned(self, split: str, label: int, version: int) -> SampleSet:
        """Class `label` of a split after its first `version` drift events."""
        key = (split, label, version)
        if key not in self._memo:
            base = (self.train if split == "train" else self.test).of_class(label)
            applied = 0
            for event, drift_map in zip(self.drift_events, self._maps):
                if applied == version:
                    break
                if label in event.affected_classes:
                    base = drift_map.apply_set(base)
                    applied += 1
            self._memo[key] = base
        return self._memo[key]

    def at_task(self, split: str, labels: list[int], task_index: int) -> SampleSet:
        return SampleSet.concat(
            [self.versioned(split, c, self.class_version(c, task_index)) for c in labels], self.dim
        )

    def probe(self, task_index: int, label: int) -> SampleSet:
        pool = self.versioned("train", label, self.class_version(label, task_index))
        rng = np.random.default_rng([self.seed, task_index, label])
        size = min(self.probe_size, len(pool))
        return pool.subset(np.sort(rng.choice(len(pool), size=size, replace=False)))


def task_view(stream: TaskStream, i: int, strategy_kind: Optional[StrategyKind] = None) -> TaskView:
    """Train/test/recurring data for task T_i.

    Raises:
        InputShapeError: If `i` is outside [0, N).
    """
    if not 0 <= i < stream.num_tasks:
        raise InputShapeError(f"task index {i} outside [0, {stream.num_tasks})")
    task = stream.tasks[i]
    recurring = stream.recurring_classes(i)
    seen_so_far = stream.seen_before(i) + list(task.new_classes)

    if recurring and strategy_kind is not StrategyKind.VANILLA:
        pool = stream.at_task("train", recurring, i)
    else:
        pool = SampleSet.empty(stream.dim)

    return TaskView(
        index=i,
        train=stream.at_task("train", list(task.new_classes), i),
        test=stream.at_task("test", seen_so_far, i),
        task_tests=[stream.at_task("test", list(t.new_classes), i) for t in stream.tasks[: i + 1]],
        recurring_pool=pool,
        probe=SampleSet.concat([stream.probe(i, c) for c in recurring], stream.dim),
        recurring_classes=tuple(recurring),
    )
