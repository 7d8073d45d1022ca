"""Rehearsal training over a drifting task stream (detect -> adapt -> train -> reservoir)."""

import logging
import time
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.models.accuracy import AccuracyMatrix
from src.models.kinds import DetectorMode
from src.models.run_config import DetectorSettings, RunConfig
from src.models.sample import Batch, SampleSet
from src.models.uncertainty import DriftDecision
from src.services.abstract import AdaptationStrategyBase
from src.services.drift import detect_class_drift
from src.services.memory import MemoryBuffer, reservoir_update_set
from src.services.nnet import MlpModel, accuracy, loss_and_grad, sgd_step
from src.services.streams import TaskStream, TaskView, task_view

logger = logging.getLogger("Trainer")

FLOPS_PER_PARAMETER_SAMPLE = 2


class Hyperparameters(BaseModel):
    """Everything a run needs besides the stream, the strategy and the seed."""

    model_config = ConfigDict(frozen=True)

    epochs: int = Field(3, ge=1)
    lr: float = Field(0.05, gt=0)
    batch_size: int = Field(32, ge=1)
    replay_size: int = Field(32, ge=0)
    hidden_dims: list[int] = Field(default_factory=lambda: [256, 256])
    capacity: int = Field(500, gt=0)
    realign_fraction: float = Field(1.0, gt=0, le=1)
    detector: DetectorSettings = Field(default_factory=DetectorSettings)

    @classmethod
    def from_config(cls, config: RunConfig) -> "Hyperparameters":
        return cls(
            epochs=config.training.epochs,
            lr=config.training.lr,
            batch_size=config.training.batch_size,
            replay_size=config.training.replay_size,
            hidden_dims=config.model.hidden_dims,
            capacity=config.memory.capacity,
            realign_fraction=config.memory.realign_fraction,
            detector=config.detector,
        )


class SeedPlan(BaseModel):
    """Sub-seeds expanded from one master seed, one per component."""

    init: int
    data: int
    reservoir: int
    training: int

    @classmethod
    def from_master(cls, seed: int) -> "SeedPlan":
        init, data, reservoir, training = (
            int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(4)
        )
        return cls(init=init, data=data, reservoir=reservoir, training=training)


class CostLedger(BaseModel):
    """Non-decreasing resource counters of one run."""

    adaptation_labels: int = 0
    samples_processed: int = 0
    flops: float = 0.0
    gradient_steps: int = 0
    detection_samples: int = 0


class TrainState:
    """Mutable state threaded through the tasks of one run."""

    def __init__(self, model: MlpModel, buffer: MemoryBuffer, rng: np.random.Generator):
        self.model = model
        self.buffer = buffer
        self.rng = rng
        self.seen_classes: set[int] = set()
        self.ledger = CostLedger()
        self.trained_ids: set[int] = set()

    @classmethod
    def initial(cls, stream: TaskStream, hyper: Hyperparameters, seeds: SeedPlan) -> "TrainState":
        dims = [stream.dim, *hyper.hidden_dims, stream.num_classes]
        return cls(
            model=MlpModel.initialize(dims, seeds.init),
            buffer=MemoryBuffer(hyper.capacity, stream.dim, seed=seeds.reservoir),
            rng=np.random.default_rng(seeds.training),
        )


class TaskResult(BaseModel):
    task_index: int
    decisions: list[DriftDecision]
    drifted_classes: list[int]
    adaptation_labels: int
    samples_processed: int
    mean_loss: Optional[float] = None


class StreamResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    matrix: AccuracyMatrix
    ledger: CostLedger
    events: list[DriftDecision]
    tasks: list[TaskResult]
    wall_time_seconds: float
    state: TrainState = Field(exclude=True)


def rehearsal_batch(
    current_batch: Batch, buffer: MemoryBuffer, replay_size: int, rng: np.random.Generator
) -> Batch:
    """Concatenated current + replay minibatch; the current batch alone when the buffer is empty.

    Sample ids are concatenated too when the current batch carries them.
    """
    if replay_size <= 0 or len(buffer) == 0:
        return current_batch
    replay = buffer.draw(replay_size, rng)
    ids = None if current_batch.ids is None else np.concatenate([current_batch.ids, replay.ids])
    return Batch(
        inputs=np.concatenate([current_batch.inputs, replay.features]),
        labels=np.concatenate([current_batch.labels, replay.labels]),
        ids=ids,
    )


def detect_recurring(state: TrainState, view: TaskView, detector: DetectorSettings) -> list[DriftDecision]:
    """Test-then-train detection for every recurring class, on the pre-training model."""
    decisions = []
    significance = detector.value if detector.mode is DetectorMode.SIGNIFICANCE else 0.05
    threshold = detector.value if detector.mode is DetectorMode.THRESHOLD else None
    for label in view.recurring_classes:
        incoming = view.probe.of_class(label)
        decision = detect_class_drift(
            state.model,
            state.buffer.class_samples(label),
            incoming,
            significance,
            min_samples=detector.min_samples,
            mode=detector.mode,
            threshold=threshold,
            class_id=label,
            task_index=view.index,
        )
        state.ledger.detection_samples += len(incoming)
        logger.info(
            f"Task {view.index} class {label}: D={decision.ks_statistic:.4f} p={decision.p_value:.4g} "
            f"drifted={decision.drifted}{' (under-sampled)' if decision.under_sampled else ''}"
        )
        decisions.append(decision)
    return decisions


def train_epochs(state: TrainState, data: SampleSet, hyper: Hyperparameters) -> Optional[float]:
    """SGD over `data` with rehearsal minibatches; returns the mean step loss."""
    n = len(data)
    if n == 0:
        return None
    parameters = state.model.parameter_count
    losses = []
    for _ in range(hyper.epochs):
        order = state.rng.permutation(n)
        for start in range(0, n, hyper.batch_size):
            current = data.subset(order[start : start + hyper.batch_size]).as_batch()
            combined = rehearsal_batch(current, state.buffer, hyper.replay_size, state.rng)
            loss, grad = loss_and_grad(state.model, combined)
            sgd_step(state.model, grad, hyper.lr)
            losses.append(loss)
            state.trained_ids.update(combined.ids.tolist())
            state.ledger.samples_processed += len(combined)
            state.ledger.flops += FLOPS_PER_PARAMETER_SAMPLE * parameters * len(combined)
            state.ledger.gradient_steps += 1
    return float(np.mean(losses))


def run_task(
    state: TrainState, view: TaskView, strategy: AdaptationStrategyBase, hyper: Hyperparameters
) -> TaskResult:
    """Processes one task: detect, adapt, train, reservoir update, extend Y_past."""
    labels_before = state.ledger.adaptation_labels
    samples_before = state.ledger.samples_processed

    decisions = detect_recurring(state, view, hyper.detector)
    extras = []
    drifted = [d.class_id for d in decisions if d.drifted]
    for label in drifted:
        extras.append(strategy.adapt(state, label, view.recurring_pool.of_class(label)))

    training_data = SampleSet.concat([view.train, *extras], view.train.dim)
    mean_loss = train_epochs(state, training_data, hyper)
    reservoir_update_set(state.buffer, training_data)
    state.seen_classes.update(int(c) for c in np.unique(view.train.labels))

    result = TaskResult(
        task_index=view.index,
        decisions=decisions,
        drifted_classes=drifted,
        adaptation_labels=state.ledger.adaptation_labels - labels_before,
        samples_processed=state.ledger.samples_processed - samples_before,
        mean_loss=mean_loss,
    )
    logger.info(
        f"Task {view.index} [{strategy.name}]: {len(training_data)} training samples, "
        f"loss={mean_loss if mean_loss is None else round(mean_loss, 4)}, drifted={drifted}"
    )
    return result


def evaluate(state: TrainState, view: TaskView) -> list[float]:
    """Accuracy on each task's test split as served at this task."""
    return [accuracy(state.model, split) for split in view.task_tests]


def audit_disjoint(state: TrainState, view: TaskView) -> bool:
    """True when no evaluation sample id was ever used in a gradient step."""
    return state.trained_ids.isdisjoint(view.test.ids.tolist())


def run_stream(
    stream: TaskStream, strategy: AdaptationStrategyBase, hyper: Hyperparameters, seed: int
) -> StreamResult:
    """Runs every task and fills row i of the accuracy matrix after task i."""
    started = time.perf_counter()
    state = TrainState.initial(stream, hyper, SeedPlan.from_master(seed))
    matrix = AccuracyMatrix(stream.num_tasks)
    events: list[DriftDecision] = []
    results: list[TaskResult] = []
    for i in range(stream.num_tasks):
        view = task_view(stream, i, strategy.kind)
        result = run_task(state, view, strategy, hyper)
        results.append(result)
        events.extend(result.decisions)
        for j, value in enumerate(evaluate(state, view)):
            matrix.set(i, j, value)
        logger.info(f"After task {i}: " + " ".join(f"{v:.3f}" for v in matrix.row(i)))
    return StreamResult(
        matrix=matrix,
        ledger=state.ledger,
        events=events,
        tasks=results,
        wall_time_seconds=time.perf_counter() - started,
        state=state,
    )
