import numpy as np
import pytest

from src.models.kinds import StrategyKind
from src.models.sample import Batch, SampleSet
from src.services.memory import MemoryBuffer, reservoir_update_set
from src.services.metrics import faa
from src.services.nnet import MlpModel, accuracy, loss_and_grad
from src.services.strategies import build_strategy
from src.services.streams import TaskStream, make_synthetic_stream, task_view
from src.services.trainer import (
    Hyperparameters,
    SeedPlan,
    TrainState,
    audit_disjoint,
    rehearsal_batch,
    run_stream,
    run_task,
)


@pytest.fixture
def hyper(small_config) -> Hyperparameters:
    return Hyperparameters.from_config(small_config)


@pytest.fixture
def stream(stream_settings) -> TaskStream:
    return make_synthetic_stream(stream_settings, seed=0, probe_size=30)


def filled_buffer(count: int, dim: int = 4) -> MemoryBuffer:
    rng = np.random.default_rng(0)
    buffer = MemoryBuffer(count, dim=dim, seed=0)
    reservoir_update_set(buffer, SampleSet.build(rng.normal(size=(count, dim)), rng.integers(0, 3, size=count)))
    return buffer


def current_batch(n: int = 8, dim: int = 4) -> Batch:
    rng = np.random.default_rng(1)
    return Batch(inputs=rng.normal(size=(n, dim)), labels=rng.integers(0, 3, size=n))


def test_empty_buffer_gives_current_batch():
    batch = current_batch()
    combined = rehearsal_batch(batch, MemoryBuffer(10, dim=4), 32, np.random.default_rng(0))
    assert combined is batch


def test_zero_replay_size_gives_current_batch():
    batch = current_batch()
    assert rehearsal_batch(batch, filled_buffer(50), 0, np.random.default_rng(0)) is batch


def test_full_buffer_adds_replay_size_samples():
    batch = current_batch()
    combined = rehearsal_batch(batch, filled_buffer(500), 32, np.random.default_rng(0))
    assert len(combined.labels) == 8 + 32
    assert np.array_equal(combined.inputs[:8], batch.inputs)


def test_replayed_rows_carry_their_sample_ids():
    buffer = filled_buffer(100)
    batch = SampleSet.build(np.zeros((8, 4)), np.zeros(8, dtype=int), ids=np.arange(8) + 1000).as_batch()
    combined = rehearsal_batch(batch, buffer, 16, np.random.default_rng(0))
    assert np.array_equal(combined.ids[:8], batch.ids)
    assert set(combined.ids[8:].tolist()) <= set(buffer.residents().ids.tolist())
    assert len(set(combined.ids[8:].tolist())) == 16


def test_combined_gradient_is_size_weighted_mean():
    model = MlpModel.initialize([4, 6, 3], seed=2)
    batch = current_batch()
    combined = rehearsal_batch(batch, filled_buffer(100), 24, np.random.default_rng(3))
    replay = Batch(inputs=combined.inputs[8:], labels=combined.labels[8:])
    _, g_all = loss_and_grad(model, combined)
    _, g_current = loss_and_grad(model, batch)
    _, g_replay = loss_and_grad(model, replay)
    assert np.allclose(g_all, (8 * g_current + 24 * g_replay) / 32, atol=1e-12, rtol=0)


def test_seed_plan_is_deterministic_and_distinct():
    plan = SeedPlan.from_master(7)
    assert plan == SeedPlan.from_master(7)
    assert len({plan.init, plan.data, plan.reservoir, plan.training}) == 4


@pytest.mark.parametrize("kind", list(StrategyKind))
def test_non_drift_tasks_charge_no_labels(stream, hyper, kind):
    result = run_stream(stream, build_strategy(kind), hyper, seed=0)
    for task in result.tasks:
        if task.task_index != 3:
            assert task.adaptation_labels == 0
            assert task.decisions == []


def test_drift_task_checks_every_seen_class(stream, hyper):
    result = run_stream(stream, build_strategy("amr"), hyper, seed=0)
    assert [d.class_id for d in result.tasks[3].decisions] == [0, 1, 2, 3, 4, 5]
    assert result.ledger.detection_samples == 6 * 30


def test_amr_labels_never_exceed_capacity(stream, hyper):
    result = run_stream(stream, build_strategy("amr"), hyper, seed=0)
    assert result.ledger.adaptation_labels <= hyper.capacity
    result.state.buffer.check_coherence()
    for label in result.tasks[3].drifted_classes:
        assert np.all(result.state.buffer.class_samples(label).versions == 1)


def test_full_relearning_charges_the_whole_pool(stream, hyper):
    result = run_stream(stream, build_strategy("fr"), hyper, seed=0)
    drifted = result.tasks[3].drifted_classes
    pool = task_view(stream, 3, StrategyKind.FULL_RELEARNING).recurring_pool
    assert result.tasks[3].adaptation_labels == sum(len(pool.of_class(c)) for c in drifted)


def test_vanilla_never_charges_labels(stream, hyper):
    result = run_stream(stream, build_strategy("vanilla"), hyper, seed=0)
    assert result.ledger.adaptation_labels == 0


def test_single_task_stream_faa_is_task_accuracy(stream, hyper):
    one = TaskStream(
        tasks=stream.tasks[:1],
        train=stream.train.of_classes([0, 1]),
        test=stream.test.of_classes([0, 1]),
        drift_events=[],
        num_classes=stream.num_classes,
    )
    result = run_stream(one, build_strategy("amr"), hyper, seed=0)
    assert faa(result.matrix) == result.matrix.get(0, 0)
    assert result.matrix.get(0, 0) == accuracy(result.state.model, one.test)


def test_strategies_agree_without_drift(stream_settings, hyper):
    calm = make_synthetic_stream(stream_settings.model_copy(update={"drift_tasks": []}), seed=0, probe_size=30)
    matrices = [run_stream(calm, build_strategy(kind), hyper, seed=0).matrix for kind in StrategyKind]
    assert matrices[0] == matrices[1] == matrices[2]


def test_same_seed_reproduces_the_matrix(stream, hyper):
    a = run_stream(stream, build_strategy("amr"), hyper, seed=4)
    b = run_stream(stream, build_strategy("amr"), hyper, seed=4)
    assert a.matrix == b.matrix
    assert a.ledger == b.ledger


def test_evaluation_samples_are_never_trained_on(stream, hyper):
    result = run_stream(stream, build_strategy("fr"), hyper, seed=0)
    assert audit_disjoint(result.state, task_view(stream, stream.num_tasks - 1))


def test_ledger_counts_flops_per_processed_sample(stream, hyper):
    result = run_stream(stream, build_strategy("vanilla"), hyper, seed=0)
    parameters = result.state.model.parameter_count
    assert result.ledger.flops == 2 * parameters * result.ledger.samples_processed
    assert result.ledger.gradient_steps > 0


def test_first_task_trains_without_replay(stream, hyper):
    state = TrainState.initial(stream, hyper, SeedPlan.from_master(0))
    result = run_task(state, task_view(stream, 0), build_strategy("amr"), hyper)
    assert result.samples_processed == 160 * hyper.epochs
    assert state.seen_classes == {0, 1}
    assert len(state.buffer) == hyper.capacity
