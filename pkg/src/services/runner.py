"""Seeded experiment execution, run artifacts, sweeps and comparison tables."""

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from src.models import Failure, Result, Success
from src.models.accuracy import AccuracyMatrix
from src.models.errors import ArtifactIOError, FrameworkError, IncompatibleRunsError
from src.models.kinds import StrategyKind
from src.models.run_config import RunConfig
from src.responses import (
    ClassAlignment,
    ComparisonRow,
    DiagnosticsReport,
    ExperimentSummary,
    NormalizedCosts,
    RunSummary,
)
from src.services import metrics
from src.services.config import config as ambient
from src.services.memory import write_snapshot
from src.services.run_config import config_hash, run_id, stream_key
from src.services.strategies import build_strategy
from src.services.streams import build_stream, task_view
from src.services.trainer import Hyperparameters, SeedPlan, StreamResult, TrainState, run_stream, run_task

logger = logging.getLogger("Runner")

MATRIX_FILE = "accuracy_matrix.csv"
SUMMARY_FILE = "summary.json"
EVENTS_FILE = "events.jsonl"
SNAPSHOT_FILE = "buffer_snapshot.jsonl"
COMPARISON_FILE = "comparison.csv"
DIAGNOSE_TRIALS = 20_000

Summaries = Sequence[Union[RunSummary, ExperimentSummary]]


def execute(config: RunConfig) -> tuple[RunSummary, StreamResult]:
    """Runs one config in memory; nothing is written to disk."""
    seeds = SeedPlan.from_master(config.run.seed)
    stream = build_stream(config.stream, seeds.data, config.detector.probe_size)
    strategy = build_strategy(config.training.strategy, config.memory.realign_fraction)
    logger.info(f"Running {strategy.name} on {config.stream.dataset.value} with seed {config.run.seed}")
    result = run_stream(stream, strategy, Hyperparameters.from_config(config), config.run.seed)
    return summarize(config, result), result


def summarize(config: RunConfig, result: StreamResult) -> RunSummary:
    matrix = result.matrix
    summary = RunSummary(
        run_id=run_id(config),
        strategy=config.training.strategy,
        seed=config.run.seed,
        config_hash=config_hash(config),
        stream_key=stream_key(config),
        faa=metrics.faa(matrix),
        forgetting=metrics.forgetting(matrix),
        forgetting_per_task=metrics.forgetting_per_task(matrix),
        backward_transfer=metrics.backward_transfer(matrix),
        accuracy_curve=metrics.average_accuracy_curve(matrix),
        accuracy_matrix=matrix.to_rows(),
        detections=result.events,
        adaptation_labels=result.ledger.adaptation_labels,
        samples_processed=result.ledger.samples_processed,
        gradient_steps=result.ledger.gradient_steps,
        detection_samples=result.ledger.detection_samples,
        flops=result.ledger.flops,
        wall_time_seconds=result.wall_time_seconds,
    )
    if summary.strategy is StrategyKind.FULL_RELEARNING:
        summary = normalize_to(summary, summary)
    return summary


def _ratio(value: float, baseline: float) -> Optional[float]:
    return value / baseline if baseline else None


def normalize_to(summary: RunSummary, baseline: RunSummary) -> RunSummary:
    """Attaches costs relative to `baseline` (an FR run on the same stream)."""
    if summary.stream_key != baseline.stream_key:
        raise IncompatibleRunsError(f"{summary.run_id} and {baseline.run_id} ran on different streams")
    normalized = NormalizedCosts(
        baseline_run_id=baseline.run_id,
        adaptation_labels=_ratio(summary.adaptation_labels, baseline.adaptation_labels),
        flops=_ratio(summary.flops, baseline.flops),
        wall_time=_ratio(summary.wall_time_seconds, baseline.wall_time_seconds),
    )
    return summary.model_copy(update={"normalized": normalized})


def write_matrix_csv(matrix: AccuracyMatrix, path: Path) -> None:
    """N x N CSV with header task_0..task_{N-1}; cells above the diagonal stay empty."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"task_{j}" for j in range(matrix.num_tasks)])
        for row in matrix.to_rows():
            writer.writerow([repr(v) for v in row] + [""] * (matrix.num_tasks - len(row)))


def read_matrix_csv(path: Path) -> AccuracyMatrix:
    try:
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise ArtifactIOError(str(path), f"cannot read accuracy matrix: {e}") from e
    return AccuracyMatrix.from_rows([[float(cell) for cell in row if cell] for row in rows[1:]])


def write_events(result: StreamResult, path: Path) -> None:
    with open(path, "w") as f:
        for task in result.tasks:
            for decision in task.decisions:
                f.write(json.dumps({"event": "drift_check", **decision.model_dump(mode="json")}) + "\n")
            record = task.model_dump(mode="json", exclude={"decisions"})
            f.write(json.dumps({"event": "task_end", **record}) + "\n")


def write_artifacts(config: RunConfig, summary: RunSummary, result: StreamResult, run_dir: Path) -> None:
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
        write_matrix_csv(result.matrix, run_dir / MATRIX_FILE)
        write_events(result, run_dir / EVENTS_FILE)
        (run_dir / SUMMARY_FILE).write_text(summary.model_dump_json(indent=2))
    except OSError as e:
        raise ArtifactIOError(str(run_dir), f"cannot write run artifacts: {e}") from e
    if config.memory.snapshot:
        write_snapshot(result.state.buffer, run_dir / SNAPSHOT_FILE)
    logger.info(f"Artifacts written to {run_dir}")


def resolve_output_root(config: RunConfig, output_root: Optional[str] = None) -> Path:
    return Path(output_root or config.run.output_dir or ambient.output_root())


def run_single(config: RunConfig, output_root: Optional[str] = None) -> RunSummary:
    """Executes one seeded run and writes its directory under the output root."""
    summary, result = execute(config)
    run_dir = resolve_output_root(config, output_root) / summary.run_id
    summary = summary.model_copy(update={"output_dir": str(run_dir)})
    write_artifacts(config, summary, result, run_dir)
    logger.info(f"{summary.run_id}: FAA={summary.faa:.4f} F={summary.forgetting:.4f}")
    return summary


def aggregate(runs: list[RunSummary]) -> ExperimentSummary:
    first = runs[0]
    faas = np.array([r.faa for r in runs])
    forgettings = np.array([r.forgetting for r in runs])
    return ExperimentSummary(
        strategy=first.strategy,
        config_hash=first.config_hash,
        stream_key=first.stream_key,
        seeds=[r.seed for r in runs],
        runs=runs,
        faa_mean=float(faas.mean()),
        faa_std=float(faas.std()),
        forgetting_mean=float(forgettings.mean()),
        forgetting_std=float(forgettings.std()),
        adaptation_labels_mean=float(np.mean([r.adaptation_labels for r in runs])),
        flops_mean=float(np.mean([r.flops for r in runs])),
        wall_time_mean=float(np.mean([r.wall_time_seconds for r in runs])),
    )


def _run_worker(config: RunConfig, output_root: Optional[str]) -> Union[RunSummary, tuple[int, str]]:
    # Errors cross the process boundary as (category, message)
    try:
        return run_single(config, output_root)
    except FrameworkError as e:
        return e.category, e.message


def _as_error(category: int, message: str) -> FrameworkError:
    error = FrameworkError(message)
    error.category = category
    return error


def _run_all(configs: list[RunConfig], output_root: Optional[str], workers: int) -> list[RunSummary]:
    if workers <= 1 or len(configs) == 1:
        return [run_single(c, output_root) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(_run_worker, configs, [output_root] * len(configs)))
    summaries = []
    for outcome in outcomes:
        if isinstance(outcome, tuple):
            raise _as_error(*outcome)
        summaries.append(outcome)
    return summaries


def run_experiment(
    config: RunConfig, seeds: Optional[Sequence[int]] = None, output_root: Optional[str] = None
) -> Result[ExperimentSummary, FrameworkError]:
    """Runs `config` once per seed (default: the config's own seed)."""
    seeds = list(seeds) if seeds else [config.run.seed]
    try:
        runs = [run_single(config.with_seed(seed), output_root) for seed in seeds]
    except FrameworkError as e:
        logger.error(f"Run failed: {e.message}")
        return Failure(e)
    experiment = aggregate(runs)
    logger.info(
        f"{experiment.strategy.value} over {len(seeds)} seed(s): "
        f"FAA={experiment.faa_mean:.4f}±{experiment.faa_std:.4f} "
        f"F={experiment.forgetting_mean:.4f}±{experiment.forgetting_std:.4f}"
    )
    return Success(experiment)


def sweep(
    config: RunConfig,
    seeds: Sequence[int],
    strategies: Sequence[StrategyKind],
    workers: Optional[int] = None,
    output_root: Optional[str] = None,
) -> Result[list[ExperimentSummary], FrameworkError]:
    """Every (strategy, seed) pair of one stream; non-FR runs get costs relative to the same-seed FR run."""
    workers = workers if workers is not None else int(ambient.section_value("runs", "workers"))
    configs = [config.with_strategy(s).with_seed(seed) for s in strategies for seed in seeds]
    try:
        runs = _run_all(configs, output_root, workers)
    except FrameworkError as e:
        logger.error(f"Sweep failed: {e.message}")
        return Failure(e)

    baselines = {r.seed: r for r in runs if r.strategy is StrategyKind.FULL_RELEARNING}
    runs = [normalize_to(r, baselines[r.seed]) if r.seed in baselines else r for r in runs]
    experiments = [
        aggregate([r for r in runs if r.strategy is strategy]) for strategy in dict.fromkeys(strategies)
    ]
    return Success(experiments)


def _comparison_row(summary: Union[RunSummary, ExperimentSummary]) -> ComparisonRow:
    runs = summary.runs if isinstance(summary, ExperimentSummary) else [summary]
    return ComparisonRow(
        strategy=summary.strategy,
        runs=len(runs),
        faa=float(np.mean([r.faa for r in runs])),
        forgetting=float(np.mean([r.forgetting for r in runs])),
        adaptation_labels=float(np.mean([r.adaptation_labels for r in runs])),
        flops=float(np.mean([r.flops for r in runs])),
        wall_time_seconds=float(np.mean([r.wall_time_seconds for r in runs])),
    )


def comparison_rows(summaries: Summaries) -> list[ComparisonRow]:
    """Per-strategy rows normalized to the FR row.

    Raises:
        IncompatibleRunsError: With fewer than two summaries or summaries
            produced on different streams.
    """
    if len(summaries) < 2:
        raise IncompatibleRunsError(f"a comparison needs at least two summaries, got {len(summaries)}")
    keys = {s.stream_key for s in summaries}
    if len(keys) > 1:
        raise IncompatibleRunsError(f"summaries come from {len(keys)} different stream configs")

    grouped: dict[StrategyKind, list[RunSummary]] = {}
    for summary in summaries:
        runs = summary.runs if isinstance(summary, ExperimentSummary) else [summary]
        grouped.setdefault(summary.strategy, []).extend(runs)
    rows = [_comparison_row(aggregate(runs)) for runs in grouped.values()]

    baseline = next((r for r in rows if r.strategy is StrategyKind.FULL_RELEARNING), None)
    if baseline is None:
        logger.warning("No full_relearning row; normalized columns left empty")
        return rows
    return [
        row.model_copy(
            update={
                "faa_norm": _ratio(row.faa, baseline.faa),
                "forgetting_norm": _ratio(row.forgetting, baseline.forgetting),
                "labels_norm": _ratio(row.adaptation_labels, baseline.adaptation_labels),
                "flops_norm": _ratio(row.flops, baseline.flops),
                "time_norm": _ratio(row.wall_time_seconds, baseline.wall_time_seconds),
            }
        )
        for row in rows
    ]


def emit_comparison(summaries: Summaries, path: "str | Path") -> list[ComparisonRow]:
    """Writes comparison.csv; empty cells stand for undefined ratios."""
    rows = comparison_rows(summaries)
    path = Path(path)
    fields = list(ComparisonRow.model_fields)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(fields)
            for row in rows:
                values = row.model_dump(mode="json")
                writer.writerow(["" if values[k] is None else values[k] for k in fields])
    except OSError as e:
        raise ArtifactIOError(str(path), f"cannot write comparison table: {e}") from e
    logger.info(f"Comparison of {len(rows)} strategies written to {path}")
    return rows


def diagnose(config: RunConfig, trials: int = DIAGNOSE_TRIALS) -> Result[DiagnosticsReport, FrameworkError]:
    """Gradient alignment at the first drift event plus reservoir replacement tables.

    The model is trained with plain rehearsal up to the drift task, then the
    mean gradients of each affected class before and after the drift are
    compared across the alpha grid. Two disjoint halves of the pre-drift data
    give the no-drift control.
    """
    try:
        seeds = SeedPlan.from_master(config.run.seed)
        stream = build_stream(config.stream, seeds.data, config.detector.probe_size)
        report = DiagnosticsReport()
        events = sorted(stream.drift_events, key=lambda e: e.task_index)
        if events:
            first = events[0]
            hyper = Hyperparameters.from_config(config)
            strategy = build_strategy(StrategyKind.VANILLA)
            state = TrainState.initial(stream, hyper, seeds)
            for i in range(first.task_index):
                run_task(state, task_view(stream, i, StrategyKind.VANILLA), strategy, hyper)
            alignment = []
            for label in first.affected_classes:
                new_version = stream.class_version(label, first.task_index)
                old = stream.versioned("train", label, new_version - 1)
                new = stream.versioned("train", label, new_version)
                alignment.append(
                    ClassAlignment(
                        class_id=label,
                        old_version=new_version - 1,
                        new_version=new_version,
                        series=metrics.measure_drift_interference(state.model, old, new),
                    )
                )
            control_label = stream.seen_before(first.task_index)[0]
            control_version = stream.class_version(control_label, first.task_index - 1)
            control_pool = stream.versioned("train", control_label, control_version)
            rows = np.arange(len(control_pool))
            report = DiagnosticsReport(
                drift_task=first.task_index,
                alignment=alignment,
                control=metrics.measure_drift_interference(
                    state.model, control_pool.subset(rows[0::2]), control_pool.subset(rows[1::2])
                ),
            )
            num_classes = len(stream.seen_before(first.task_index))
        else:
            num_classes = stream.num_classes
        per_class = len(stream.train.of_class(stream.tasks[0].new_classes[0]))
        report = report.model_copy(
            update={
                "replacement": [
                    metrics.replacement_suite(config.memory.capacity, num_classes, n_c, trials, seed=seeds.reservoir)
                    for n_c in sorted({10, 50, 100, per_class})
                ]
            }
        )
    except FrameworkError as e:
        logger.error(f"Diagnose failed: {e.message}")
        return Failure(e)
    return Success(report)
