"""Continual-learning metrics and gradient-alignment / replacement diagnostics."""

from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.models.accuracy import AccuracyMatrix
from src.models.errors import DegenerateGradientError, IncompleteRunError, InputShapeError, UndefinedMetricError
from src.models.sample import SampleSet
from src.services import memory
from src.services.nnet import FlatGradient, MlpModel, gradient_of_dataset

ALPHA_GRID = tuple(round(0.1 * k, 1) for k in range(11))
NORM_EPSILON = 1e-300


def faa(matrix: AccuracyMatrix) -> float:
    """Final average accuracy: mean of the last row."""
    last = matrix.num_tasks - 1
    if not matrix.is_row_complete(last):
        raise IncompleteRunError("final row of the accuracy matrix is incomplete")
    return float(np.mean(matrix.row(last)))


def forgetting_per_task(matrix: AccuracyMatrix) -> list[float]:
    """F_j = max_{j <= k <= N} A[k][j] - A[N][j] for j < N."""
    n = matrix.num_tasks
    if n < 2:
        raise UndefinedMetricError("forgetting needs at least two tasks")
    for i in range(n):
        if not matrix.is_row_complete(i):
            raise IncompleteRunError(f"row {i} of the accuracy matrix is incomplete")
    final = n - 1
    return [
        max(matrix.get(k, j) for k in range(j, n)) - matrix.get(final, j)
        for j in range(final)
    ]


def forgetting(matrix: AccuracyMatrix) -> float:
    return float(np.mean(forgetting_per_task(matrix)))


def backward_transfer(matrix: AccuracyMatrix) -> float:
    """Mean of A[N][j] - A[j][j] over j < N."""
    n = matrix.num_tasks
    if n < 2:
        raise UndefinedMetricError("backward transfer needs at least two tasks")
    return float(np.mean([matrix.get(n - 1, j) - matrix.get(j, j) for j in range(n - 1)]))


def average_accuracy_curve(matrix: AccuracyMatrix) -> list[float]:
    return [float(np.mean(matrix.row(i))) for i in range(matrix.num_tasks) if matrix.is_row_complete(i)]


def _check_pair(g1: np.ndarray, g2: np.ndarray) -> None:
    if g1.shape != g2.shape:
        raise InputShapeError(f"gradient shapes differ: {g1.shape} vs {g2.shape}")


def cosine_similarity(g1: FlatGradient, g2: FlatGradient) -> float:
    _check_pair(g1, g2)
    n1, n2 = np.linalg.norm(g1), np.linalg.norm(g2)
    if n1 <= NORM_EPSILON or n2 <= NORM_EPSILON:
        raise DegenerateGradientError("cosine similarity of a zero gradient is undefined")
    return float(np.clip(np.dot(g1, g2) / (n1 * n2), -1.0, 1.0))


def effective_gradient(g_old: FlatGradient, g_new: FlatGradient, alpha: float) -> FlatGradient:
    """G_eff = (1 + alpha) * G_new + (1 - alpha) * G_old."""
    _check_pair(g_old, g_new)
    if not 0.0 <= alpha <= 1.0:
        raise InputShapeError(f"alpha must be in [0, 1], got {alpha}")
    return (1.0 + alpha) * g_new + (1.0 - alpha) * g_old


def eta_align(g_old: FlatGradient, g_new: FlatGradient, alpha: float) -> float:
    """Cosine between the effective gradient and G_new.

    Raises:
        DegenerateGradientError: If G_new or G_eff is the zero vector.
    """
    return cosine_similarity(effective_gradient(g_old, g_new, alpha), g_new)


class GradientDiag(BaseModel):
    """Alignment diagnostics of one alpha point.

    `eta_align` is None and `degenerate` True when a norm vanishes.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    g_old: np.ndarray = Field(exclude=True)
    g_new: np.ndarray = Field(exclude=True)
    g_effective: np.ndarray = Field(exclude=True)
    alpha: float = Field(..., ge=0, le=1)
    cosine_sim: Optional[float] = None
    eta_align: Optional[float] = None
    degenerate: bool = False
    norm_old: float
    norm_new: float


def alignment_sweep(
    g_old: FlatGradient, g_new: FlatGradient, alphas: Sequence[float] = ALPHA_GRID
) -> list[GradientDiag]:
    try:
        similarity: Optional[float] = cosine_similarity(g_old, g_new)
    except DegenerateGradientError:
        similarity = None
    series = []
    for alpha in alphas:
        g_eff = effective_gradient(g_old, g_new, alpha)
        try:
            eta: Optional[float] = eta_align(g_old, g_new, alpha)
        except DegenerateGradientError:
            eta = None
        series.append(
            GradientDiag(
                g_old=g_old, g_new=g_new, g_effective=g_eff, alpha=alpha,
                cosine_sim=similarity, eta_align=eta, degenerate=eta is None,
                norm_old=float(np.linalg.norm(g_old)), norm_new=float(np.linalg.norm(g_new)),
            )
        )
    return series


def measure_drift_interference(
    model: MlpModel, old_pool: SampleSet, new_pool: SampleSet, alphas: Sequence[float] = ALPHA_GRID
) -> list[GradientDiag]:
    """G_old / G_new as dataset-mean gradients, then the alpha sweep of eta_align."""
    return alignment_sweep(gradient_of_dataset(model, old_pool), gradient_of_dataset(model, new_pool), alphas)


def is_non_decreasing(values: Sequence[float], tolerance: float = 1e-12) -> bool:
    return all(b >= a - tolerance for a, b in zip(values, values[1:]))


class ReplacementReport(BaseModel):
    """Closed-form vs simulated reservoir replacement of one class."""

    capacity: int
    num_classes: int
    n_c: int
    trials: int
    class_slots: int
    p_replaced: float
    expected_replaced: float
    p_replace_all: float
    mc_expected_replaced: float
    mc_slot_frequency: float
    mc_replace_all: float


def replacement_suite(
    capacity: int, num_classes: int, n_c: int, trials: int, seed: int = 0
) -> ReplacementReport:
    mc_mean, mc_freq, mc_all = memory.simulate_slot_replacement(capacity, num_classes, n_c, trials, seed)
    return ReplacementReport(
        capacity=capacity,
        num_classes=num_classes,
        n_c=n_c,
        trials=trials,
        class_slots=memory.class_share(capacity, num_classes),
        p_replaced=memory.replacement_probability(capacity, n_c),
        expected_replaced=memory.expected_replaced(capacity, num_classes, n_c),
        p_replace_all=memory.replace_all_probability(capacity, num_classes, n_c),
        mc_expected_replaced=mc_mean,
        mc_slot_frequency=mc_freq,
        mc_replace_all=mc_all,
    )
