"""Uncertainty-based per-class drift detection with a two-sample KS test."""

import logging
import math
from typing import Iterable, Optional, Union

import numpy as np

from src.models.errors import InsufficientDataError
from src.models.kinds import DetectorMode, UncertaintySource
from src.models.sample import SampleSet
from src.models.uncertainty import DriftDecision, UncertaintySet
from src.services.nnet import MlpModel, forward, log_softmax

logger = logging.getLogger("Drift")

SERIES_TOLERANCE = 1e-12
MAX_SERIES_TERMS = 1000
DEFAULT_MIN_SAMPLES = 30

Values = Union[UncertaintySet, Iterable[float], np.ndarray]


def predictive_entropies(logits: np.ndarray) -> np.ndarray:
    """Row-wise H(softmax(z)) in nats, clipped to [0, ln K]."""
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    log_p = log_softmax(logits)
    entropy = -(np.exp(log_p) * log_p).sum(axis=1)
    return np.clip(entropy, 0.0, math.log(logits.shape[1]))


def predictive_entropy(logits_row: np.ndarray, num_classes: Optional[int] = None) -> float:
    """Predictive entropy of one logits row; max-shifted so saturated rows stay finite."""
    row = np.asarray(logits_row, dtype=np.float64).reshape(1, -1)
    if num_classes is not None and row.shape[1] != num_classes:
        raise ValueError(f"logits row has {row.shape[1]} entries, expected {num_classes}")
    return float(predictive_entropies(row)[0])


def uncertainty_set(model: MlpModel, samples: SampleSet, source: UncertaintySource) -> UncertaintySet:
    if len(samples) == 0:
        return UncertaintySet(values=[], source=source)
    return UncertaintySet(values=predictive_entropies(forward(model, samples.features)).tolist(), source=source)


def _values(sample: Values) -> np.ndarray:
    if isinstance(sample, UncertaintySet):
        return np.asarray(sample.values, dtype=np.float64)
    return np.asarray(list(sample) if not isinstance(sample, np.ndarray) else sample, dtype=np.float64)


def ks_statistic(ref: Values, test: Values) -> float:
    """Two-sample KS statistic sup_u |F_ref(u) - F_test(u)|.

    Right-continuous ECDFs are evaluated at every pooled sample point via
    binary search over the sorted samples.

    Raises:
        InsufficientDataError: If either sample is empty.
    """
    a = np.sort(_values(ref))
    b = np.sort(_values(test))
    if a.size == 0 or b.size == 0:
        raise InsufficientDataError(f"KS needs two non-empty samples, got sizes {a.size} and {b.size}")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def kolmogorov_survival(lam: float) -> float:
    """Q(lambda) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2), clipped to [0, 1]."""
    if lam <= 0:
        return 1.0
    total = 0.0
    sign = 1.0
    for k in range(1, MAX_SERIES_TERMS + 1):
        term = math.exp(-2.0 * k * k * lam * lam)
        total += sign * term
        if term < SERIES_TOLERANCE:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_p_value(d: float, n_ref: int, n_test: int) -> float:
    """Asymptotic two-sample p-value with the small-sample lambda correction."""
    if d <= 0:
        return 1.0
    n_e = n_ref * n_test / (n_ref + n_test)
    root = math.sqrt(n_e)
    return kolmogorov_survival((root + 0.12 + 0.11 / root) * d)


def detect_class_drift(
    model: MlpModel,
    reference: SampleSet,
    incoming: SampleSet,
    significance: float = 0.05,
    *,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    mode: DetectorMode = DetectorMode.SIGNIFICANCE,
    threshold: Optional[float] = None,
    class_id: Optional[int] = None,
    task_index: Optional[int] = None,
) -> DriftDecision:
    """Compares buffer vs incoming entropy distributions of one class.

    Both sides go through the same model snapshot. Fewer than `min_samples`
    on either side yields a no-drift decision flagged as under-sampled.
    """
    label = class_id if class_id is not None else int(reference.labels[0]) if len(reference) else -1
    n_ref, n_test = len(reference), len(incoming)
    if n_ref < min_samples or n_test < min_samples:
        logger.debug(f"Class {label}: under-sampled (n_ref={n_ref}, n_test={n_test}), reporting no drift")
        return DriftDecision(
            class_id=label, ks_statistic=0.0, p_value=1.0, drifted=False,
            n_ref=n_ref, n_test=n_test, under_sampled=True, task_index=task_index,
        )
    u_ref = uncertainty_set(model, reference, UncertaintySource.REFERENCE)
    u_test = uncertainty_set(model, incoming, UncertaintySource.TEST)
    d = ks_statistic(u_ref, u_test)
    p = ks_p_value(d, n_ref, n_test)
    if mode is DetectorMode.THRESHOLD:
        drifted = d > (threshold if threshold is not None else significance)
    else:
        drifted = p < significance
    return DriftDecision(
        class_id=label, ks_statistic=d, p_value=p, drifted=drifted,
        n_ref=n_ref, n_test=n_test, task_index=task_index,
    )
