"""Oracle self-checks run by the `verify` verb.

Each check compares a fast implementation against a slow or closed-form
reference and reports pass/fail with a short detail line.
"""

import logging
import time
from typing import Callable

import numpy as np
from scipy import stats

from src.models.sample import Batch
from src.responses import CheckResult, VerificationReport
from src.services import memory, metrics
from src.services.drift import ks_statistic
from src.services.nnet import MlpModel, loss_and_grad

logger = logging.getLogger("Verify")

KS_TOLERANCE = 1e-12
GRADIENT_RTOL = 1e-4
FD_EPSILON = 1e-6
ETA_AT_ONE_TOLERANCE = 1e-9
CHI_SQUARE_MIN_P = 0.001
REPLACEMENT_RTOL = 0.10
# Family-wise false alarm rate of the per-item residency band
RESIDENCY_FAMILY_ALPHA = 0.001


def brute_force_ks(a: np.ndarray, b: np.ndarray) -> float:
    """O(n*m) reference: ECDF gap at every pooled point by direct counting."""
    best = 0.0
    for u in np.concatenate([a, b]):
        gap = abs(np.count_nonzero(a <= u) / a.size - np.count_nonzero(b <= u) / b.size)
        best = max(best, gap)
    return best


def check_ks(rng: np.random.Generator, pairs: int) -> tuple[bool, str]:
    worst = 0.0
    scipy_worst = 0.0
    for _ in range(pairs):
        n, m = rng.integers(5, 201, size=2)
        a = rng.normal(0.0, 1.0, n)
        # Shifted, scaled and occasionally tied samples
        b = np.round(rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2.0), m), int(rng.integers(1, 4)))
        fast = ks_statistic(a, b)
        worst = max(worst, abs(fast - brute_force_ks(a, b)))
        scipy_worst = max(scipy_worst, abs(fast - stats.ks_2samp(a, b).statistic))
    passed = worst <= KS_TOLERANCE and scipy_worst <= KS_TOLERANCE
    return passed, f"{pairs} pairs, max |D - brute| = {worst:.2e}, max |D - scipy| = {scipy_worst:.2e}"


def numeric_gradient(model: MlpModel, batch: Batch, eps: float = FD_EPSILON) -> np.ndarray:
    """Central finite differences of the mean loss over every parameter."""
    theta = model.flat_parameters()
    probe = model.copy()
    grad = np.empty_like(theta)
    for k in range(theta.size):
        shifted = theta.copy()
        shifted[k] += eps
        probe.set_flat_parameters(shifted)
        up, _ = loss_and_grad(probe, batch)
        shifted[k] -= 2 * eps
        probe.set_flat_parameters(shifted)
        down, _ = loss_and_grad(probe, batch)
        grad[k] = (up - down) / (2 * eps)
    return grad


def gradient_relative_error(model: MlpModel, batch: Batch) -> float:
    _, analytic = loss_and_grad(model, batch)
    numeric = numeric_gradient(model, batch)
    scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
    return float(np.linalg.norm(analytic - numeric) / scale)


def check_gradients(rng: np.random.Generator, configs: int) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(configs):
        depth = int(rng.integers(0, 3))
        dims = [int(rng.integers(2, 7))] + [int(rng.integers(2, 8)) for _ in range(depth)] + [int(rng.integers(2, 5))]
        model = MlpModel.initialize(dims, int(rng.integers(0, 2**31)))
        size = int(rng.integers(1, 9))
        batch = Batch(inputs=rng.normal(0.0, 1.0, (size, dims[0])), labels=rng.integers(0, dims[-1], size))
        worst = max(worst, gradient_relative_error(model, batch))
    return worst <= GRADIENT_RTOL, f"{configs} configs, max relative error = {worst:.2e}"


def check_reservoir(seed: int, trials: int, capacity: int = 50, offers: int = 1000) -> tuple[bool, str]:
    counts = memory.simulate_reservoir_residency(capacity, offers, trials, seed)
    p = capacity / offers
    frequency = counts / trials
    sigma = np.sqrt(p * (1 - p) / trials)
    z = stats.norm.isf(RESIDENCY_FAMILY_ALPHA / (2 * offers))
    worst_z = float(np.max(np.abs(frequency - p)) / sigma)
    p_value = float(stats.chisquare(counts).pvalue)
    passed = worst_z <= z and p_value > CHI_SQUARE_MIN_P
    return passed, f"{trials} trials, max |z| = {worst_z:.2f} (band {z:.2f}), chi-square p = {p_value:.4f}"


def check_replacement(seed: int, trials: int, capacity: int = 500, num_classes: int = 10) -> tuple[bool, str]:
    details = []
    passed = True
    for n_c in (10, 50, 100):
        report = metrics.replacement_suite(capacity, num_classes, n_c, trials, seed=seed + n_c)
        error = abs(report.mc_expected_replaced - report.expected_replaced) / report.expected_replaced
        ok = error <= REPLACEMENT_RTOL
        if n_c < report.class_slots:
            ok = ok and report.p_replace_all == 0.0 and report.mc_replace_all == 0.0
        passed = passed and ok
        details.append(f"n_c={n_c}: {report.mc_expected_replaced:.3f} vs {report.expected_replaced:.3f}")
    return passed, "; ".join(details)


def check_alignment(rng: np.random.Generator, pairs: int, dim: int = 32) -> tuple[bool, str]:
    violations = 0
    worst_end = 0.0
    for _ in range(pairs):
        g_old = rng.normal(0.0, 1.0, dim)
        g_new = rng.normal(0.0, 1.0, dim) * rng.uniform(0.1, 10.0)
        etas = [metrics.eta_align(g_old, g_new, alpha) for alpha in metrics.ALPHA_GRID]
        violations += not metrics.is_non_decreasing(etas)
        worst_end = max(worst_end, abs(etas[-1] - 1.0))
    passed = violations == 0 and worst_end <= ETA_AT_ONE_TOLERANCE
    return passed, f"{pairs} pairs, {violations} non-monotone, max |eta(1) - 1| = {worst_end:.2e}"


def _timed(name: str, check: Callable[[], tuple[bool, str]]) -> CheckResult:
    started = time.perf_counter()
    passed, detail = check()
    result = CheckResult(name=name, passed=passed, detail=detail, seconds=time.perf_counter() - started)
    logger.info(f"{'PASS' if passed else 'FAIL'} {name}: {detail} ({result.seconds:.1f}s)")
    return result


def run_verification(quick: bool = False, seed: int = 0) -> VerificationReport:
    """Runs every oracle check; `quick` shrinks trial counts for smoke runs."""
    rng = np.random.default_rng(seed)
    scale = 10 if quick else 1
    return VerificationReport(
        checks=[
            _timed("ks_vs_brute_force", lambda: check_ks(rng, 200 // scale)),
            _timed("finite_differences", lambda: check_gradients(rng, 20 // (2 if quick else 1))),
            _timed("reservoir_uniformity", lambda: check_reservoir(seed, 20_000 // scale)),
            _timed("replacement_closed_form", lambda: check_replacement(seed, 20_000 // scale)),
            _timed("alignment_monotone", lambda: check_alignment(rng, 100)),
        ]
    )
