"""Severity-graded drift transforms applied to recurring classes."""

import numpy as np

from src.models.errors import ConfigurationError
from src.models.kinds import TransformKind
from src.models.sample import Sample, SampleSet

PERMUTE_FRACTIONS = {1: 0.2, 2: 0.4, 3: 0.6, 4: 0.8, 5: 1.0}
NOISE_SIGMAS = {1: 0.05, 2: 0.1, 3: 0.2, 4: 0.4, 5: 0.8}
ROTATION_DEGREES = {1: 15.0, 2: 30.0, 3: 45.0, 4: 60.0, 5: 90.0}


def parse_transform(transform: "TransformKind | str") -> TransformKind:
    try:
        return TransformKind(transform)
    except ValueError as e:
        known = ", ".join(kind.value for kind in TransformKind)
        raise ConfigurationError(f"Unknown drift transform '{transform}' (known: {known})") from e


class DriftMap:
    """Deterministic map fixed by (event seed, transform, severity, dim).

    Permutation and rotation maps are shared by every sample of the event.
    Noise is drawn per sample from a generator keyed by (seed, sample id), so
    re-applying the map to the same sample reproduces the same output.
    """

    def __init__(self, transform: "TransformKind | str", severity: int, seed: int, dim: int):
        self.transform = parse_transform(transform)
        if severity not in PERMUTE_FRACTIONS:
            raise ConfigurationError(f"severity must be in [1, 5], got {severity}")
        self.severity = severity
        self.seed = seed
        self.dim = dim
        rng = np.random.default_rng(seed)

        if self.transform is TransformKind.PERMUTE:
            count = int(round(PERMUTE_FRACTIONS[severity] * dim))
            chosen = np.sort(rng.choice(dim, size=count, replace=False))
            self.index_map = np.arange(dim)
            self.index_map[chosen] = chosen[rng.permutation(count)]
        elif self.transform is TransformKind.ROTATE_PAIRS:
            order = rng.permutation(dim)
            self.pairs = order[: 2 * (dim // 2)].reshape(-1, 2)
            theta = np.deg2rad(ROTATION_DEGREES[severity])
            self.cos, self.sin = np.cos(theta), np.sin(theta)
        else:
            self.sigma = NOISE_SIGMAS[severity]

    def apply(self, features: np.ndarray, ids: np.ndarray) -> np.ndarray:
        """Transforms a (n x dim) block; returns a new array."""
        if self.transform is TransformKind.PERMUTE:
            return features[:, self.index_map]
        if self.transform is TransformKind.ROTATE_PAIRS:
            out = features.copy()
            a, b = self.pairs[:, 0], self.pairs[:, 1]
            out[:, a] = self.cos * features[:, a] - self.sin * features[:, b]
            out[:, b] = self.sin * features[:, a] + self.cos * features[:, b]
            return out
        noise = np.stack(
            [np.random.default_rng([self.seed, int(i)]).normal(0.0, self.sigma, self.dim) for i in ids]
        ) if len(ids) else np.zeros((0, self.dim))
        return features + noise

    def apply_set(self, samples: SampleSet) -> SampleSet:
        """Drifted copy of a set with every drift_version incremented."""
        return SampleSet(
            features=self.apply(samples.features, samples.ids),
            labels=samples.labels,
            versions=samples.versions + 1,
            ids=samples.ids,
        )


def apply_drift_transform(
    sample: Sample, transform: "TransformKind | str", severity: int, seed: int
) -> Sample:
    """Applies one drift event's transform to a single sample.

    Raises:
        ConfigurationError: On an unknown transform id or severity outside [1, 5].
    """
    drift_map = DriftMap(transform, severity, seed, sample.features.shape[0])
    features = drift_map.apply(sample.features.reshape(1, -1), np.array([sample.sample_id]))[0]
    return Sample(
        features=features,
        label=sample.label,
        drift_version=sample.drift_version + 1,
        sample_id=sample.sample_id,
    )
