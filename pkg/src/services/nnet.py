"""Dense ReLU classifier with softmax cross-entropy and exact backpropagation.

All arithmetic is float64 so that gradient checks against finite differences
and hand-rolled oracles can use tight tolerances.
"""

from typing import Optional

import numpy as np
import numpy.typing as npt

from src.models.errors import ConfigurationError, EmptyInputError, InputShapeError
from src.models.sample import Batch, SampleSet

FlatGradient = npt.NDArray[np.float64]

ACTIVATION = "relu"


class MlpModel:
    """Multi-layer perceptron f_theta with a single K-way output head.

    Attributes:
        layer_dims (list[int]): Input dim, hidden widths, output dim K.
        weights (list[np.ndarray]): One (fan_in x fan_out) matrix per layer.
        biases (list[np.ndarray]): One fan_out vector per layer.
    """

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        if not weights or len(weights) != len(biases):
            raise InputShapeError("MlpModel needs one bias per weight matrix")
        self.weights = [np.array(w, dtype=np.float64) for w in weights]
        self.biases = [np.array(b, dtype=np.float64) for b in biases]
        dims = [self.weights[0].shape[0]]
        for w, b in zip(self.weights, self.biases):
            if w.ndim != 2 or w.shape[0] != dims[-1] or b.shape != (w.shape[1],):
                raise InputShapeError(f"layer shapes {w.shape}/{b.shape} do not chain from width {dims[-1]}")
            dims.append(w.shape[1])
        self.layer_dims = dims
        self.activation = ACTIVATION

    @classmethod
    def initialize(cls, layer_dims: list[int], seed: int) -> "MlpModel":
        """Seeded fan-in scaled uniform init: U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
        if len(layer_dims) < 2 or any(d < 1 for d in layer_dims):
            raise ConfigurationError(f"invalid layer dims {layer_dims}")
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(weights, biases)

    @classmethod
    def zeros(cls, layer_dims: list[int]) -> "MlpModel":
        return cls(
            [np.zeros((a, b)) for a, b in zip(layer_dims[:-1], layer_dims[1:])],
            [np.zeros(b) for b in layer_dims[1:]],
        )

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def num_classes(self) -> int:
        return self.layer_dims[-1]

    @property
    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def flat_parameters(self) -> FlatGradient:
        """Parameters in the same order as gradients: W0, b0, W1, b1, ..."""
        return np.concatenate([p.ravel() for pair in zip(self.weights, self.biases) for p in pair])

    def set_flat_parameters(self, flat: np.ndarray) -> None:
        if flat.shape != (self.parameter_count,):
            raise InputShapeError(f"expected {self.parameter_count} parameters, got {flat.shape}")
        offset = 0
        for layer in range(len(self.weights)):
            for array in (self.weights[layer], self.biases[layer]):
                array[...] = flat[offset : offset + array.size].reshape(array.shape)
                offset += array.size

    def copy(self) -> "MlpModel":
        return MlpModel([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def __repr__(self) -> str:
        return f"<MlpModel dims={self.layer_dims} params={self.parameter_count}>"


def _check_inputs(model: MlpModel, inputs: np.ndarray) -> np.ndarray:
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != model.input_dim:
        raise InputShapeError(f"model expects (batch, {model.input_dim}) inputs, got {inputs.shape}")
    return inputs


def _forward_layers(model: MlpModel, inputs: np.ndarray) -> list[np.ndarray]:
    """Activations per layer; the last entry holds the logits."""
    activations = [inputs]
    last = len(model.weights) - 1
    for layer, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = activations[-1] @ w + b
        activations.append(z if layer == last else np.maximum(z, 0.0))
    return activations


def forward(model: MlpModel, inputs: np.ndarray) -> np.ndarray:
    """Class logits (batch x K) for a batch of inputs."""
    return _forward_layers(model, _check_inputs(model, inputs))[-1]


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss_and_grad(model: MlpModel, batch: Batch) -> tuple[float, FlatGradient]:
    """Mean cross-entropy over the batch and its exact gradient.

    Raises:
        EmptyInputError: If the batch has no rows.
        InputShapeError: If inputs or labels do not fit the model.
    """
    if len(batch) == 0:
        raise EmptyInputError("loss_and_grad needs a non-empty batch")
    inputs = _check_inputs(model, batch.inputs)
    labels = batch.labels
    if labels.max() >= model.num_classes:
        raise InputShapeError(f"label {labels.max()} outside [0, {model.num_classes})")

    activations = _forward_layers(model, inputs)
    log_probs = log_softmax(activations[-1])
    rows = np.arange(len(labels))
    loss = float(-log_probs[rows, labels].mean())

    delta = np.exp(log_probs)
    delta[rows, labels] -= 1.0
    delta /= len(labels)

    grads: list[np.ndarray] = []
    for layer in range(len(model.weights) - 1, -1, -1):
        grads.append(delta.sum(axis=0))
        grads.append(activations[layer].T @ delta)
        if layer > 0:
            delta = (delta @ model.weights[layer].T) * (activations[layer] > 0)
    grads.reverse()
    return loss, np.concatenate([g.ravel() for g in grads])


def sgd_step(model: MlpModel, grad: FlatGradient, lr: float) -> MlpModel:
    """Plain SGD update p <- p - lr * g, applied in place; returns the model."""
    if lr < 0 or not np.isfinite(lr):
        raise ConfigurationError(f"learning rate must be a non-negative finite number, got {lr}")
    if grad.shape != (model.parameter_count,):
        raise InputShapeError(f"gradient has shape {grad.shape}, model has {model.parameter_count} parameters")
    if lr == 0:
        return model
    model.set_flat_parameters(model.flat_parameters() - lr * grad)
    return model


def gradient_of_dataset(model: MlpModel, samples: SampleSet, chunk_size: Optional[int] = 1024) -> FlatGradient:
    """Mean of per-sample gradients over a sample set (G_old / G_new).

    Chunks are weighted by their row count, so the result equals the plain
    per-sample mean regardless of chunking.
    """
    n = len(samples)
    if n == 0:
        raise EmptyInputError("gradient_of_dataset needs at least one sample")
    step = chunk_size or n
    total = np.zeros(model.parameter_count)
    for start in range(0, n, step):
        chunk = samples.subset(np.arange(start, min(start + step, n)))
        _, grad = loss_and_grad(model, chunk.as_batch())
        total += grad * len(chunk)
    return total / n


flatten_gradient = gradient_of_dataset


def predict(model: MlpModel, inputs: np.ndarray) -> np.ndarray:
    return forward(model, inputs).argmax(axis=1)


def accuracy(model: MlpModel, samples: SampleSet) -> float:
    if len(samples) == 0:
        raise EmptyInputError("accuracy needs at least one sample")
    return float(np.mean(predict(model, samples.features) == samples.labels))
