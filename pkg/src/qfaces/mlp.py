"""Multilayer perceptron trained by online backpropagation with momentum.

Logistic sigmoid on every layer, squared-error loss 0.5 * ||a - t||^2, and
heavy-ball updates v <- momentum * v - lr * grad; theta <- theta + v.
Updates are per-sample in a fixed order (a seeded shuffle is opt-in), so
training is deterministic for a given seed, data and config.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import as_vector


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    momentum: float = 0.9
    max_epochs: int = 2000
    target_mse: float = 1e-3
    seed: int = 0
    shuffle: bool = False

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")


@dataclass
class MlpModel:
    layer_sizes: list[int]
    weights: list[np.ndarray]       # weights[l]: (sizes[l+1], sizes[l])
    biases: list[np.ndarray]
    velocity_w: list[np.ndarray] = field(repr=False, default_factory=list)
    velocity_b: list[np.ndarray] = field(repr=False, default_factory=list)

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]


def init_mlp(layer_sizes, seed: int = 0) -> MlpModel:
    """Seeded uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; zero biases."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2:
        raise ValueError(f"need at least input and output layers, got {sizes}")
    if any(s < 1 for s in sizes):
        raise ValueError(f"layer sizes must be positive, got {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases, vw, vb = [], [], [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
        vw.append(np.zeros((fan_out, fan_in)))
        vb.append(np.zeros(fan_out))
    return MlpModel(sizes, weights, biases, vw, vb)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def _forward_all(model: MlpModel, x: np.ndarray) -> list[np.ndarray]:
    acts = [x]
    for W, b in zip(model.weights, model.biases):
        acts.append(_sigmoid(W @ acts[-1] + b))
    return acts


def forward(model: MlpModel, x) -> np.ndarray:
    """Network output for one input vector; entries lie in (0, 1)."""
    x = as_vector(x, name="x")
    if x.shape[0] != model.n_inputs:
        raise ValueError(f"expected {model.n_inputs} inputs, got {x.shape[0]}")
    return _forward_all(model, x)[-1]


def gradient(model: MlpModel, sample) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Analytic gradients of 0.5 * ||a - t||^2 for one (x, t) sample."""
    x, t = sample
    x = as_vector(x, name="x")
    t = as_vector(t, name="t")
    if x.shape[0] != model.n_inputs:
        raise ValueError(f"expected {model.n_inputs} inputs, got {x.shape[0]}")
    if t.shape[0] != model.n_outputs:
        raise ValueError(f"expected {model.n_outputs} targets, got {t.shape[0]}")
    acts = _forward_all(model, x)
    delta = (acts[-1] - t) * acts[-1] * (1.0 - acts[-1])
    grad_w, grad_b = [], []
    for layer in range(len(model.weights) - 1, -1, -1):
        grad_w.append(np.outer(delta, acts[layer]))
        grad_b.append(delta.copy())
        if layer > 0:
            back = model.weights[layer].T @ delta
            delta = back * acts[layer] * (1.0 - acts[layer])
    grad_w.reverse()
    grad_b.reverse()
    return grad_w, grad_b


def train_epoch(model: MlpModel, samples, cfg: TrainConfig) -> float:
    """One pass of online updates in sample order; returns the epoch MSE.

    Each sample's error is measured on the forward pass that precedes its
    own update.
    """
    if not samples:
        raise ValueError("samples must be nonempty")
    lr, mom = cfg.learning_rate, cfg.momentum
    total = 0.0
    for x, t in samples:
        acts = _forward_all(model, x)
        out = acts[-1]
        total += float(np.mean((out - t) ** 2))
        delta = (out - t) * out * (1.0 - out)
        for layer in range(len(model.weights) - 1, -1, -1):
            back = model.weights[layer].T @ delta if layer > 0 else None
            vw = model.velocity_w[layer]
            vb = model.velocity_b[layer]
            vw *= mom
            vw -= lr * np.outer(delta, acts[layer])
            vb *= mom
            vb -= lr * delta
            model.weights[layer] += vw
            model.biases[layer] += vb
            if layer > 0:
                delta = back * acts[layer] * (1.0 - acts[layer])
    return total / len(samples)


def train_mlp(model: MlpModel, samples, cfg: TrainConfig) -> tuple[int, float]:
    """Run epochs until the epoch MSE reaches target_mse or max_epochs.

    Returns (epochs run, final MSE). With cfg.shuffle the sample order is
    re-drawn each epoch from a generator seeded by cfg.seed.
    """
    samples = [(as_vector(x, "x"), as_vector(t, "t")) for x, t in samples]
    rng = np.random.default_rng(cfg.seed) if cfg.shuffle else None
    mse = float("inf")
    epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = samples
        if rng is not None:
            order = [samples[i] for i in rng.permutation(len(samples))]
        mse = train_epoch(model, order, cfg)
        if mse <= cfg.target_mse:
            break
    return epoch, mse


def predict(model: MlpModel, x) -> int:
    """Index of the strongest output unit; ties break to the lowest index."""
    return int(np.argmax(forward(model, x)))
