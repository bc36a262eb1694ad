"""Feedforward MLP with a parametric tanh-shaped activation, exact reverse-mode
gradients, and resilient backpropagation (sign-based per-weight step sizes,
no weight backtracking)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

ACTION_LABELS = ("boxing", "clapping", "running", "walking")


def label_index(label: str) -> int:
    try:
        return ACTION_LABELS.index(label.lower())
    except ValueError:
        raise ValueError(f"unknown action label {label!r}") from None


def activation(x: np.ndarray | float, a: float = 1.0, beta: float = 1.0):
    """beta * (1 - e^{-ax}) / (1 + e^{-ax}), i.e. beta * tanh(ax/2)."""
    return beta * np.tanh(np.asarray(x, dtype=np.float64) * (a / 2.0))


def activation_derivative(fx: np.ndarray, a: float, beta: float) -> np.ndarray:
    """f'(u) expressed through f(u): (a/(2*beta)) * (beta^2 - f(u)^2)."""
    return (a / (2.0 * beta)) * (beta**2 - fx**2)


@dataclass
class MlpModel:
    layer_sizes: list[int]
    weights: list[np.ndarray]  # weights[l] has shape (out, in)
    biases: list[np.ndarray]
    a: float = 1.0
    beta: float = 1.0
    input_mean: np.ndarray = field(default=None)  # type: ignore[assignment]
    input_std: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.input_mean is None:
            self.input_mean = np.zeros(self.layer_sizes[0])
        if self.input_std is None:
            self.input_std = np.ones(self.layer_sizes[0])

    def standardize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.input_mean) / self.input_std


def init_model(
    layer_sizes: Sequence[int], seed: int = 0, a: float = 1.0, beta: float = 1.0
) -> MlpModel:
    """Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] weights, zero biases."""
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(list(layer_sizes), weights, biases, a=a, beta=beta)


def forward(m: MlpModel, x: np.ndarray) -> list[np.ndarray]:
    """Per-layer activations, [input, hidden..., output]; the activation is
    applied at every layer including the output. Accepts a single vector or
    a (batch, dim) matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != m.layer_sizes[0]:
        raise ValueError("input length does not match the input layer")
    acts = [x]
    for w, b in zip(m.weights, m.biases):
        u = acts[-1] @ w.T + b
        acts.append(activation(u, m.a, m.beta))
    return acts


def backprop(
    m: MlpModel, x: np.ndarray, target: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray], float]:
    """Gradients of 0.5*sum((output-target)^2) over the batch, plus the loss.

    Accepts a vector or a (batch, dim) matrix; batch gradients are summed.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    if target.shape[-1] != m.layer_sizes[-1]:
        raise ValueError("target length does not match the output layer")
    acts = forward(m, x)
    err = acts[-1] - target
    loss = 0.5 * float((err**2).sum())
    delta = err * activation_derivative(acts[-1], m.a, m.beta)
    grads_w: list[np.ndarray] = [None] * len(m.weights)  # type: ignore[list-item]
    grads_b: list[np.ndarray] = [None] * len(m.biases)  # type: ignore[list-item]
    for layer in reversed(range(len(m.weights))):
        grads_w[layer] = delta.T @ acts[layer]
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ m.weights[layer]) * activation_derivative(
                acts[layer], m.a, m.beta
            )
    return grads_w, grads_b, loss


@dataclass
class RpropState:
    step_w: list[np.ndarray]
    step_b: list[np.ndarray]
    prev_grad_w: list[np.ndarray]
    prev_grad_b: list[np.ndarray]
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    step_init: float = 0.1
    step_min: float = 1e-6
    step_max: float = 50.0


def init_rprop(m: MlpModel, **hyper) -> RpropState:
    state = RpropState(
        step_w=[],
        step_b=[],
        prev_grad_w=[np.zeros_like(w) for w in m.weights],
        prev_grad_b=[np.zeros_like(b) for b in m.biases],
        **hyper,
    )
    state.step_w = [np.full_like(w, state.step_init) for w in m.weights]
    state.step_b = [np.full_like(b, state.step_init) for b in m.biases]
    return state


def _rprop_update(w, g, g_prev, step, s: RpropState):
    sign_prod = g * g_prev
    grew = sign_prod > 0
    flipped = sign_prod < 0
    step[grew] = np.minimum(step[grew] * s.eta_plus, s.step_max)
    step[flipped] = np.maximum(step[flipped] * s.eta_minus, s.step_min)
    w -= np.sign(g) * step
    # a flipped gradient is zeroed so the next sign test sees no direction
    g_next = g.copy()
    g_next[flipped] = 0.0
    return g_next


def rprop_step(
    m: MlpModel, grads_w: list[np.ndarray], grads_b: list[np.ndarray], s: RpropState
) -> None:
    """One RPROP- update on every weight and bias, in place."""
    for layer in range(len(m.weights)):
        s.prev_grad_w[layer] = _rprop_update(
            m.weights[layer], grads_w[layer], s.prev_grad_w[layer],
            s.step_w[layer], s,
        )
        s.prev_grad_b[layer] = _rprop_update(
            m.biases[layer], grads_b[layer], s.prev_grad_b[layer],
            s.step_b[layer], s,
        )


def train(
    m: MlpModel,
    inputs: np.ndarray,
    labels: Sequence[int],
    epochs: int,
    rprop: Optional[RpropState] = None,
    standardize: bool = True,
) -> list[float]:
    """Full-batch RPROP training; returns the per-epoch loss trace.

    Targets are one-hot at +-0.9*beta. When ``standardize`` the per-component
    training mean/std are stored on the model and applied to all inputs.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if inputs.size == 0:
        raise ValueError("empty training set")
    n_classes = m.layer_sizes[-1]
    counts = np.bincount(labels, minlength=n_classes)
    if (counts == 0).any():
        missing = [ACTION_LABELS[i] if n_classes == len(ACTION_LABELS) else str(i)
                   for i in np.nonzero(counts == 0)[0]]
        raise ValueError(f"classes with zero samples: {', '.join(missing)}")

    if standardize:
        m.input_mean = inputs.mean(axis=0)
        std = inputs.std(axis=0)
        # floor tiny per-component deviations relative to the largest one so
        # near-constant noise components are not amplified into the net
        floor = 0.01 * std.max()
        m.input_std = np.maximum(std, floor) if floor > 0 else np.ones_like(std)
    x = m.standardize(inputs)
    targets = np.full((len(labels), n_classes), -0.9 * m.beta)
    targets[np.arange(len(labels)), labels] = 0.9 * m.beta

    if rprop is None:
        rprop = init_rprop(m)
    trace = []
    for _ in range(epochs):
        gw, gb, loss = backprop(m, x, targets)
        rprop_step(m, gw, gb, rprop)
        trace.append(loss)
    return trace


def predict(m: MlpModel, sample: np.ndarray) -> tuple[int, np.ndarray]:
    """(class index, raw output scores); ties go to the lowest index."""
    out = forward(m, m.standardize(np.asarray(sample, dtype=np.float64)))[-1]
    return int(np.argmax(out)), out


# ---------------------------------------------------------------------------
# model file: "harmlp 1" / layer sizes / "a beta" / standardization mean and
# std / per layer: matrix rows then the bias row, full-precision decimals

def save_model(m: MlpModel, path: str) -> None:
    def fmt(vec) -> str:
        return " ".join(repr(float(v)) for v in vec)

    with open(path, "w") as fh:
        fh.write("harmlp 1\n")
        fh.write(" ".join(str(s) for s in m.layer_sizes) + "\n")
        fh.write(f"{m.a!r} {m.beta!r}\n")
        fh.write(fmt(m.input_mean) + "\n")
        fh.write(fmt(m.input_std) + "\n")
        for w, b in zip(m.weights, m.biases):
            for row in w:
                fh.write(fmt(row) + "\n")
            fh.write(fmt(b) + "\n")


def load_model(path: str) -> MlpModel:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0].split() != ["harmlp", "1"]:
        raise ValueError(f"bad model file header in {path}")
    try:
        layer_sizes = [int(s) for s in lines[1].split()]
        a, beta = (float(s) for s in lines[2].split())
        mean = np.array([float(s) for s in lines[3].split()])
        std = np.array([float(s) for s in lines[4].split()])
    except (IndexError, ValueError) as e:
        raise ValueError(f"malformed model file {path}: {e}") from None
    if len(layer_sizes) < 2 or mean.size != layer_sizes[0] or std.size != layer_sizes[0]:
        raise ValueError("standardization vectors do not match the input layer")
    weights = []
    biases = []
    cursor = 5
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        rows = lines[cursor : cursor + fan_out + 1]
        if len(rows) != fan_out + 1:
            raise ValueError("model file truncated")
        try:
            mat = np.array([[float(v) for v in r.split()] for r in rows[:-1]])
            bias = np.array([float(v) for v in rows[-1].split()])
        except ValueError as e:
            raise ValueError(f"malformed model file {path}: {e}") from None
        if mat.shape != (fan_out, fan_in) or bias.size != fan_out:
            raise ValueError(
                f"layer shape mismatch: header says {fan_out}x{fan_in}, "
                f"file has {mat.shape}"
            )
        weights.append(mat)
        biases.append(bias)
        cursor += fan_out + 1
    model = MlpModel(layer_sizes, weights, biases, a=a, beta=beta,
                     input_mean=mean, input_std=std)
    for arr in (*model.weights, *model.biases, model.input_mean, model.input_std):
        if not np.isfinite(arr).all():
            raise ValueError("non-finite parameter in model file")
    return model
