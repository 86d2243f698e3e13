"""Spectral graph convolutional network with Chebyshev filters.

The network is ``L`` hidden Chebyshev convolutions with ReLU, then an output
convolution with a row softmax. Each convolution computes::

    Y = sum_k T_k(L~) X Theta_k + b,     k = 0..K

where ``L~`` is the rescaled normalized Laplacian. Training is full batch on
the labelled nodes only, with a masked cross-entropy, an L2 penalty
``(l2 / 2) * sum ||Theta||^2`` on the filter weights and Adam updates.
Gradients are computed analytically.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, ShapeError
from .graph import chebyshev_apply

LOG_CLAMP = 1e-12


@dataclass
class ChebLayer:
    theta: np.ndarray  # (K + 1, C_in, C_out)
    bias: np.ndarray  # (C_out,)

    @property
    def K(self):
        return self.theta.shape[0] - 1


def glorot_layer(rng, K, c_in, c_out):
    # the layer is linear in the stacked basis [T_0 X, ..., T_K X], so its fan-in is (K + 1) * c_in
    limit = np.sqrt(6.0 / ((K + 1) * c_in + c_out))
    theta = rng.uniform(-limit, limit, size=(K + 1, c_in, c_out))
    return ChebLayer(theta, np.zeros(c_out))


@dataclass
class GcnModel:
    """Architecture, hyperparameters and parameters of one network.

    ``n_hidden_layers`` is the number of hidden convolutions; the output
    convolution comes on top, so the network has ``n_hidden_layers + 1``
    convolutions and a receptive field of ``(n_hidden_layers + 1) * K`` hops.
    """

    n_features: int
    n_classes: int = 2
    K: int = 3
    n_hidden_layers: int = 1
    hidden: int = 16
    dropout: float = 0.0
    l2: float = 5e-4
    lr: float = 0.01
    epochs: int = 200
    seed: int = 0
    layers: list = field(default_factory=list)

    def __post_init__(self):
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must lie in [0, 1)")
        if self.K < 0 or self.n_hidden_layers < 0 or self.hidden < 1:
            raise ValueError("invalid architecture")
        if not self.layers:
            self.initialize()

    def widths(self):
        return [self.n_features] + [self.hidden] * self.n_hidden_layers + [self.n_classes]

    def initialize(self):
        """Glorot-uniform hidden filters; the output filters start at zero so
        the first predictions are exactly uniform."""
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0]))
        w = self.widths()
        self.layers = [glorot_layer(rng, self.K, w[i], w[i + 1]) for i in range(len(w) - 1)]
        self.layers[-1].theta[:] = 0.0

    @property
    def n_layers(self):
        return len(self.layers)

    @property
    def receptive_field(self):
        return self.n_layers * self.K

    def params(self):
        out = []
        for layer in self.layers:
            out += [layer.theta, layer.bias]
        return out

    def hyperparameters(self):
        return {
            "n_features": self.n_features,
            "n_classes": self.n_classes,
            "K": self.K,
            "n_hidden_layers": self.n_hidden_layers,
            "hidden": self.hidden,
            "dropout": self.dropout,
            "l2": self.l2,
            "lr": self.lr,
            "epochs": self.epochs,
            "seed": self.seed,
        }


def relu(Z):
    return np.maximum(Z, 0.0)


def dropout(Z, p, rng, training):
    """Inverted dropout. Returns ``(output, scale_mask)``; the mask is None when inactive."""
    if not training or p == 0:
        return Z, None
    keep = rng.random(Z.shape) >= p
    mask = keep / (1.0 - p)
    return Z * mask, mask


def softmax_rows(Z):
    E = np.exp(Z - Z.max(axis=1, keepdims=True))
    return E / E.sum(axis=1, keepdims=True)


def _check_mask(labels, mask):
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("no labelled nodes")
    labels = np.asarray(labels)
    if np.any(labels[mask] < 0):
        raise ValueError("masked nodes must carry labels")
    return labels, mask


def masked_cross_entropy(probs, labels, mask):
    labels, mask = _check_mask(labels, mask)
    idx = np.flatnonzero(mask)
    p_true = probs[idx, labels[idx]]
    return float(-np.mean(np.log(np.maximum(p_true, LOG_CLAMP))))


def cheb_conv_forward(X, op, layer):
    """One Chebyshev convolution. Returns ``(Y, basis)`` with ``basis[k] = T_k(L~) X``."""
    if X.shape[1] != layer.theta.shape[1]:
        raise ShapeError(f"layer expects {layer.theta.shape[1]} input channels, got {X.shape[1]}")
    basis = chebyshev_apply(X, op, layer.K)
    Y = basis[0] @ layer.theta[0]
    for k in range(1, layer.K + 1):
        Y = Y + basis[k] @ layer.theta[k]
    return Y + layer.bias, basis


def forward(model, X, op, rng=None, training=False):
    """Class probabilities for every node, plus the cache needed by :func:`backward`."""
    X = np.asarray(X, dtype=np.float64)
    if training and model.dropout > 0 and rng is None:
        raise ValueError("training-mode dropout needs an rng")
    cache = {"basis": [], "pre": [], "drop": []}
    H, m = dropout(X, model.dropout, rng, training)
    cache["drop"].append(m)
    last = model.n_layers - 1
    for i, layer in enumerate(model.layers):
        Z, basis = cheb_conv_forward(H, op, layer)
        cache["basis"].append(basis)
        cache["pre"].append(Z)
        if i < last:
            H, m = dropout(relu(Z), model.dropout, rng, training)
            cache["drop"].append(m)
    probs = softmax_rows(Z)
    cache["probs"] = probs
    return probs, cache


def loss_value(model, probs, labels, mask):
    penalty = sum(float(np.sum(layer.theta * layer.theta)) for layer in model.layers)
    return masked_cross_entropy(probs, labels, mask) + 0.5 * model.l2 * penalty


def backward(model, cache, labels, mask, op, l2=None):
    """Gradients of the penalized masked loss, ordered like ``model.params()``.

    The clamp inside the logarithm is ignored; it only bites for probabilities
    below 1e-12.
    """
    if l2 is None:
        l2 = model.l2
    labels, mask = _check_mask(labels, mask)
    probs = cache["probs"]
    n_lab = mask.sum()
    dZ = probs.copy()
    idx = np.flatnonzero(mask)
    dZ[idx, labels[idx]] -= 1.0
    dZ[~mask] = 0.0
    dZ /= n_lab

    grads = [None] * (2 * model.n_layers)
    for i in range(model.n_layers - 1, -1, -1):
        layer = model.layers[i]
        basis = cache["basis"][i]
        d_theta = np.stack([basis[k].T @ dZ for k in range(layer.K + 1)])
        grads[2 * i] = d_theta + l2 * layer.theta
        grads[2 * i + 1] = dZ.sum(axis=0)
        if i == 0:
            break
        # T_k(L~) is symmetric, so the adjoint of X -> T_k X Theta_k is G -> T_k G Theta_k^T
        back = chebyshev_apply(dZ, op, layer.K)
        dH = back[0] @ layer.theta[0].T
        for k in range(1, layer.K + 1):
            dH = dH + back[k] @ layer.theta[k].T
        m = cache["drop"][i]
        if m is not None:
            dH = dH * m
        dZ = dH * (cache["pre"][i - 1] > 0)
    return grads


def loss_and_grads(model, X, op, labels, mask, rng=None, training=False):
    probs, cache = forward(model, X, op, rng=rng, training=training)
    return loss_value(model, probs, labels, mask), backward(model, cache, labels, mask, op)


@dataclass
class TrainState:
    m: list
    v: list
    t: int = 0
    history: list = field(default_factory=list)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params):
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adam_step(state, params, grads, lr):
    """Bias-corrected Adam update, applied to ``params`` in place."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params


def train(model, X, op, labels, mask, epochs=None, state=None):
    """Full-batch training for a fixed number of epochs.

    Returns ``(model, state)``; the model is updated in place and
    ``state.history`` holds the training loss of every epoch (measured on
    the dropout forward pass that produced the gradients).
    """
    labels, mask = _check_mask(labels, mask)
    epochs = model.epochs if epochs is None else epochs
    rng = np.random.default_rng(np.random.SeedSequence([model.seed, 1]))
    params = model.params()
    if state is None:
        state = TrainState.for_params(params)
    for epoch in range(1, epochs + 1):
        probs, cache = forward(model, X, op, rng=rng, training=True)
        loss = loss_value(model, probs, labels, mask)
        if not np.isfinite(loss):
            raise DivergenceError(epoch)
        state.history.append(loss)
        grads = backward(model, cache, labels, mask, op)
        adam_step(state, params, grads, model.lr)
    return model, state


def predict(model, X, op):
    """``(classes, probabilities)`` in inference mode; argmax ties go to the lower class."""
    probs, _ = forward(model, X, op, training=False)
    return np.argmax(probs, axis=1), probs


def save_model(model, path):
    """Write parameters and hyperparameters to an ``.npz`` archive."""
    arrays = {}
    for i, layer in enumerate(model.layers):
        arrays[f"theta_{i}"] = layer.theta
        arrays[f"bias_{i}"] = layer.bias
    arrays["hyperparameters"] = np.array(json.dumps(model.hyperparameters(), sort_keys=True))
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_model(path):
    with np.load(path) as data:
        hyper = json.loads(str(data["hyperparameters"]))
        n = sum(1 for k in data.files if k.startswith("theta_"))
        layers = [ChebLayer(data[f"theta_{i}"].copy(), data[f"bias_{i}"].copy()) for i in range(n)]
    return GcnModel(layers=layers, **hyper)
