"""Minimal dense-network substrate with exact reverse-mode gradients.

Everything is float64 numpy: forward passes are bitwise-reproducible given a
parameter snapshot, and analytic gradients are checked against central finite
differences in the test suite. Hidden layers are ReLU, the output layer is
linear; callers apply their own head (softmax, sigmoid, identity).
"""

from __future__ import annotations

import json

import numpy as np


class DenseNet:
    """Fully-connected net. ``sizes`` = [n_in, h1, ..., n_out]."""

    def __init__(self, sizes: list[int], rng: np.random.Generator):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = list(sizes)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            bound = np.sqrt(6.0 / (n_in + n_out))
            self.weights.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
            self.biases.append(np.zeros(n_out, dtype=np.float64))

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Forward pass; accepts (n_in,) or (batch, n_in)."""
        out, _ = self.forward_cached(x)
        return out

    def forward_cached(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Forward pass keeping per-layer inputs for :meth:`backward`."""
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.shape[1] != self.sizes[0]:
            raise ValueError(f"input width {x.shape[1]} != {self.sizes[0]}")
        cache = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
            cache.append(h)
        return (h[0] if squeeze else h), cache

    def backward(self, cache: list[np.ndarray], grad_out: np.ndarray) -> list[np.ndarray]:
        """Chain-rule gradients for all parameters given upstream d(loss)/d(output).

        Returns grads in the same order as :meth:`parameters`.
        """
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.ndim == 1:
            grad_out = grad_out[None, :]
        grads: list[np.ndarray] = [np.empty(0)] * (2 * len(self.weights))
        delta = grad_out
        for i in range(len(self.weights) - 1, -1, -1):
            inp = cache[i]
            if i < len(self.weights) - 1:
                # cache[i+1] holds the post-ReLU activation of layer i
                delta = delta * (cache[i + 1] > 0.0)
            grads[2 * i] = inp.T @ delta
            grads[2 * i + 1] = delta.sum(axis=0)
            if i > 0:
                delta = delta @ self.weights[i].T
        return grads

    def input_gradient(self, cache: list[np.ndarray], grad_out: np.ndarray) -> np.ndarray:
        """d(loss)/d(input) for the cached forward pass."""
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.ndim == 1:
            grad_out = grad_out[None, :]
        delta = grad_out
        for i in range(len(self.weights) - 1, -1, -1):
            if i < len(self.weights) - 1:
                delta = delta * (cache[i + 1] > 0.0)
            delta = delta @ self.weights[i].T
        return delta

    def copy(self) -> "DenseNet":
        dup = DenseNet.__new__(DenseNet)
        dup.sizes = list(self.sizes)
        dup.weights = [w.copy() for w in self.weights]
        dup.biases = [b.copy() for b in self.biases]
        return dup

    # Checkpoint format: flat JSON, documented in the README. Floats survive
    # the round trip exactly (repr of a Python float is shortest-exact).
    def save(self, path) -> None:
        doc = {
            "format": "densenet-v1",
            "sizes": self.sizes,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, path) -> "DenseNet":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("format") != "densenet-v1":
            raise ValueError(f"unsupported checkpoint format: {doc.get('format')!r}")
        net = cls.__new__(cls)
        net.sizes = list(doc["sizes"])
        net.weights = [np.asarray(w, dtype=np.float64) for w in doc["weights"]]
        net.biases = [np.asarray(b, dtype=np.float64) for b in doc["biases"]]
        for w, (n_in, n_out) in zip(net.weights, zip(net.sizes[:-1], net.sizes[1:])):
            if w.shape != (n_in, n_out):
                raise ValueError("checkpoint shapes do not compose")
        return net


class Adam:
    """Adaptive-moment optimizer with bias correction."""

    def __init__(self, params: list[np.ndarray], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """Update params in place."""
        if len(params) != len(self.m):
            raise ValueError("parameter/accumulator count mismatch")
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            if p.shape != g.shape:
                raise ValueError("gradient shape mismatch")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    """Max-shifted softmax; NaN logits are rejected."""
    logits = np.asarray(logits, dtype=np.float64)
    if np.isnan(logits).any():
        raise ValueError("NaN logits")
    z = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    if np.isnan(logits).any():
        raise ValueError("NaN logits")
    z = logits - logits.max(axis=axis, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=axis, keepdims=True))


def categorical_sample(logits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample indices from softmax(logits); row-wise for 2-D input."""
    p = softmax(logits)
    if p.ndim == 1:
        return np.int64(rng.choice(p.shape[0], p=p))
    # inverse-CDF per row; single uniform draw per row
    u = rng.random(p.shape[0])
    cdf = np.cumsum(p, axis=1)
    idx = (u[:, None] > cdf).sum(axis=1)
    return np.minimum(idx, p.shape[1] - 1).astype(np.int64)
