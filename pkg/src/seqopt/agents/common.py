"""Shared agent machinery: replay storage, running normalization, divergence
errors, and the softmax-policy gradient helpers every learner uses.
"""

from __future__ import annotations

import numpy as np

from ..nn import softmax


class AgentDivergence(RuntimeError):
    """Training produced a non-finite loss; aborted with diagnostics."""


class ReplayBuffer:
    """Ring buffer over transition arrays with uniform sampling."""

    def __init__(self, capacity: int, seq_len: int):
        self.capacity = capacity
        self.states = np.zeros((capacity, seq_len), dtype=np.int64)
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity, dtype=np.float64)
        self.next_states = np.zeros((capacity, seq_len), dtype=np.int64)
        self.dones = np.zeros(capacity, dtype=bool)
        self.size = 0
        self._head = 0

    def push_batch(self, states, actions, rewards, next_states, dones) -> None:
        n = len(actions)
        idx = (self._head + np.arange(n)) % self.capacity
        self.states[idx] = states
        self.actions[idx] = actions
        self.rewards[idx] = rewards
        self.next_states[idx] = next_states
        self.dones[idx] = dones
        self._head = (self._head + n) % self.capacity
        self.size = min(self.size + n, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator):
        idx = rng.integers(0, self.size, size=batch_size)
        return (self.states[idx], self.actions[idx], self.rewards[idx],
                self.next_states[idx], self.dones[idx])


class RunningMeanStd:
    """Welford accumulator for streaming normalization."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def update(self, values: np.ndarray) -> None:
        for v in np.asarray(values, dtype=np.float64).ravel():
            self.count += 1
            delta = v - self.mean
            self.mean += delta / self.count
            self._m2 += delta * (v - self.mean)

    @property
    def std(self) -> float:
        if self.count < 2:
            return 1.0
        return float(np.sqrt(self._m2 / self.count))


def log_prob_grad(logits: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """d log pi(a|s) / d logits = onehot(a) - softmax(logits), per row."""
    p = softmax(logits)
    g = -p
    g[np.arange(len(actions)), actions] += 1.0
    return g


def entropy_and_grad(logits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row entropy of softmax(logits) and its gradient wrt logits."""
    p = softmax(logits)
    logp = np.log(np.clip(p, 1e-300, None))
    h = -(p * logp).sum(axis=1)
    grad = -p * (logp + h[:, None])
    return h, grad
