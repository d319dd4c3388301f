"""Single-step GFlowNet over mutations.

Each visited (state, action, child-reward) triple is one complete trajectory;
training minimizes the trajectory-balance residual
(logZ(s) + log pi(a|s) - beta * log R(child))^2 jointly over the policy
logits and a state-conditioned scalar logZ head. At convergence the policy
samples children proportionally to R^beta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import one_hot_batch
from ..nn import Adam, DenseNet, log_softmax, softmax
from .common import AgentDivergence, ReplayBuffer, log_prob_grad


@dataclass(frozen=True)
class GFNConfig:
    beta: float = 32.0
    lr: float = 1e-3
    hidden: tuple[int, int] = (128, 128)
    capacity: int = 100_000
    batch_size: int = 256
    warmup: int = 256
    explore_eps: float = 0.05
    updates_per_step: int = 1

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")


class GFNAgent:
    def __init__(self, seq_len: int, n_symbols: int, config: GFNConfig,
                 rng: np.random.Generator):
        self.seq_len = seq_len
        self.n_symbols = n_symbols
        self.cfg = config
        self.rng = rng
        d = seq_len * n_symbols
        self.n_actions = d
        h1, h2 = config.hidden
        # last output is the per-state logZ head
        self.net = DenseNet([d, h1, h2, d + 1], rng)
        self.opt = Adam(self.net.parameters(), lr=config.lr)
        self.replay = ReplayBuffer(config.capacity, seq_len)
        self.last_stats: dict = {}

    def _heads(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        out = self.net.forward(one_hot_batch(states, self.n_symbols))
        return out[:, :-1], out[:, -1]

    def policy(self, state: np.ndarray) -> np.ndarray:
        logits, _ = self._heads(state[None, :])
        return softmax(logits)[0]

    def log_z(self, state: np.ndarray) -> float:
        _, lz = self._heads(state[None, :])
        return float(lz[0])

    def act(self, states: np.ndarray) -> np.ndarray:
        logits, _ = self._heads(states)
        p = softmax(logits)
        u = self.rng.random(p.shape[0])
        cdf = np.cumsum(p, axis=1)
        actions = np.minimum((u[:, None] > cdf).sum(axis=1), p.shape[1] - 1)
        explore = self.rng.random(p.shape[0]) < self.cfg.explore_eps
        uniform = self.rng.integers(0, self.n_actions, size=p.shape[0])
        return np.where(explore, uniform, actions).astype(np.int64)

    def observe(self, states, actions, rewards, next_states, dones) -> None:
        if (np.asarray(rewards) <= 0).any():
            raise ValueError("GFlowNet rewards must be positive (log R undefined)")
        self.replay.push_batch(states, actions, rewards, next_states, dones)
        if self.replay.size >= self.cfg.warmup:
            for _ in range(self.cfg.updates_per_step):
                s, a, r, _, _ = self.replay.sample(self.cfg.batch_size, self.rng)
                self.update(s, a, r)

    def update(self, states: np.ndarray, actions: np.ndarray,
               rewards: np.ndarray) -> float:
        """One trajectory-balance step on (start state, action, child reward)."""
        rewards = np.asarray(rewards, dtype=np.float64)
        if (rewards <= 0).any():
            raise ValueError("GFlowNet rewards must be positive (log R undefined)")
        m = len(actions)
        x = one_hot_batch(states, self.n_symbols)
        out, cache = self.net.forward_cached(x)
        logits = out[:, :-1]
        logz = out[:, -1]
        logp = log_softmax(logits)[np.arange(m), actions]
        resid = logz + logp - self.cfg.beta * np.log(rewards)
        loss = float((resid * resid).mean())
        if not np.isfinite(loss):
            raise AgentDivergence("non-finite trajectory-balance loss")

        gz = np.zeros_like(out)
        scale = 2.0 * resid / m
        gz[:, :-1] = scale[:, None] * log_prob_grad(logits, actions)
        gz[:, -1] = scale
        self.opt.step(self.net.parameters(), self.net.backward(cache, gz))
        self.last_stats = {"tb_loss": loss}
        return loss
