"""Deep Q-learning with replay, a periodically synced target network, and
linearly decaying epsilon-greedy exploration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import one_hot_batch
from ..nn import Adam, DenseNet
from .common import AgentDivergence, ReplayBuffer


@dataclass(frozen=True)
class DQNConfig:
    gamma: float = 0.99
    capacity: int = 100_000
    batch_size: int = 256
    target_sync: int = 1000
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_frac: float = 0.2  # fraction of total env steps spent decaying
    lr: float = 1e-4
    warmup: int = 512
    hidden: tuple[int, int] = (128, 128)
    huber_delta: float = 1.0


class DQNAgent:
    def __init__(self, seq_len: int, n_symbols: int, config: DQNConfig,
                 rng: np.random.Generator, total_env_steps: int | None = None):
        self.seq_len = seq_len
        self.n_symbols = n_symbols
        self.cfg = config
        self.rng = rng
        d = seq_len * n_symbols
        h1, h2 = config.hidden
        self.qnet = DenseNet([d, h1, h2, d], rng)
        self.target = self.qnet.copy()
        self.opt = Adam(self.qnet.parameters(), lr=config.lr)
        self.replay = ReplayBuffer(config.capacity, seq_len)
        self.env_steps = 0
        self.updates = 0
        self.decay_steps = max(1, int((total_env_steps or 10_000) * config.eps_decay_frac))
        self.last_stats: dict = {}

    @property
    def epsilon(self) -> float:
        frac = min(1.0, self.env_steps / self.decay_steps)
        return self.cfg.eps_start + frac * (self.cfg.eps_end - self.cfg.eps_start)

    def act(self, states: np.ndarray) -> np.ndarray:
        b = states.shape[0]
        q = self.qnet.forward(one_hot_batch(states, self.n_symbols))
        greedy = q.argmax(axis=1)
        explore = self.rng.random(b) < self.epsilon
        random_actions = self.rng.integers(0, q.shape[1], size=b)
        return np.where(explore, random_actions, greedy).astype(np.int64)

    def greedy_action(self, state: np.ndarray) -> int:
        q = self.qnet.forward(one_hot_batch(state[None, :], self.n_symbols))
        return int(q[0].argmax())

    def observe(self, states, actions, rewards, next_states, dones) -> None:
        self.replay.push_batch(states, actions, rewards, next_states, dones)
        self.env_steps += len(actions)
        if self.replay.size >= max(self.cfg.warmup, self.cfg.batch_size):
            self.update()

    def update(self) -> float:
        cfg = self.cfg
        s, a, r, s2, done = self.replay.sample(cfg.batch_size, self.rng)
        x2 = one_hot_batch(s2, self.n_symbols)
        next_q = self.target.forward(x2).max(axis=1)
        # infinite horizon never cuts the bootstrap; finite mode cuts at done
        targets = r + cfg.gamma * next_q * (1.0 - done.astype(np.float64))

        x = one_hot_batch(s, self.n_symbols)
        q, cache = self.qnet.forward_cached(x)
        chosen = q[np.arange(len(a)), a]
        err = chosen - targets
        huber = np.where(np.abs(err) <= cfg.huber_delta,
                         0.5 * err * err,
                         cfg.huber_delta * (np.abs(err) - 0.5 * cfg.huber_delta))
        loss = float(huber.mean())
        if not np.isfinite(loss):
            raise AgentDivergence(f"non-finite DQN loss (|err| max {np.abs(err).max():.3g})")

        grad = np.clip(err, -cfg.huber_delta, cfg.huber_delta) / len(a)
        gz = np.zeros_like(q)
        gz[np.arange(len(a)), a] = grad
        self.opt.step(self.qnet.parameters(), self.qnet.backward(cache, gz))

        self.updates += 1
        if self.updates % cfg.target_sync == 0:
            self.target = self.qnet.copy()
        self.last_stats = {"loss": loss, "epsilon": self.epsilon}
        return loss
