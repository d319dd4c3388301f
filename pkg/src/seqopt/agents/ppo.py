"""Proximal policy optimization over the flat mutation action space.

Separate policy and value networks on flattened one-hot states, generalized
advantage estimation, clipped surrogate objective with entropy bonus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import one_hot_batch
from ..nn import Adam, DenseNet, categorical_sample, log_softmax
from .common import AgentDivergence, entropy_and_grad, log_prob_grad


def clipped_surrogate(ratio: np.ndarray, advantage: np.ndarray,
                      clip_eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample surrogate min(r*A, clip(r)*A) and the mask of samples whose
    unclipped branch is active (the only ones that pass gradient)."""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    surr1 = ratio * advantage
    surr2 = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantage
    return np.minimum(surr1, surr2), surr1 <= surr2


@dataclass(frozen=True)
class PPOConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    rollout_steps: int = 128
    epochs: int = 4
    minibatches: int = 8
    lr: float = 3e-4
    hidden: tuple[int, int] = (128, 128)


class PPOAgent:
    def __init__(self, seq_len: int, n_symbols: int, config: PPOConfig,
                 rng: np.random.Generator):
        self.seq_len = seq_len
        self.n_symbols = n_symbols
        self.cfg = config
        self.rng = rng
        d = seq_len * n_symbols
        n_actions = d
        h1, h2 = config.hidden
        self.policy = DenseNet([d, h1, h2, n_actions], rng)
        self.value = DenseNet([d, h1, h2, 1], rng)
        self.policy_opt = Adam(self.policy.parameters(), lr=config.lr)
        self.value_opt = Adam(self.value.parameters(), lr=config.lr)
        self._rollout: list[tuple] = []
        self._pending: tuple | None = None
        self.last_stats: dict = {}

    def act(self, states: np.ndarray) -> np.ndarray:
        x = one_hot_batch(states, self.n_symbols)
        logits = self.policy.forward(x)
        actions = categorical_sample(logits, self.rng)
        logp = log_softmax(logits)[np.arange(len(actions)), actions]
        values = self.value.forward(x)[:, 0]
        self._pending = (states.copy(), actions, logp, values)
        return actions

    def observe(self, rewards: np.ndarray, next_states: np.ndarray,
                dones: np.ndarray) -> None:
        states, actions, logp, values = self._pending
        self._rollout.append((states, actions, logp, rewards.copy(), values, dones.copy()))
        self._pending = None
        if len(self._rollout) >= self.cfg.rollout_steps:
            self._update(next_states)
            self._rollout = []

    def action_probabilities(self, state: np.ndarray) -> np.ndarray:
        x = one_hot_batch(state[None, :], self.n_symbols)
        return np.exp(log_softmax(self.policy.forward(x)))[0]

    def _update(self, bootstrap_states: np.ndarray) -> None:
        cfg = self.cfg
        t_len = len(self._rollout)
        b = len(self._rollout[0][1])
        states = np.stack([r[0] for r in self._rollout])        # (T, B, L)
        actions = np.stack([r[1] for r in self._rollout])
        old_logp = np.stack([r[2] for r in self._rollout])
        rewards = np.stack([r[3] for r in self._rollout])
        values = np.stack([r[4] for r in self._rollout])
        dones = np.stack([r[5] for r in self._rollout])

        # continuing task: bootstrap the value of the state after the rollout
        last_v = self.value.forward(one_hot_batch(bootstrap_states, self.n_symbols))[:, 0]
        adv = np.zeros((t_len, b))
        gae = np.zeros(b)
        next_v = last_v
        for t in range(t_len - 1, -1, -1):
            nonterminal = 1.0 - dones[t].astype(np.float64)
            delta = rewards[t] + cfg.gamma * next_v * nonterminal - values[t]
            gae = delta + cfg.gamma * cfg.gae_lambda * nonterminal * gae
            adv[t] = gae
            next_v = values[t]
        returns = adv + values

        n = t_len * b
        flat_states = states.reshape(n, -1)
        flat_actions = actions.reshape(n)
        flat_old_logp = old_logp.reshape(n)
        flat_adv = adv.reshape(n)
        flat_ret = returns.reshape(n)
        flat_adv = (flat_adv - flat_adv.mean()) / (flat_adv.std() + 1e-8)

        mb_size = max(1, n // cfg.minibatches)
        stats = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0, "n_minibatches": 0}
        for _ in range(cfg.epochs):
            order = self.rng.permutation(n)
            for start in range(0, n, mb_size):
                idx = order[start:start + mb_size]
                self._minibatch_step(flat_states[idx], flat_actions[idx],
                                     flat_old_logp[idx], flat_adv[idx], flat_ret[idx], stats)
        self.last_stats = {k: (v / max(stats["n_minibatches"], 1) if k != "n_minibatches" else v)
                           for k, v in stats.items()}

    def _minibatch_step(self, states, actions, old_logp, adv, ret, stats) -> None:
        cfg = self.cfg
        m = len(actions)
        x = one_hot_batch(states, self.n_symbols)

        logits, cache = self.policy.forward_cached(x)
        logp_all = log_softmax(logits)
        logp = logp_all[np.arange(m), actions]
        ratio = np.exp(logp - old_logp)
        surrogate, active = clipped_surrogate(ratio, adv, cfg.clip_eps)
        policy_loss = -surrogate.mean()
        entropy, ent_grad = entropy_and_grad(logits)

        if not np.isfinite(policy_loss):
            raise AgentDivergence(f"non-finite policy loss (ratio range "
                                  f"[{ratio.min():.3g}, {ratio.max():.3g}])")

        # surrogate gradient flows only where the unclipped branch is active
        g_logp = np.where(active, ratio * adv, 0.0)
        gz = (-g_logp[:, None] * log_prob_grad(logits, actions)
              - cfg.entropy_coef * ent_grad) / m
        self.policy_opt.step(self.policy.parameters(), self.policy.backward(cache, gz))

        v, vcache = self.value.forward_cached(x)
        verr = v[:, 0] - ret
        value_loss = float((verr * verr).mean())
        if not np.isfinite(value_loss):
            raise AgentDivergence("non-finite value loss")
        gv = (cfg.value_coef * 2.0 * verr / m)[:, None]
        self.value_opt.step(self.value.parameters(), self.value.backward(vcache, gv))

        stats["policy_loss"] += float(policy_loss)
        stats["value_loss"] += value_loss
        stats["entropy"] += float(entropy.mean())
        stats["n_minibatches"] += 1
