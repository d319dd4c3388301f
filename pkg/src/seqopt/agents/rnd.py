"""Random network distillation: intrinsic novelty bonus from the prediction
error of a trained net against a frozen random target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import one_hot_batch
from ..nn import Adam, DenseNet
from .common import RunningMeanStd


@dataclass(frozen=True)
class RNDConfig:
    embed_dim: int = 32
    hidden: int = 64
    lr: float = 1e-3
    # chosen so the normalized bonus sits near 10% of the extrinsic scale
    bonus_coef: float = 0.05


class RNDPair:
    def __init__(self, seq_len: int, n_symbols: int, config: RNDConfig,
                 rng: np.random.Generator):
        self.n_symbols = n_symbols
        self.cfg = config
        d = seq_len * n_symbols
        self.target = DenseNet([d, config.hidden, config.embed_dim], rng)  # frozen
        self.predictor = DenseNet([d, config.hidden, config.embed_dim], rng)
        self.opt = Adam(self.predictor.parameters(), lr=config.lr)
        self.norm = RunningMeanStd()

    def raw_error(self, states: np.ndarray) -> np.ndarray:
        x = one_hot_batch(states, self.n_symbols)
        diff = self.predictor.forward(x) - self.target.forward(x)
        return (diff * diff).mean(axis=1)

    def intrinsic(self, states: np.ndarray) -> np.ndarray:
        """Normalized novelty bonus; also feeds the running normalizer."""
        raw = self.raw_error(states)
        self.norm.update(raw)
        return raw / (self.norm.std + 1e-8)

    def update(self, states: np.ndarray) -> float:
        """Train the predictor toward the frozen target; returns the MSE."""
        x = one_hot_batch(states, self.n_symbols)
        pred, cache = self.predictor.forward_cached(x)
        tgt = self.target.forward(x)
        diff = pred - tgt
        loss = float((diff * diff).mean())
        gz = 2.0 * diff / diff.size
        self.opt.step(self.predictor.parameters(), self.predictor.backward(cache, gz))
        return loss
