"""Distilled proxy reward model.

A small dense regressor (≈15k parameters by default) maps flattened one-hot
sequences through a logistic squash into (0,1). It is pretrained by MSE
regression on oracle-labeled sequences and periodically finetuned in-loop on
the top-K of the visited pool, with Pearson-correlation monitoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import one_hot_batch
from .nn import Adam, DenseNet
from .oracle import Scorer


def pearson(xs, ys) -> float:
    """Sample Pearson correlation; undefined for constant inputs."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("need two equal-length 1-D series")
    if xs.size < 2:
        raise ValueError("need at least 2 points")
    xd = xs - xs.mean()
    yd = ys - ys.mean()
    vx = (xd * xd).sum()
    vy = (yd * yd).sum()
    if vx == 0.0 or vy == 0.0:
        raise ValueError("zero variance: correlation undefined")
    return float((xd * yd).sum() / np.sqrt(vx * vy))


def _solve_hidden(n_inputs: int, budget: int, hidden2: int) -> int:
    # params = h1*(d + 1 + h2) + 2*h2 + 1
    h1 = round((budget - 2 * hidden2 - 1) / (n_inputs + 1 + hidden2))
    return int(min(max(h1, 4), 512))


class ProxyModel(Scorer):
    """Dense proxy scorer over (B, L_s) index arrays; inference is deterministic."""

    name = "proxy"

    def __init__(self, seq_len: int, n_symbols: int, rng: np.random.Generator,
                 param_budget: int = 15_000, hidden2: int = 32):
        super().__init__()
        self.seq_len = seq_len
        self.n_symbols = n_symbols
        d = seq_len * n_symbols
        h1 = _solve_hidden(d, param_budget, hidden2)
        self.net = DenseNet([d, h1, hidden2, 1], rng)

    @property
    def n_params(self) -> int:
        return self.net.n_params

    def _score_batch(self, seqs: np.ndarray) -> np.ndarray:
        x = one_hot_batch(seqs, self.n_symbols)
        z = self.net.forward(x)[:, 0]
        return 1.0 / (1.0 + np.exp(-z))

    def predict(self, seqs: np.ndarray) -> np.ndarray:
        """Like score_batch but unmetered (internal ranking use)."""
        seqs = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
        return self._score_batch(seqs)

    def train(self, seqs: np.ndarray, labels: np.ndarray, epochs: int,
              rng: np.random.Generator, lr: float = 1e-3, batch_size: int = 64,
              optimizer: Adam | None = None) -> list[float]:
        """Minibatch MSE regression; returns the per-epoch training loss."""
        seqs = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
        labels = np.asarray(labels, dtype=np.float64)
        if seqs.shape[0] == 0:
            raise ValueError("empty training corpus")
        if seqs.shape[0] != labels.shape[0]:
            raise ValueError("sequence/label count mismatch")
        x = one_hot_batch(seqs, self.n_symbols)
        opt = optimizer if optimizer is not None else Adam(self.net.parameters(), lr=lr)
        losses = []
        n = x.shape[0]
        for _ in range(epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            for start in range(0, n, batch_size):
                idx = order[start:start + batch_size]
                xb, yb = x[idx], labels[idx]
                z, cache = self.net.forward_cached(xb)
                p = 1.0 / (1.0 + np.exp(-z[:, 0]))
                err = p - yb
                epoch_loss += float((err * err).sum())
                # d(mean sq err)/dz through the logistic squash
                gz = (2.0 * err * p * (1.0 - p) / idx.size)[:, None]
                grads = self.net.backward(cache, gz)
                opt.step(self.net.parameters(), grads)
            losses.append(epoch_loss / n)
        return losses

    def mse(self, seqs: np.ndarray, labels: np.ndarray) -> float:
        pred = self.predict(seqs)
        err = pred - np.asarray(labels, dtype=np.float64)
        return float((err * err).mean())


@dataclass(frozen=True)
class FinetuneSchedule:
    """When and how the proxy is refreshed during a run."""

    interval: int = 2000     # environment steps (= proxy queries) between ticks
    top_k: int = 100
    epochs: int = 50
    lr: float = 1e-3

    def __post_init__(self):
        if min(self.interval, self.top_k, self.epochs) < 1 or self.lr <= 0:
            raise ValueError("schedule values must be positive")


@dataclass
class CorrelationLog:
    """Series of (oracle-query count, Pearson r) recorded at each tick."""

    entries: list[tuple[int, float]] = field(default_factory=list)

    def append(self, oracle_queries: int, r: float) -> None:
        if not np.isnan(r) and not -1.0 <= r <= 1.0:
            raise ValueError(f"correlation {r} outside [-1, 1]")
        self.entries.append((oracle_queries, r))


@dataclass(frozen=True)
class TickResult:
    pearson_r: float
    n_selected: int
    oracle_queries: int
    mse_per_epoch: tuple[float, ...]


def finetune_tick(model: ProxyModel, pool: np.ndarray, oracle: Scorer,
                  schedule: FinetuneSchedule, rng: np.random.Generator) -> TickResult:
    """Rank the visited pool by proxy score, oracle-label the top-K distinct
    sequences, and finetune on them with a fresh optimizer state.

    The correlation entry uses the *pre-finetune* proxy predictions. An oracle
    failure aborts the tick before the model is touched.
    """
    pool = np.atleast_2d(np.asarray(pool, dtype=np.int64))
    if pool.shape[0] == 0:
        raise ValueError("empty visited pool")
    _, unique_idx = np.unique(pool, axis=0, return_index=True)
    pool = pool[np.sort(unique_idx)]

    proxy_scores = model.predict(pool)
    k = min(schedule.top_k, pool.shape[0])
    top = np.argsort(-proxy_scores, kind="stable")[:k]
    selected = pool[top]

    labels = oracle.score_batch(selected)  # may raise; model still untouched
    try:
        r = pearson(proxy_scores[top], labels)
    except ValueError:
        r = float("nan")  # degenerate labels (e.g. constant test oracle)

    # fresh optimizer state each tick: no stale momentum across bursts
    mses = model.train(selected, labels, epochs=schedule.epochs, rng=rng, lr=schedule.lr)
    return TickResult(pearson_r=r, n_selected=k, oracle_queries=k,
                      mse_per_epoch=tuple(mses))


def make_pretrain_corpus(scorer: Scorer, seq_len: int, n_symbols: int, size: int,
                         rng: np.random.Generator, hill_frac: float = 0.1,
                         hill_steps: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """Uniform random sequences plus short greedy hill climbs from the best of
    them, labeled by ``scorer``. Stands in for a curated pretraining corpus.
    """
    if size < 1:
        raise ValueError("corpus size must be positive")
    seqs = rng.integers(0, n_symbols, size=(size, seq_len), dtype=np.int64)
    labels = scorer.score_batch(seqs)
    extra_seqs, extra_labels = [], []
    n_hill = int(round(size * hill_frac))
    if n_hill and hill_steps:
        top = np.argsort(-labels, kind="stable")[:n_hill]
        current = seqs[top].copy()
        current_scores = labels[top].copy()
        for _ in range(hill_steps):
            pos = rng.integers(0, seq_len, size=n_hill)
            res = rng.integers(0, n_symbols, size=n_hill)
            proposal = current.copy()
            proposal[np.arange(n_hill), pos] = res
            prop_scores = scorer.score_batch(proposal)
            extra_seqs.append(proposal.copy())
            extra_labels.append(prop_scores.copy())
            better = prop_scores > current_scores
            current[better] = proposal[better]
            current_scores[better] = prop_scores[better]
    if extra_seqs:
        seqs = np.concatenate([seqs] + extra_seqs)
        labels = np.concatenate([labels] + extra_labels)
    return seqs, labels


def pretrain(model: ProxyModel, seqs: np.ndarray, labels: np.ndarray, epochs: int,
             rng: np.random.Generator, lr: float = 1e-3) -> list[float]:
    """MSE pretraining on an oracle-labeled corpus; returns per-epoch losses."""
    return model.train(seqs, labels, epochs=epochs, rng=rng, lr=lr)
