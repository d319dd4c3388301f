"""Batched mutation MDP: deterministic single-site transitions, rewards from a
pluggable scorer, infinite or finite horizon.

A "step" advances all B environments at once and costs exactly B scorer
queries; cumulative env steps therefore equal cumulative scorer queries, which
is the x-axis every learning curve is plotted against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Alphabet, ContractViolation
from .oracle import Scorer


@dataclass(frozen=True)
class EnvConfig:
    seq_len: int
    alphabet: Alphabet = Alphabet()
    batch_size: int = 100
    episode_len: int | None = None  # None = infinite horizon
    seed: int = 0

    def __post_init__(self):
        if self.seq_len < 1:
            raise ContractViolation("seq_len must be >= 1")
        if self.batch_size < 1:
            raise ContractViolation("batch_size must be >= 1")
        if self.episode_len is not None and self.episode_len < 1:
            raise ContractViolation("episode_len must be >= 1 in finite mode")


@dataclass
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


class MutationEnv:
    """B independent mutation chains stepped in lockstep."""

    def __init__(self, config: EnvConfig, rng: np.random.Generator | None = None):
        self.config = config
        self._rng = rng if rng is not None else np.random.default_rng(config.seed)
        self.sequences: np.ndarray | None = None
        self.step_counts: np.ndarray | None = None
        self.total_queries = 0

    @property
    def n_actions(self) -> int:
        return self.config.seq_len * self.config.alphabet.size

    def reset(self) -> np.ndarray:
        """Draw B fresh sequences, residues i.i.d. uniform over the alphabet."""
        cfg = self.config
        self.sequences = self._rng.integers(
            0, cfg.alphabet.size, size=(cfg.batch_size, cfg.seq_len), dtype=np.int64)
        self.step_counts = np.zeros(cfg.batch_size, dtype=np.int64)
        return self.sequences.copy()

    def step(self, actions: np.ndarray, scorer: Scorer) -> list[Transition]:
        """Apply one flat action per env, reward with the post-mutation score.

        Finite mode emits done=True on the T-th step and re-randomizes those
        envs afterwards; infinite mode never sets done.
        """
        if self.sequences is None:
            raise ContractViolation("step() before reset()")
        cfg = self.config
        actions = np.asarray(actions, dtype=np.int64)
        if actions.shape != (cfg.batch_size,):
            raise ContractViolation(f"expected {cfg.batch_size} actions, got {actions.shape}")
        if actions.min() < 0 or actions.max() >= self.n_actions:
            raise ContractViolation("flat action out of range")

        states = self.sequences.copy()
        positions = actions // cfg.alphabet.size
        residues = actions % cfg.alphabet.size
        nxt = states.copy()
        nxt[np.arange(cfg.batch_size), positions] = residues

        rewards = scorer.score_batch(nxt)
        self.total_queries += cfg.batch_size
        self.step_counts += 1

        if cfg.episode_len is None:
            dones = np.zeros(cfg.batch_size, dtype=bool)
        else:
            dones = self.step_counts >= cfg.episode_len

        transitions = [
            Transition(state=states[i], action=int(actions[i]), reward=float(rewards[i]),
                       next_state=nxt[i].copy(), done=bool(dones[i]))
            for i in range(cfg.batch_size)
        ]

        self.sequences = nxt
        if dones.any():
            fresh = self._rng.integers(
                0, cfg.alphabet.size, size=(int(dones.sum()), cfg.seq_len), dtype=np.int64)
            self.sequences[dones] = fresh
            self.step_counts[dones] = 0
        return transitions


@dataclass
class CandidateArchive:
    """Top-K distinct sequences by score; ties broken by earlier discovery."""

    capacity: int = 100
    _entries: dict[bytes, tuple[float, int, np.ndarray]] = field(default_factory=dict)
    _counter: int = 0

    def update(self, seqs: np.ndarray, scores: np.ndarray) -> None:
        seqs = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
        for row, score in zip(seqs, np.atleast_1d(scores)):
            key = row.tobytes()
            score = float(score)
            prev = self._entries.get(key)
            if prev is None:
                self._entries[key] = (score, self._counter, row.copy())
                self._counter += 1
            elif score > prev[0]:
                # keep the best score ever seen, original discovery order
                self._entries[key] = (score, prev[1], prev[2])
        if len(self._entries) > 4 * self.capacity:
            self._prune()

    def _prune(self) -> None:
        ranked = sorted(self._entries.items(), key=lambda kv: (-kv[1][0], kv[1][1]))
        self._entries = dict(ranked[: self.capacity])

    def top(self, k: int | None = None) -> list[tuple[np.ndarray, float]]:
        k = self.capacity if k is None else k
        ranked = sorted(self._entries.values(), key=lambda v: (-v[0], v[1]))
        return [(seq, score) for score, _, seq in ranked[:k]]

    def sequences(self) -> np.ndarray:
        entries = self.top()
        if not entries:
            return np.empty((0, 0), dtype=np.int64)
        return np.stack([seq for seq, _ in entries])

    def best(self) -> tuple[np.ndarray, float] | None:
        entries = self.top(1)
        return entries[0] if entries else None

    def __len__(self) -> int:
        return min(len(self._entries), self.capacity)
