"""Metropolis-Hastings over single-site mutations with simulated annealing.

Proposals are uniform over the (position, residue) grid, hence symmetric;
acceptance is min(1, exp(delta / T)) and T decays geometrically.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..oracle import Scorer


@dataclass(frozen=True)
class AnnealState:
    """One chain: current sequence, its score, and the temperature schedule."""

    sequence: np.ndarray
    score: float
    temperature: float
    decay: float = 1.0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must stay positive")


def mcmc_step(state: AnnealState, scorer: Scorer, rng: np.random.Generator,
              n_symbols: int) -> AnnealState:
    """One propose/accept/anneal step of a single chain (one scorer query)."""
    seq = state.sequence
    pos = int(rng.integers(0, len(seq)))
    res = int(rng.integers(0, n_symbols))
    proposal = seq.copy()
    proposal[pos] = res
    prop_score = float(scorer.score_batch(proposal[None, :])[0])
    delta = prop_score - state.score
    accept = delta >= 0 or rng.random() < np.exp(delta / state.temperature)
    return replace(
        state,
        sequence=proposal if accept else seq,
        score=prop_score if accept else state.score,
        temperature=state.temperature * state.decay,
    )


def decay_for_budget(t_start: float, t_end: float, n_steps: int) -> float:
    """Geometric decay rate reaching t_end after n_steps steps."""
    if n_steps < 1:
        return 1.0
    return float((t_end / t_start) ** (1.0 / n_steps))


class MCMCSampler:
    """B annealed chains stepped in lockstep; one batched scorer query per step."""

    def __init__(self, init_sequences: np.ndarray, init_scores: np.ndarray,
                 n_symbols: int, rng: np.random.Generator,
                 t_start: float = 1.0, decay: float = 1.0):
        self.sequences = np.array(init_sequences, dtype=np.int64)
        self.scores = np.array(init_scores, dtype=np.float64)
        self.n_symbols = n_symbols
        self.rng = rng
        self.temperature = t_start
        self.decay = decay

    def step(self, scorer: Scorer) -> tuple[np.ndarray, np.ndarray]:
        """Returns the proposed sequences and their scores (every proposal is
        a legitimate scored candidate, accepted or not)."""
        b, ls = self.sequences.shape
        pos = self.rng.integers(0, ls, size=b)
        res = self.rng.integers(0, self.n_symbols, size=b)
        proposal = self.sequences.copy()
        proposal[np.arange(b), pos] = res
        prop_scores = scorer.score_batch(proposal)

        delta = prop_scores - self.scores
        accept = (delta >= 0) | (self.rng.random(b) < np.exp(np.minimum(delta, 0.0) / self.temperature))
        self.sequences[accept] = proposal[accept]
        self.scores[accept] = prop_scores[accept]
        self.temperature *= self.decay
        return proposal, prop_scores
