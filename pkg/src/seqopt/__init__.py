"""seqopt: discrete black-box sequence optimization over a mutation MDP.

Batched single-site-mutation environments, pluggable oracle/proxy scorers,
five optimizers (PPO, PPO-RND, DQN, single-step GFlowNet, annealed MCMC) plus
a random baseline, and a multi-objective evaluation suite covering sequence
diversity, structural metrics, and a biophysical panel.
"""

from .core import (Alphabet, ContractViolation, MutationAction, Sequence,
                   apply_mutation, decode_action, encode_action, encode_one_hot)
from .env import CandidateArchive, EnvConfig, MutationEnv, Transition
from .oracle import (CachedScorer, PottsLandscape, PottsScorer, ScoreReport,
                     Scorer, ScorerError, cached, enumerate_optimum,
                     make_synthetic_scorer, potts_score, twin_landscapes)
from .proxy import FinetuneSchedule, ProxyModel, finetune_tick, pearson, pretrain

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "CachedScorer", "CandidateArchive", "ContractViolation",
    "EnvConfig", "FinetuneSchedule", "MutationAction", "MutationEnv",
    "PottsLandscape", "PottsScorer", "ProxyModel", "ScoreReport", "Scorer",
    "ScorerError", "Sequence", "Transition", "apply_mutation", "cached",
    "decode_action", "encode_action", "encode_one_hot", "enumerate_optimum",
    "finetune_tick", "make_synthetic_scorer", "pearson", "potts_score",
    "pretrain", "twin_landscapes", "__version__",
]
