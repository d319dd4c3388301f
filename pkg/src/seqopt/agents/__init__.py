from .common import AgentDivergence, ReplayBuffer, RunningMeanStd
from .dqn import DQNAgent, DQNConfig
from .gfn import GFNAgent, GFNConfig
from .mcmc import AnnealState, MCMCSampler, decay_for_budget, mcmc_step
from .ppo import PPOAgent, PPOConfig
from .rnd import RNDConfig, RNDPair
from .runner import (AGENT_KINDS, MCMCRunConfig, ProxyContext, RunResult,
                     run_agent)

__all__ = [
    "AGENT_KINDS", "AgentDivergence", "AnnealState", "DQNAgent", "DQNConfig",
    "GFNAgent", "GFNConfig", "MCMCRunConfig", "MCMCSampler", "PPOAgent",
    "PPOConfig", "ProxyContext", "ReplayBuffer", "RNDConfig", "RNDPair",
    "RunningMeanStd", "RunResult", "decay_for_budget", "mcmc_step", "run_agent",
]
