"""Budgeted training loops for every optimizer.

The loop advances a batch of B environments until the scorer-query budget is
exhausted (each batched step costs exactly B queries) and emits one learning-
curve row per scoring event. In proxy mode the driving scorer is the proxy;
the oracle is consulted only inside finetune ticks and the per-tick snapshot
of the current batch, and every oracle call is itemized in the ledger.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env import CandidateArchive, EnvConfig, MutationEnv
from ..oracle import Scorer, ScorerError
from ..proxy import CorrelationLog, FinetuneSchedule, ProxyModel, finetune_tick
from .dqn import DQNAgent, DQNConfig
from .gfn import GFNAgent, GFNConfig
from .mcmc import MCMCSampler, decay_for_budget
from .ppo import PPOAgent, PPOConfig
from .rnd import RNDConfig, RNDPair

AGENT_KINDS = ("ppo", "ppo-rnd", "dqn", "gfn", "mcmc", "random")


@dataclass
class ProxyContext:
    proxy: ProxyModel
    oracle: Scorer
    schedule: FinetuneSchedule
    rng: np.random.Generator


@dataclass(frozen=True)
class MCMCRunConfig:
    t_start: float = 1.0
    t_end: float = 1e-2


@dataclass
class RunResult:
    kind: str
    archive: CandidateArchive
    curves: list[dict]
    final_batch: np.ndarray      # last scored batch (pre any episode reset)
    final_scores: np.ndarray
    ledger: dict
    status: str = "ok"
    correlation: CorrelationLog | None = None
    agent: object = None

    @property
    def best_score(self) -> float:
        best = self.archive.best()
        return best[1] if best else float("nan")


class _TickState:
    """Bookkeeping for proxy finetune ticks and oracle snapshots."""

    def __init__(self, ctx: ProxyContext):
        self.ctx = ctx
        self.next_at = ctx.schedule.interval
        self.recent: list[np.ndarray] = []
        self.tick_costs: list[int] = []
        self.snapshot_queries = 0
        self.correlation: list[tuple[int, float]] = []

    def after_step(self, used: int, archive: CandidateArchive,
                   current_batch: np.ndarray, row: dict) -> None:
        self.recent.append(current_batch.copy())
        ctx = self.ctx
        while used >= self.next_at:
            snapshot = ctx.oracle.score_batch(current_batch)
            self.snapshot_queries += len(current_batch)
            row["mean_oracle_score"] = float(snapshot.mean())

            pool = self.recent
            top = archive.sequences()
            if top.size:
                pool = [top] + pool
            result = finetune_tick(ctx.proxy, np.concatenate(pool), ctx.oracle,
                                   ctx.schedule, ctx.rng)
            self.tick_costs.append(result.oracle_queries)
            self.correlation.append((int(ctx.oracle.queries), result.pearson_r))
            self.recent = []
            self.next_at += ctx.schedule.interval


def run_agent(kind: str, env_config: EnvConfig, scorer: Scorer, budget: int,
              seed: int, agent_config=None, proxy_ctx: ProxyContext | None = None,
              shadow_scorer: Scorer | None = None,
              archive_capacity: int = 100) -> RunResult:
    """Train one optimizer against one scorer under an exact query budget.

    ``shadow_scorer`` (mismatch experiments) is consulted once per step purely
    for logging; its queries are itemized separately from the budget.
    """
    if kind not in AGENT_KINDS:
        raise ValueError(f"unknown agent kind {kind!r} (choose from {AGENT_KINDS})")
    if budget < env_config.batch_size:
        raise ValueError("budget smaller than one batched step")

    ss = np.random.SeedSequence(seed)
    env_rng, agent_rng, aux_rng = (np.random.default_rng(s) for s in ss.spawn(3))
    env = MutationEnv(env_config, env_rng)
    archive = CandidateArchive(capacity=archive_capacity)
    curves: list[dict] = []

    start_queries = scorer.queries
    oracle_start = proxy_ctx.oracle.queries if proxy_ctx else 0
    shadow_start = shadow_scorer.queries if shadow_scorer else 0
    ticks = _TickState(proxy_ctx) if proxy_ctx else None
    status = "ok"
    agent = None
    final_batch = np.empty((0, env_config.seq_len), dtype=np.int64)
    final_scores = np.empty(0, dtype=np.float64)

    try:
        if kind == "mcmc":
            agent, final_batch, final_scores = _run_mcmc(
                env, scorer, budget, agent_config, agent_rng, archive, curves,
                ticks, shadow_scorer)
        else:
            agent, final_batch, final_scores = _run_env_loop(
                kind, env, scorer, budget, agent_config, agent_rng, aux_rng,
                archive, curves, ticks, shadow_scorer)
    except ScorerError as exc:
        status = f"aborted: {exc}"

    ledger = {
        "driving_scorer": scorer.name,
        "budget": budget,
        "env_queries": scorer.queries - start_queries,
    }
    correlation = None
    if proxy_ctx:
        ledger.update({
            "oracle_finetune_queries": sum(ticks.tick_costs),
            "oracle_snapshot_queries": ticks.snapshot_queries,
            "oracle_total_queries": proxy_ctx.oracle.queries - oracle_start,
            "finetune_ticks": len(ticks.tick_costs),
        })
        correlation = CorrelationLog(entries=list(ticks.correlation))
    if shadow_scorer:
        ledger["shadow_queries"] = shadow_scorer.queries - shadow_start

    return RunResult(kind=kind, archive=archive, curves=curves,
                     final_batch=final_batch, final_scores=final_scores,
                     ledger=ledger, status=status, correlation=correlation,
                     agent=agent)


def _build_agents(kind, env, config, agent_rng, aux_rng, budget):
    ls, la = env.config.seq_len, env.config.alphabet.size
    if kind == "ppo":
        return PPOAgent(ls, la, config or PPOConfig(), agent_rng), None
    if kind == "ppo-rnd":
        ppo_cfg, rnd_cfg = PPOConfig(), RNDConfig()
        if isinstance(config, tuple):
            ppo_cfg, rnd_cfg = config
        elif isinstance(config, PPOConfig):
            ppo_cfg = config
        elif isinstance(config, RNDConfig):
            rnd_cfg = config
        return (PPOAgent(ls, la, ppo_cfg, agent_rng),
                RNDPair(ls, la, rnd_cfg, aux_rng))
    if kind == "dqn":
        return DQNAgent(ls, la, config or DQNConfig(), agent_rng,
                        total_env_steps=budget), None
    if kind == "gfn":
        return GFNAgent(ls, la, config or GFNConfig(), agent_rng), None
    return None, None  # uniform-random baseline


def _run_env_loop(kind, env, scorer, budget, config, agent_rng, aux_rng,
                  archive, curves, ticks, shadow_scorer):
    b = env.config.batch_size
    states = env.reset()
    agent, rnd = _build_agents(kind, env, config, agent_rng, aux_rng, budget)
    used = 0
    last_batch, last_scores = states, np.empty(0)

    while used + b <= budget:
        if agent is None:
            actions = agent_rng.integers(0, env.n_actions, size=b)
        else:
            actions = agent.act(states)
        transitions = env.step(actions, scorer)
        used += b

        rewards = np.array([t.reward for t in transitions])
        next_states = np.stack([t.next_state for t in transitions])
        dones = np.array([t.done for t in transitions])
        last_batch, last_scores = next_states, rewards

        if isinstance(agent, PPOAgent):
            train_rewards = rewards
            if rnd is not None:
                bonus = rnd.intrinsic(next_states)
                train_rewards = rewards + rnd.cfg.bonus_coef * bonus
                rnd.update(next_states)
            agent.observe(train_rewards, env.sequences, dones)
        elif isinstance(agent, DQNAgent):
            agent.observe(states, actions, rewards, next_states, dones)
        elif isinstance(agent, GFNAgent):
            agent.observe(states, actions, rewards, next_states, dones)

        archive.update(next_states, rewards)
        row = {"queries": used, "mean_score": float(rewards.mean())}
        if isinstance(agent, DQNAgent):
            row["epsilon"] = agent.epsilon
        if shadow_scorer is not None:
            row["mean_oracle_score"] = float(shadow_scorer.score_batch(next_states).mean())
        if ticks is not None:
            ticks.after_step(used, archive, next_states, row)
        curves.append(row)
        states = env.sequences.copy()
    return agent, last_batch, last_scores


def _run_mcmc(env, scorer, budget, config, rng, archive, curves, ticks,
              shadow_scorer):
    cfg = config or MCMCRunConfig()
    b = env.config.batch_size
    init = env.reset()
    init_scores = scorer.score_batch(init)
    used = b
    n_steps = max(budget // b - 1, 1)
    sampler = MCMCSampler(init, init_scores, env.config.alphabet.size, rng,
                          t_start=cfg.t_start,
                          decay=decay_for_budget(cfg.t_start, cfg.t_end, n_steps))
    archive.update(init, init_scores)
    _mcmc_row(sampler, used, archive, curves, ticks, shadow_scorer)

    while used + b <= budget:
        proposal, prop_scores = sampler.step(scorer)
        used += b
        archive.update(proposal, prop_scores)
        _mcmc_row(sampler, used, archive, curves, ticks, shadow_scorer)
    return sampler, sampler.sequences.copy(), sampler.scores.copy()


def _mcmc_row(sampler, used, archive, curves, ticks, shadow_scorer):
    row = {"queries": used, "mean_score": float(sampler.scores.mean()),
           "temperature": sampler.temperature}
    if shadow_scorer is not None:
        row["mean_oracle_score"] = float(shadow_scorer.score_batch(sampler.sequences).mean())
    if ticks is not None:
        ticks.after_step(used, archive, sampler.sequences, row)
    curves.append(row)
