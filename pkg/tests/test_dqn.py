import numpy as np
import pytest

from seqopt.agents import run_agent
from seqopt.agents.dqn import DQNAgent, DQNConfig
from seqopt.core import Alphabet
from seqopt.env import EnvConfig

from conftest import BanditScorer


def test_gamma_zero_target_is_reward():
    rng = np.random.default_rng(0)
    cfg = DQNConfig(gamma=0.0, hidden=(8, 8), warmup=1, batch_size=4, lr=1e-2)
    agent = DQNAgent(2, 3, cfg, rng)
    # one fixed transition replayed to a regression fixed point
    s = np.array([[0, 1]])
    a = np.array([2])
    r = np.array([0.7])
    s2 = np.array([[1, 1]])
    agent.replay.push_batch(s, a, r, s2, np.array([False]))
    for _ in range(3000):
        agent.update()
    from seqopt.core import one_hot_batch
    q = agent.qnet.forward(one_hot_batch(s, 3))
    assert q[0, 2] == pytest.approx(0.7, abs=1e-3)


def test_done_cuts_bootstrap():
    rng = np.random.default_rng(1)
    cfg = DQNConfig(gamma=0.9, hidden=(8, 8), warmup=1, batch_size=2, lr=1e-2,
                    target_sync=10)
    agent = DQNAgent(2, 2, cfg, rng)
    s = np.array([[0, 1], [0, 1]])
    a = np.array([1, 1])
    r = np.array([0.5, 0.5])
    s2 = np.array([[1, 1], [1, 1]])
    agent.replay.push_batch(s, a, r, s2, np.array([True, True]))
    for _ in range(3000):
        agent.update()
    from seqopt.core import one_hot_batch
    q = agent.qnet.forward(one_hot_batch(s[:1], 2))
    # with done=True the target collapses to r even though gamma > 0
    assert q[0, 1] == pytest.approx(0.5, abs=1e-3)


def test_epsilon_decays_linearly_to_floor():
    rng = np.random.default_rng(2)
    agent = DQNAgent(2, 2, DQNConfig(hidden=(8, 8)), rng, total_env_steps=1000)
    assert agent.epsilon == 1.0
    agent.env_steps = 100  # half of the 20% decay window
    assert agent.epsilon == pytest.approx(1.0 + 0.5 * (0.05 - 1.0))
    agent.env_steps = 200
    assert agent.epsilon == pytest.approx(0.05)
    agent.env_steps = 900
    assert agent.epsilon == pytest.approx(0.05)


def test_target_network_sync_schedule():
    rng = np.random.default_rng(3)
    cfg = DQNConfig(hidden=(8, 8), warmup=1, batch_size=2, target_sync=5)
    agent = DQNAgent(2, 2, cfg, rng)
    agent.replay.push_batch(np.array([[0, 0]]), np.array([0]), np.array([0.5]),
                            np.array([[1, 0]]), np.array([False]))
    before = [w.copy() for w in agent.target.weights]
    for _ in range(4):
        agent.update()
    assert all((a == b).all() for a, b in zip(agent.target.weights, before))
    agent.update()  # fifth update syncs
    assert any((a != b).any() for a, b in zip(agent.target.weights, before))


@pytest.mark.slow
def test_bandit_greedy_action_after_training():
    cfg = EnvConfig(seq_len=1, alphabet=Alphabet(("X", "Y")), batch_size=20, seed=0)
    for seed in (1, 2, 3):
        res = run_agent("dqn", cfg, BanditScorer(), budget=40_000, seed=seed,
                        agent_config=DQNConfig(hidden=(32, 32), warmup=128,
                                               batch_size=128, target_sync=200))
        for state in (0, 1):
            assert res.agent.greedy_action(np.array([state])) == 1
