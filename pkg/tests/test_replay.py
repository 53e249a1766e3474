"""Replay buffer semantics: FIFO eviction, uniform sampling, validation."""

import numpy as np
import pytest

from aclab.errors import ConfigError, InsufficientData, NumericError
from aclab.replay import ReplayBuffer, Transition


def _tagged(tag):
    """A transition whose reward doubles as an identity tag."""
    obs = np.array([float(tag)])
    return Transition(obs, np.array([0.0]), float(tag), obs, False)


def test_capacity_must_be_positive():
    with pytest.raises(ConfigError):
        ReplayBuffer(0)


def test_fills_then_holds_capacity():
    buf = ReplayBuffer(3)
    for tag in range(7):
        buf.push(_tagged(tag))
        assert len(buf) == min(tag + 1, 3)


def test_fifo_eviction_order():
    buf = ReplayBuffer(3)
    for tag in range(5):
        buf.push(_tagged(tag))
    assert [t.reward for t in buf.snapshot()] == [2.0, 3.0, 4.0]


def test_snapshot_is_oldest_first_before_wraparound():
    buf = ReplayBuffer(5)
    for tag in range(3):
        buf.push(_tagged(tag))
    assert [t.reward for t in buf.snapshot()] == [0.0, 1.0, 2.0]


def test_eviction_under_many_wraps():
    buf = ReplayBuffer(4)
    for tag in range(103):
        buf.push(_tagged(tag))
    assert [t.reward for t in buf.snapshot()] == [99.0, 100.0, 101.0, 102.0]


def test_sample_requires_enough_data():
    buf = ReplayBuffer(10)
    buf.push(_tagged(0))
    with pytest.raises(InsufficientData):
        buf.sample(2, np.random.default_rng(0))
    assert len(buf.sample(1, np.random.default_rng(0))) == 1


def test_sample_returns_stored_transitions():
    buf = ReplayBuffer(4)
    pushed = [_tagged(t) for t in range(4)]
    for t in pushed:
        buf.push(t)
    batch = buf.sample(4, np.random.default_rng(1))
    for t in batch:
        assert any(t is p for p in pushed)


def test_sample_is_with_replacement():
    buf = ReplayBuffer(4)
    for tag in range(4):
        buf.push(_tagged(tag))
    rng = np.random.default_rng(2)
    # drawing 4 of 4 without replacement could never repeat a tag
    saw_duplicate = False
    for _ in range(50):
        tags = [t.reward for t in buf.sample(4, rng)]
        if len(set(tags)) < 4:
            saw_duplicate = True
            break
    assert saw_duplicate


def test_sample_never_returns_evicted_items():
    buf = ReplayBuffer(50)
    for tag in range(200):
        buf.push(_tagged(tag))
    rng = np.random.default_rng(3)
    for _ in range(100):
        for t in buf.sample(32, rng):
            assert t.reward >= 150.0


def test_sampling_is_seed_deterministic():
    buf = ReplayBuffer(8)
    for tag in range(8):
        buf.push(_tagged(tag))
    a = [t.reward for t in buf.sample(8, np.random.default_rng(7))]
    b = [t.reward for t in buf.sample(8, np.random.default_rng(7))]
    assert a == b


@pytest.mark.parametrize(
    "transition",
    [
        Transition(np.array([np.nan]), np.array([0.0]), 0.0, np.array([0.0]), False),
        Transition(np.array([0.0]), np.array([np.inf]), 0.0, np.array([0.0]), False),
        Transition(np.array([0.0]), np.array([0.0]), float("nan"), np.array([0.0]), False),
        Transition(np.array([0.0]), np.array([0.0]), 0.0, np.array([-np.inf]), False),
    ],
)
def test_rejects_non_finite_values(transition):
    buf = ReplayBuffer(4)
    buf.push(_tagged(0))
    with pytest.raises(NumericError):
        buf.push(transition)
    assert len(buf) == 1  # the bad push left no trace
