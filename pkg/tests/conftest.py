# tests/conftest.py
"""Shared fixtures for the rci-secrecy test suites."""

import os
import sys

import numpy as np
import pytest

# Add the project root to the Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from services.src.channel.channel_model import ChannelMatrix, RngSpec, sample_channel  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")
TEST_SEED = 1234


@pytest.fixture
def scalar_channel() -> ChannelMatrix:
    return ChannelMatrix(np.array([[1.0 + 0j]]))


@pytest.fixture
def identity2() -> ChannelMatrix:
    return ChannelMatrix(np.eye(2, dtype=complex))


@pytest.fixture
def random4() -> ChannelMatrix:
    return sample_channel(4, 4, RngSpec(TEST_SEED, 0))


@pytest.fixture
def channel_3x3_path() -> str:
    return os.path.join(FIXTURES, "channel_3x3.csv")


@pytest.fixture
def make_channel():
    """Factory for seeded K x M channels: make_channel(K, M, trial=0)."""

    def make(K: int, M: int, trial: int = 0, seed: int = TEST_SEED) -> ChannelMatrix:
        return sample_channel(K, M, RngSpec(seed, trial))

    return make
