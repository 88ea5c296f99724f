# services/src/channel/__init__.py
"""
Channel module for the rci-secrecy project.
Random channel ensemble, leave-one-out matrices and CSV fixtures.
"""

from .channel_model import (
    ChannelError,
    ChannelMatrix,
    DimensionError,
    NoiseModel,
    RngSpec,
    UserIndexError,
    dump_channel_csv,
    insert_row,
    load_channel_csv,
    remove_row,
    sample_channel,
)

__all__ = [
    "ChannelError",
    "ChannelMatrix",
    "DimensionError",
    "NoiseModel",
    "RngSpec",
    "UserIndexError",
    "dump_channel_csv",
    "insert_row",
    "load_channel_csv",
    "remove_row",
    "sample_channel",
]
