"""Campaign planning arithmetic: throughput, duration, storage.

All byte figures use decimal units (1 GB = 10^9 bytes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

SECONDS_PER_DAY = 86_400
TWEETS_PER_STORAGE_UNIT = 5_000_000

GB = 10**9
MB = 10**6


@dataclass(frozen=True)
class RatePolicy:
    """Lookup-endpoint budget: batch of up to 100 ids every 5 seconds."""

    batch_size: int = 100
    min_interval: float = 5.0
    workers: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.batch_size <= 100:
            raise ValueError(f"batch_size must be in [1, 100], got {self.batch_size}")
        if self.min_interval <= 0:
            raise ValueError("min_interval must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class StorageModel:
    """Observed bulk sizes per 5 million hydrated tweets."""

    compressed_bytes_per_5m: int = 300 * MB
    decompressed_bytes_per_5m: int = 2_500 * MB

    def __post_init__(self) -> None:
        if self.compressed_bytes_per_5m <= 0 or self.decompressed_bytes_per_5m <= 0:
            raise ValueError("storage constants must be positive")
        if self.compressed_bytes_per_5m > self.decompressed_bytes_per_5m:
            raise ValueError("compressed size cannot exceed decompressed size")


class CollectionDays(NamedTuple):
    exact: float
    floor: int


def throughput_per_day(policy: RatePolicy = RatePolicy()) -> int:
    """Tweets collectable per day: workers * batch * requests/day."""
    return policy.workers * policy.batch_size * math.floor(
        SECONDS_PER_DAY / policy.min_interval
    )


def collection_days(num_ids: int, policy: RatePolicy = RatePolicy()) -> CollectionDays:
    """Days to request `num_ids` ids, exact quotient plus floor."""
    if num_ids < 0:
        raise ValueError("num_ids must be >= 0")
    exact = num_ids / throughput_per_day(policy)
    return CollectionDays(exact, math.floor(exact))


def storage_estimate(
    num_tweets: int, model: StorageModel = StorageModel()
) -> tuple[float, float]:
    """(compressed bytes, decompressed bytes) by linear scaling."""
    if num_tweets < 0:
        raise ValueError("num_tweets must be >= 0")
    scale = num_tweets / TWEETS_PER_STORAGE_UNIT
    return (
        scale * model.compressed_bytes_per_5m,
        scale * model.decompressed_bytes_per_5m,
    )
