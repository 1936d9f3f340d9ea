import pytest
from hypothesis import given
from hypothesis import strategies as st

from tweetvault.planner import (
    GB,
    RatePolicy,
    StorageModel,
    collection_days,
    storage_estimate,
    throughput_per_day,
)


def test_default_throughput():
    assert throughput_per_day(RatePolicy()) == 1_728_000


def test_thirty_workers():
    assert throughput_per_day(RatePolicy(workers=30)) == 51_840_000


def test_degenerate_policy():
    assert throughput_per_day(RatePolicy(batch_size=1, min_interval=86_400)) == 1


def test_full_id_space_duration():
    days = collection_days(3_061_013_977)
    assert days.floor == 1771
    assert days.exact == pytest.approx(1771.42, abs=0.01)


def test_archive_duration_exact_vs_authorial_rounding():
    days = collection_days(1_483_823_453)
    assert 858 <= days.exact <= 859
    assert days.floor == 858


def test_fleet_duration():
    days = collection_days(1_483_823_453, RatePolicy(workers=30))
    assert 28 <= days.exact <= 29
    assert days.floor == 28


def test_storage_estimate_archive_scale():
    compressed, decompressed = storage_estimate(1_483_823_453)
    assert 88 * GB <= compressed <= 90 * GB
    assert 740 * GB <= decompressed <= 752 * GB


def test_storage_identity_and_zero():
    model = StorageModel()
    assert storage_estimate(5_000_000, model) == (
        model.compressed_bytes_per_5m,
        model.decompressed_bytes_per_5m,
    )
    assert storage_estimate(0) == (0.0, 0.0)


@given(st.integers(0, 10**10), st.integers(0, 10**10), st.integers(1, 64))
def test_collection_days_additive(a, b, workers):
    policy = RatePolicy(workers=workers)
    total = collection_days(a + b, policy).exact
    assert total == pytest.approx(
        collection_days(a, policy).exact + collection_days(b, policy).exact
    )


@given(st.integers(0, 10**12), st.integers(1, 1000))
def test_storage_homogeneous(n, k):
    c1, d1 = storage_estimate(n)
    ck, dk = storage_estimate(n * k)
    assert ck == pytest.approx(c1 * k)
    assert dk == pytest.approx(d1 * k)
    assert c1 <= d1


@given(st.integers(1, 100), st.integers(1, 3600), st.integers(1, 100))
def test_throughput_linear_in_workers_and_batch(batch, interval, workers):
    base = throughput_per_day(RatePolicy(batch_size=batch, min_interval=interval))
    scaled = throughput_per_day(
        RatePolicy(batch_size=batch, min_interval=interval, workers=workers)
    )
    assert scaled == base * workers


def test_policy_validation():
    with pytest.raises(ValueError):
        RatePolicy(batch_size=0)
    with pytest.raises(ValueError):
        RatePolicy(batch_size=101)
    with pytest.raises(ValueError):
        RatePolicy(min_interval=0)
    with pytest.raises(ValueError):
        RatePolicy(workers=0)
    with pytest.raises(ValueError):
        StorageModel(compressed_bytes_per_5m=10, decompressed_bytes_per_5m=5)
    with pytest.raises(ValueError):
        collection_days(-1)
    with pytest.raises(ValueError):
        storage_estimate(-5)
