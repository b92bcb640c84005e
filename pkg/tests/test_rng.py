import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from vpseval import SplitMix64


def test_block_matches_scalar_sequence():
    rng_a = SplitMix64(987654321)
    rng_b = SplitMix64(987654321)
    block = rng_a.block_u64(257)
    scalars = [rng_b.next_u64() for _ in range(257)]
    assert block.tolist() == scalars


def test_same_seed_same_stream():
    a = SplitMix64(42).block_u64(64)
    b = SplitMix64(42).block_u64(64)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, SplitMix64(43).block_u64(64))


def test_stream_is_counter_based():
    # Consuming draws one way or another lands at the same position.
    a = SplitMix64(7)
    a.block_u64(10)
    b = SplitMix64(7)
    for _ in range(10):
        b.next_u64()
    assert a.next_u64() == b.next_u64()


def test_bernoulli_consumes_fixed_draws():
    a = SplitMix64(5)
    a.bernoulli_block(100, 0.3)
    b = SplitMix64(5)
    b.bernoulli_block(100, 0.9)
    # p changes outcomes but never the stream position
    assert a.next_u64() == b.next_u64()


def test_bernoulli_edge_probabilities():
    assert not SplitMix64(1).bernoulli_block(50, 0.0).any()
    assert SplitMix64(1).bernoulli_block(50, 1.0).all()


@given(st.integers(min_value=0, max_value=2 ** 64 - 1),
       st.integers(min_value=1, max_value=1000))
@settings(max_examples=50)
def test_randint_in_range(seed, n):
    rng = SplitMix64(seed)
    assert all(0 <= rng.randint(n) < n for _ in range(20))


@given(st.integers(min_value=0, max_value=2 ** 64 - 1))
@settings(max_examples=50)
def test_uniform_in_unit_interval(seed):
    rng = SplitMix64(seed)
    assert all(0.0 <= rng.uniform() < 1.0 for _ in range(20))


def test_known_values_are_stable():
    # Frozen first outputs; a change here breaks every seeded dataset.
    assert SplitMix64(0).block_u64(3).tolist() == [
        16294208416658607535, 7960286522194355700, 487617019471545679]
    assert SplitMix64(1234567).next_u64() == 6457827717110365317
