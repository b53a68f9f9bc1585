import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beoperf.constants import EP_SEED, LCG_MODULUS, LCG_MULTIPLIER
from beoperf.rng import RandomStream, draw_block, lcg_next, lcg_skip


def test_first_draw_matches_big_integer_oracle():
    # Exact arbitrary-precision arithmetic is the oracle for one step.
    u, stream = lcg_next(RandomStream(EP_SEED))
    expected_state = (LCG_MULTIPLIER * EP_SEED) % LCG_MODULUS
    assert stream.state == expected_state
    assert u == expected_state * 2.0 ** -46


def test_draws_stay_inside_open_unit_interval():
    stream = RandomStream(EP_SEED)
    for _ in range(1000):
        u, stream = lcg_next(stream)
        assert 0.0 < u < 1.0


def test_equal_seeds_give_identical_streams():
    a, _ = draw_block(RandomStream(12345), 100_000)
    b, _ = draw_block(RandomStream(12345), 100_000)
    assert np.array_equal(a, b)


def test_skip_zero_is_identity():
    assert lcg_skip(EP_SEED, 0).state == EP_SEED


def test_skip_matches_naive_iteration():
    stream = RandomStream(EP_SEED)
    for _ in range(1000):
        _, stream = lcg_next(stream)
    assert lcg_skip(EP_SEED, 1000).state == stream.state


def test_large_skip_is_fast():
    lcg_skip(EP_SEED, 1 << 30)  # warm up
    best = min(
        (lambda t0: (lcg_skip(EP_SEED, 1 << 30), time.perf_counter() - t0)[1])(time.perf_counter())
        for _ in range(5)
    )
    assert best < 1e-3


@given(a=st.integers(min_value=0, max_value=10**9), b=st.integers(min_value=0, max_value=10**9))
@settings(max_examples=100)
def test_skip_is_additive(a, b):
    combined = lcg_skip(EP_SEED, a + b)
    stepped = lcg_skip(lcg_skip(EP_SEED, a).state, b)
    assert combined.state == stepped.state


def test_block_draws_match_scalar_stepping():
    block, end = draw_block(RandomStream(EP_SEED), 1000)
    stream = RandomStream(EP_SEED)
    for i in range(1000):
        u, stream = lcg_next(stream)
        assert block[i] == u
    assert end.state == stream.state
    assert end.position == 1000


def test_block_draws_exact_across_block_boundary():
    # The vectorised path restarts its power table every 2**16 draws.
    n = (1 << 16) + 7
    block, end = draw_block(RandomStream(EP_SEED), n)
    for k in (1 << 16, (1 << 16) + 1, n):
        assert block[k - 1] == lcg_skip(EP_SEED, k).state * 2.0 ** -46
    assert end.state == lcg_skip(EP_SEED, n).state


def test_invalid_seeds_rejected():
    with pytest.raises(ValueError):
        lcg_skip(2, 1)
    with pytest.raises(ValueError):
        lcg_skip(0, 1)
    with pytest.raises(ValueError):
        lcg_skip(-3, 1)
    with pytest.raises(ValueError):
        lcg_skip(EP_SEED, -1)
    with pytest.raises(ValueError):
        RandomStream(4)


def test_custom_multiplier_falls_back_to_scalar_path():
    stream = RandomStream(7, multiplier=5)
    block, _ = draw_block(stream, 5)
    check = RandomStream(7, multiplier=5)
    for i in range(5):
        u, check = lcg_next(check)
        assert block[i] == u
