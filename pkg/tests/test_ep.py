import math

import numpy as np
import pytest

from beoperf.constants import EP_REFERENCE_SUMS, EP_SEED
from beoperf.ep import (
    EpParams,
    EpResult,
    ep_benchmark,
    gaussian_pairs_chunk,
    tally_pairs,
    verify_ep,
)
from beoperf.rng import RandomStream, draw_block, lcg_skip

# Class S outputs, frozen after cross-checking three independent routes:
# the vectorised kernel, a scalar split-precision reimplementation, and
# the published NPB verification sums.
CLASS_S_COUNTS = (6140517, 5865300, 1100361, 68546, 1648, 17, 0, 0, 0, 0)
CLASS_S_ACCEPTED = 13176389


def _scalar_tally(uniforms):
    counts = [0] * 10
    sx = sy = 0.0
    accepted = 0
    for i in range(0, len(uniforms), 2):
        x = 2.0 * uniforms[i] - 1.0
        y = 2.0 * uniforms[i + 1] - 1.0
        t = x * x + y * y
        if 0.0 < t <= 1.0:
            f = math.sqrt(-2.0 * math.log(t) / t)
            gx, gy = x * f, y * f
            counts[int(max(abs(gx), abs(gy)))] += 1
            sx += gx
            sy += gy
            accepted += 1
    return counts, sx, sy, accepted


class TestTallyPairs:
    def test_pair_near_corner_is_rejected(self):
        counts, sx, sy, accepted = tally_pairs(np.array([1.0 - 1e-12, 1.0 - 1e-12]))
        assert accepted == 0
        assert counts.sum() == 0
        assert sx == 0.0 and sy == 0.0

    def test_center_pair_rejected_by_t_positive_guard(self):
        # u = 0.5 maps to the origin; t = 0 must not reach the logarithm.
        counts, _, _, accepted = tally_pairs(np.array([0.5, 0.5]))
        assert accepted == 0
        assert counts.sum() == 0

    def test_odd_number_of_uniforms_rejected(self):
        with pytest.raises(ValueError, match="pairs"):
            tally_pairs(np.array([0.25, 0.5, 0.75]))

    def test_matches_scalar_oracle_on_stream_prefix(self):
        uniforms, _ = draw_block(RandomStream(EP_SEED), 2 * 4096)
        counts, sx, sy, accepted = tally_pairs(uniforms)
        ref_counts, ref_sx, ref_sy, ref_accepted = _scalar_tally(uniforms)
        assert counts.tolist() == ref_counts
        assert accepted == ref_accepted
        assert sx == pytest.approx(ref_sx, rel=1e-12)
        assert sy == pytest.approx(ref_sy, rel=1e-12)

    def test_acceptance_fraction_near_quarter_pi(self):
        n = 1 << 16
        (counts, _, _, accepted), _ = gaussian_pairs_chunk(RandomStream(EP_SEED), n)
        assert 0.77 <= accepted / n <= 0.80
        assert counts.sum() == accepted

    def test_chunk_consumes_exactly_two_deviates_per_pair(self):
        _, stream = gaussian_pairs_chunk(RandomStream(EP_SEED), 100)
        assert stream.position == 200
        assert stream.state == lcg_skip(EP_SEED, 200).state


class TestEpParams:
    def test_class_table(self):
        assert EpParams.for_class("S").log2_pairs == 24
        assert EpParams.for_class("B").log2_pairs == 30

    def test_unknown_class(self):
        with pytest.raises(ValueError, match="unknown EP class"):
            EpParams.for_class("Z")

    def test_desk_scale_guard(self):
        with pytest.raises(ValueError, match="desk scale"):
            EpParams(log2_pairs=33)
        assert EpParams(log2_pairs=33, allow_large=True).pairs == 2 ** 33

    def test_even_seed_rejected(self):
        with pytest.raises(ValueError, match="odd"):
            EpParams(log2_pairs=10, seed=4)


class TestEpRun:
    def test_class_s_matches_reference_sums(self, ep_class_s_runs):
        result = ep_class_s_runs[1].result
        ref_x, ref_y = EP_REFERENCE_SUMS["S"]
        assert abs((result.sum_x - ref_x) / ref_x) <= 1e-8
        assert abs((result.sum_y - ref_y) / ref_y) <= 1e-8
        assert ep_class_s_runs[1].verified is True

    def test_class_s_frozen_tallies(self, ep_class_s_runs):
        result = ep_class_s_runs[1].result
        assert result.annulus_counts == CLASS_S_COUNTS
        assert result.accepted_pairs == CLASS_S_ACCEPTED

    def test_tallies_invariant_to_rank_count(self, ep_class_s_runs):
        base = ep_class_s_runs[1].result
        for p in (2, 4, 8):
            other = ep_class_s_runs[p].result
            assert other.annulus_counts == base.annulus_counts
            assert other.accepted_pairs == base.accepted_pairs
            assert abs((other.sum_x - base.sum_x) / base.sum_x) <= 1e-9
            assert abs((other.sum_y - base.sum_y) / base.sum_y) <= 1e-9

    def test_repeated_run_bit_identical(self, ep_class_s_runs):
        again = ep_benchmark(EpParams.for_class("S"), 4).result
        cached = ep_class_s_runs[4].result
        assert again.sum_x == cached.sum_x
        assert again.sum_y == cached.sum_y
        assert again.annulus_counts == cached.annulus_counts

    def test_uneven_rank_split_preserves_tallies(self):
        params = EpParams(log2_pairs=16)
        base = ep_benchmark(params, 1).result
        uneven = ep_benchmark(params, 3).result  # remainder lands on the last rank
        assert uneven.annulus_counts == base.annulus_counts
        assert uneven.accepted_pairs == base.accepted_pairs

    def test_count_identity_enforced(self):
        with pytest.raises(ValueError, match="sum to accepted"):
            EpResult(annulus_counts=(1,) + (0,) * 9, sum_x=0.0, sum_y=0.0, accepted_pairs=2)


class TestVerification:
    def test_nonstandard_seed_is_unverifiable(self):
        params = EpParams(log2_pairs=24, seed=99991)
        result = EpResult((0,) * 10, 0.0, 0.0, 0)
        assert verify_ep(params, result) is None

    def test_nonstandard_size_is_unverifiable(self):
        params = EpParams(log2_pairs=18)
        result = EpResult((0,) * 10, 0.0, 0.0, 0)
        assert verify_ep(params, result) is None

    def test_wrong_sums_fail(self):
        params = EpParams.for_class("S")
        result = EpResult((0,) * 10, 1.0, 1.0, 0)
        assert verify_ep(params, result) is False


def test_class_s_against_independent_scalar_reimplementation(ep_class_s_runs):
    # Second full route: split-precision float64 stepping (the classic
    # portable formulation) in a scalar loop, jitted so it finishes fast.
    numba = pytest.importorskip("numba")

    r23, t23 = 2.0 ** -23, 2.0 ** 23
    r46, t46 = 2.0 ** -46, 2.0 ** 46

    @numba.njit(cache=False)
    def scalar_ep(m, seed, a):
        counts = np.zeros(10, dtype=np.int64)
        sx = 0.0
        sy = 0.0
        accepted = 0
        a1 = float(int(r23 * a))
        a2 = a - t23 * a1
        x = seed
        u = np.empty(2)
        for _ in range(1 << m):
            for j in range(2):
                x1 = float(int(r23 * x))
                x2 = x - t23 * x1
                t1 = a1 * x2 + a2 * x1
                t2 = float(int(r23 * t1))
                z = t1 - t23 * t2
                t3 = t23 * z + a2 * x2
                t4 = float(int(r46 * t3))
                x = t3 - t46 * t4
                u[j] = r46 * x
            xx = 2.0 * u[0] - 1.0
            yy = 2.0 * u[1] - 1.0
            t = xx * xx + yy * yy
            if 0.0 < t <= 1.0:
                f = np.sqrt(-2.0 * np.log(t) / t)
                gx = xx * f
                gy = yy * f
                counts[int(max(abs(gx), abs(gy)))] += 1
                sx += gx
                sy += gy
                accepted += 1
        return counts, sx, sy, accepted

    counts, sx, sy, accepted = scalar_ep(24, float(EP_SEED), 1220703125.0)
    result = ep_class_s_runs[1].result
    assert tuple(int(c) for c in counts) == result.annulus_counts
    assert accepted == result.accepted_pairs
    assert sx == pytest.approx(result.sum_x, rel=1e-12)
    assert sy == pytest.approx(result.sum_y, rel=1e-12)
