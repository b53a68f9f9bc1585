import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beoperf.comm import spawn_ranks
from beoperf.fft import fft_1d, fft_3d_distributed, fft_3d_serial, fft_along_axis


def _random_complex(shape, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_forward_of_zeros_is_zeros():
    assert np.array_equal(fft_1d(np.zeros(16, dtype=complex)), np.zeros(16, dtype=complex))


def test_forward_of_delta_is_all_ones():
    delta = np.zeros(8, dtype=complex)
    delta[0] = 1.0
    assert np.allclose(fft_1d(delta, "forward"), np.ones(8), atol=1e-15)


def test_round_trip_length_1024():
    v = _random_complex(1024, 1)
    back = fft_1d(fft_1d(v, "forward"), "inverse") / 1024
    assert np.max(np.abs(back - v)) < 1e-12 * np.max(np.abs(v))


def test_matches_numpy_oracle_both_directions():
    v = _random_complex(512, 2)
    assert np.allclose(fft_1d(v, "forward"), np.fft.fft(v), rtol=1e-12, atol=1e-9)
    assert np.allclose(fft_1d(v, "inverse"), np.fft.ifft(v) * 512, rtol=1e-12, atol=1e-9)


def test_batched_last_axis_matches_numpy():
    a = _random_complex((3, 5, 16), 3)
    assert np.allclose(fft_1d(a), np.fft.fft(a, axis=-1), rtol=1e-12, atol=1e-9)


def test_along_axis_matches_numpy():
    a = _random_complex((8, 4, 2), 4)
    for axis in range(3):
        assert np.allclose(fft_along_axis(a, axis), np.fft.fft(a, axis=axis),
                           rtol=1e-12, atol=1e-9)


def test_non_power_of_two_rejected():
    with pytest.raises(ValueError, match="power of two"):
        fft_1d(np.zeros(12, dtype=complex))
    with pytest.raises(ValueError, match="power of two"):
        fft_1d(np.zeros(0, dtype=complex))


def test_bad_direction_rejected():
    with pytest.raises(ValueError, match="direction"):
        fft_1d(np.zeros(8, dtype=complex), "sideways")


@given(log2n=st.integers(min_value=0, max_value=12), seed=st.integers(0, 2**31))
@settings(max_examples=100, deadline=None)
def test_parseval_energy_identity(log2n, seed):
    n = 1 << log2n
    v = _random_complex(n, seed)
    energy_in = np.sum(np.abs(v) ** 2)
    energy_out = np.sum(np.abs(fft_1d(v)) ** 2)
    assert abs(energy_out - n * energy_in) <= 1e-10 * n * energy_in


def test_serial_3d_matches_numpy_non_cubic():
    grid = _random_complex((4, 16, 8), 5)  # (nz, ny, nx) all distinct
    assert np.allclose(fft_3d_serial(grid, "forward"), np.fft.fftn(grid),
                       rtol=1e-12, atol=1e-9)
    assert np.allclose(fft_3d_serial(grid, "inverse"), np.fft.ifftn(grid) * grid.size,
                       rtol=1e-12, atol=1e-9)


def _distributed_forward(grid, p):
    nz, ny, nx = grid.shape
    dims = (nx, ny, nz)
    nzp = nz // p

    def entry(comm):
        slab = grid[comm.rank * nzp:(comm.rank + 1) * nzp]
        return fft_3d_distributed(slab, dims, comm, "forward")

    return np.concatenate(spawn_ranks(p, entry), axis=2)


@pytest.mark.parametrize("p", [1, 2, 4, 8])
def test_distributed_forward_matches_serial_oracle(p):
    grid = _random_complex((16, 16, 16), p)
    gathered = _distributed_forward(grid, p)
    oracle = np.fft.fftn(grid)
    assert np.max(np.abs(gathered - oracle)) < 1e-10 * np.max(np.abs(oracle))


@pytest.mark.parametrize("p", [1, 2, 4])
def test_distributed_round_trip(p):
    grid = _random_complex((8, 4, 16), p + 10)
    nz, ny, nx = grid.shape
    dims = (nx, ny, nz)
    nzp = nz // p

    def entry(comm):
        slab = grid[comm.rank * nzp:(comm.rank + 1) * nzp]
        spectrum = fft_3d_distributed(slab, dims, comm, "forward")
        return fft_3d_distributed(spectrum, dims, comm, "inverse") / grid.size

    back = np.concatenate(spawn_ranks(p, entry), axis=0)
    assert np.max(np.abs(back - grid)) < 1e-12 * np.max(np.abs(grid))


def test_constant_grid_concentrates_in_zero_mode():
    grid = np.full((8, 8, 8), 2.5, dtype=complex)
    spectrum = _distributed_forward(grid, 2)
    assert spectrum[0, 0, 0] == pytest.approx(2.5 * grid.size)
    spectrum[0, 0, 0] = 0.0
    assert np.max(np.abs(spectrum)) < 1e-9


def test_indivisible_decomposition_rejected():
    def entry(comm):
        return fft_3d_distributed(np.zeros((1, 4, 4), dtype=complex), (4, 4, 2), comm, "forward")

    from beoperf.comm import RankFailure
    with pytest.raises(RankFailure):
        spawn_ranks(4, entry)


def test_wrong_slab_shape_rejected():
    def entry(comm):
        return fft_3d_distributed(np.zeros((4, 4, 4), dtype=complex), (4, 4, 8), comm, "forward")

    from beoperf.comm import RankFailure
    with pytest.raises(RankFailure):
        spawn_ranks(2, entry)
