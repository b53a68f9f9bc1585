"""Power-of-two FFTs, serial and slab-distributed.

`fft_1d` is an iterative radix-2 transform, unnormalised in both
directions: forward uses the exp(-2*pi*i*j*k/N) kernel, inverse its
conjugate, so inverse(forward(v)) == N * v. Transforms are batched over
the last axis, which keeps the butterfly stages as whole-array numpy
operations.

`fft_3d_distributed` transforms a grid split into z-slabs across ranks.
Axes are ordered (z, y, x) with x contiguous. The x and y passes are
local; making z local costs exactly one all-to-all per 3-D transform,
which repartitions the grid by x.  A forward transform therefore maps a
z-slab (nz/p, ny, nx) to an x-partitioned spectrum (nz, ny, nx/p); the
inverse maps that layout back to a z-slab.
"""

from __future__ import annotations

import numpy as np

from .comm import Communicator

_bitrev_cache: dict[int, np.ndarray] = {}
_twiddle_cache: dict[tuple[int, int], np.ndarray] = {}


def _bit_reversal(n: int) -> np.ndarray:
    perm = _bitrev_cache.get(n)
    if perm is None:
        bits = n.bit_length() - 1
        idx = np.arange(n)
        perm = np.zeros(n, dtype=np.intp)
        for b in range(bits):
            perm = (perm << 1) | ((idx >> b) & 1)
        _bitrev_cache[n] = perm
    return perm


def _stage_twiddles(size: int, sign: int) -> np.ndarray:
    key = (size, sign)
    w = _twiddle_cache.get(key)
    if w is None:
        w = np.exp(sign * 2j * np.pi * np.arange(size // 2) / size)
        _twiddle_cache[key] = w
    return w


def _transform_last_axis(a: np.ndarray, sign: int) -> np.ndarray:
    n = a.shape[-1]
    if n == 0 or n & (n - 1):
        raise ValueError(f"transform length must be a power of two, got {n}")
    out = np.ascontiguousarray(a[..., _bit_reversal(n)], dtype=np.complex128)
    size = 2
    while size <= n:
        half = size // 2
        w = _stage_twiddles(size, sign)
        v = out.reshape(out.shape[:-1] + (n // size, size))
        t = v[..., half:] * w
        v[..., half:] = v[..., :half] - t
        v[..., :half] += t
        size *= 2
    return out


def _sign(direction: str) -> int:
    if direction == "forward":
        return -1
    if direction == "inverse":
        return 1
    raise ValueError(f"direction must be 'forward' or 'inverse': {direction!r}")


def fft_1d(v: np.ndarray, direction: str = "forward") -> np.ndarray:
    """Unnormalised DFT over the last axis; length must be a power of two."""
    return _transform_last_axis(np.asarray(v), _sign(direction))


def fft_along_axis(a: np.ndarray, axis: int, direction: str = "forward") -> np.ndarray:
    """fft_1d applied along an arbitrary axis of a batched array."""
    moved = np.moveaxis(np.asarray(a), axis, -1)
    return np.moveaxis(_transform_last_axis(moved, _sign(direction)), -1, axis)


def fft_3d_serial(grid: np.ndarray, direction: str = "forward") -> np.ndarray:
    """Full 3-D transform of a local (nz, ny, nx) grid."""
    out = fft_along_axis(grid, 2, direction)
    out = fft_along_axis(out, 1, direction)
    return fft_along_axis(out, 0, direction)


def fft_3d_distributed(
    local_slab: np.ndarray,
    dims: tuple[int, int, int],
    comm: Communicator,
    direction: str = "forward",
) -> np.ndarray:
    """Distributed 3-D transform with one slab-transpose all-to-all.

    Forward:  input z-slab (nz/p, ny, nx)  ->  spectrum slab (nz, ny, nx/p),
    where this rank owns x indices [rank*nx/p, (rank+1)*nx/p).
    Inverse:  the reverse mapping. With p == 1 both layouts are the full
    grid and the exchange degenerates to a copy.
    """
    nx, ny, nz = dims
    p = comm.size
    if nz % p or nx % p:
        raise ValueError(f"grid {nx}x{ny}x{nz} not divisible into {p} slabs on z and x")
    nxp = nx // p
    nzp = nz // p

    if direction == "forward":
        if local_slab.shape != (nzp, ny, nx):
            raise ValueError(f"expected z-slab shape {(nzp, ny, nx)}, got {local_slab.shape}")
        a = fft_along_axis(local_slab, 2, "forward")
        a = fft_along_axis(a, 1, "forward")
        blocks = [a[:, :, j * nxp:(j + 1) * nxp] for j in range(p)]
        received = comm.all_to_all(blocks)
        stacked = np.concatenate(received, axis=0)  # (nz, ny, nxp)
        return fft_along_axis(stacked, 0, "forward")

    if direction == "inverse":
        if local_slab.shape != (nz, ny, nxp):
            raise ValueError(f"expected spectrum shape {(nz, ny, nxp)}, got {local_slab.shape}")
        a = fft_along_axis(local_slab, 0, "inverse")
        blocks = [a[j * nzp:(j + 1) * nzp] for j in range(p)]
        received = comm.all_to_all(blocks)
        stacked = np.concatenate(received, axis=2)  # (nzp, ny, nx)
        a = fft_along_axis(stacked, 1, "inverse")
        return fft_along_axis(a, 2, "inverse")

    raise ValueError(f"direction must be 'forward' or 'inverse': {direction!r}")
