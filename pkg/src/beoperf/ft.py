"""3-D FFT spectral evolution kernel.

The grid starts as complex pseudorandom data (two stream deviates per
cell, cell index running x fastest), gets one forward 3-D transform, and
then evolves in spectral space: each iteration multiplies the spectrum by
exp(AP * |k|**2) with centered integer frequencies (so after t iterations
the cumulative factor is exp(AP * t * |k|**2)), inverse-transforms, and
folds 1024 fixed grid samples into a complex checksum. Checksums are
comparable against the published reference values for the standard
classes.

Ranks hold z-slabs; the spectrum lives x-partitioned between the forward
and inverse transforms, so each 3-D transform costs exactly one
all-to-all (see fft.fft_3d_distributed).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import constants
from .comm import Communicator, spawn_ranks
from .fft import fft_3d_distributed
from .rng import draw_block, lcg_skip


@dataclass(frozen=True)
class FtParams:
    nx: int
    ny: int
    nz: int
    iterations: int
    class_label: str = "custom"
    seed: int = constants.FT_SEED

    def __post_init__(self) -> None:
        for name, n in (("nx", self.nx), ("ny", self.ny), ("nz", self.nz)):
            if n < 2 or n & (n - 1):
                raise ValueError(f"{name} must be a power of two >= 2, got {n}")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.seed <= 0 or self.seed % 2 == 0:
            raise ValueError("seed must be a positive odd integer")

    @classmethod
    def for_class(cls, label: str) -> "FtParams":
        if label not in constants.FT_CLASSES:
            raise ValueError(f"unknown FT class {label!r}; choose from {sorted(constants.FT_CLASSES)}")
        nx, ny, nz, iterations = constants.FT_CLASSES[label]
        return cls(nx=nx, ny=ny, nz=nz, iterations=iterations, class_label=label)

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def cells(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def total_mop(self) -> float:
        return constants.ft_total_mop(self.nx, self.ny, self.nz, self.iterations)


@dataclass(frozen=True)
class FtResult:
    checksums: tuple[complex, ...]
    dims: tuple[int, int, int]
    iterations: int

    def __post_init__(self) -> None:
        if len(self.checksums) != self.iterations:
            raise ValueError("one checksum per iteration required")


def initial_slab(params: FtParams, z_start: int, z_count: int) -> np.ndarray:
    """Pseudorandom initial condition for z planes [z_start, z_start + z_count).

    Cell (x, y, z) takes stream deviates 2*c+1 and 2*c+2 as its real and
    imaginary parts, where c = x + nx*(y + ny*z); a slab is therefore a
    contiguous segment of the stream and any partition reproduces the same
    grid.
    """
    plane = params.nx * params.ny
    stream = lcg_skip(params.seed, 2 * z_start * plane)
    draws, _ = draw_block(stream, 2 * z_count * plane)
    grid = draws[0::2] + 1j * draws[1::2]
    return grid.reshape(z_count, params.ny, params.nx)


def _centered_sq(n: int) -> np.ndarray:
    # Frequency index i folded to ii in [-n/2, n/2), squared.
    idx = np.arange(n)
    folded = (idx + n // 2) % n - n // 2
    return (folded * folded).astype(np.float64)


def evolution_factors(params: FtParams, x_start: int, x_count: int) -> np.ndarray:
    """Per-iteration spectral damping for the local x-partitioned spectrum."""
    kz = _centered_sq(params.nz).reshape(-1, 1, 1)
    ky = _centered_sq(params.ny).reshape(1, -1, 1)
    kx = _centered_sq(params.nx)[x_start:x_start + x_count].reshape(1, 1, -1)
    return np.exp(constants.FT_AP * (kz + ky + kx))


def _checksum(u: np.ndarray, params: FtParams, z_start: int, comm: Communicator) -> complex:
    j = np.arange(1, constants.FT_CHECKSUM_SAMPLES + 1)
    q = j % params.nx
    r = (3 * j) % params.ny
    s = (5 * j) % params.nz
    local = (s >= z_start) & (s < z_start + u.shape[0])
    part = u[s[local] - z_start, r[local], q[local]].sum()
    total = comm.all_reduce_sum(np.array([part.real, part.imag]))
    return complex(total[0], total[1]) / params.cells


def ft_run(params: FtParams, comm: Communicator) -> FtResult:
    """Per-rank kernel body; every rank returns the same checksum sequence."""
    p = comm.size
    if p & (p - 1):
        raise ValueError(f"rank count must be a power of two, got {p}")
    if params.nz % p or params.nx % p:
        raise ValueError(f"grid {params.dims} not divisible across {p} ranks")

    nzp = params.nz // p
    nxp = params.nx // p
    z_start = comm.rank * nzp
    x_start = comm.rank * nxp

    u = initial_slab(params, z_start, nzp)
    spectrum = fft_3d_distributed(u, params.dims, comm, "forward")
    damping = evolution_factors(params, x_start, nxp)

    checksums = []
    for _ in range(params.iterations):
        spectrum = spectrum * damping
        u = fft_3d_distributed(spectrum, params.dims, comm, "inverse")
        checksums.append(_checksum(u, params, z_start, comm))
    return FtResult(checksums=tuple(checksums), dims=params.dims, iterations=params.iterations)


def verify_ft(params: FtParams, result: FtResult) -> bool | None:
    """Compare checksums with the reference values; None when no reference applies."""
    if params.seed != constants.FT_SEED:
        return None
    for label, (nx, ny, nz, iterations) in constants.FT_CLASSES.items():
        if (nx, ny, nz, iterations) == (params.nx, params.ny, params.nz, params.iterations):
            refs = constants.FT_REFERENCE_CHECKSUMS[label]
            for got, (ref_re, ref_im) in zip(result.checksums, refs):
                ref = complex(ref_re, ref_im)
                if abs(got - ref) / abs(ref) > constants.FT_VERIFY_RTOL:
                    return False
            return True
    return None


@dataclass(frozen=True)
class FtRun:
    result: FtResult
    ranks: int
    elapsed_s: float
    mops: float
    verified: bool | None


def ft_benchmark(params: FtParams, ranks: int) -> FtRun:
    """Run FT on `ranks` in-process ranks and time it end to end."""
    if ranks < 1:
        raise ValueError("ranks must be >= 1")
    if ranks & (ranks - 1):
        raise ValueError(f"rank count must be a power of two, got {ranks}")
    if params.nz % ranks or params.nx % ranks:
        raise ValueError(f"grid {params.dims} not divisible across {ranks} ranks")
    t0 = time.perf_counter()
    results = spawn_ranks(ranks, lambda comm: ft_run(params, comm))
    elapsed = time.perf_counter() - t0
    result = results[0]
    return FtRun(
        result=result,
        ranks=ranks,
        elapsed_s=elapsed,
        mops=params.total_mop / elapsed if elapsed > 0 else float("inf"),
        verified=verify_ft(params, result),
    )
