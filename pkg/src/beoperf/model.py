"""BSP-style performance and energy model.

A benchmark is abstracted into an ordered list of phases (per-rank
compute, all-to-all exchange, reduce) that execute as supersteps: every
phase finishes everywhere before the next starts, so the predicted wall
time is just the sum of per-phase maxima.

Compute time divides per-rank work by the per-core rate scaled by the
board efficiency eta(k), the throughput fraction a core keeps when k
cores of its board are busy (memory contention makes eta(4) well below
1 on the boards modelled here). Communication crosses the star switch:
the backplane is taken as non-blocking, so the only bottleneck is the
busiest board uplink, and traffic between ranks on one board is free.

Energy integrates the linear board power over the run. Ranks hold their
core for the entire run (message waits spin), so each board's occupancy
is constant from start to finish.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

from .cluster import ClusterSpec, PowerModel, RankMap, board_power
from .constants import ep_total_mop, ft_total_mop
from .ep import EpParams
from .ft import FtParams


@dataclass(frozen=True)
class ComputePhase:
    ops_per_rank_mop: float

    def __post_init__(self) -> None:
        if self.ops_per_rank_mop < 0:
            raise ValueError("ops_per_rank_mop must be nonnegative")


@dataclass(frozen=True)
class AllToAllPhase:
    """Every rank sends `bytes_per_rank_pair` to every rank (itself included)."""

    bytes_per_rank_pair: float

    def __post_init__(self) -> None:
        if self.bytes_per_rank_pair < 0:
            raise ValueError("bytes_per_rank_pair must be nonnegative")


@dataclass(frozen=True)
class ReducePhase:
    """All ranks combine `bytes` of payload down to rank 0."""

    bytes: float

    def __post_init__(self) -> None:
        if self.bytes < 0:
            raise ValueError("reduce bytes must be nonnegative")


Phase = Union[ComputePhase, AllToAllPhase, ReducePhase]


def eta_at(knots: dict[int, float], active_cores: int) -> float:
    """Board efficiency at `active_cores`: linear between knots, flat beyond."""
    if active_cores < 1:
        raise ValueError("active_cores must be >= 1")
    ks = sorted(knots)
    if active_cores <= ks[0]:
        return knots[ks[0]]
    for lo, hi in zip(ks, ks[1:]):
        if active_cores <= hi:
            frac = (active_cores - lo) / (hi - lo)
            return knots[lo] + frac * (knots[hi] - knots[lo])
    return knots[ks[-1]]


@dataclass(frozen=True)
class WorkloadProfile:
    phases: tuple[Phase, ...]
    ranks: int

    def __post_init__(self) -> None:
        if not self.phases:
            raise ValueError("profile needs at least one phase")
        if self.ranks < 1:
            raise ValueError("ranks must be >= 1")

    @property
    def total_compute_mop(self) -> float:
        return sum(ph.ops_per_rank_mop for ph in self.phases
                   if isinstance(ph, ComputePhase)) * self.ranks


# Serialized reduce payload for an EP run: 10 annulus bins + accepted count
# + two sums, 8 bytes each.
EP_REDUCE_BYTES = 13 * 8


def ep_profile(params: EpParams, ranks: int, total_mop: float | None = None) -> WorkloadProfile:
    """One compute phase with the work split evenly, then one small reduce."""
    if ranks < 1:
        raise ValueError("ranks must be >= 1")
    work = params.total_mop if total_mop is None else total_mop
    return WorkloadProfile(
        phases=(ComputePhase(work / ranks), ReducePhase(EP_REDUCE_BYTES)),
        ranks=ranks,
    )


def ft_profile(params: FtParams, ranks: int, total_mop: float | None = None) -> WorkloadProfile:
    """Per iteration: a compute phase plus the slab-transpose all-to-all.

    The transpose moves the whole complex grid once, so each ordered rank
    pair exchanges 16 * nx * ny * nz / ranks**2 bytes.
    """
    if ranks < 1 or ranks & (ranks - 1):
        raise ValueError(f"ranks must be a power of two, got {ranks}")
    if params.iterations < 1:
        raise ValueError("profile needs at least one iteration")
    work = params.total_mop if total_mop is None else total_mop
    per_iter_ops = work / params.iterations / ranks
    pair_bytes = 16.0 * params.cells / ranks ** 2
    phases: list[Phase] = []
    for _ in range(params.iterations):
        phases.append(ComputePhase(per_iter_ops))
        phases.append(AllToAllPhase(pair_bytes))
    return WorkloadProfile(phases=tuple(phases), ranks=ranks)


@dataclass(frozen=True)
class MachineModel:
    """Calibrated constants: what the hardware actually delivers.

    `eta` maps active-cores-per-board to the per-core efficiency; values
    between calibrated points are linearly interpolated and held constant
    beyond the last point. eta(1) is pinned to 1 by definition.
    """

    core_rate_mops: float
    eta: dict[int, float]
    link_bandwidth_eff_bps: float
    per_message_latency_s: float = 0.0

    def __post_init__(self) -> None:
        if self.core_rate_mops <= 0:
            raise ValueError("core_rate_mops must be positive")
        if self.link_bandwidth_eff_bps <= 0:
            raise ValueError("link_bandwidth_eff_bps must be positive")
        if self.per_message_latency_s < 0:
            raise ValueError("per_message_latency_s must be nonnegative")
        knots = dict(self.eta)
        knots.setdefault(1, 1.0)
        if knots[1] != 1.0:
            raise ValueError("eta(1) must equal 1")
        last = None
        for k in sorted(knots):
            v = knots[k]
            if not (0.0 < v <= 1.0):
                raise ValueError(f"eta({k})={v} outside (0, 1]")
            if last is not None and v > last + 1e-12:
                raise ValueError("eta must be nonincreasing in active cores")
            last = v
        object.__setattr__(self, "eta", knots)

    def board_efficiency(self, active_cores: int) -> float:
        return eta_at(self.eta, active_cores)


@dataclass(frozen=True)
class PredictedRun:
    """Predicted timing; occupancy is active cores per board, constant over the run."""

    total_time_s: float
    phase_times_s: tuple[float, ...]
    board_occupancy: tuple[int, ...]
    energy_j: float | None = None

    def with_energy(self, energy_j: float) -> "PredictedRun":
        return replace(self, energy_j=energy_j)


def _uplink_seconds(board_bytes: float, board_messages: float, model: MachineModel) -> float:
    return board_bytes * 8.0 / model.link_bandwidth_eff_bps \
        + board_messages * model.per_message_latency_s


def predict(
    profile: WorkloadProfile,
    spec: ClusterSpec,
    model: MachineModel,
    rank_map: RankMap,
) -> PredictedRun:
    """Walk the phases and accumulate the critical-path time of each."""
    if rank_map.ranks != profile.ranks:
        raise ValueError(f"rank map covers {rank_map.ranks} ranks, profile wants {profile.ranks}")
    occupancy = rank_map.board_occupancy(len(spec.boards))
    p = profile.ranks
    root_board = rank_map.entries[0][0]

    phase_times = []
    for phase in profile.phases:
        if isinstance(phase, ComputePhase):
            # The busiest board has the lowest efficiency, hence the slowest ranks.
            eta = min(model.board_efficiency(k) for k in occupancy if k > 0)
            phase_times.append(phase.ops_per_rank_mop / (model.core_rate_mops * eta))
        elif isinstance(phase, AllToAllPhase):
            worst = 0.0
            for k in occupancy:
                cross = k * (p - k)
                worst = max(worst, _uplink_seconds(cross * phase.bytes_per_rank_pair, cross, model))
            phase_times.append(worst)
        else:
            # Board-local parts merge for free; each remote board sends one
            # aggregated message, and all of them land on the root's uplink.
            remote_boards = sum(1 for b, k in enumerate(occupancy) if k > 0 and b != root_board)
            phase_times.append(_uplink_seconds(remote_boards * phase.bytes, remote_boards, model))

    return PredictedRun(
        total_time_s=sum(phase_times),
        phase_times_s=tuple(phase_times),
        board_occupancy=occupancy,
    )


def predict_energy(run: PredictedRun, power: PowerModel, spec: ClusterSpec) -> float:
    """Joules over the run: every board at its occupancy power, plus shared infra."""
    if len(run.board_occupancy) != len(spec.boards):
        raise ValueError("occupancy does not match the cluster's board count")
    watts = sum(board_power(power, k) for k in run.board_occupancy) + power.p_infra_w
    return watts * run.total_time_s
