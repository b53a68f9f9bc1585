"""Scaling metrics, calibration and predicted-vs-measured comparison.

Measured tables are (benchmark, class, cores, time, rate) rows, one per
run. Rate * time must be constant within a benchmark class (the total
operation count does not depend on how many cores executed it); that
invariant both sanity-checks transcribed tables and yields the total
work estimate the calibration uses, which keeps the model independent of
any particular operation-count convention.

Calibration extracts the model constants from anchor rows: the 1-core row
fixes the per-core rate, the full-board row fixes eta(board), and the
excess time of a multi-board FT row over its compute share fixes the
effective link bandwidth.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

from .cluster import ClusterSpec, placement
from .model import AllToAllPhase, MachineModel, WorkloadProfile


class CalibrationError(RuntimeError):
    """A calibration fit failed quantitatively (bad residual or range)."""


@dataclass(frozen=True)
class MeasuredRow:
    benchmark: str
    class_label: str
    cores: int
    time_s: float
    mops: float

    def __post_init__(self) -> None:
        if self.cores < 1:
            raise ValueError("cores must be >= 1")
        if self.time_s <= 0:
            raise ValueError("time_s must be positive")
        if self.mops <= 0:
            raise ValueError("mops must be positive")

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.benchmark, self.class_label, self.cores)

    @property
    def total_mop(self) -> float:
        return self.time_s * self.mops


@dataclass(frozen=True)
class MeasuredTable:
    rows: tuple[MeasuredRow, ...]

    def __post_init__(self) -> None:
        keys = [r.key for r in self.rows]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (benchmark, class, cores) rows")

    @classmethod
    def from_csv(cls, text: str) -> "MeasuredTable":
        """Parse `benchmark,class,cores,time_s,mops` rows; '#' lines are comments."""
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        reader = csv.DictReader(lines)
        expected = ["benchmark", "class", "cores", "time_s", "mops"]
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != expected:
            raise ValueError(f"CSV header must be {','.join(expected)}")
        rows = []
        for record in reader:
            rows.append(MeasuredRow(
                benchmark=record["benchmark"].strip().upper(),
                class_label=record["class"].strip(),
                cores=int(record["cores"]),
                time_s=float(record["time_s"]),
                mops=float(record["mops"]),
            ))
        return cls(rows=tuple(rows))

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["benchmark", "class", "cores", "time_s", "mops"])
        for r in sorted(self.rows, key=lambda r: r.key):
            writer.writerow([r.benchmark, r.class_label, r.cores, r.time_s, r.mops])
        return out.getvalue()

    def select(self, benchmark: str | None = None, class_label: str | None = None) -> "MeasuredTable":
        rows = tuple(r for r in self.rows
                     if (benchmark is None or r.benchmark == benchmark.upper())
                     and (class_label is None or r.class_label == class_label))
        return MeasuredTable(rows=rows)

    def row(self, cores: int) -> MeasuredRow:
        for r in self.rows:
            if r.cores == cores:
                return r
        raise ValueError(f"no row with cores={cores}")

    def single_group(self) -> tuple[str, str]:
        groups = {(r.benchmark, r.class_label) for r in self.rows}
        if len(groups) != 1:
            raise ValueError(f"expected one benchmark+class, found {sorted(groups)}")
        return next(iter(groups))


@dataclass(frozen=True)
class WorkConservation:
    mean_total_mop: float
    max_relative_deviation: float


def work_conservation(table: MeasuredTable) -> WorkConservation:
    """Mean of rate*time over the rows and the worst relative deviation from it."""
    if not table.rows:
        raise ValueError("need at least one row")
    table.single_group()
    totals = [r.total_mop for r in table.rows]
    mean = sum(totals) / len(totals)
    deviation = max(abs(t - mean) / mean for t in totals)
    return WorkConservation(mean_total_mop=mean, max_relative_deviation=deviation)


@dataclass(frozen=True)
class ScalingRow:
    cores: int
    time_s: float
    mops: float
    speedup: float
    efficiency: float
    percent_decrease: float


@dataclass(frozen=True)
class ScalingReport:
    benchmark: str
    class_label: str
    baseline_cores: int
    rows: tuple[ScalingRow, ...]
    work: WorkConservation

    def row(self, cores: int) -> ScalingRow:
        for r in self.rows:
            if r.cores == cores:
                return r
        raise ValueError(f"no row with cores={cores}")


def scaling_metrics(table: MeasuredTable, baseline_cores: int) -> ScalingReport:
    """Speedup, efficiency and percent time decrease against a named baseline row."""
    benchmark, class_label = table.single_group()
    baseline = table.row(baseline_cores)
    rows = []
    for r in sorted(table.rows, key=lambda r: r.cores):
        speedup = baseline.time_s / r.time_s
        rows.append(ScalingRow(
            cores=r.cores,
            time_s=r.time_s,
            mops=r.mops,
            speedup=speedup,
            efficiency=speedup * baseline.cores / r.cores,
            percent_decrease=100.0 * (baseline.time_s - r.time_s) / baseline.time_s,
        ))
    return ScalingReport(
        benchmark=benchmark,
        class_label=class_label,
        baseline_cores=baseline_cores,
        rows=tuple(rows),
        work=work_conservation(table),
    )


@dataclass(frozen=True)
class ComputeCalibration:
    core_rate_mops: float
    eta_full_board: float
    full_board_cores: int
    work_mop: float


def calibrate_compute(table: MeasuredTable, full_board_cores: int) -> ComputeCalibration:
    """Per-core rate from the 1-core row, eta(board) from the full-board row.

    The total work estimate comes from rate*time conservation over the
    whole table. An eta below the 1/k floor (the full-board run slower
    than the serial one) is kept but flagged; above 1 (superlinear) it is
    clamped to 1.
    """
    one = table.row(1)
    full = table.row(full_board_cores)
    work = work_conservation(table).mean_total_mop
    core_rate = work / one.time_s
    eta = one.time_s / (full_board_cores * full.time_s)
    if eta < 1.0 / full_board_cores:
        warnings.warn(
            f"eta({full_board_cores}) = {eta:.4f} is below 1/{full_board_cores}: "
            "the full-board run is slower than the serial one", stacklevel=2)
    if eta > 1.0:
        warnings.warn(
            f"eta({full_board_cores}) = {eta:.4f} > 1 (superlinear); clamping to 1",
            stacklevel=2)
        eta = 1.0
    return ComputeCalibration(
        core_rate_mops=core_rate,
        eta_full_board=eta,
        full_board_cores=full_board_cores,
        work_mop=work,
    )


@dataclass(frozen=True)
class BandwidthCalibration:
    link_bandwidth_eff_bps: float
    residual_comm_s: float
    uplink_bytes: float
    nominal_bps: float


def calibrate_bandwidth(
    ft_table: MeasuredTable,
    profile: WorkloadProfile,
    spec: ClusterSpec,
    per_message_latency_s: float = 0.0,
) -> BandwidthCalibration:
    """Effective link bandwidth from one single-board and one multi-board FT row.

    The multi-board row's compute share is the single-board time scaled by
    the core ratio; whatever time is left is attributed to the all-to-all
    volume crossing the busiest uplink. The fit must land in
    [0.4, 1.0] x nominal link speed or a CalibrationError is raised.
    """
    board_cores = spec.boards[0].core_count
    rows = sorted(ft_table.rows, key=lambda r: r.cores)
    single = next((r for r in rows if r.cores <= board_cores), None)
    multi = next((r for r in rows if r.cores > board_cores), None)
    if single is None or multi is None:
        raise ValueError("need one single-board row and one multi-board row")
    if profile.ranks != multi.cores:
        raise ValueError(f"profile is for {profile.ranks} ranks, multi-board row has {multi.cores}")

    compute_s = single.time_s * single.cores / multi.cores
    residual = multi.time_s - compute_s
    if residual <= 0:
        raise CalibrationError(
            f"nonpositive communication residual ({residual:.3f} s): "
            "the model cannot explain the multi-board row")

    occupancy = placement(spec, multi.cores).board_occupancy(len(spec.boards))
    p = multi.cores
    uplink_bytes = 0.0
    uplink_messages = 0.0
    for phase in profile.phases:
        if isinstance(phase, AllToAllPhase):
            cross = max(k * (p - k) for k in occupancy)
            uplink_bytes += cross * phase.bytes_per_rank_pair
            uplink_messages += cross
    if uplink_bytes <= 0:
        raise CalibrationError("profile carries no cross-board all-to-all volume")

    transfer_s = residual - uplink_messages * per_message_latency_s
    if transfer_s <= 0:
        raise CalibrationError("latency term alone exceeds the communication residual")
    bandwidth = uplink_bytes * 8.0 / transfer_s

    nominal = min(min(b.nic_bandwidth_bps for b in spec.boards),
                  spec.switch.port_bandwidth_bps)
    if not (0.4 * nominal <= bandwidth <= nominal):
        raise CalibrationError(
            f"fitted bandwidth {bandwidth / 1e6:.1f} Mbps outside "
            f"[{0.4 * nominal / 1e6:.0f}, {nominal / 1e6:.0f}] Mbps")
    return BandwidthCalibration(
        link_bandwidth_eff_bps=bandwidth,
        residual_comm_s=residual,
        uplink_bytes=uplink_bytes,
        nominal_bps=nominal,
    )


@dataclass(frozen=True)
class ComparisonRow:
    benchmark: str
    class_label: str
    cores: int
    predicted_s: float
    measured_s: float
    relative_error: float


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...]
    tolerance: float
    max_relative_error: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        worst = max(r.relative_error for r in self.rows)
        object.__setattr__(self, "max_relative_error", worst)
        object.__setattr__(self, "passed", worst <= self.tolerance)


def compare(
    predicted_s: dict[tuple[str, str, int], float],
    measured: MeasuredTable,
    tolerance: float,
) -> ComparisonReport:
    """Relative errors |pred - meas| / meas over the shared keys."""
    measured_by_key = {r.key: r for r in measured.rows}
    shared = sorted(set(predicted_s) & set(measured_by_key))
    if not shared:
        raise ValueError("predicted and measured rows share no (benchmark, class, cores) keys")
    rows = []
    for key in shared:
        meas = measured_by_key[key]
        pred = predicted_s[key]
        rows.append(ComparisonRow(
            benchmark=key[0],
            class_label=key[1],
            cores=key[2],
            predicted_s=pred,
            measured_s=meas.time_s,
            relative_error=abs(pred - meas.time_s) / meas.time_s,
        ))
    return ComparisonReport(rows=tuple(rows), tolerance=tolerance)
