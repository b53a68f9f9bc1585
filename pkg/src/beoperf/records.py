"""Run records and calibrated model files.

Both native kernel runs and model predictions serialise to one JSON run
record so they can be compared and reported uniformly; native records
carry a verification status, model records carry predicted energy. The
calibrated model file bundles everything `simulate` needs: per-benchmark
core rates (operation counts are benchmark-defined, so rates do not
transfer between benchmarks), the board-efficiency knots, the effective
link bandwidth and the per-class total work estimated from the measured
tables.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

from .analysis import (
    MeasuredTable,
    calibrate_bandwidth,
    calibrate_compute,
    work_conservation,
)
from .cluster import ClusterSpec
from .ep import EpRun
from .ft import FtParams, FtRun
from .model import MachineModel, PredictedRun, eta_at, ft_profile


@dataclass(frozen=True)
class RunRecord:
    source: str
    benchmark: str
    class_label: str
    ranks: int
    elapsed_s: float
    mops: float
    timestamp: str
    verification: str | None = None
    energy_j: float | None = None
    payload: dict | None = None

    def __post_init__(self) -> None:
        if self.source not in ("native", "model"):
            raise ValueError(f"source must be 'native' or 'model': {self.source!r}")
        if self.source == "native" and self.verification is None:
            raise ValueError("native records carry a verification status")
        if self.source == "model" and self.energy_j is None:
            raise ValueError("model records carry predicted energy")

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.benchmark, self.class_label, self.ranks)

    def to_json(self) -> str:
        doc = {k: v for k, v in asdict(self).items() if v is not None}
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        doc = json.loads(text)
        return cls(
            source=doc["source"],
            benchmark=doc["benchmark"],
            class_label=doc["class_label"],
            ranks=int(doc["ranks"]),
            elapsed_s=float(doc["elapsed_s"]),
            mops=float(doc["mops"]),
            timestamp=doc["timestamp"],
            verification=doc.get("verification"),
            energy_j=doc.get("energy_j"),
            payload=doc.get("payload"),
        )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _verification_label(verified: bool | None) -> str:
    if verified is None:
        return "n/a"
    return "pass" if verified else "fail"


def record_from_ep(run: EpRun, class_label: str) -> RunRecord:
    return RunRecord(
        source="native",
        benchmark="EP",
        class_label=class_label,
        ranks=run.ranks,
        elapsed_s=run.elapsed_s,
        mops=run.mops,
        timestamp=_now(),
        verification=_verification_label(run.verified),
        payload={
            "annulus_counts": list(run.result.annulus_counts),
            "sum_x": run.result.sum_x,
            "sum_y": run.result.sum_y,
            "accepted_pairs": run.result.accepted_pairs,
        },
    )


def record_from_ft(run: FtRun, class_label: str) -> RunRecord:
    return RunRecord(
        source="native",
        benchmark="FT",
        class_label=class_label,
        ranks=run.ranks,
        elapsed_s=run.elapsed_s,
        mops=run.mops,
        timestamp=_now(),
        verification=_verification_label(run.verified),
        payload={
            "dims": list(run.result.dims),
            "checksums": [[c.real, c.imag] for c in run.result.checksums],
        },
    )


def record_from_prediction(
    run: PredictedRun,
    benchmark: str,
    class_label: str,
    ranks: int,
    total_mop: float,
) -> RunRecord:
    return RunRecord(
        source="model",
        benchmark=benchmark.upper(),
        class_label=class_label,
        ranks=ranks,
        elapsed_s=run.total_time_s,
        mops=total_mop / run.total_time_s if run.total_time_s > 0 else float("inf"),
        timestamp=_now(),
        energy_j=run.energy_j if run.energy_j is not None else 0.0,
        payload={
            "phase_times_s": list(run.phase_times_s),
            "board_occupancy": list(run.board_occupancy),
        },
    )


@dataclass(frozen=True)
class CalibratedModel:
    """Contents of a calibrated model file."""

    core_rate_mops: dict[str, float]
    eta: dict[int, float]
    link_bandwidth_eff_bps: float
    per_message_latency_s: float
    work_mop: dict[str, dict[str, float]]

    def machine_model(self, benchmark: str) -> MachineModel:
        benchmark = benchmark.upper()
        if benchmark not in self.core_rate_mops:
            raise ValueError(f"model has no calibrated rate for {benchmark!r}")
        return MachineModel(
            core_rate_mops=self.core_rate_mops[benchmark],
            eta=dict(self.eta),
            link_bandwidth_eff_bps=self.link_bandwidth_eff_bps,
            per_message_latency_s=self.per_message_latency_s,
        )

    def work_for(self, benchmark: str, class_label: str) -> float:
        try:
            return self.work_mop[benchmark.upper()][class_label]
        except KeyError:
            raise ValueError(
                f"model has no work estimate for {benchmark.upper()}.{class_label}") from None

    def to_json(self) -> str:
        doc = {
            "core_rate_mops": self.core_rate_mops,
            "eta": {str(k): v for k, v in sorted(self.eta.items())},
            "link_bandwidth_eff_bps": self.link_bandwidth_eff_bps,
            "per_message_latency_s": self.per_message_latency_s,
            "work_mop": self.work_mop,
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CalibratedModel":
        doc = json.loads(text)
        return cls(
            core_rate_mops={k.upper(): float(v) for k, v in doc["core_rate_mops"].items()},
            eta={int(k): float(v) for k, v in doc["eta"].items()},
            link_bandwidth_eff_bps=float(doc["link_bandwidth_eff_bps"]),
            per_message_latency_s=float(doc.get("per_message_latency_s", 0.0)),
            work_mop={b.upper(): {c: float(w) for c, w in table.items()}
                      for b, table in doc["work_mop"].items()},
        )


def calibrate_cluster_model(
    ep_table: MeasuredTable,
    ft_table: MeasuredTable | None,
    spec: ClusterSpec,
) -> CalibratedModel:
    """Fit all model constants from the measured tables.

    EP rows (1-core and full-board anchors required) fix the compute side;
    FT rows, when given, fix the effective bandwidth and the FT rate. With
    no FT rows the bandwidth falls back to the nominal link speed.
    """
    board_cores = spec.boards[0].core_count
    ep_rows = ep_table.select("EP")
    _, ep_class = ep_rows.single_group()
    comp = calibrate_compute(ep_rows, board_cores)
    eta = {1: 1.0, board_cores: comp.eta_full_board}
    rates = {"EP": comp.core_rate_mops}
    work: dict[str, dict[str, float]] = {"EP": {ep_class: comp.work_mop}}

    nominal = min(min(b.nic_bandwidth_bps for b in spec.boards),
                  spec.switch.port_bandwidth_bps)
    bandwidth = nominal
    latency = spec.switch.per_message_latency_s

    if ft_table is not None and ft_table.rows:
        ft_rows = ft_table.select("FT")
        _, ft_class = ft_rows.single_group()
        ft_work = work_conservation(ft_rows).mean_total_mop
        work["FT"] = {ft_class: ft_work}

        single = next((r for r in sorted(ft_rows.rows, key=lambda r: r.cores)
                       if r.cores <= board_cores), None)
        multi = next((r for r in sorted(ft_rows.rows, key=lambda r: r.cores)
                      if r.cores > board_cores), None)
        if single is None:
            raise ValueError("FT table needs a single-board row to calibrate the FT rate")
        rates["FT"] = ft_work / (single.cores * single.time_s * eta_at(eta, single.cores))

        if multi is not None:
            params = FtParams.for_class(ft_class)
            profile = ft_profile(params, multi.cores, total_mop=ft_work)
            fit = calibrate_bandwidth(ft_rows, profile, spec, per_message_latency_s=latency)
            bandwidth = fit.link_bandwidth_eff_bps

    return CalibratedModel(
        core_rate_mops=rates,
        eta=eta,
        link_bandwidth_eff_bps=bandwidth,
        per_message_latency_s=latency,
        work_mop=work,
    )
