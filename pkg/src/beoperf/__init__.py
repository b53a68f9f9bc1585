"""Benchmark kernels and a calibrated performance model for small clusters.

The package has three layers: deterministic EP and FT kernels running on
an in-process rank runtime, a BSP-style performance and energy model of
the target cluster, and the analysis/calibration tooling that ties model
predictions to measured tables.
"""

from .analysis import (
    CalibrationError,
    ComparisonReport,
    MeasuredRow,
    MeasuredTable,
    ScalingReport,
    calibrate_bandwidth,
    calibrate_compute,
    compare,
    scaling_metrics,
    work_conservation,
)
from .cluster import (
    BoardSpec,
    ClusterSpec,
    ConfigError,
    PowerModel,
    RankMap,
    SwitchSpec,
    board_power,
    fit_power_model,
    load_cluster_spec,
    placement,
    render_cluster_spec,
)
from .comm import Communicator, RankFailure, spawn_ranks
from .ep import EpParams, EpResult, EpRun, ep_benchmark, ep_run, gaussian_pairs_chunk
from .fft import fft_1d, fft_3d_distributed, fft_3d_serial, fft_along_axis
from .ft import FtParams, FtResult, FtRun, ft_benchmark, ft_run
from .model import (
    AllToAllPhase,
    ComputePhase,
    MachineModel,
    PredictedRun,
    ReducePhase,
    WorkloadProfile,
    ep_profile,
    ft_profile,
    predict,
    predict_energy,
)
from .records import CalibratedModel, RunRecord, calibrate_cluster_model
from .rng import RandomStream, draw_block, lcg_next, lcg_skip

__version__ = "0.1.0"
