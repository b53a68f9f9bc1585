from pathlib import Path

import pytest

from beoperf.analysis import MeasuredTable
from beoperf.cluster import load_cluster_spec
from beoperf.ep import EpParams, ep_benchmark
from beoperf.ft import FtParams, ft_benchmark

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def paper_ep() -> MeasuredTable:
    return MeasuredTable.from_csv((DATA_DIR / "paper_ep_b.csv").read_text())


@pytest.fixture(scope="session")
def paper_ft() -> MeasuredTable:
    return MeasuredTable.from_csv((DATA_DIR / "paper_ft_a.csv").read_text())


@pytest.fixture(scope="session")
def radxa4():
    return load_cluster_spec((DATA_DIR / "radxa4.json").read_text())


# Class S runs are shared between the unit and acceptance suites; they are
# deterministic, so caching them only saves wall time.
@pytest.fixture(scope="session")
def ep_class_s_runs():
    params = EpParams.for_class("S")
    return {p: ep_benchmark(params, p) for p in (1, 2, 4, 8)}


@pytest.fixture(scope="session")
def ft_class_s_runs():
    params = FtParams.for_class("S")
    return {p: ft_benchmark(params, p) for p in (1, 2, 4)}
