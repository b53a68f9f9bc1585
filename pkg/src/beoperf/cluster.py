"""Cluster hardware description: boards, switch, power behaviour, placement.

A ClusterSpec is a validated, immutable picture of a small star-topology
cluster (every board wired straight into one switch). Configs are plain
JSON documents; `load_cluster_spec` reports the path of any offending
field. Power per board is linear in active cores, which matches measured
idle / one-core / all-cores wall readings to a few milliwatts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class ConfigError(ValueError):
    """A cluster config document failed to parse or validate."""


@dataclass(frozen=True)
class BoardSpec:
    id: str
    core_count: int
    core_clock_hz: float
    ram_bytes: int
    nic_bandwidth_bps: float
    mac_address: str

    def __post_init__(self) -> None:
        if self.core_count < 1:
            raise ValueError(f"board {self.id}: core_count must be >= 1")
        if self.core_clock_hz <= 0:
            raise ValueError(f"board {self.id}: core_clock_hz must be positive")
        if self.ram_bytes <= 0:
            raise ValueError(f"board {self.id}: ram_bytes must be positive")
        if self.nic_bandwidth_bps <= 0:
            raise ValueError(f"board {self.id}: nic_bandwidth_bps must be positive")


@dataclass(frozen=True)
class SwitchSpec:
    port_count: int
    port_bandwidth_bps: float
    per_message_latency_s: float = 0.0

    def __post_init__(self) -> None:
        if self.port_count < 1:
            raise ValueError("switch port_count must be >= 1")
        if self.port_bandwidth_bps <= 0:
            raise ValueError("switch port_bandwidth_bps must be positive")
        if self.per_message_latency_s < 0:
            raise ValueError("switch per_message_latency_s must be nonnegative")


@dataclass(frozen=True)
class PowerModel:
    """Per-board draw `p_idle_w + p_core_w * active_cores`, plus shared infra."""

    p_idle_w: float
    p_core_w: float
    p_infra_w: float = 0.0

    def __post_init__(self) -> None:
        if self.p_idle_w < 0 or self.p_core_w < 0 or self.p_infra_w < 0:
            raise ValueError("power model terms must be nonnegative")


def board_power(model: PowerModel, active_cores: int) -> float:
    """Watts drawn by one board with the given number of busy cores."""
    if active_cores < 0:
        raise ValueError("active_cores must be nonnegative")
    return model.p_idle_w + model.p_core_w * active_cores


@dataclass(frozen=True)
class ClusterSpec:
    boards: tuple[BoardSpec, ...]
    switch: SwitchSpec
    power: PowerModel
    topology: str = "star"

    def __post_init__(self) -> None:
        if not self.boards:
            raise ValueError("cluster needs at least one board")
        if self.topology != "star":
            raise ValueError(f"unsupported topology: {self.topology}")
        macs = [b.mac_address for b in self.boards]
        if len(set(macs)) != len(macs):
            dup = sorted({m for m in macs if macs.count(m) > 1})
            raise ValueError(f"duplicate MAC address: {dup[0]}")
        if self.switch.port_count < len(self.boards):
            raise ValueError(
                f"switch has {self.switch.port_count} ports for {len(self.boards)} boards"
            )

    @property
    def total_cores(self) -> int:
        return sum(b.core_count for b in self.boards)


@dataclass(frozen=True)
class RankMap:
    """Rank index -> (board index, core index); injective by construction."""

    entries: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("rank map is not injective")

    @property
    def ranks(self) -> int:
        return len(self.entries)

    def board_occupancy(self, board_count: int) -> tuple[int, ...]:
        """Active cores per board under this placement."""
        counts = [0] * board_count
        for board, _core in self.entries:
            counts[board] += 1
        return tuple(counts)


def placement(spec: ClusterSpec, ranks: int, policy: str = "block") -> RankMap:
    """Map ranks onto cores; `block` fills each board before the next."""
    if policy != "block":
        raise ValueError(f"unknown placement policy: {policy}")
    if ranks < 1:
        raise ValueError("ranks must be >= 1")
    if ranks > spec.total_cores:
        raise ValueError(f"{ranks} ranks exceed {spec.total_cores} cores")
    entries = []
    for board_index, board in enumerate(spec.boards):
        for core in range(board.core_count):
            if len(entries) == ranks:
                break
            entries.append((board_index, core))
    return RankMap(tuple(entries))


@dataclass(frozen=True)
class PowerFit:
    """Least-squares power line plus per-sample diagnostics."""

    model: PowerModel
    residuals: tuple[float, ...]
    max_abs_residual: float
    clamped: bool = False


def fit_power_model(samples: list[tuple[int, float]], p_infra_w: float = 0.0) -> PowerFit:
    """Fit watts = p_idle_w + p_core_w * active_cores by least squares.

    Needs at least two distinct core counts. A negative fitted slope is
    clamped to zero (and flagged), since board power cannot drop when a
    core wakes up.
    """
    if len({k for k, _ in samples}) < 2:
        raise ValueError("need samples at >= 2 distinct core counts")
    xs = [float(k) for k, _ in samples]
    ys = [float(w) for _, w in samples]
    n = len(samples)
    x_mean = sum(xs) / n
    y_mean = sum(ys) / n
    sxx = sum((x - x_mean) ** 2 for x in xs)
    sxy = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    slope = sxy / sxx
    clamped = False
    if slope < 0:
        slope = 0.0
        clamped = True
    intercept = y_mean - slope * x_mean
    model = PowerModel(p_idle_w=intercept, p_core_w=slope, p_infra_w=p_infra_w)
    residuals = tuple(w - board_power(model, k) for k, w in samples)
    return PowerFit(
        model=model,
        residuals=residuals,
        max_abs_residual=max(abs(r) for r in residuals),
        clamped=clamped,
    )


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"{path}: {message}")


def _number(doc: dict, path: str, key: str, positive: bool = True) -> float:
    _require(key in doc, f"{path}.{key}", "missing field")
    value = doc[key]
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             f"{path}.{key}", "must be a number")
    if positive:
        _require(value > 0, f"{path}.{key}", "must be positive")
    else:
        _require(value >= 0, f"{path}.{key}", "must be nonnegative")
    return float(value)


def load_cluster_spec(config_text: str) -> ClusterSpec:
    """Parse and validate a cluster config JSON document."""
    try:
        doc = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "$", "top level must be an object")
    _require("boards" in doc, "boards", "missing field")
    _require(isinstance(doc["boards"], list) and doc["boards"], "boards",
             "must be a nonempty array")

    boards = []
    macs: dict[str, str] = {}
    for i, raw in enumerate(doc["boards"]):
        path = f"boards[{i}]"
        _require(isinstance(raw, dict), path, "must be an object")
        _require("id" in raw and isinstance(raw["id"], str), f"{path}.id",
                 "missing or non-string")
        _require("mac" in raw and isinstance(raw["mac"], str), f"{path}.mac",
                 "missing or non-string")
        mac = raw["mac"]
        _require(mac not in macs, f"{path}.mac",
                 f"duplicate MAC {mac!r} (also used by {macs.get(mac)})")
        macs[mac] = raw["id"]
        core_count = _number(raw, path, "core_count")
        _require(core_count == int(core_count) and core_count >= 1,
                 f"{path}.core_count", "must be a positive integer")
        ram = _number(raw, path, "ram_bytes")
        boards.append(BoardSpec(
            id=raw["id"],
            core_count=int(core_count),
            core_clock_hz=_number(raw, path, "core_clock_hz"),
            ram_bytes=int(ram),
            nic_bandwidth_bps=_number(raw, path, "nic_bandwidth_bps"),
            mac_address=mac,
        ))

    _require("switch" in doc and isinstance(doc["switch"], dict), "switch",
             "missing or not an object")
    sw = doc["switch"]
    port_count = _number(sw, "switch", "port_count")
    _require(port_count == int(port_count), "switch.port_count", "must be an integer")
    _require(int(port_count) >= len(boards), "switch.port_count",
             f"{int(port_count)} ports cannot serve {len(boards)} boards")
    switch = SwitchSpec(
        port_count=int(port_count),
        port_bandwidth_bps=_number(sw, "switch", "port_bandwidth_bps"),
        per_message_latency_s=_number(sw, "switch", "per_message_latency_s",
                                      positive=False) if "per_message_latency_s" in sw else 0.0,
    )

    _require("power" in doc and isinstance(doc["power"], dict), "power",
             "missing or not an object")
    pw = doc["power"]
    power = PowerModel(
        p_idle_w=_number(pw, "power", "p_idle_w", positive=False),
        p_core_w=_number(pw, "power", "p_core_w", positive=False),
        p_infra_w=_number(pw, "power", "p_infra_w", positive=False) if "p_infra_w" in pw else 0.0,
    )

    topology = doc.get("topology", "star")
    _require(topology == "star", "topology", f"unsupported topology {topology!r}")
    return ClusterSpec(boards=tuple(boards), switch=switch, power=power, topology=topology)


def render_cluster_spec(spec: ClusterSpec) -> str:
    """Serialise a ClusterSpec back to the config JSON format (round-trips)."""
    doc = {
        "boards": [
            {
                "id": b.id,
                "core_count": b.core_count,
                "core_clock_hz": b.core_clock_hz,
                "ram_bytes": b.ram_bytes,
                "nic_bandwidth_bps": b.nic_bandwidth_bps,
                "mac": b.mac_address,
            }
            for b in spec.boards
        ],
        "switch": {
            "port_count": spec.switch.port_count,
            "port_bandwidth_bps": spec.switch.port_bandwidth_bps,
            "per_message_latency_s": spec.switch.per_message_latency_s,
        },
        "power": {
            "p_idle_w": spec.power.p_idle_w,
            "p_core_w": spec.power.p_core_w,
            "p_infra_w": spec.power.p_infra_w,
        },
        "topology": spec.topology,
    }
    return json.dumps(doc, indent=2) + "\n"
