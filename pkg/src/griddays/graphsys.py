"""Network topologies, spectral operators and multi-resolution day signals.

Joint power/gas days are stored as one :class:`DaySignal` per day; the
electricity, wind capacity-factor and solar capacity-factor channels live on
the power network (hourly) while gas demand lives on the gas network (daily).
The union of the two networks plus the power-to-gas coupling edges forms the
joint graph on which all spectral operators act.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

CHANNELS = ("electricity", "wind_cf", "solar_cf", "gas")


class GraphsysError(ValueError):
    """Raised for malformed topologies or day signals."""


@dataclass(frozen=True)
class Graph:
    """Undirected graph with optional per-edge distances.

    Edges are stored as sorted index pairs; the adjacency derived from them
    is symmetric by construction. Distances, when present, are arbitrary
    length units and must cover every edge to be usable for affinities.
    """

    node_count: int
    edges: frozenset[tuple[int, int]]
    edge_distances: dict[tuple[int, int], float] | None = None

    def __post_init__(self):
        if self.node_count <= 0:
            raise GraphsysError("node_count must be positive")
        canonical = set()
        for (i, j) in self.edges:
            if i == j:
                raise GraphsysError(f"self-loop on node {i}")
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise GraphsysError(f"edge ({i},{j}) out of range")
            canonical.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(canonical))
        if self.edge_distances is not None:
            dists = {}
            for (i, j), d in self.edge_distances.items():
                if d < 0:
                    raise GraphsysError(f"negative distance on edge ({i},{j})")
                dists[(min(i, j), max(i, j))] = float(d)
            object.__setattr__(self, "edge_distances", dists)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def build_adjacency(graph: Graph) -> np.ndarray:
    """Dense binary adjacency: 1 on edges, 0 elsewhere (zero diagonal)."""
    a = np.zeros((graph.node_count, graph.node_count))
    for (i, j) in graph.edges:
        a[i, j] = 1.0
        a[j, i] = 1.0
    return a


def build_affinity(graph: Graph, sigma: float) -> np.ndarray:
    """Gaussian-kernel affinity exp(-dist^2 / sigma^2) on edges, 0 off edges.

    Requires every edge to carry a distance.
    """
    if sigma <= 0:
        raise GraphsysError("sigma must be positive")
    dists = graph.edge_distances or {}
    a = np.zeros((graph.node_count, graph.node_count))
    for (i, j) in graph.edges:
        if (i, j) not in dists:
            raise GraphsysError("distances required for affinity")
        w = float(np.exp(-(dists[(i, j)] ** 2) / sigma**2))
        a[i, j] = w
        a[j, i] = w
    return a


@dataclass(frozen=True)
class RenormalizedLaplacian:
    """Propagation operator D~^{-1/2} (I + A) D~^{-1/2} with D~ = I + D."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GraphsysError("laplacian must be square")
        if np.max(np.abs(m - m.T)) > 1e-12:
            raise GraphsysError("laplacian must be symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def node_count(self) -> int:
        return self.matrix.shape[0]


def renormalized_laplacian(adjacency: np.ndarray) -> RenormalizedLaplacian:
    """Renormalized Laplacian of a symmetric nonnegative adjacency matrix."""
    a = np.asarray(adjacency, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise GraphsysError("adjacency must be square")
    if np.max(np.abs(a - a.T)) > 1e-12:
        raise GraphsysError("adjacency must be symmetric")
    if a.min() < 0:
        raise GraphsysError("adjacency must be nonnegative")
    a_tilde = a + np.eye(a.shape[0])
    d_tilde = a.sum(axis=1) + 1.0
    scale = 1.0 / np.sqrt(d_tilde)
    ell = a_tilde * np.outer(scale, scale)
    # enforce exact symmetry against floating-point drift
    ell = 0.5 * (ell + ell.T)
    return RenormalizedLaplacian(ell)


@dataclass(frozen=True)
class DaySignal:
    """One day of joint signals: hourly power-side channels, daily gas demand.

    ``electricity`` is MW on the power nodes, ``wind_cf``/``solar_cf`` are
    dimensionless capacity factors in [0, 1] on the same nodes, and ``gas``
    is MMBtu/day on the gas nodes.
    """

    day_index: int
    electricity: np.ndarray
    wind_cf: np.ndarray
    solar_cf: np.ndarray
    gas: np.ndarray

    def __post_init__(self):
        for name in CHANNELS:
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 2:
                raise GraphsysError(f"{name} must be 2-D (nodes x periods)")
            if not np.all(np.isfinite(arr)):
                raise GraphsysError(f"non-finite values in {name}")
            object.__setattr__(self, name, arr)
        n_e = self.electricity.shape[0]
        if self.wind_cf.shape[0] != n_e or self.solar_cf.shape[0] != n_e:
            raise GraphsysError("capacity-factor channels must cover every power node")

    def shapes(self) -> dict[str, tuple[int, int]]:
        return {name: getattr(self, name).shape for name in CHANNELS}

    def validate_physical(self):
        """Range checks for raw (unnormalized) data."""
        if self.electricity.min() < 0 or self.gas.min() < 0:
            raise GraphsysError("demands must be nonnegative")
        for name in ("wind_cf", "solar_cf"):
            arr = getattr(self, name)
            if arr.min() < 0 or arr.max() > 1:
                raise GraphsysError(f"{name} entries must lie in [0, 1]")


@dataclass(frozen=True)
class ChannelScaling:
    """Affine record mapping one channel group to [-1, 1] and back."""

    minimum: float
    maximum: float
    constant: bool

    def forward(self, x: np.ndarray) -> np.ndarray:
        if self.constant:
            return np.zeros_like(x)
        return 2.0 * (x - self.minimum) / (self.maximum - self.minimum) - 1.0

    def inverse(self, x: np.ndarray) -> np.ndarray:
        if self.constant:
            return np.full_like(x, self.minimum)
        return (x + 1.0) * (self.maximum - self.minimum) / 2.0 + self.minimum

    def to_json(self) -> dict:
        return {"min": self.minimum, "max": self.maximum, "constant": self.constant}

    @staticmethod
    def from_json(obj: dict) -> "ChannelScaling":
        return ChannelScaling(float(obj["min"]), float(obj["max"]), bool(obj["constant"]))


@dataclass(frozen=True)
class MultiResolutionDataset:
    """Per-day signals over a power graph, a gas graph and their coupling."""

    power_graph: Graph
    gas_graph: Graph
    coupling_edges: tuple[tuple[int, int], ...]
    days: tuple[DaySignal, ...]
    normalization: dict[str, ChannelScaling] | None = None

    def __post_init__(self):
        object.__setattr__(self, "days", tuple(self.days))
        object.__setattr__(self, "coupling_edges", tuple(sorted(set(self.coupling_edges))))
        if not self.days:
            raise GraphsysError("dataset must contain at least one day")
        ref = self.days[0].shapes()
        for day in self.days:
            if day.shapes() != ref:
                raise GraphsysError(f"day {day.day_index} shape differs from day {self.days[0].day_index}")
        if ref["electricity"][0] != self.power_graph.node_count:
            raise GraphsysError("electricity rows must match power node count")
        if ref["gas"][0] != self.gas_graph.node_count:
            raise GraphsysError("gas rows must match gas node count")
        for (p, g) in self.coupling_edges:
            if not (0 <= p < self.power_graph.node_count):
                raise GraphsysError(f"coupling edge power node {p} out of range")
            if not (0 <= g < self.gas_graph.node_count):
                raise GraphsysError(f"coupling edge gas node {g} out of range")
        if self.normalization is None:
            for day in self.days:
                day.validate_physical()

    @property
    def n_power(self) -> int:
        return self.power_graph.node_count

    @property
    def n_gas(self) -> int:
        return self.gas_graph.node_count

    @property
    def n_days(self) -> int:
        return len(self.days)

    def periods(self) -> dict[str, int]:
        """Number of sub-periods per channel group."""
        return {name: shape[1] for name, shape in self.days[0].shapes().items()}

    def channel_stack(self, name: str) -> np.ndarray:
        """All days of one channel as a (days, nodes, periods) tensor."""
        return np.stack([getattr(day, name) for day in self.days])

    def day_indices(self) -> list[int]:
        return [day.day_index for day in self.days]


def assemble_joint_graph(dataset: MultiResolutionDataset) -> Graph:
    """Disjoint union of power and gas graphs plus coupling edges.

    Gas node ``i`` maps to joint index ``n_power + i``.
    """
    n_e = dataset.n_power
    edges = set(dataset.power_graph.edges)
    for (i, j) in dataset.gas_graph.edges:
        edges.add((n_e + i, n_e + j))
    for (p, g) in dataset.coupling_edges:
        edges.add((p, n_e + g))
    return Graph(node_count=n_e + dataset.n_gas, edges=frozenset(edges))


def normalize(dataset: MultiResolutionDataset) -> MultiResolutionDataset:
    """Affinely map each channel group onto [-1, 1] using its global range.

    Idempotent: an already-normalized dataset is returned unchanged so the
    original scaling record survives round trips.
    """
    if dataset.normalization is not None:
        return dataset
    scalings: dict[str, ChannelScaling] = {}
    for name in CHANNELS:
        stack = dataset.channel_stack(name)
        lo, hi = float(stack.min()), float(stack.max())
        scalings[name] = ChannelScaling(lo, hi, constant=(hi == lo))
    days = tuple(
        DaySignal(
            day_index=day.day_index,
            **{name: scalings[name].forward(getattr(day, name)) for name in CHANNELS},
        )
        for day in dataset.days
    )
    return replace(dataset, days=days, normalization=scalings)


def denormalize(dataset: MultiResolutionDataset) -> MultiResolutionDataset:
    """Invert :func:`normalize`; no-op on raw datasets."""
    if dataset.normalization is None:
        return dataset
    scalings = dataset.normalization
    days = tuple(
        DaySignal(
            day_index=day.day_index,
            **{name: scalings[name].inverse(getattr(day, name)) for name in CHANNELS},
        )
        for day in dataset.days
    )
    return replace(dataset, days=days, normalization=None)


# ---------------------------------------------------------------------------
# File formats: topology JSON and per-channel time-series CSV.
# ---------------------------------------------------------------------------


def save_topology(graph: Graph, path: str | Path):
    edges = []
    for (i, j) in graph.sorted_edges():
        if graph.edge_distances is not None:
            edges.append([i, j, graph.edge_distances[(i, j)]])
        else:
            edges.append([i, j])
    payload = {"nodes": graph.node_count, "edges": edges}
    Path(path).write_text(json.dumps(payload, indent=1))


def load_topology(path: str | Path) -> Graph:
    payload = json.loads(Path(path).read_text())
    edges = set()
    dists = {}
    has_dist = False
    for entry in payload["edges"]:
        i, j = int(entry[0]), int(entry[1])
        edges.add((i, j))
        if len(entry) > 2:
            has_dist = True
            dists[(i, j)] = float(entry[2])
    return Graph(
        node_count=int(payload["nodes"]),
        edges=frozenset(edges),
        edge_distances=dists if has_dist else None,
    )


def save_coupling(edges, n_power: int, n_gas: int, path: str | Path):
    payload = {
        "nodes": {"power": n_power, "gas": n_gas},
        "edges": [[p, g] for (p, g) in sorted(set(edges))],
    }
    Path(path).write_text(json.dumps(payload, indent=1))


def load_coupling(path: str | Path) -> tuple[tuple[tuple[int, int], ...], int, int]:
    payload = json.loads(Path(path).read_text())
    edges = tuple(sorted((int(p), int(g)) for p, g in payload["edges"]))
    return edges, int(payload["nodes"]["power"]), int(payload["nodes"]["gas"])


def save_timeseries(stack: np.ndarray, path: str | Path):
    """Write a (days, nodes, periods) tensor as day,node,t0,t1,... CSV."""
    n_days, n_nodes, n_periods = stack.shape
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day", "node"] + [f"t{t}" for t in range(n_periods)])
        for d in range(n_days):
            for v in range(n_nodes):
                writer.writerow([d, v] + [repr(float(x)) for x in stack[d, v]])


def load_timeseries(path: str | Path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n_periods = len(header) - 2
        rows = [(int(r[0]), int(r[1]), [float(x) for x in r[2:]]) for r in reader]
    if not rows:
        raise GraphsysError(f"empty time-series file: {path}")
    n_days = max(r[0] for r in rows) + 1
    n_nodes = max(r[1] for r in rows) + 1
    stack = np.full((n_days, n_nodes, n_periods), np.nan)
    for d, v, vals in rows:
        stack[d, v] = vals
    if np.isnan(stack).any():
        raise GraphsysError(f"missing (day, node) rows in {path}")
    return stack


def load_dataset(
    power_topology: str | Path,
    gas_topology: str | Path,
    coupling: str | Path,
    electricity: str | Path,
    wind_cf: str | Path,
    solar_cf: str | Path,
    gas: str | Path,
) -> MultiResolutionDataset:
    """Assemble a raw dataset from topology JSON and channel CSV files."""
    power_graph = load_topology(power_topology)
    gas_graph = load_topology(gas_topology)
    coupling_edges, n_p, n_g = load_coupling(coupling)
    if n_p != power_graph.node_count or n_g != gas_graph.node_count:
        raise GraphsysError("coupling file node counts disagree with topologies")
    stacks = {
        "electricity": load_timeseries(electricity),
        "wind_cf": load_timeseries(wind_cf),
        "solar_cf": load_timeseries(solar_cf),
        "gas": load_timeseries(gas),
    }
    n_days = stacks["electricity"].shape[0]
    for name, stack in stacks.items():
        if stack.shape[0] != n_days:
            raise GraphsysError(f"{name} day count differs from electricity")
    days = tuple(
        DaySignal(
            day_index=d,
            electricity=stacks["electricity"][d],
            wind_cf=stacks["wind_cf"][d],
            solar_cf=stacks["solar_cf"][d],
            gas=stacks["gas"][d],
        )
        for d in range(n_days)
    )
    return MultiResolutionDataset(
        power_graph=power_graph,
        gas_graph=gas_graph,
        coupling_edges=coupling_edges,
        days=days,
    )


def save_dataset(dataset: MultiResolutionDataset, out_dir: str | Path) -> dict[str, str]:
    """Write all topology and channel files into ``out_dir``; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "power_topology": str(out / "power_topology.json"),
        "gas_topology": str(out / "gas_topology.json"),
        "coupling": str(out / "coupling.json"),
        "electricity": str(out / "electricity.csv"),
        "wind_cf": str(out / "wind_cf.csv"),
        "solar_cf": str(out / "solar_cf.csv"),
        "gas": str(out / "gas.csv"),
    }
    save_topology(dataset.power_graph, paths["power_topology"])
    save_topology(dataset.gas_graph, paths["gas_topology"])
    save_coupling(dataset.coupling_edges, dataset.n_power, dataset.n_gas, paths["coupling"])
    for name in CHANNELS:
        save_timeseries(dataset.channel_stack(name), paths[name])
    return paths
