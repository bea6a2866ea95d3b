"""Input-domain partitions, B-functions and the crisp basis expansion.

A partition splits each input dimension into ``q_i`` intervals; one cell is
the product of one interval per dimension.  Intervals are half-open
``[lo, hi)`` except the last one in each dimension, which also owns the
upper domain bound, so every in-domain point has exactly one cell.
Cell indices are 1-based throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .errors import OutOfDomain
from .targets import evaluate_target


@dataclass(frozen=True)
class Partition:
    breakpoints: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        bps = tuple(tuple(float(x) for x in dim) for dim in self.breakpoints)
        if not bps:
            raise ValueError("partition needs at least one dimension")
        for i, dim in enumerate(bps):
            if len(dim) < 2:
                raise ValueError(f"dimension {i} needs at least two breakpoints")
            if not all(np.isfinite(dim)):
                raise ValueError(f"dimension {i} has non-finite breakpoints")
            if any(b <= a for a, b in zip(dim, dim[1:])):
                raise ValueError(f"breakpoints of dimension {i} must be strictly increasing")
        object.__setattr__(self, "breakpoints", bps)

    @classmethod
    def uniform(cls, bounds: Sequence[tuple[float, float]], q: Sequence[int]) -> "Partition":
        if len(bounds) != len(q):
            raise ValueError("bounds and q must have the same length")
        dims = []
        for (a, b), qi in zip(bounds, q):
            if int(qi) != qi or qi < 1:
                raise ValueError(f"interval count must be a positive integer, got {qi!r}")
            qi = int(qi)
            a, b = float(a), float(b)
            # k/q first keeps 0.1*k style grids exact on [0, 1]
            pts = [a + (b - a) * (k / qi) for k in range(qi)] + [b]
            dims.append(tuple(pts))
        return cls(tuple(dims))

    @property
    def dims(self) -> int:
        return len(self.breakpoints)

    @property
    def q(self) -> tuple[int, ...]:
        return tuple(len(d) - 1 for d in self.breakpoints)

    @property
    def bounds(self) -> tuple[tuple[float, float], ...]:
        return tuple((d[0], d[-1]) for d in self.breakpoints)

    @property
    def max_widths(self) -> tuple[float, ...]:
        return tuple(float(np.max(np.diff(d))) for d in self.breakpoints)

    @property
    def n_types(self) -> int:
        return 2 * int(np.prod(self.q))

    def cells(self) -> Iterator[tuple[int, ...]]:
        """All cell multi-indices in lexicographic order."""
        return itertools.product(*(range(1, qi + 1) for qi in self.q))

    def summary(self) -> str:
        return ";".join(
            f"[{lo!r},{hi!r}]/q={len(d) - 1}" for d, (lo, hi) in zip(self.breakpoints, self.bounds)
        )


@dataclass(frozen=True, order=True)
class BaType:
    """A basis-agent type: release (+1) or uptake (-1) sign and one cell."""

    sign: int
    cell: tuple[int, ...]

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        object.__setattr__(self, "cell", tuple(int(k) for k in self.cell))

    def label(self) -> str:
        return ",".join(["+1" if self.sign > 0 else "-1", *map(str, self.cell)])

    def check(self, partition: Partition) -> None:
        if len(self.cell) != partition.dims:
            raise IndexError(f"cell {self.cell} has wrong dimension for partition")
        for i, (k, qi) in enumerate(zip(self.cell, partition.q)):
            if not 1 <= k <= qi:
                raise IndexError(f"cell index {k} out of range 1..{qi} in dimension {i}")


def all_types(partition: Partition) -> list[BaType]:
    return [BaType(s, c) for c in partition.cells() for s in (1, -1)]


@dataclass(frozen=True)
class BasisConfig:
    partition: Partition
    alpha: float = 1.0
    clearance: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not self.clearance > 0:
            raise ValueError(f"clearance must be positive, got {self.clearance!r}")

    @property
    def time_constant(self) -> float:
        return 1.0 / self.clearance


@dataclass(frozen=True)
class ConcentrationMap:
    """Sparse, nonnegative agent concentrations over one partition.

    Zero entries are dropped on construction.  At most one sign per cell may
    carry a nonzero concentration.
    """

    partition: Partition
    entries: Mapping[BaType, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for ba, c in self.entries.items():
            ba.check(self.partition)
            c = float(c)
            if not c >= 0:
                raise ValueError(f"concentration of {ba.label()} must be >= 0, got {c!r}")
            if c != 0.0:
                clean[ba] = c
        for ba in clean:
            if BaType(-ba.sign, ba.cell) in clean:
                raise ValueError(f"cell {ba.cell} has nonzero concentration for both signs")
        object.__setattr__(self, "entries", MappingProxyType(dict(sorted(clean.items()))))

    def __eq__(self, other):
        if not isinstance(other, ConcentrationMap):
            return NotImplemented
        return self.partition == other.partition and dict(self.entries) == dict(other.entries)

    def __hash__(self):
        return hash((self.partition, tuple(self.entries.items())))

    def get(self, ba: BaType) -> float:
        return self.entries.get(ba, 0.0)

    @cached_property
    def net(self) -> np.ndarray:
        """Dense array (shape ``q``) of C(+1) - C(-1) per cell."""
        out = np.zeros(self.partition.q)
        for ba, c in self.entries.items():
            out[tuple(k - 1 for k in ba.cell)] += ba.sign * c
        out.setflags(write=False)
        return out


def _as_point(partition: Partition, u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (partition.dims,):
        raise ValueError(f"expected {partition.dims} input components, got shape {u.shape}")
    return u


def cell_indices(partition: Partition, points) -> np.ndarray:
    """Vectorised cell lookup: ``points`` of shape (m, n) -> 1-based (m, n) ints."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, partition.dims) if partition.dims > 1 else pts[:, None]
    if pts.shape[1] != partition.dims:
        raise ValueError(f"expected {partition.dims} input components per point")
    out = np.empty(pts.shape, dtype=np.int64)
    for i, bps in enumerate(partition.breakpoints):
        col = pts[:, i]
        bad = ~((col >= bps[0]) & (col <= bps[-1]))
        if bad.any():
            raise OutOfDomain(i, float(col[np.argmax(bad)]), bps[0], bps[-1])
        k = np.searchsorted(bps, col, side="right")
        out[:, i] = np.minimum(k, len(bps) - 1)
    return out


def cell_index(partition: Partition, u) -> tuple[int, ...]:
    u = _as_point(partition, u)
    return tuple(int(k) for k in cell_indices(partition, u[None, :])[0])


def midpoint(partition: Partition, cell: Sequence[int]) -> np.ndarray:
    BaType(1, tuple(cell)).check(partition)
    return np.array(
        [(bps[k - 1] + bps[k]) / 2 for bps, k in zip(partition.breakpoints, cell)]
    )


def midpoint_grid(partition: Partition) -> np.ndarray:
    """Midpoints of every cell, shape ``q + (n,)``."""
    mids = [(np.asarray(b[:-1]) + np.asarray(b[1:])) / 2 for b in partition.breakpoints]
    return np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1)


def b_eval(ba: BaType, cfg: BasisConfig, u) -> float:
    ba.check(cfg.partition)
    return ba.sign * cfg.alpha if cell_index(cfg.partition, u) == ba.cell else 0.0


def program(f: Callable, cfg: BasisConfig) -> ConcentrationMap:
    """Concentrations that make a swarm compute ``f``.

    Each cell gets ``(R/alpha)*|F|`` agents of sign ``sgn(F)``, where ``F`` is
    ``f`` at the cell midpoint.  ``F == 0`` leaves both signs empty.
    """
    part = cfg.partition
    mids = midpoint_grid(part).reshape(-1, part.dims)
    values = evaluate_target(f, mids)
    scale = cfg.clearance / cfg.alpha
    entries = {}
    for cell, val in zip(part.cells(), values):
        if val != 0.0:
            entries[BaType(1 if val > 0 else -1, cell)] = scale * abs(val)
    return ConcentrationMap(part, entries)


def _check_map(cmap: ConcentrationMap, cfg: BasisConfig) -> None:
    if cmap.partition != cfg.partition:
        raise ValueError("concentration map was built over a different partition")


def drive_many(cmap: ConcentrationMap, cfg: BasisConfig, points) -> np.ndarray:
    """Net release rate sum(C*B) at each point."""
    _check_map(cmap, cfg)
    idx = cell_indices(cfg.partition, points) - 1
    return cfg.alpha * cmap.net[tuple(idx.T)]


def approximate_many(cmap: ConcentrationMap, cfg: BasisConfig, points) -> np.ndarray:
    return drive_many(cmap, cfg, points) / cfg.clearance


def approximate(cmap: ConcentrationMap, cfg: BasisConfig, u) -> float:
    """Basis-expansion value sum((1/R)*C*B(u))."""
    u = _as_point(cfg.partition, u)
    return float(approximate_many(cmap, cfg, u[None, :])[0])


def sample_grid(bounds: Sequence[tuple[float, float]], samples_per_dim: int) -> np.ndarray:
    """Uniform tensor grid over a box, flattened to shape (m, n)."""
    if samples_per_dim < 2:
        raise ValueError("samples_per_dim must be >= 2")
    axes = [np.linspace(a, b, samples_per_dim) for a, b in bounds]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(bounds))


def sup_error(f: Callable, cmap: ConcentrationMap, cfg: BasisConfig, samples_per_dim: int = 1001) -> float:
    """Max |f - approximation| over a uniform sample grid (lower bound on the sup norm)."""
    pts = sample_grid(cfg.partition.bounds, samples_per_dim)
    exact = evaluate_target(f, pts)
    return float(np.max(np.abs(exact - approximate_many(cmap, cfg, pts))))
