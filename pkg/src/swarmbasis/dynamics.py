"""Well-mixed output dynamics driven by a swarm of basis agents.

The output concentration obeys ``dv/dt = -R v + sum(C*B(u))``.  The drive
term is piecewise constant in ``u``, so the simulator advances with the
exact exponential flow rather than a generic ODE scheme, and puts extra
step boundaries at program switches and input discontinuities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisConfig, ConcentrationMap, cell_indices, drive_many
from .errors import EmptyTrace, ScheduleGap


def drive(cmap: ConcentrationMap, cfg: BasisConfig, u) -> float:
    """Net release rate sum(C*B(u)); equals R times the programmed cell value."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return float(drive_many(cmap, cfg, u[None, :])[0])


def analytic_v(v0: float, target: float, rate: float, elapsed: float) -> float:
    decay = math.exp(-rate * elapsed)
    return v0 * decay + target * (1.0 - decay)


def transient_error(v0: float, target: float, rate: float, elapsed: float) -> float:
    return (target - v0) * math.exp(-rate * elapsed)


def step(v: float, cmap: ConcentrationMap, cfg: BasisConfig, u, dt: float) -> float:
    """Advance ``v`` by ``dt`` with the drive frozen at ``u``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    return analytic_v(v, drive(cmap, cfg, u) / cfg.clearance, cfg.clearance, dt)


# -- input signals -----------------------------------------------------------


def _vec(x) -> tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class ConstantInput:
    value: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "value", _vec(self.value))

    @property
    def dims(self):
        return len(self.value)

    def values_at(self, ts) -> np.ndarray:
        return np.tile(np.array(self.value), (len(ts), 1))

    def events(self, partition, t0, t_end) -> list[float]:
        return []


@dataclass(frozen=True)
class StepInput:
    """Piecewise-constant input: ``levels[j]`` holds from ``times[j-1]`` on."""

    levels: tuple[tuple[float, ...], ...]
    times: tuple[float, ...]

    def __post_init__(self):
        levels = tuple(_vec(x) for x in self.levels)
        times = tuple(float(t) for t in self.times)
        if len(levels) != len(times) + 1:
            raise ValueError("step input needs exactly one more level than switch times")
        if len({len(x) for x in levels}) != 1:
            raise ValueError("all step levels must have the same dimension")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("step times must be strictly increasing")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "times", times)

    @property
    def dims(self):
        return len(self.levels[0])

    def values_at(self, ts) -> np.ndarray:
        j = np.searchsorted(self.times, np.asarray(ts, dtype=float), side="right")
        return np.array(self.levels)[j]

    def events(self, partition, t0, t_end) -> list[float]:
        return list(self.times)


@dataclass(frozen=True)
class RampInput:
    """Linear sweep from ``start`` to ``end`` over [t_start, t_end], held outside.

    With ``period`` set the sweep restarts every ``period`` time units from
    ``t_start`` on (a sawtooth); the sweep duration must fit in one period.
    """

    start: tuple[float, ...]
    end: tuple[float, ...]
    t_start: float
    t_end: float
    period: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "start", _vec(self.start))
        object.__setattr__(self, "end", _vec(self.end))
        if len(self.start) != len(self.end):
            raise ValueError("ramp start and end must have the same dimension")
        if not self.t_end > self.t_start:
            raise ValueError("ramp t_end must exceed t_start")
        if self.period is not None and not self.period >= self.t_end - self.t_start:
            raise ValueError("ramp period must be at least t_end - t_start")

    @property
    def dims(self):
        return len(self.start)

    def _phase(self, ts: np.ndarray) -> np.ndarray:
        if self.period is None:
            return ts
        shifted = ts - self.t_start
        cyc = np.floor(shifted / self.period)
        return np.where(shifted >= 0, ts - np.maximum(cyc, 0) * self.period, ts)

    def values_at(self, ts) -> np.ndarray:
        ts = self._phase(np.asarray(ts, dtype=float))
        frac = np.clip((ts - self.t_start) / (self.t_end - self.t_start), 0.0, 1.0)
        a, b = np.array(self.start), np.array(self.end)
        return a + (b - a) * frac[:, None]

    def _cycle_events(self, partition) -> list[float]:
        out = [self.t_start, self.t_end]
        span = self.t_end - self.t_start
        for i, bps in enumerate(partition.breakpoints):
            a, b = self.start[i], self.end[i]
            if a == b:
                continue
            for x in bps[1:-1]:
                if min(a, b) < x < max(a, b):
                    out.append((i, x, self.t_start + span * ((x - a) / (b - a)), a < b))
        return out

    def events(self, partition, t0, t_end) -> list[float]:
        """Ramp corners, sawtooth restarts and cell-boundary crossing times."""
        cycle = self._cycle_events(partition)
        offsets = [0.0]
        if self.period is not None:
            n = int(math.floor((t_end - self.t_start) / self.period)) + 1
            offsets = [c * self.period for c in range(max(n, 1))]
        out = []
        for off in offsets:
            for ev in cycle:
                if isinstance(ev, tuple):
                    i, x, tc, rising = ev
                    out.append(self._settle(tc + off, i, x, rising))
                else:
                    out.append(ev + off)
        return out

    def _settle(self, tc, dim, x, rising):
        # nudge forward a few ulps so the row at tc already sits in the new cell
        for _ in range(8):
            val = self.values_at([tc])[0, dim]
            if (val >= x) if rising else (val < x):
                break
            tc = math.nextafter(tc, math.inf)
        return tc


@dataclass(frozen=True)
class SampledInput:
    """Sampled series with zero-order hold; the first sample also covers earlier times."""

    times: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(_vec(v) for v in self.values)
        if not times or len(times) != len(values):
            raise ValueError("sampled input needs equal, nonzero numbers of times and values")
        if len({len(v) for v in values}) != 1:
            raise ValueError("all samples must have the same dimension")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("sample times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def dims(self):
        return len(self.values[0])

    def values_at(self, ts) -> np.ndarray:
        j = np.searchsorted(self.times, np.asarray(ts, dtype=float), side="right") - 1
        return np.array(self.values)[np.maximum(j, 0)]

    def events(self, partition, t0, t_end) -> list[float]:
        return list(self.times[1:])


InputSignal = ConstantInput | StepInput | RampInput | SampledInput


# -- programs and traces -----------------------------------------------------


@dataclass(frozen=True)
class SwarmProgram:
    """Concentration maps switched in at increasing times."""

    cfg: BasisConfig
    segments: tuple[tuple[float, ConcentrationMap], ...]

    def __post_init__(self):
        segs = tuple((float(t), m) for t, m in self.segments)
        if not segs:
            raise ValueError("a program needs at least one segment")
        if any(b[0] <= a[0] for a, b in zip(segs, segs[1:])):
            raise ValueError("switch times must be strictly increasing")
        for t, m in segs:
            if m.partition != self.cfg.partition:
                raise ValueError(f"map switched in at t={t} uses a different partition")
        object.__setattr__(self, "segments", segs)

    @property
    def switch_times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.segments)

    @property
    def maps(self) -> tuple[ConcentrationMap, ...]:
        return tuple(m for _, m in self.segments)


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    v_desired: np.ndarray
    e: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("t", "u", "v", "v_desired", "e"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.t)

    @property
    def max_abs_error(self) -> float:
        return float(np.max(np.abs(self.e)))


def _time_grid(t0, t_end, dt, events) -> np.ndarray:
    n = int(math.floor((t_end - t0) / dt + 1e-9))
    grid = [t0 + k * dt for k in range(n + 1)]
    tol = 1e-9 * dt
    if t_end - grid[-1] > tol:
        grid.append(t_end)
    else:
        grid[-1] = t_end
    tagged = sorted([(t, False) for t in grid] + [(t, True) for t in events if t0 < t < t_end])
    out: list[float] = []
    pinned = False
    for t, is_event in tagged:
        if out and t - out[-1] <= tol:
            # coincident points collapse; exact event times win over grid times
            if is_event and not pinned:
                out[-1] = t
                pinned = True
            continue
        out.append(t)
        pinned = is_event
    out[0], out[-1] = t0, t_end
    return np.array(out)


def simulate(
    prog: SwarmProgram,
    signal: InputSignal,
    t0: float,
    t_end: float,
    dt: float,
    v0: float = 0.0,
) -> SimulationTrace:
    """March the output concentration over [t0, t_end].

    Each row records the state at its time with right-continuous inputs and
    program: a switch at ``t_s`` already applies to the row at ``t_s``.  The
    drive is frozen over each step at its value at the step's left end.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")
    cfg = prog.cfg
    if signal.dims != cfg.partition.dims:
        raise ValueError("input signal dimension does not match the partition")
    switches = np.array(prog.switch_times)
    if switches[0] > t0:
        raise ScheduleGap(f"program starts at {switches[0]!r}, after simulation start {t0!r}")

    events = list(prog.switch_times[1:]) + signal.events(cfg.partition, t0, t_end)
    t = _time_grid(t0, t_end, dt, events)
    u = signal.values_at(t)
    cell_indices(cfg.partition, u)  # OutOfDomain before any work

    seg = np.searchsorted(switches, t, side="right") - 1
    rate_in = np.empty(len(t))
    for s, cmap in enumerate(prog.maps):
        mask = seg == s
        if mask.any():
            rate_in[mask] = drive_many(cmap, cfg, u[mask])
    R = cfg.clearance
    desired = rate_in / R

    v = np.empty(len(t))
    v[0] = v0
    # exact flow from the last point where the drive changed
    t_a, v_a, d_a = t[0], v0, rate_in[0]
    for j in range(len(t) - 1):
        if rate_in[j] != d_a:
            t_a, v_a, d_a = t[j], v[j], rate_in[j]
        v[j + 1] = analytic_v(v_a, d_a / R, R, t[j + 1] - t_a)

    meta = {
        "dt": dt,
        "R": R,
        "alpha": cfg.alpha,
        "partition": cfg.partition.summary(),
        "negative_v": bool(np.any(v < 0)),
    }
    return SimulationTrace(t, u, v, desired, desired - v, meta)


def mae(trace: SimulationTrace) -> float:
    """Mean absolute transient error over the trace rows."""
    if len(trace) == 0:
        raise EmptyTrace("cannot average an empty trace")
    return float(np.mean(np.abs(trace.e)))


def event_indices(trace: SimulationTrace) -> np.ndarray:
    """Rows where the programmed steady-state value jumps (plus row 0)."""
    jumps = np.nonzero(np.diff(trace.v_desired) != 0)[0] + 1
    return np.concatenate([[0], jumps])


def envelope_excess(trace: SimulationTrace) -> float:
    """Largest amount by which |e| exceeds its exponential envelope between events.

    Zero (up to rounding) means the error decays at least as fast as
    ``|e(t_event)| * exp(-R (t - t_event))`` on every interval.
    """
    R = trace.meta["R"]
    starts = event_indices(trace)
    ends = np.append(starts[1:], len(trace))
    worst = 0.0
    for a, b in zip(starts, ends):
        env = abs(trace.e[a]) * np.exp(-R * (trace.t[a:b] - trace.t[a]))
        worst = max(worst, float(np.max(np.abs(trace.e[a:b]) - env)))
    return worst
