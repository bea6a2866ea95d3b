"""Scenario files, the canned three-function experiment, and CSV emitters.

A scenario is a JSON document::

    {
      "schema": "swarmbasis.scenario/1",
      "partition": {"bounds": [[0, 1]], "q": [10]},   # or {"breakpoints": [[...]]}
      "alpha": 1.0, "clearance": 1.0, "v0": 0.0,
      "time": {"t0": 0, "t_end": 600, "dt": 0.01},
      "input": {"kind": "step", "levels": [[0.2], [0.8]], "times": [300]},
      "program": [{"t_switch": 0, "target": {"name": "polynomial", "coeffs": [0, 0, 1]}}],
      "design": {"grad_norms": [2.0], "q_max": [1000]}             # optional
    }

Input kinds: ``constant`` (value), ``step`` (levels, times), ``ramp``
(start, end, t_start, t_end, optional period) and ``sampled`` (times,
values).  For one-dimensional scenarios vector fields may be given as bare
numbers.
"""

from __future__ import annotations

import copy
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Sequence


from .basis import BasisConfig, ConcentrationMap, Partition, program
from .dynamics import (
    ConstantInput,
    RampInput,
    SampledInput,
    SimulationTrace,
    StepInput,
    SwarmProgram,
    envelope_excess,
    mae,
    simulate,
)
from .errors import ParseError, ValidationError
from .targets import Target, make_target, max_var

SCHEMA = "swarmbasis.scenario/1"

PAPER_INPUTS = {
    "ramp": {"kind": "ramp", "start": [0.0], "end": [1.0], "t_start": 0.0, "t_end": 600.0},
    "step": {"kind": "step", "levels": [[0.2], [0.8]], "times": [300.0]},
}

_TOP_KEYS = {"schema", "partition", "alpha", "clearance", "v0", "time", "input", "program", "design"}


def _number(x, path, positive=False, nonneg=False) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ValidationError(path, f"expected a finite number, got {x!r}")
    if positive and not x > 0:
        raise ValidationError(path, f"must be positive, got {x!r}")
    if nonneg and not x >= 0:
        raise ValidationError(path, f"must be nonnegative, got {x!r}")
    return float(x)


def _list(x, path, length=None) -> list:
    if not isinstance(x, list):
        raise ValidationError(path, f"expected a list, got {type(x).__name__}")
    if length is not None and len(x) != length:
        raise ValidationError(path, f"expected {length} entries, got {len(x)}")
    return x


def _obj(x, path) -> dict:
    if not isinstance(x, dict):
        raise ValidationError(path, f"expected an object, got {type(x).__name__}")
    return x


def _vector(x, path, dims) -> list[float]:
    if dims == 1 and not isinstance(x, list):
        x = [x]
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(_list(x, path, dims))]


def _in_domain(vec, path, bounds):
    for i, (x, (a, b)) in enumerate(zip(vec, bounds)):
        if not a <= x <= b:
            raise ValidationError(f"{path}[{i}]", f"value {x!r} outside input domain [{a!r}, {b!r}]")


def _parse_partition(raw) -> tuple[dict, Partition]:
    raw = _obj(raw, "partition")
    if "breakpoints" in raw:
        if set(raw) - {"breakpoints"}:
            raise ValidationError("partition", "give either breakpoints or bounds+q, not both")
        dims = _list(raw["breakpoints"], "partition.breakpoints")
        if not dims:
            raise ValidationError("partition.breakpoints", "needs at least one dimension")
        bps = []
        for i, d in enumerate(dims):
            path = f"partition.breakpoints[{i}]"
            d = [_number(x, f"{path}[{k}]") for k, x in enumerate(_list(d, path))]
            if len(d) < 2:
                raise ValidationError(path, "needs at least two breakpoints (q >= 1)")
            for k in range(1, len(d)):
                if not d[k] > d[k - 1]:
                    raise ValidationError(f"{path}[{k}]", "breakpoints must be strictly increasing")
            bps.append(d)
        return {"breakpoints": bps}, Partition(tuple(tuple(d) for d in bps))
    if set(raw) != {"bounds", "q"}:
        raise ValidationError("partition", "expected keys 'bounds' and 'q' (or 'breakpoints')")
    bounds = _list(raw["bounds"], "partition.bounds")
    if not bounds:
        raise ValidationError("partition.bounds", "needs at least one dimension")
    q = _list(raw["q"], "partition.q", len(bounds))
    norm_b, norm_q = [], []
    for i, (ab, qi) in enumerate(zip(bounds, q)):
        a, b = (_number(x, f"partition.bounds[{i}]") for x in _list(ab, f"partition.bounds[{i}]", 2))
        if not a < b:
            raise ValidationError(f"partition.bounds[{i}]", "lower bound must be below upper bound")
        if isinstance(qi, bool) or not isinstance(qi, int) or qi < 1:
            raise ValidationError(f"partition.q[{i}]", f"must be an integer >= 1, got {qi!r}")
        norm_b.append([a, b])
        norm_q.append(qi)
    spec = {"bounds": norm_b, "q": norm_q}
    return spec, Partition.uniform([tuple(b) for b in norm_b], norm_q)


def _parse_input(raw, part: Partition) -> dict:
    raw = _obj(raw, "input")
    kind = raw.get("kind")
    n, bounds = part.dims, part.bounds
    keys = {
        "constant": {"value"},
        "step": {"levels", "times"},
        "ramp": {"start", "end", "t_start", "t_end"},
        "sampled": {"times", "values"},
    }
    if kind not in keys:
        raise ValidationError("input.kind", f"unknown input kind {kind!r}; expected one of {sorted(keys)}")
    allowed = keys[kind] | {"kind"} | ({"period"} if kind == "ramp" else set())
    missing = keys[kind] - set(raw)
    if missing:
        raise ValidationError("input", f"missing fields {sorted(missing)} for kind {kind!r}")
    if set(raw) - allowed:
        raise ValidationError("input", f"unexpected fields {sorted(set(raw) - allowed)}")

    def times(key):
        ts = [_number(t, f"input.{key}[{j}]") for j, t in enumerate(_list(raw[key], f"input.{key}"))]
        for j in range(1, len(ts)):
            if not ts[j] > ts[j - 1]:
                raise ValidationError(f"input.{key}[{j}]", "times must be strictly increasing")
        return ts

    def vectors(key):
        out = []
        for j, x in enumerate(_list(raw[key], f"input.{key}")):
            vec = _vector(x, f"input.{key}[{j}]", n)
            _in_domain(vec, f"input.{key}[{j}]", bounds)
            out.append(vec)
        return out

    spec: dict[str, Any] = {"kind": kind}
    if kind == "constant":
        spec["value"] = _vector(raw["value"], "input.value", n)
        _in_domain(spec["value"], "input.value", bounds)
    elif kind == "step":
        spec["levels"], spec["times"] = vectors("levels"), times("times")
        if len(spec["levels"]) != len(spec["times"]) + 1:
            raise ValidationError("input.levels", "needs exactly one more level than switch times")
    elif kind == "ramp":
        for key in ("start", "end"):
            spec[key] = _vector(raw[key], f"input.{key}", n)
            _in_domain(spec[key], f"input.{key}", bounds)
        spec["t_start"] = _number(raw["t_start"], "input.t_start")
        spec["t_end"] = _number(raw["t_end"], "input.t_end")
        if not spec["t_end"] > spec["t_start"]:
            raise ValidationError("input.t_end", "must exceed t_start")
        if raw.get("period") is not None:
            spec["period"] = _number(raw["period"], "input.period", positive=True)
            if spec["period"] < spec["t_end"] - spec["t_start"]:
                raise ValidationError("input.period", "must be at least t_end - t_start")
    else:
        spec["times"], spec["values"] = times("times"), vectors("values")
        if not spec["times"] or len(spec["times"]) != len(spec["values"]):
            raise ValidationError("input.values", "needs one value per sample time (at least one)")
    return spec


def build_input(spec: dict):
    kind = spec["kind"]
    if kind == "constant":
        return ConstantInput(spec["value"])
    if kind == "step":
        return StepInput(spec["levels"], spec["times"])
    if kind == "ramp":
        return RampInput(spec["start"], spec["end"], spec["t_start"], spec["t_end"], spec.get("period"))
    return SampledInput(spec["times"], spec["values"])


def _parse_target(raw, path, dims) -> dict:
    try:
        target = make_target(_obj(raw, path))
    except KeyError as exc:
        raise ValidationError(f"{path}.name", exc.args[0]) from None
    except ValueError as exc:
        raise ValidationError(path, str(exc)) from None
    if max_var(target) >= dims:
        raise ValidationError(path, f"reads input index {max_var(target)} but the partition has {dims} dimension(s)")
    return target.spec


@dataclass(frozen=True)
class ScenarioConfig:
    partition_spec: dict
    input_spec: dict
    program_spec: tuple[tuple[float, dict], ...]
    t0: float
    t_end: float
    dt: float = 0.01
    alpha: float = 1.0
    clearance: float = 1.0
    v0: float = 0.0
    design: dict | None = field(default=None)

    @property
    def partition(self) -> Partition:
        return _parse_partition(self.partition_spec)[1]

    def basis_config(self) -> BasisConfig:
        return BasisConfig(self.partition, self.alpha, self.clearance)

    def targets(self) -> list[Target]:
        return [make_target(spec) for _, spec in self.program_spec]

    def concentration_maps(self) -> list[ConcentrationMap]:
        cfg = self.basis_config()
        return [program(f, cfg) for f in self.targets()]

    def swarm_program(self) -> SwarmProgram:
        cfg = self.basis_config()
        times = [t for t, _ in self.program_spec]
        return SwarmProgram(cfg, tuple(zip(times, self.concentration_maps())))

    def input_signal(self):
        return build_input(self.input_spec)

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA,
            "partition": copy.deepcopy(self.partition_spec),
            "alpha": self.alpha,
            "clearance": self.clearance,
            "v0": self.v0,
            "time": {"t0": self.t0, "t_end": self.t_end, "dt": self.dt},
            "input": copy.deepcopy(self.input_spec),
            "program": [{"t_switch": t, "target": copy.deepcopy(s)} for t, s in self.program_spec],
        }
        if self.design is not None:
            out["design"] = copy.deepcopy(self.design)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _parse_design(raw, dims) -> dict:
    raw = _obj(raw, "design")
    extra = set(raw) - {"grad_norms", "q_max", "samples_per_dim"}
    if extra:
        raise ValidationError("design", f"unexpected fields {sorted(extra)}")
    out = {}
    if "grad_norms" in raw:
        out["grad_norms"] = [
            _number(x, f"design.grad_norms[{i}]", nonneg=True)
            for i, x in enumerate(_list(raw["grad_norms"], "design.grad_norms", dims))
        ]
    if "q_max" in raw:
        qm = _list(raw["q_max"], "design.q_max", dims)
        for i, x in enumerate(qm):
            if isinstance(x, bool) or not isinstance(x, int) or x < 1:
                raise ValidationError(f"design.q_max[{i}]", f"must be an integer >= 1, got {x!r}")
        out["q_max"] = list(qm)
    if "samples_per_dim" in raw:
        s = raw["samples_per_dim"]
        if isinstance(s, bool) or not isinstance(s, int) or s < 3:
            raise ValidationError("design.samples_per_dim", f"must be an integer >= 3, got {s!r}")
        out["samples_per_dim"] = s
    return out


def parse_config(doc: dict) -> ScenarioConfig:
    doc = _obj(doc, "$")
    if doc.get("schema") != SCHEMA:
        raise ValidationError("schema", f"expected {SCHEMA!r}, got {doc.get('schema')!r}")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise ValidationError("$", f"unexpected fields {sorted(extra)}")
    for key in ("partition", "time", "input", "program"):
        if key not in doc:
            raise ValidationError(key, "required field missing")

    part_spec, part = _parse_partition(doc["partition"])
    alpha = _number(doc.get("alpha", 1.0), "alpha", positive=True)
    clearance = _number(doc.get("clearance", 1.0), "clearance", positive=True)
    v0 = _number(doc.get("v0", 0.0), "v0")

    tm = _obj(doc["time"], "time")
    if set(tm) - {"t0", "t_end", "dt"}:
        raise ValidationError("time", f"unexpected fields {sorted(set(tm) - {'t0', 't_end', 'dt'})}")
    t0 = _number(tm.get("t0", 0.0), "time.t0")
    if "t_end" not in tm:
        raise ValidationError("time.t_end", "required field missing")
    t_end = _number(tm["t_end"], "time.t_end")
    dt = _number(tm.get("dt", 0.01), "time.dt", positive=True)
    if not t_end > t0:
        raise ValidationError("time.t_end", "must exceed t0")

    input_spec = _parse_input(doc["input"], part)

    prog_raw = _list(doc["program"], "program")
    if not prog_raw:
        raise ValidationError("program", "needs at least one segment")
    segs = []
    for j, seg in enumerate(prog_raw):
        path = f"program[{j}]"
        seg = _obj(seg, path)
        if set(seg) != {"t_switch", "target"}:
            raise ValidationError(path, "expected keys 't_switch' and 'target'")
        ts = _number(seg["t_switch"], f"{path}.t_switch")
        if not t0 <= ts <= t_end:
            raise ValidationError(f"{path}.t_switch", f"switch time {ts!r} outside [{t0!r}, {t_end!r}]")
        if j == 0 and ts != t0:
            raise ValidationError(f"{path}.t_switch", f"first segment must start at t0 = {t0!r}")
        if segs and not ts > segs[-1][0]:
            raise ValidationError(f"{path}.t_switch", "switch times must be strictly increasing")
        segs.append((ts, _parse_target(seg["target"], f"{path}.target", part.dims)))

    design = _parse_design(doc["design"], part.dims) if "design" in doc else None
    return ScenarioConfig(
        partition_spec=part_spec,
        input_spec=input_spec,
        program_spec=tuple(segs),
        t0=t0,
        t_end=t_end,
        dt=dt,
        alpha=alpha,
        clearance=clearance,
        v0=v0,
        design=design,
    )


def load_config(text: str) -> ScenarioConfig:
    """Parse and validate scenario JSON text.

    Raises ParseError for malformed JSON and ValidationError (with a field
    path) for any violated constraint.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return parse_config(doc)


def paper_example_text() -> str:
    return resources.files("swarmbasis").joinpath("data/paper_example.json").read_text(encoding="utf-8")


def paper_example_config(input_kind: str = "ramp") -> ScenarioConfig:
    if input_kind not in PAPER_INPUTS:
        raise ValueError(f"input kind must be one of {sorted(PAPER_INPUTS)}")
    doc = json.loads(paper_example_text())
    doc["input"] = copy.deepcopy(PAPER_INPUTS[input_kind])
    return parse_config(doc)


# -- running and emitting ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class RunResult:
    config: ScenarioConfig
    trace: SimulationTrace
    maps: tuple[ConcentrationMap, ...]
    mae: float

    def summary(self) -> dict:
        t = self.trace
        return {
            "rows": len(t),
            "t0": float(t.t[0]),
            "t_end": float(t.t[-1]),
            "dt": t.meta["dt"],
            "R": t.meta["R"],
            "alpha": t.meta["alpha"],
            "partition": t.meta["partition"],
            "mae": self.mae,
            "mae_percent_of_unit_scale": 100.0 * self.mae,
            "max_abs_error": t.max_abs_error,
            "final_abs_error": float(abs(t.e[-1])),
            "envelope_excess": envelope_excess(t),
            "negative_v": t.meta["negative_v"],
        }


def run_scenario(cfg: ScenarioConfig) -> RunResult:
    prog = cfg.swarm_program()
    trace = simulate(prog, cfg.input_signal(), cfg.t0, cfg.t_end, cfg.dt, cfg.v0)
    return RunResult(cfg, trace, prog.maps, mae(trace))


def run_paper_example(input_kind: str = "ramp", dt: float = 0.01) -> RunResult:
    """The three-function experiment: u^2, then sin(3u) from t=200, then exp(-2u) from t=400."""
    cfg = paper_example_config(input_kind)
    if dt != cfg.dt:
        cfg = ScenarioConfig(**{**cfg.__dict__, "dt": float(dt)})
    return run_scenario(cfg)


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop the sign of negative zero
    return format(x, ".12g")


def emit_trace_csv(trace: SimulationTrace) -> str:
    n = trace.u.shape[1]
    buf = io.StringIO()
    buf.write(",".join(["t", *(f"u{i + 1}" for i in range(n)), "v", "v_desired", "e"]) + "\n")
    for j in range(len(trace)):
        row = [trace.t[j], *trace.u[j], trace.v[j], trace.v_desired[j], trace.e[j]]
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def emit_concentrations_csv(maps: Sequence[ConcentrationMap]) -> str:
    """Nonzero concentrations, one row per (segment, type); segments count from 1."""
    if not maps:
        raise ValueError("no concentration maps to emit")
    n = maps[0].partition.dims
    buf = io.StringIO()
    buf.write(",".join(["segment", "sign", *(f"k{i + 1}" for i in range(n)), "C"]) + "\n")
    for seg, cmap in enumerate(maps, start=1):
        for ba in sorted(cmap.entries):
            sign = "+1" if ba.sign > 0 else "-1"
            buf.write(",".join([str(seg), sign, *map(str, ba.cell), _fmt(cmap.entries[ba])]) + "\n")
    return buf.getvalue()


def emit_summary_json(result: RunResult) -> str:
    return json.dumps(result.summary(), indent=2, sort_keys=True) + "\n"
