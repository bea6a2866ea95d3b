"""Target functions: evaluation helper plus a small named catalog.

Any callable taking a point (1-D array of length n) and returning a scalar
can be programmed.  Catalog entries are vectorised: they accept an array of
shape (..., n) and return shape (...), and serialise back to the dict spec
they were built from, which is how scenario files name them.
"""

from __future__ import annotations

from typing import Any, Callable

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import TargetEvaluation


class Target:
    vectorized = True

    def __init__(self, spec: dict, fn: Callable[[np.ndarray], np.ndarray]):
        self.spec = spec
        self._fn = fn

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return self._fn(u)

    def __repr__(self):
        return f"Target({self.spec!r})"

    def __eq__(self, other):
        return isinstance(other, Target) and self.spec == other.spec

    def __hash__(self):
        return hash(repr(self.spec))


def _scalar_result(val) -> float:
    arr = np.asarray(val, dtype=float).reshape(-1)
    if arr.size != 1:
        raise ValueError(f"expected a scalar result, got shape {np.shape(val)}")
    return float(arr[0])


def _pointwise(f, points: np.ndarray) -> np.ndarray:
    out = np.empty(len(points))
    for j, p in enumerate(points):
        try:
            out[j] = _scalar_result(f(p))
        except Exception as exc:
            raise TargetEvaluation(p.tolist(), exc) from exc
        if not np.isfinite(out[j]):
            raise TargetEvaluation(p.tolist(), f"non-finite value {out[j]!r}")
    return out


def evaluate_target(f: Callable, points) -> np.ndarray:
    """Evaluate ``f`` at each row of ``points`` (shape (m, n)).

    Failures and non-finite values raise TargetEvaluation naming the point.
    """
    points = np.asarray(points, dtype=float)
    if not getattr(f, "vectorized", False):
        return _pointwise(f, points)
    try:
        vals = np.asarray(f(points), dtype=float).reshape(len(points))
    except Exception:
        # locate the offending point
        return _pointwise(f, points)
    bad = ~np.isfinite(vals)
    if bad.any():
        j = int(np.argmax(bad))
        raise TargetEvaluation(points[j].tolist(), f"non-finite value {vals[j]!r}")
    return vals


def _var(spec: dict) -> int:
    var = spec.get("var", 0)
    if not isinstance(var, int) or isinstance(var, bool) or var < 0:
        raise ValueError(f"'var' must be a nonnegative integer, got {var!r}")
    return var


def _num(spec: dict, key: str, default=None) -> float:
    val = spec.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not np.isfinite(val):
        raise ValueError(f"'{key}' must be a finite number, got {val!r}")
    return float(val)


def _numlist(spec: dict, key: str) -> list[float]:
    val = spec.get(key)
    if not isinstance(val, list) or not val:
        raise ValueError(f"'{key}' must be a nonempty list of numbers")
    return [_num({key: v}, key) for v in val]


def _constant(spec):
    c = _num(spec, "value")
    return {"name": "constant", "value": c}, lambda u: np.full(u.shape[:-1], c)


def _polynomial(spec):
    coeffs, var = _numlist(spec, "coeffs"), _var(spec)
    return (
        {"name": "polynomial", "coeffs": coeffs, "var": var},
        lambda u: P.polyval(u[..., var], coeffs),
    )


def _sin(spec):
    a, var = _num(spec, "a", 1.0), _var(spec)
    return {"name": "sin", "a": a, "var": var}, lambda u: np.sin(a * u[..., var])


def _exp(spec):
    a, var = _num(spec, "a", 1.0), _var(spec)
    return {"name": "exp", "a": a, "var": var}, lambda u: np.exp(a * u[..., var])


def _tabulated(spec):
    xs, ys, var = _numlist(spec, "x"), _numlist(spec, "y"), _var(spec)
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("'x' and 'y' must have equal length >= 2")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("'x' must be strictly increasing")

    def fn(u):
        x = u[..., var]
        if np.any((x < xs[0]) | (x > xs[-1])):
            raise ValueError(f"argument outside tabulated range [{xs[0]}, {xs[-1]}]")
        return np.interp(x, xs, ys)

    return {"name": "tabulated", "x": xs, "y": ys, "var": var}, fn


def _sum(spec):
    terms = spec.get("terms")
    if not isinstance(terms, list) or not terms:
        raise ValueError("'terms' must be a nonempty list of target specs")
    built = [make_target(t) for t in terms]
    return (
        {"name": "sum", "terms": [t.spec for t in built]},
        lambda u: sum(t(u) for t in built),
    )


CATALOG: dict[str, Callable[[dict], tuple[dict, Callable]]] = {
    "constant": _constant,
    "polynomial": _polynomial,
    "sin": _sin,
    "exp": _exp,
    "tabulated": _tabulated,
    "sum": _sum,
}


_PARAMS = {
    "constant": {"name", "value"},
    "polynomial": {"name", "coeffs", "var"},
    "sin": {"name", "a", "var"},
    "exp": {"name", "a", "var"},
    "tabulated": {"name", "x", "y", "var"},
    "sum": {"name", "terms"},
}


def make_target(spec: dict[str, Any]) -> Target:
    """Build a catalog target from ``{"name": ..., **params}``.

    Raises KeyError for an unknown name and ValueError for bad parameters.
    """
    if not isinstance(spec, dict):
        raise ValueError("target spec must be an object")
    name = spec.get("name")
    if name not in CATALOG:
        raise KeyError(f"unknown target function {name!r}; known: {sorted(CATALOG)}")
    extra = set(spec) - _PARAMS[name]
    if extra:
        raise ValueError(f"unexpected parameters {sorted(extra)}")
    norm, fn = CATALOG[name](spec)
    return Target(norm, fn)


def max_var(target: Target) -> int:
    """Highest input index a catalog target reads."""
    spec = target.spec
    if spec["name"] == "sum":
        return max(max_var(make_target(t)) for t in spec["terms"])
    return spec.get("var", -1)
