"""Sizing swarms: fewest agent types whose error bound meets an accuracy target.

For continuously differentiable ``f`` the crisp expansion on a grid with
interval widths ``h_i`` is within ``sum(L_i * h_i)`` of ``f``, where ``L_i``
bounds ``|df/du_i|``.  With ``q_i`` uniform intervals per dimension that
bound is ``sum(L_i * w_i / q_i)`` and the swarm needs ``2 * prod(q_i)``
types, so the search runs over integer vectors ``q``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .basis import BasisConfig, Partition, program, sample_grid, sup_error
from .errors import Infeasible
from .targets import evaluate_target

DEFAULT_Q_MAX = {1: 10_000, 2: 1_000, 3: 100}
DEFAULT_GRAD_SAMPLES = {1: 1001, 2: 201, 3: 51}
MAX_DIMS = 3


@dataclass(frozen=True)
class DesignProblem:
    bounds: tuple[tuple[float, float], ...]
    epsilon: float
    grad_norms: tuple[float, ...]
    q_max: tuple[int, ...] | None = None

    def __post_init__(self):
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        L = tuple(float(x) for x in self.grad_norms)
        n = len(bounds)
        if n == 0 or len(L) != n:
            raise ValueError("bounds and grad_norms must be nonempty and of equal length")
        if any(not a < b for a, b in bounds):
            raise ValueError("every dimension needs a < b")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if any(not (x >= 0 and math.isfinite(x)) for x in L):
            raise ValueError("gradient norms must be finite and nonnegative")
        q_max = self.q_max
        if q_max is None:
            q_max = (DEFAULT_Q_MAX.get(n, 1),) * n
        q_max = tuple(int(x) for x in q_max)
        if len(q_max) != n or any(x < 1 for x in q_max):
            raise ValueError("q_max needs one entry >= 1 per dimension")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "grad_norms", L)
        object.__setattr__(self, "q_max", q_max)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def dims(self) -> int:
        return len(self.bounds)

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in self.bounds)

    def bound(self, q: Sequence[int]) -> float:
        """Error bound sum(L_i * (b_i - a_i) / q_i) of the uniform grid ``q``."""
        total = 0.0
        for L, w, qi in zip(self.grad_norms, self.widths, q):
            total += L * (w / qi)
        return total

    def feasible(self, q: Sequence[int]) -> bool:
        return self.bound(q) <= self.epsilon


@dataclass(frozen=True)
class DesignSolution:
    q: tuple[int, ...]
    h: tuple[float, ...]
    n_types: int
    bound_value: float
    epsilon: float

    def describe(self) -> str:
        return (
            f"q = {list(self.q)}\n"
            f"h = {[float(x) for x in self.h]}\n"
            f"n_types = {self.n_types}\n"
            f"bound = {self.bound_value!r} (epsilon = {self.epsilon!r})"
        )


def _solution(problem: DesignProblem, q: Sequence[int]) -> DesignSolution:
    q = tuple(int(x) for x in q)
    return DesignSolution(
        q=q,
        h=tuple(w / qi for w, qi in zip(problem.widths, q)),
        n_types=2 * math.prod(q),
        bound_value=problem.bound(q),
        epsilon=problem.epsilon,
    )


def _smallest_last(problem: DesignProblem, prefix: list[int]) -> int | None:
    """Smallest feasible last component given the others, or None."""
    i = len(prefix)
    qmax = problem.q_max[i]
    if not problem.feasible(prefix + [qmax]):
        return None
    rest = problem.epsilon - problem.bound(prefix + [math.inf])
    Lw = problem.grad_norms[i] * problem.widths[i]
    if Lw == 0.0:
        guess = 1
    elif rest <= 0:
        guess = qmax
    else:
        guess = min(qmax, max(1, math.ceil(Lw / rest)))
    # the guess is off by rounding at most; settle it against the exact bound
    while guess > 1 and problem.feasible(prefix + [guess - 1]):
        guess -= 1
    while not problem.feasible(prefix + [guess]):
        guess += 1
    return guess


def near_minimal_types(problem: DesignProblem) -> DesignSolution:
    """Exhaustive branch-and-bound over integer grids ``q <= q_max``.

    Minimises ``2 * prod(q)`` subject to the error bound; ties go to the
    lexicographically smallest ``q``.  Raises Infeasible when even ``q_max``
    misses epsilon.
    """
    n = problem.dims
    if n > MAX_DIMS:
        raise ValueError(f"exhaustive design search supports at most {MAX_DIMS} dimensions")
    if not problem.feasible(problem.q_max):
        raise Infeasible(problem.bound(problem.q_max), problem.epsilon)

    best: list[int] | None = None
    best_prod = math.inf

    def search(prefix: list[int], prod: int):
        nonlocal best, best_prod
        if len(prefix) == n - 1:
            last = _smallest_last(problem, prefix)
            if last is not None and prod * last < best_prod:
                best, best_prod = prefix + [last], prod * last
            return
        i = len(prefix)
        tail_max = list(problem.q_max[i + 1 :])
        for qi in range(1, problem.q_max[i] + 1):
            if prod * qi >= best_prod:
                break
            if not problem.feasible(prefix + [qi] + tail_max):
                continue
            search(prefix + [qi], prod * qi)

    search([], 1)
    return _solution(problem, best)


def enumerate_min_types(problem: DesignProblem) -> DesignSolution:
    """Naive full enumeration of every q vector; reference for small q_max."""
    best = None
    for q in itertools.product(*(range(1, m + 1) for m in problem.q_max)):
        if problem.feasible(q) and (best is None or math.prod(q) < math.prod(best)):
            best = q
    if best is None:
        raise Infeasible(problem.bound(problem.q_max), problem.epsilon)
    return _solution(problem, best)


def estimate_grad_norms(
    f: Callable, bounds: Sequence[tuple[float, float]], samples_per_dim: int | None = None
) -> tuple[float, ...]:
    """Sampled estimate of sup |df/du_i| per dimension.

    Central differences on a uniform grid, one-sided at the edges.  The
    result is a lower estimate of the true sup norm.
    """
    n = len(bounds)
    if samples_per_dim is None:
        samples_per_dim = DEFAULT_GRAD_SAMPLES.get(n, 21)
    if samples_per_dim < 3:
        raise ValueError("samples_per_dim must be >= 3")
    pts = sample_grid(bounds, samples_per_dim)
    vals = evaluate_target(f, pts).reshape((samples_per_dim,) * n)
    spacing = [(b - a) / (samples_per_dim - 1) for a, b in bounds]
    grads = np.gradient(vals, *spacing, edge_order=1)
    if n == 1:
        grads = [grads]
    return tuple(float(np.max(np.abs(g))) for g in grads)


@dataclass(frozen=True)
class DesignReport:
    solution: DesignSolution
    measured: float
    passed: bool
    coarsest_q: tuple[int, ...] | None = None
    coarsest_n_types: int | None = None

    def describe(self) -> str:
        lines = [
            self.solution.describe(),
            f"measured sup error = {self.measured!r}",
            f"verification: {'PASS' if self.passed else 'FAIL'} (measured <= bound <= epsilon)",
        ]
        if self.coarsest_q is not None:
            lines.append(
                f"coarsest measured grid meeting epsilon: q = {list(self.coarsest_q)}, "
                f"n_types = {self.coarsest_n_types}"
            )
        return "\n".join(lines)


def _measured(f, bounds, q, samples, alpha, clearance) -> float:
    cfg = BasisConfig(Partition.uniform(bounds, q), alpha, clearance)
    return sup_error(f, program(f, cfg), cfg, samples)


def verify_design(
    f: Callable,
    solution: DesignSolution,
    bounds: Sequence[tuple[float, float]],
    samples_per_dim: int | None = None,
    alpha: float = 1.0,
    clearance: float = 1.0,
    search_coarser: bool = False,
    max_candidates: int = 500,
) -> DesignReport:
    """Program ``f`` on the solution grid and measure its sup error.

    With ``search_coarser`` the grids strictly smaller than the solution
    (componentwise ``<=`` its ``q``) are measured in increasing type count
    and the first one meeting epsilon is reported, exposing how loose the
    gradient bound is.  At most ``max_candidates`` grids are tried.
    """
    n = len(bounds)
    if samples_per_dim is None:
        samples_per_dim = 1001 if n == 1 else DEFAULT_GRAD_SAMPLES.get(n, 21)
    measured = _measured(f, bounds, solution.q, samples_per_dim, alpha, clearance)
    passed = measured <= solution.bound_value <= solution.epsilon

    coarsest = None
    if search_coarser and math.prod(solution.q) <= 100_000:
        cands = [
            q
            for q in itertools.product(*(range(1, qi + 1) for qi in solution.q))
            if math.prod(q) < math.prod(solution.q)
        ]
        cands.sort(key=lambda q: (math.prod(q), q))
        for q in cands[:max_candidates]:
            if _measured(f, bounds, q, samples_per_dim, alpha, clearance) <= solution.epsilon:
                coarsest = q
                break
    return DesignReport(
        solution=solution,
        measured=measured,
        passed=passed,
        coarsest_q=coarsest,
        coarsest_n_types=None if coarsest is None else 2 * math.prod(coarsest),
    )
