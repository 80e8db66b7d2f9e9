"""Numerical search over interferometers for heralded single-photon gain.

Coordinates are the box-constrained Givens angles/phases of
``unitary.GivensParameterization``.  The budget is split evenly over the
restart streams; each stream runs compass (coordinate pattern) searches,
whose step halves whenever a full sweep brings no improvement, from fresh
Haar-random networks until its share is spent.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .bounds import SLACK
from .conditional import (
    ConditionalDistribution,
    DetectionPattern,
    InputEnsemble,
    detection_patterns,
    distribution_from_unnormalized,
    outcome_probabilities,
    pattern_table,
)
from .errors import DimensionError, NumericIntegrityError
from .unitary import (
    EpsilonSchemeSpec,
    GivensParameterization,
    Unitary,
    epsilon_scheme,
    extract,
    haar_random,
    realize_array,
)

# A pattern whose probability, relative to having at least D photons at all,
# is below this is treated as unobservable: its c_n are dominated by
# cancellation noise in the permanents.
HERALD_REL_FLOOR = 1e-10


class Objective(str, Enum):
    MAX_C1 = "MAX_C1"
    MAX_RATIO_10 = "MAX_RATIO_10"
    MAX_C1_CLEAN = "MAX_C1_CLEAN"


@dataclass(frozen=True)
class SearchProblem:
    """What to optimise. ``pattern=None`` means every pattern is scanned and
    the best one is scored (ENUMERATE_ALL); otherwise the pattern is fixed."""

    n_modes: int
    ensemble: InputEnsemble
    objective: Objective
    budget: int
    seed: int
    pattern: DetectionPattern | None = None
    restarts: int = 20
    cleanliness_tol: float = 1e-9
    initial_step: float = 0.5
    min_step: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))
        if self.n_modes < 2:
            raise DimensionError("search needs at least 2 modes")
        if self.ensemble.n_modes != self.n_modes:
            raise DimensionError("ensemble size does not match n_modes")
        if self.pattern is not None and self.pattern.n_modes != self.n_modes:
            raise DimensionError("fixed pattern does not match n_modes")
        if self.budget < 1 or self.restarts < 1:
            raise ValueError("budget and restarts must be at least 1")

    @property
    def pattern_policy(self) -> str:
        return "ENUMERATE_ALL" if self.pattern is None else "FIXED"

    def to_json(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "probs": list(self.ensemble.probs),
            "objective": self.objective.value,
            "pattern_policy": self.pattern_policy,
            "pattern": None if self.pattern is None else list(self.pattern.counts),
            "budget": self.budget,
            "seed": self.seed,
            "restarts": self.restarts,
            "cleanliness_tol": self.cleanliness_tol,
        }


@dataclass(frozen=True)
class SearchResult:
    best_unitary: GivensParameterization
    best_pattern: DetectionPattern | None
    best_value: float
    best_distribution: ConditionalDistribution | None
    evaluations_used: int
    trace: tuple[tuple[int, float], ...] = field(repr=False)

    def to_json(self) -> dict:
        return {
            "best_unitary": self.best_unitary.to_json(),
            "best_matrix": Unitary(realize_array(self.best_unitary)).to_json(),
            "best_pattern": None if self.best_pattern is None else list(self.best_pattern.counts),
            "best_value": self.best_value,
            "best_distribution": None if self.best_distribution is None else self.best_distribution.to_json(),
            "evaluations_used": self.evaluations_used,
            "trace": [[i, v] for i, v in self.trace],
        }


class _Scorer:
    """Objective value of one network: best score over the allowed patterns."""

    def __init__(self, problem: SearchProblem):
        self.problem = problem
        ens = problem.ensemble
        self.odds = ens.odds
        self.m = ens.n_sources
        tail = np.cumsum(ens.photon_number_distribution()[::-1])[::-1]
        # P(at least k photons enter), padded with zeros for impossible k
        self.at_least = np.concatenate([tail, np.zeros(ens.n_modes + 2)])
        if problem.pattern is not None:
            top = max(self.m - problem.pattern.total, 0)
            self.fixed_outs = tuple((n1,) + problem.pattern.counts for n1 in range(top + 1))
            self.totals = np.array([problem.pattern.total])
        else:
            patterns = detection_patterns(problem.n_modes, self.m)
            self.totals = np.array([p.total for p in patterns])

    def table(self, u: Unitary):
        if self.problem.pattern is None:
            t = pattern_table(u, self.problem.ensemble)
            return t.patterns, t.unnorm
        unnorm = outcome_probabilities(u, self.problem.ensemble, self.fixed_outs)
        return (self.problem.pattern,), unnorm[None, :]

    def __call__(self, u: Unitary) -> tuple[float, int, tuple, np.ndarray]:
        patterns, unnorm = self.table(u)
        totals = self.totals
        herald = unnorm.sum(axis=1)
        scale = self.at_least[np.minimum(totals, len(self.at_least) - 1)]
        ok = herald > HERALD_REL_FLOOR * scale
        safe = np.where(ok, herald, 1.0)
        width = unnorm.shape[1]
        c0 = unnorm[:, 0] / safe
        c1 = unnorm[:, 1] / safe if width > 1 else np.zeros(len(patterns))
        multi = unnorm[:, 2:].sum(axis=1) / safe if width > 2 else np.zeros(len(patterns))
        obj = self.problem.objective
        if obj is Objective.MAX_C1:
            vals = c1
        elif obj is Objective.MAX_RATIO_10:
            ok = ok & (c0 > 0.0)
            vals = c1 / np.where(c0 > 0.0, c0, 1.0)
        else:
            clean = multi <= self.problem.cleanliness_tol
            vals = np.where(clean, c1, -1.0 - multi)
        if self.odds is not None:
            bound = np.maximum(self.m - totals, 0) * self.odds
            ratio = c1 / np.where(c0 > 0.0, c0, 1.0)
            bad = ok & (c0 > 0.0) & (ratio > bound + SLACK)
            if bad.any():
                j = int(np.argmax(bad))
                raise NumericIntegrityError(
                    f"ratio {ratio[j]:.6g} exceeds bound {bound[j]:.6g} for pattern {patterns[j].counts}"
                )
        vals = np.where(ok, vals, -np.inf)
        j = int(np.argmax(vals))
        return float(vals[j]), j, patterns, unnorm


def _project(x: np.ndarray, n_angles: int) -> np.ndarray:
    x[:n_angles] = np.clip(x[:n_angles], 0.0, math.pi / 2)
    x[n_angles:] = np.mod(x[n_angles:], 2 * math.pi)
    return x


def _compass(f, x, fx, step, min_step, budget, n_angles):
    """Opportunistic compass search from ``x``; returns the local optimum."""
    used = 0
    history = []
    while used < budget and step >= min_step:
        improved = False
        for i in range(x.size):
            for sgn in (1.0, -1.0):
                if used >= budget:
                    break
                y = x.copy()
                y[i] += sgn * step
                y = _project(y, n_angles)
                if np.array_equal(y, x):
                    continue
                fy = f(y)
                used += 1
                if fy > fx:
                    x, fx = y, fy
                    history.append((used - 1, fx))
                    improved = True
                    break
            if used >= budget:
                break
        if not improved:
            step *= 0.5
    return x, fx, used, history


def _local_search(problem: SearchProblem, scorer: _Scorer, seed: int, budget: int):
    """One restart stream: compass searches from fresh Haar-random starts
    until this stream's share of the budget is spent."""
    n = problem.n_modes
    n_angles = n * (n - 1) // 2

    def f(vec):
        u = Unitary(realize_array(GivensParameterization.from_vector(n, vec)))
        return scorer(u)[0]

    rng = np.random.default_rng(seed)
    best_x, best_f = None, -np.inf
    used = 0
    history: list[tuple[int, float]] = []
    while used < budget:
        x = _project(extract(haar_random(n, int(rng.integers(2**63)))).to_vector(), n_angles)
        fx = f(x)
        used += 1
        if fx > best_f:
            best_x, best_f = x, fx
            history.append((used - 1, fx))
        x, fx, spent, local = _compass(f, x, fx, problem.initial_step, problem.min_step, budget - used, n_angles)
        for i, v in local:
            if v > best_f:
                history.append((used + i, v))
                best_f = v
        if fx >= best_f:
            best_x, best_f = x, fx
        used += spent
    return best_x, best_f, used, history


def optimize(problem: SearchProblem, threads: int = 1) -> SearchResult:
    """Multi-start compass search; deterministic for a fixed ``problem.seed``."""
    n = problem.n_modes
    restarts = min(problem.restarts, problem.budget)
    base, extra = divmod(problem.budget, restarts)
    budgets = [base + (1 if r < extra else 0) for r in range(restarts)]
    children = np.random.SeedSequence(problem.seed).spawn(restarts)
    seeds = [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]
    scorer = _Scorer(problem)

    def run(r):
        return _local_search(problem, scorer, seeds[r], budgets[r])

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(run, range(restarts)))
    else:
        runs = [run(r) for r in range(restarts)]

    # merge in restart order so the result does not depend on scheduling
    best_x, best_f = None, -np.inf
    trace: list[tuple[int, float]] = []
    offset = 0
    for x, fx, used, history in runs:
        for i, v in history:
            if not trace or v > trace[-1][1]:
                trace.append((offset + i, v))
        if best_x is None or fx > best_f:
            best_x, best_f = x, fx
        offset += used

    params = GivensParameterization.from_vector(n, best_x)
    value, j, patterns, unnorm = scorer(Unitary(realize_array(params)))
    if np.isfinite(value):
        pattern = patterns[j]
        top = max(unnorm.shape[1] - 1 - pattern.total, 0) if problem.pattern is None else unnorm.shape[1] - 1
        dist = distribution_from_unnormalized(pattern, unnorm[j, : top + 1], problem.ensemble.p_max)
    else:
        pattern, dist = None, None
    return SearchResult(params, pattern, value, dist, offset, tuple(trace))


def ratio_factor(n_modes: int, detected: int) -> float:
    """Small-epsilon limit of (c_1/c_0) / odds for the epsilon scheme."""
    return detected * (n_modes - detected) / (n_modes - 1)


def two_photon_factor(n_modes: int, detected: int) -> float:
    """Small-epsilon limit of (c_2/c_1) / (c_1/c_0) for the epsilon scheme."""
    d, n = detected, n_modes
    return (d + 1) * (n - d - 1) / (2 * d * (n - d))


def peak_factor(n_modes: int) -> float:
    """``ratio_factor`` at its best detection count ceil(N/2)."""
    return (n_modes * n_modes // 4) / (n_modes - 1)


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    ratio_10: float | None
    ratio_21: float | None
    herald_prob: float
    ratio_10_over_odds: float | None
    ratio_21_over_ratio_10: float | None

    def to_json(self) -> dict:
        return dict(self.__dict__)


def sweep_epsilon_scheme(n_modes: int, p: float, detected: int, epsilons) -> list[SweepRow]:
    """Evaluate the epsilon scheme with ``detected`` photons on mode 2 and none elsewhere."""
    if not 1 <= detected <= n_modes - 1:
        raise DimensionError(f"detected count must lie in [1, {n_modes - 1}], got {detected}")
    ens = InputEnsemble.uniform(n_modes, p)
    pattern = DetectionPattern((detected,) + (0,) * (n_modes - 2))
    top = max(ens.n_sources - detected, 0)
    outs = [(n1,) + pattern.counts for n1 in range(top + 1)]
    rows = []
    for eps in epsilons:
        u = epsilon_scheme(EpsilonSchemeSpec(n_modes, float(eps)))
        d = distribution_from_unnormalized(pattern, outcome_probabilities(u, ens, outs), ens.p_max)
        odds = ens.odds
        r10, r21 = d.ratio_10, d.ratio_21
        rows.append(
            SweepRow(
                epsilon=float(eps),
                ratio_10=r10,
                ratio_21=r21,
                herald_prob=d.herald_prob,
                ratio_10_over_odds=None if r10 is None or odds is None else r10 / odds,
                ratio_21_over_ratio_10=None if r10 is None or r21 is None or r10 == 0 else r21 / r10,
            )
        )
    return rows
