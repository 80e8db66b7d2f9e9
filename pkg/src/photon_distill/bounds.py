"""Analytic limits on heralded single-photon enhancement, as runtime checks.

For inputs with at most M photons, p_max < 1 and D detected photons,

    c_1 / c_0 <= (M - D) * p_max / (1 - p_max).

Three special cases cap the ratio at the input odds itself (no improvement):
nothing detected (D = 0), one photon detected from identical sources
(D = 1, equal p), and all but one available photon detected (D = M - 1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .conditional import ConditionalDistribution, DetectionPattern, InputEnsemble, evaluate
from .errors import PMaxOneError
from .unitary import Unitary

SLACK = 1e-9
EQUAL_P_TOL = 1e-12

GENERAL_BOUND = "GENERAL_BOUND"
D_EQUALS_ZERO = "D_EQUALS_ZERO"
D_EQUALS_ONE_EQUAL_P = "D_EQUALS_ONE_EQUAL_P"
D_EQUALS_M_MINUS_ONE = "D_EQUALS_M_MINUS_ONE"


def general_bound(ensemble: InputEnsemble, pattern: DetectionPattern) -> float:
    odds = ensemble.odds
    if odds is None:
        raise PMaxOneError("the ratio bound needs p_max < 1")
    return max(ensemble.n_sources - pattern.total, 0) * odds


def equal_sources(ensemble: InputEnsemble) -> bool:
    live = [p for p in ensemble.probs if p > 0]
    return bool(live) and max(live) - min(live) <= EQUAL_P_TOL


def applicable_theorems(ensemble: InputEnsemble, pattern: DetectionPattern) -> list[str]:
    d, m = pattern.total, ensemble.n_sources
    tags = [GENERAL_BOUND]
    if d == 0:
        tags.append(D_EQUALS_ZERO)
    if d == 1 and equal_sources(ensemble):
        tags.append(D_EQUALS_ONE_EQUAL_P)
    if d == m - 1:
        tags.append(D_EQUALS_M_MINUS_ONE)
    return tags


@dataclass(frozen=True)
class BoundReport:
    """Outcome of checking one (network, ensemble, pattern) scenario.

    ``violations`` lists the theorem tags whose inequality failed; it is
    empty exactly when ``satisfied`` is True.  An undefined ratio counts as
    satisfied only when the pattern is impossible or c_1 is also 0.
    """

    pattern: DetectionPattern
    bound_value: float
    observed_ratio: float | None
    satisfied: bool
    slack: float | None
    theorem_tags: tuple[str, ...]
    violations: tuple[str, ...]
    herald_prob: float
    c0: float
    c1: float
    p_max: float

    def to_json(self) -> dict:
        return {
            "pattern": list(self.pattern.counts),
            "bound_value": self.bound_value,
            "observed_ratio": self.observed_ratio,
            "satisfied": self.satisfied,
            "slack": self.slack,
            "theorem_tags": list(self.theorem_tags),
            "violations": list(self.violations),
            "herald_prob": self.herald_prob,
            "c0": self.c0,
            "c1": self.c1,
            "p_max": self.p_max,
        }


def report_from_distribution(dist: ConditionalDistribution, ensemble: InputEnsemble) -> BoundReport:
    pattern = dist.pattern
    bound = general_bound(ensemble, pattern)
    odds = ensemble.odds
    tags = applicable_theorems(ensemble, pattern)
    ratio = dist.ratio_10
    c0, c1 = dist.c(0), dist.c(1)
    failed = []
    if pattern.total > ensemble.n_sources and dist.herald_prob != 0.0:
        failed.append(GENERAL_BOUND)
    elif ratio is None:
        if not (dist.zero_herald or c1 == 0.0):
            failed.extend(tags)
    else:
        for tag in tags:
            limit = bound if tag == GENERAL_BOUND else odds
            if ratio > limit + SLACK:
                failed.append(tag)
        if D_EQUALS_M_MINUS_ONE in tags and c1 > ensemble.p_max + SLACK and D_EQUALS_M_MINUS_ONE not in failed:
            failed.append(D_EQUALS_M_MINUS_ONE)
    return BoundReport(
        pattern=pattern,
        bound_value=bound,
        observed_ratio=ratio,
        satisfied=not failed,
        slack=None if ratio is None else bound - ratio,
        theorem_tags=tuple(tags),
        violations=tuple(failed),
        herald_prob=dist.herald_prob,
        c0=c0,
        c1=c1,
        p_max=ensemble.p_max,
    )


def check(unitary: Unitary, ensemble: InputEnsemble, pattern: DetectionPattern) -> BoundReport:
    return report_from_distribution(evaluate(unitary, ensemble, pattern), ensemble)


def perfect_output_impossible(reports: Iterable) -> bool:
    """True iff no record has c_1 > 0 with c_0 == 0 (an infinite ratio).

    Accepts ``BoundReport`` or ``ConditionalDistribution`` records.
    """
    for r in reports:
        if isinstance(r, ConditionalDistribution):
            c0, c1 = r.c(0), r.c(1)
        else:
            c0, c1 = r.c0, r.c1
        if c1 > 0.0 and c0 <= 0.0:
            return False
    return True
