"""Conditional photon statistics of output mode 1 given counts on modes 2..N.

Inputs are independent vacuum/single-photon mixtures; the output diagonal is
``<n|rho|n> = sum_s P_s |Per(U[n, s])|^2 / prod_k n_k!`` over binary input
patterns ``s`` carrying as many photons as ``n``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionError, NumericIntegrityError
from .permanent import compute_S, fock_norm, output_rows, permanents
from .unitary import Unitary

NEG_CLAMP = 1e-12
CLEAN_TOL = 1e-12
# margins smaller than this are rounding, not improvement
IMPROVE_TOL = 1e-12


@dataclass(frozen=True)
class InputEnsemble:
    """Per-input single-photon probabilities p_1..p_N."""

    probs: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.probs)
        if not p:
            raise DimensionError("ensemble needs at least one mode")
        if any(not (0.0 <= x <= 1.0) for x in p):
            raise ValueError(f"probabilities must lie in [0, 1], got {p}")
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, n_modes: int, p: float) -> "InputEnsemble":
        return cls((p,) * n_modes)

    @property
    def n_modes(self) -> int:
        return len(self.probs)

    @property
    def p_max(self) -> float:
        return max(self.probs)

    @property
    def n_sources(self) -> int:
        """Number of inputs that can emit, i.e. the most photons available."""
        return sum(1 for x in self.probs if x > 0)

    @property
    def odds(self) -> float | None:
        """p_max / (1 - p_max); None when p_max == 1."""
        pm = self.p_max
        return None if pm >= 1.0 else pm / (1.0 - pm)

    def photon_number_distribution(self) -> np.ndarray:
        """P(total input photons = k) for k = 0..N (Poisson-binomial)."""
        dist = np.array([1.0])
        for p in self.probs:
            dist = np.convolve(dist, [1.0 - p, p])
        return dist


@dataclass(frozen=True)
class OccupationVector:
    bits: tuple[int, ...]

    def __post_init__(self):
        b = tuple(int(x) for x in self.bits)
        if any(x not in (0, 1) for x in b):
            raise ValueError(f"input occupations are 0 or 1, got {b}")
        object.__setattr__(self, "bits", b)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.bits) if x)

    @property
    def photons(self) -> int:
        return sum(self.bits)

    @classmethod
    def from_support(cls, n_modes: int, support: Sequence[int]) -> "OccupationVector":
        bits = [0] * n_modes
        for i in support:
            bits[i] = 1
        return cls(tuple(bits))


@dataclass(frozen=True)
class DetectionPattern:
    """Photon counts registered on output modes 2..N."""

    counts: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(x) for x in self.counts)
        if any(x < 0 for x in c):
            raise ValueError(f"detector counts must be non-negative, got {c}")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def n_modes(self) -> int:
        return len(self.counts) + 1


@dataclass(frozen=True)
class ConditionalDistribution:
    """State of output mode 1 after the detection record ``pattern``.

    ``coefficients[n1]`` is the probability of n1 photons in mode 1.
    ``herald_prob`` is the unconditional probability of observing the
    pattern; when it is 0 the pattern is impossible, coefficients are all
    zero and both ratios are None.  A ratio is also None when its
    denominator is 0 or when p_max == 1.
    """

    pattern: DetectionPattern
    coefficients: tuple[float, ...]
    herald_prob: float
    ratio_10: float | None
    ratio_21: float | None

    @property
    def zero_herald(self) -> bool:
        return self.herald_prob == 0.0

    def c(self, n1: int) -> float:
        return self.coefficients[n1] if 0 <= n1 < len(self.coefficients) else 0.0

    @property
    def multiphoton(self) -> float:
        return float(sum(self.coefficients[2:]))

    def to_json(self) -> dict:
        return {
            "pattern": list(self.pattern.counts),
            "coefficients": list(self.coefficients),
            "herald_prob": self.herald_prob,
            "ratio_10": self.ratio_10,
            "ratio_21": self.ratio_21,
        }


def _check_lengths(unitary: Unitary, ensemble: InputEnsemble, pattern: DetectionPattern | None = None):
    if ensemble.n_modes != unitary.dim:
        raise DimensionError(f"{ensemble.n_modes} input probabilities for a {unitary.dim}-mode network")
    if pattern is not None and pattern.n_modes != unitary.dim:
        raise DimensionError(
            f"pattern covers {len(pattern.counts)} detectors, network has {unitary.dim - 1}"
        )


def weight(ensemble: InputEnsemble, s: OccupationVector) -> float:
    """P_s = prod_i p_i^s_i (1 - p_i)^(1 - s_i)."""
    if len(s.bits) != ensemble.n_modes:
        raise DimensionError("occupation vector and ensemble differ in length")
    return math.prod(p if b else 1.0 - p for p, b in zip(ensemble.probs, s.bits))


def occupation_vectors(n_modes: int, photons: int) -> Iterator[OccupationVector]:
    """All binary inputs with ``photons`` ones, lexicographic in their supports."""
    for support in itertools.combinations(range(n_modes), photons):
        yield OccupationVector.from_support(n_modes, support)


def unnormalized_coefficient(
    unitary: Unitary, ensemble: InputEnsemble, pattern: DetectionPattern, n1: int
) -> float:
    """<n|rho_trans|n> for n = (n1, pattern), one amplitude sum at a time."""
    _check_lengths(unitary, ensemble, pattern)
    if n1 < 0:
        raise ValueError("n1 must be non-negative")
    n = (int(n1),) + pattern.counts
    k = sum(n)
    if k > unitary.dim:
        return 0.0
    total = 0.0
    for s in occupation_vectors(unitary.dim, k):
        w = weight(ensemble, s)
        if w == 0.0:
            continue
        total += w * abs(compute_S(unitary, s, n)) ** 2
    return total / fock_norm(n)


@lru_cache(maxsize=256)
def _plan(n_modes: int, outputs: tuple[tuple[int, ...], ...]):
    """Gather indices for every (output, input subset) pair, grouped by photon number."""
    by_total: dict[int, list[int]] = {}
    for idx, n in enumerate(outputs):
        if len(n) != n_modes:
            raise DimensionError(f"output occupation {n} has wrong length")
        if any(x < 0 for x in n):
            raise ValueError(f"negative occupation in {n}")
        if sum(n) <= n_modes:
            by_total.setdefault(sum(n), []).append(idx)
    groups = []
    for k in sorted(by_total):
        idxs = by_total[k]
        subsets = list(itertools.combinations(range(n_modes), k))
        rows = np.array([output_rows(outputs[i]) for i in idxs], dtype=np.intp).reshape(len(idxs), k)
        cols = np.array(subsets, dtype=np.intp).reshape(len(subsets), k)
        norms = np.array([fock_norm(outputs[i]) for i in idxs], dtype=float)
        groups.append((k, np.array(idxs, dtype=np.intp), rows, cols, norms))
    return groups


@lru_cache(maxsize=1024)
def _subset_weights(probs: tuple[float, ...], k: int) -> np.ndarray:
    """P_s for every k-photon input, in ``itertools.combinations`` order."""
    p = np.asarray(probs)
    subsets = itertools.combinations(range(len(p)), k)
    bits = np.zeros((math.comb(len(p), k), len(p)), dtype=bool)
    for j, sub in enumerate(subsets):
        bits[j, list(sub)] = True
    return np.prod(np.where(bits, p[None, :], 1.0 - p[None, :]), axis=1)


def outcome_probabilities(
    unitary: Unitary, ensemble: InputEnsemble, outputs: Sequence[Sequence[int]]
) -> np.ndarray:
    """Vectorised ``<n|rho_trans|n>`` for many full output occupations ``n``.

    Outputs are grouped by photon number; within a group every input subset
    of that size is paired with every output and the permanents are taken in
    one batch.
    """
    _check_lengths(unitary, ensemble)
    if not isinstance(outputs, tuple):
        outputs = tuple(tuple(int(x) for x in n) for n in outputs)
    result = np.zeros(len(outputs))
    u = unitary.entries
    for k, idxs, rows, cols, norms in _plan(unitary.dim, outputs):
        w = _subset_weights(ensemble.probs, k)
        live = w > 0.0
        if not live.any():
            continue
        if not live.all():
            cols, w = cols[live], w[live]
        if k == 0:
            perms = np.ones((len(idxs), len(w)), dtype=complex)
        else:
            sub = u[rows[:, None, :, None], cols[None, :, None, :]]
            perms = permanents(sub.reshape(-1, k, k)).reshape(len(idxs), len(w))
        result[idxs] = (np.abs(perms) ** 2 @ w) / norms
    return result


def _safe_ratio(num: float, den: float) -> float | None:
    return num / den if den > 0.0 else None


def distribution_from_unnormalized(
    pattern: DetectionPattern, unnorm: Sequence[float], p_max: float
) -> ConditionalDistribution:
    values = np.asarray(unnorm, dtype=float)
    worst = float(values.min()) if values.size else 0.0
    if worst < -NEG_CLAMP:
        raise NumericIntegrityError(f"negative outcome probability {worst:.3e} for pattern {pattern.counts}")
    values = np.where(values < 0.0, 0.0, values)
    herald = float(values.sum())
    if herald == 0.0:
        return ConditionalDistribution(pattern, tuple(0.0 for _ in values), 0.0, None, None)
    coeffs = values / herald
    c = [float(x) for x in coeffs] + [0.0, 0.0, 0.0]
    ratios_ok = p_max < 1.0
    return ConditionalDistribution(
        pattern=pattern,
        coefficients=tuple(float(x) for x in coeffs),
        herald_prob=herald,
        ratio_10=_safe_ratio(c[1], c[0]) if ratios_ok else None,
        ratio_21=_safe_ratio(c[2], c[1]) if ratios_ok else None,
    )


def max_mode1_photons(ensemble: InputEnsemble, pattern: DetectionPattern) -> int:
    return max(ensemble.n_sources - pattern.total, 0)


def evaluate(unitary: Unitary, ensemble: InputEnsemble, pattern: DetectionPattern) -> ConditionalDistribution:
    """Photon-number distribution of mode 1 conditioned on ``pattern``."""
    _check_lengths(unitary, ensemble, pattern)
    top = max_mode1_photons(ensemble, pattern)
    outs = [(n1,) + pattern.counts for n1 in range(top + 1)]
    unnorm = outcome_probabilities(unitary, ensemble, outs)
    return distribution_from_unnormalized(pattern, unnorm, ensemble.p_max)


def detection_patterns(n_modes: int, max_total: int) -> list[DetectionPattern]:
    """Every count record on modes 2..N with at most ``max_total`` photons.

    Ordered by total; within a total, counts on earlier detectors come first.
    """
    det = n_modes - 1
    found = []
    for total in range(max_total + 1):
        for combo in itertools.combinations_with_replacement(range(det), total):
            counts = [0] * det
            for j in combo:
                counts[j] += 1
            found.append(tuple(counts))
    found.sort(key=lambda c: (sum(c), tuple(-x for x in c)))
    return [DetectionPattern(c) for c in found]


@dataclass(frozen=True)
class PatternTable:
    """Unnormalised outcome probabilities for every pattern of one network.

    ``unnorm[j, n1]`` is ``<(n1, patterns[j])|rho|(n1, patterns[j])>``;
    entries with n1 beyond the photons available are zero.
    """

    patterns: tuple[DetectionPattern, ...]
    unnorm: np.ndarray
    p_max: float

    @property
    def herald(self) -> np.ndarray:
        return self.unnorm.sum(axis=1)

    def distribution(self, j: int) -> ConditionalDistribution:
        pat = self.patterns[j]
        top = max(self.unnorm.shape[1] - 1 - pat.total, 0)
        return distribution_from_unnormalized(pat, self.unnorm[j, : top + 1], self.p_max)


@lru_cache(maxsize=64)
def _table_layout(n_modes: int, n_sources: int):
    patterns = detection_patterns(n_modes, n_sources)
    where = {p.counts: j for j, p in enumerate(patterns)}
    outs, slot = [], []
    for p in patterns:
        for n1 in range(n_sources - p.total + 1):
            outs.append((n1,) + p.counts)
            slot.append((where[p.counts], n1))
    return tuple(patterns), tuple(outs), np.array(slot, dtype=np.intp).reshape(-1, 2)


def pattern_table(unitary: Unitary, ensemble: InputEnsemble) -> PatternTable:
    """Outcome probabilities for all patterns with at most M detections, in one pass."""
    _check_lengths(unitary, ensemble)
    m = ensemble.n_sources
    patterns, outs, slot = _table_layout(unitary.dim, m)
    probs = outcome_probabilities(unitary, ensemble, outs)
    unnorm = np.zeros((len(patterns), m + 1))
    unnorm[slot[:, 0], slot[:, 1]] = probs
    return PatternTable(patterns, unnorm, ensemble.p_max)


def evaluate_all(unitary: Unitary, ensemble: InputEnsemble) -> list[ConditionalDistribution]:
    """``evaluate`` for every pattern with at most M detections."""
    table = pattern_table(unitary, ensemble)
    return [table.distribution(j) for j in range(len(table.patterns))]


@dataclass(frozen=True)
class ImprovementVerdict:
    """Whether heralding beat the best input.

    ``applicable`` is False when p_max == 1 (no odds ratio exists).
    ``undefined_ratio`` is set when c_0 == 0; ``ratio_improved`` is then False
    and ``ratio_margin`` is None, while ``prob_improved`` is still evaluated.
    """

    applicable: bool
    ratio_improved: bool
    prob_improved: bool
    single_photon_clean: bool
    ratio_margin: float | None
    prob_margin: float
    undefined_ratio: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def improvement_verdict(dist: ConditionalDistribution, ensemble: InputEnsemble) -> ImprovementVerdict:
    c1 = dist.c(1)
    clean = all(x <= CLEAN_TOL for x in dist.coefficients[2:])
    prob_margin = c1 - ensemble.p_max
    prob_improved = prob_margin > IMPROVE_TOL
    odds = ensemble.odds
    if odds is None:
        return ImprovementVerdict(False, False, prob_improved, clean, None, prob_margin, dist.ratio_10 is None)
    if dist.ratio_10 is None:
        return ImprovementVerdict(True, False, prob_improved, clean, None, prob_margin, True)
    margin = dist.ratio_10 - odds
    return ImprovementVerdict(True, margin > IMPROVE_TOL * max(1.0, odds), prob_improved, clean, margin, prob_margin, False)
