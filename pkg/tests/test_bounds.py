import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photon_distill.bounds import (
    D_EQUALS_M_MINUS_ONE,
    D_EQUALS_ONE_EQUAL_P,
    D_EQUALS_ZERO,
    GENERAL_BOUND,
    SLACK,
    applicable_theorems,
    check,
    general_bound,
    perfect_output_impossible,
    report_from_distribution,
)
from photon_distill.conditional import (
    ConditionalDistribution,
    DetectionPattern,
    InputEnsemble,
    detection_patterns,
    evaluate_all,
)
from photon_distill.errors import PMaxOneError
from photon_distill.unitary import EpsilonSchemeSpec, epsilon_scheme, haar_random


def test_general_bound_substitution():
    assert general_bound(InputEnsemble((0.1,) * 4), DetectionPattern((1, 1, 0))) == pytest.approx(2 / 9)


def test_general_bound_single_source():
    assert general_bound(InputEnsemble((0.5, 0, 0)), DetectionPattern((0, 0))) == pytest.approx(1.0)


def test_general_bound_all_but_one_detected_equals_odds():
    ens = InputEnsemble((0.3, 0.2, 0.25, 0.1))
    assert general_bound(ens, DetectionPattern((2, 1, 0))) == pytest.approx(ens.odds)


def test_general_bound_clamps_when_more_detected_than_available():
    assert general_bound(InputEnsemble((0.3, 0.0, 0.0)), DetectionPattern((1, 1))) == 0.0


def test_general_bound_needs_pmax_below_one():
    with pytest.raises(PMaxOneError):
        general_bound(InputEnsemble((1.0, 0.2)), DetectionPattern((0,)))


@settings(max_examples=50)
@given(st.floats(0.0, 0.98), st.floats(0.0, 0.01), st.integers(0, 4))
def test_general_bound_monotone(p, dp, d):
    pat = DetectionPattern((d, 0, 0, 0))
    lo = general_bound(InputEnsemble((p,) * 5), pat)
    hi = general_bound(InputEnsemble((p + dp,) * 5), pat)
    more = general_bound(InputEnsemble((p,) * 5), DetectionPattern((d + 1, 0, 0, 0)))
    assert lo <= hi
    assert more <= lo


def test_theorem_tags():
    eq = InputEnsemble((0.1, 0.1, 0.1, 0.0))
    assert applicable_theorems(eq, DetectionPattern((0, 0, 0))) == [GENERAL_BOUND, D_EQUALS_ZERO]
    assert applicable_theorems(eq, DetectionPattern((0, 1, 0))) == [GENERAL_BOUND, D_EQUALS_ONE_EQUAL_P]
    assert applicable_theorems(eq, DetectionPattern((1, 1, 0))) == [GENERAL_BOUND, D_EQUALS_M_MINUS_ONE]
    uneq = InputEnsemble((0.1, 0.2, 0.1))
    assert D_EQUALS_ONE_EQUAL_P not in applicable_theorems(uneq, DetectionPattern((1, 0)))


def test_epsilon_scheme_satisfies_bound_with_margin():
    ens = InputEnsemble.uniform(4, 0.01)
    r = check(epsilon_scheme(EpsilonSchemeSpec(4, 1e-3)), ens, DetectionPattern((2, 0, 0)))
    assert r.satisfied
    assert r.observed_ratio == pytest.approx(4 / 3 * ens.odds, rel=1e-3)
    assert r.slack == pytest.approx(2 * ens.odds - r.observed_ratio)


def _scenarios(n, count, seed):
    rng = np.random.default_rng(seed)
    for t in range(count):
        yield haar_random(n, int(rng.integers(2**63))), InputEnsemble(tuple(rng.uniform(0, 0.95, n)))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_random_scenarios_never_violate(n):
    reports = []
    for u, ens in _scenarios(n, 150, seed=n):
        for d in evaluate_all(u, ens):
            r = report_from_distribution(d, ens)
            assert r.satisfied, r
            if d.pattern.total == 0:
                assert r.observed_ratio <= ens.odds + SLACK
            reports.append(r)
    assert perfect_output_impossible(reports)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_single_detection_equal_sources(n):
    rng = np.random.default_rng(77)
    for t in range(60):
        u = haar_random(n, t)
        ens = InputEnsemble.uniform(n, float(rng.uniform(0.01, 0.95)))
        for pat in detection_patterns(n, 1):
            if pat.total == 1:
                r = check(u, ens, pat)
                assert D_EQUALS_ONE_EQUAL_P in r.theorem_tags
                assert r.observed_ratio <= ens.odds + SLACK


def test_zero_sources_never_heralded():
    ens = InputEnsemble((0.4, 0.0, 0.0))
    r = check(haar_random(3, 9), ens, DetectionPattern((1, 1)))
    assert r.herald_prob == 0.0
    assert r.bound_value == 0.0
    assert r.satisfied


def test_violation_is_reported():
    ens = InputEnsemble((0.1, 0.1))
    fake = ConditionalDistribution(DetectionPattern((0,)), (0.5, 0.5), 0.3, 1.0, 0.0)
    r = report_from_distribution(fake, ens)
    assert not r.satisfied
    assert set(r.violations) >= {GENERAL_BOUND, D_EQUALS_ZERO}


def test_perfect_output_detector():
    good = ConditionalDistribution(DetectionPattern((0,)), (0.9, 0.1), 0.3, 0.1 / 0.9, 0.0)
    bad = ConditionalDistribution(DetectionPattern((0,)), (0.0, 1.0), 0.3, None, 0.0)
    assert perfect_output_impossible([good])
    assert not perfect_output_impossible([good, bad])


def test_high_pmax_ratio_stays_finite():
    ens = InputEnsemble((0.999, 0.999, 0.5))
    for u, _ in _scenarios(3, 10, seed=3):
        for d in evaluate_all(u, ens):
            if d.zero_herald:
                continue
            assert d.ratio_10 is not None
            assert d.ratio_10 <= max(ens.n_sources - d.pattern.total, 0) * 999 * (1 + 1e-9) + SLACK
