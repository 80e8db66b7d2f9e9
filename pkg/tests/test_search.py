import math

import numpy as np
import pytest

from photon_distill.conditional import DetectionPattern, InputEnsemble, evaluate
from photon_distill.errors import DimensionError
from photon_distill.search import (
    Objective,
    SearchProblem,
    optimize,
    peak_factor,
    ratio_factor,
    sweep_epsilon_scheme,
    two_photon_factor,
)
from photon_distill.unitary import Unitary, realize_array


def _problem(n=3, p=0.3, objective=Objective.MAX_C1, budget=400, seed=5, **kw):
    return SearchProblem(n, InputEnsemble.uniform(n, p), objective, budget, seed, **kw)


def test_factors():
    assert ratio_factor(4, 2) == pytest.approx(4 / 3)
    assert ratio_factor(6, 3) == pytest.approx(1.8)
    assert two_photon_factor(4, 2) == pytest.approx(3 / 8)
    assert peak_factor(5) == pytest.approx(1.5)
    for n in range(4, 12):
        assert peak_factor(n) == max(ratio_factor(n, d) for d in range(1, n))
        assert peak_factor(n) > 1


def test_search_is_deterministic():
    a = optimize(_problem())
    b = optimize(_problem())
    assert a.best_value == b.best_value
    assert a.trace == b.trace
    assert np.array_equal(a.best_unitary.to_vector(), b.best_unitary.to_vector())


def test_threads_do_not_change_result():
    a = optimize(_problem(restarts=4))
    b = optimize(_problem(restarts=4), threads=4)
    assert a.to_json() == b.to_json()


def test_trace_monotone_and_budget_respected():
    r = optimize(_problem(budget=300, restarts=3))
    assert r.evaluations_used <= 300
    idx = [i for i, _ in r.trace]
    vals = [v for _, v in r.trace]
    assert idx == sorted(idx)
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(r.best_value, abs=1e-12)


def test_best_value_matches_reevaluation():
    r = optimize(_problem())
    u = Unitary(realize_array(r.best_unitary))
    d = evaluate(u, InputEnsemble.uniform(3, 0.3), r.best_pattern)
    assert d.c(1) == pytest.approx(r.best_value, abs=1e-12)
    assert r.best_distribution.c(1) == pytest.approx(r.best_value, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_small_networks_do_not_beat_pmax(n):
    r = optimize(_problem(n=n, p=0.4, budget=2000, restarts=5))
    assert r.best_value <= 0.4 + 1e-6


def test_fixed_pattern_policy():
    pat = DetectionPattern((2, 0, 0))
    p = SearchProblem(4, InputEnsemble.uniform(4, 0.01), Objective.MAX_RATIO_10, 1500, 3, pattern=pat, restarts=3)
    assert p.pattern_policy == "FIXED"
    r = optimize(p)
    assert r.best_pattern == pat
    assert r.best_value > InputEnsemble.uniform(4, 0.01).odds


def test_clean_objective_marks_infeasible():
    r = optimize(_problem(objective=Objective.MAX_C1_CLEAN, budget=300, restarts=2))
    d = r.best_distribution
    if r.best_value >= 0:
        assert d.multiphoton <= 1e-9
    else:
        assert r.best_value == pytest.approx(-1 - d.multiphoton)


def test_problem_validation():
    with pytest.raises(DimensionError):
        SearchProblem(1, InputEnsemble((0.1,)), Objective.MAX_C1, 10, 0)
    with pytest.raises(DimensionError):
        SearchProblem(3, InputEnsemble.uniform(4, 0.1), Objective.MAX_C1, 10, 0)
    with pytest.raises(ValueError):
        _problem(budget=0)


def test_sweep_n6_d3():
    row = sweep_epsilon_scheme(6, 0.01, 3, [1e-3])[0]
    assert row.ratio_10_over_odds == pytest.approx(1.8, rel=0.01)


def test_sweep_two_photon_n4():
    row = sweep_epsilon_scheme(4, 0.01, 2, [1e-3])[0]
    assert row.ratio_21_over_ratio_10 == pytest.approx(3 / 8, rel=0.01)


def test_sweep_n5_tie():
    r2, r3 = (sweep_epsilon_scheme(5, 0.01, d, [1e-3])[0].ratio_10_over_odds for d in (2, 3))
    assert r2 == pytest.approx(1.5, rel=0.01)
    assert r3 == pytest.approx(1.5, rel=0.01)


def test_sweep_converges_quadratically():
    rows = sweep_epsilon_scheme(4, 0.01, 2, [1e-2, 5e-3, 2.5e-3])
    dev = [abs(r.ratio_10_over_odds - 4 / 3) for r in rows]
    assert dev[1] <= dev[0] / 2
    assert dev[2] <= dev[1] / 2


def test_sweep_rejects_bad_detection_count():
    with pytest.raises(DimensionError):
        sweep_epsilon_scheme(4, 0.01, 4, [1e-3])
    with pytest.raises(DimensionError):
        sweep_epsilon_scheme(4, 0.01, 0, [1e-3])


def test_result_json_roundtrip_matrix_is_unitary():
    r = optimize(_problem(budget=50, restarts=1))
    doc = r.to_json()
    u = Unitary.from_json(doc["best_matrix"])
    assert u.dim == 3
    assert math.isfinite(doc["best_value"])
