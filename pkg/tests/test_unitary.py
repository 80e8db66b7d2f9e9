import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photon_distill.errors import DimensionError, NonUnitaryError
from photon_distill.unitary import (
    EpsilonSchemeSpec,
    GivensParameterization,
    Unitary,
    dft,
    epsilon_scheme,
    extract,
    from_entries,
    haar_random,
    realize,
    unitarity_deviation,
)

TOL = 1e-10


def test_identity_accepted():
    u = from_entries(np.eye(2))
    assert u.dim == 2


def test_hadamard_beam_splitter_accepted():
    from_entries(np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def test_short_row_rejected_with_deviation():
    with pytest.raises(NonUnitaryError) as info:
        from_entries([[1, 0], [0, 0.5]])
    assert info.value.deviation == pytest.approx(0.75)


@pytest.mark.parametrize("bad", [np.eye(1), np.ones((2, 3)), np.zeros((0, 0))])
def test_dimension_errors(bad):
    with pytest.raises(DimensionError):
        from_entries(bad)


def test_entries_are_read_only():
    u = dft(3)
    with pytest.raises(ValueError):
        u.entries[0, 0] = 2.0


def test_json_round_trip():
    u = haar_random(3, 5)
    assert Unitary.from_json(u.to_json()) == u


def test_epsilon_scheme_two_modes():
    u = epsilon_scheme(EpsilonSchemeSpec(2, 0.1)).entries
    # rows are output modes; row 1 is (sqrt(0.99), -0.1), row 2 is (0.1, sqrt(0.99))
    np.testing.assert_allclose(u, [[math.sqrt(0.99), -0.1], [0.1, math.sqrt(0.99)]], atol=1e-15)


def test_epsilon_scheme_equal_weights_into_output_one():
    u = epsilon_scheme(EpsilonSchemeSpec(4, 0.001)).entries
    expected = math.sqrt(0.999999 / 3)
    for i in (0, 2, 3):
        assert u[0, i] == pytest.approx(expected, abs=1e-15)
        assert u[1, i] == pytest.approx(0.001 / math.sqrt(3), abs=1e-15)
    assert u[0, 1] == -0.001
    assert u[1, 1] == pytest.approx(math.sqrt(1 - 1e-6), abs=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 6, 8, 12])
@pytest.mark.parametrize("eps", [0.5, 1e-2, 1e-6])
def test_epsilon_scheme_is_unitary(n, eps):
    u = epsilon_scheme(EpsilonSchemeSpec(n, eps))
    assert unitarity_deviation(u.entries) <= TOL
    assert abs(np.vdot(u.entries[0], u.entries[1])) <= 1e-12


def test_epsilon_scheme_is_deterministic():
    a = epsilon_scheme(EpsilonSchemeSpec(5, 0.01))
    b = epsilon_scheme(EpsilonSchemeSpec(5, 0.01))
    assert np.array_equal(a.entries, b.entries)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1])
def test_epsilon_out_of_range(eps):
    with pytest.raises(ValueError):
        EpsilonSchemeSpec(4, eps)


def test_haar_is_seed_deterministic():
    assert haar_random(3, 42) == haar_random(3, 42)
    assert haar_random(3, 42) != haar_random(3, 43)


@pytest.mark.parametrize("seed", range(5))
def test_haar_is_unitary(seed):
    assert unitarity_deviation(haar_random(4, seed).entries) <= TOL


def test_haar_rejects_small_dim():
    with pytest.raises(DimensionError):
        haar_random(1, 0)


@pytest.mark.parametrize("dim", [2, 3, 5])
def test_haar_first_moment(dim):
    # E|U_ij|^2 = 1/dim for every entry; Var = (dim-1)/(dim^2 (dim+1))
    trials = 10_000
    samples = np.array([[abs(haar_random(dim, s).entries[i, j]) ** 2 for i, j in [(0, 0), (dim - 1, 1)]]
                        for s in range(trials)])
    sem = math.sqrt((dim - 1) / (dim * dim * (dim + 1)) / trials)
    for col in samples.T:
        assert abs(col.mean() - 1 / dim) < 3 * sem


def test_haar_second_moment():
    # E|U_11|^4 = 2/(d(d+1)) for Haar; a QR sample without the phase fix still passes
    # the first moment, so this pins the distribution a bit more.
    d, trials = 3, 10_000
    x = np.array([abs(haar_random(d, s).entries[0, 0]) ** 4 for s in range(trials)])
    exact = 2 / (d * (d + 1))
    assert abs(x.mean() - exact) < 4 * x.std() / math.sqrt(trials)


def test_realize_zero_params_is_identity():
    for n in (2, 3, 5):
        u = realize(GivensParameterization.identity(n))
        np.testing.assert_allclose(u.entries, np.eye(n), atol=1e-15)


def test_realize_single_rotation_is_balanced_splitter():
    u = realize(GivensParameterization(2, (math.pi / 4,), (0.0, 0.0, 0.0))).entries
    np.testing.assert_allclose(np.abs(u), np.full((2, 2), 1 / math.sqrt(2)), atol=1e-15)
    np.testing.assert_allclose(u, np.array([[1, -1], [1, 1]]) / math.sqrt(2), atol=1e-15)


def test_realize_rejects_wrong_lengths():
    with pytest.raises(DimensionError):
        GivensParameterization(3, (0.0,), (0.0,) * 6)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.data())
def test_realize_always_unitary(n, data):
    k = n * (n - 1) // 2
    angles = data.draw(st.lists(st.floats(0, math.pi / 2), min_size=k, max_size=k))
    phases = data.draw(st.lists(st.floats(0, 2 * math.pi, exclude_max=True), min_size=k + n, max_size=k + n))
    u = realize(GivensParameterization(n, tuple(angles), tuple(phases)))
    assert unitarity_deviation(u.entries) <= TOL


@pytest.mark.parametrize("make", [lambda n: Unitary(np.eye(n)), dft, lambda n: haar_random(n, n)])
@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_extract_round_trip(make, n):
    u = make(n)
    params = extract(u)
    assert all(0.0 <= a <= math.pi / 2 for a in params.angles)
    assert all(0.0 <= p < 2 * math.pi for p in params.phases)
    np.testing.assert_allclose(realize(params).entries, u.entries, atol=1e-10)


def test_dft_two_modes():
    np.testing.assert_allclose(dft(2).entries, np.array([[1, 1], [1, -1]]) / math.sqrt(2), atol=1e-15)


@pytest.mark.parametrize("n", [3, 4, 9])
def test_dft_flat_and_unitary(n):
    u = dft(n).entries
    np.testing.assert_allclose(np.abs(u), 1 / math.sqrt(n), atol=1e-15)
    assert unitarity_deviation(u) <= TOL
