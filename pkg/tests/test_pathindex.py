"""Path indices: rotation quantity, winding, mean index, integer indices.

Expected values for rotation paths come from the closed form: a rotation
by total angle a has mean index a/pi and, when a is not a multiple of
2 pi, integer index 2 floor(a / 2 pi) + 1.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localfloer.errors import DegenerateEndpoint, NotALoop
from localfloer.paths import (
    conley_zehnder,
    exponential_path,
    index_report,
    maslov_loop,
    mean_index,
    rho,
)
from localfloer.symplectic import standard_j, vectorfield_j


def rotation_path(a, span=1.0):
    return exponential_path(a * standard_j(1), span=span)


def hyperbolic_path(c):
    return exponential_path(np.diag([c, -c]))


def shear_path():
    return exponential_path(np.array([[0.0, 1.0], [0.0, 0.0]]))


def random_path(seed, n=1, scale=1.5):
    rng = np.random.default_rng(seed)
    s = rng.standard_normal((2 * n, 2 * n))
    s = scale * (s + s.T) / 2.0
    return exponential_path(vectorfield_j(n) @ s)


def test_rho_of_rotation_is_unit_eigenvalue():
    assert abs(rho(rotation_path(0.7)(1.0)) - np.exp(0.7j)) < 1e-9


def test_rho_of_hyperbolic_is_one():
    assert abs(rho(np.diag([2.0, 0.5])) - 1.0) < 1e-12


def test_rho_of_reflected_saddle_is_minus_one():
    assert abs(rho(np.diag([-2.0, -0.5])) + 1.0) < 1e-12


@pytest.mark.parametrize("alpha", [0.05, 0.3183, 0.75, 1.2])
def test_mean_index_of_rotation_is_twice_alpha(alpha):
    path = rotation_path(2.0 * np.pi * alpha)
    assert abs(mean_index(path) - 2.0 * alpha) < 1e-9


@pytest.mark.parametrize("a,expected", [(0.4, 1), (5.0, 1), (7.0, 3), (13.0, 5)])
def test_integer_index_of_rotation(a, expected):
    assert conley_zehnder(rotation_path(a)) == expected


def test_integer_index_of_hyperbolic_is_zero():
    assert conley_zehnder(hyperbolic_path(np.log(2.0))) == 0
    assert abs(mean_index(hyperbolic_path(np.log(2.0)))) < 1e-9


def test_degenerate_endpoint_refused():
    with pytest.raises(DegenerateEndpoint):
        conley_zehnder(shear_path())


def test_index_report_flags_degenerate_endpoint():
    rep = index_report(shear_path())
    assert rep.degenerate
    assert rep.conley_zehnder is None
    assert rep.notes
    assert abs(rep.mean_index) < 1e-9  # unipotent endpoint, even mean index


# --- iteration formula: mean index is homogeneous


@pytest.mark.parametrize("k", [2, 3, 5])
def test_iteration_formula_for_rotation(k):
    p = rotation_path(2.0 * np.pi * 0.3183)
    assert abs(mean_index(p.iterated(k)) - k * mean_index(p)) < 1e-6


@pytest.mark.parametrize("k", [2, 5])
def test_iteration_formula_for_hyperbolic(k):
    p = hyperbolic_path(np.log(3.0))
    assert abs(mean_index(p.iterated(k)) - k * mean_index(p)) < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4))
def test_iteration_formula_for_random_paths(seed, k):
    p = random_path(seed)
    assert abs(mean_index(p.iterated(k)) - k * mean_index(p)) < 1e-6


# --- nondegenerate index pinches the mean index


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_integer_index_within_n_of_mean(seed):
    p = random_path(seed)
    delta = mean_index(p)
    try:
        cz = conley_zehnder(p)
    except DegenerateEndpoint:
        return
    assert abs(cz - delta) <= 1.0 + 1e-9
    # strict when the spectrum leaves 1, which DegenerateEndpoint guaranteed
    assert abs(cz - delta) < 1.0 + 1e-9


def test_rotation_index_pinch_is_strict():
    p = rotation_path(2.0 * np.pi * 0.3183)
    assert abs(conley_zehnder(p) - mean_index(p)) < 1.0


# --- additivity across direct sums


def test_mean_index_adds_over_direct_sum():
    p = rotation_path(2.0 * np.pi * 0.3183)
    q = hyperbolic_path(np.log(2.0))
    s = p.direct_sum(q)
    assert abs(mean_index(s) - (mean_index(p) + mean_index(q))) < 1e-6


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_mean_index_adds_for_random_pairs(seed_a, seed_b):
    p, q = random_path(seed_a), random_path(seed_b)
    assert abs(mean_index(p.direct_sum(q)) - mean_index(p) - mean_index(q)) < 1e-6


# --- loops shift by twice their winding


def full_loop(m=1):
    return exponential_path(2.0 * np.pi * m * standard_j(1))


@pytest.mark.parametrize("m", [1, 2])
def test_loop_winding_number(m):
    assert maslov_loop(full_loop(m)) == m


def test_not_a_loop_refused():
    with pytest.raises(NotALoop):
        maslov_loop(rotation_path(0.5))


@pytest.mark.parametrize("m", [1, 2])
def test_loop_shifts_rotation_index_by_twice_winding(m):
    p = rotation_path(2.0 * np.pi * 0.3183)
    shifted = full_loop(m).product(p)
    assert conley_zehnder(shifted) == conley_zehnder(p) + 2 * m
    assert abs(mean_index(shifted) - mean_index(p) - 2.0 * m) < 1e-6


def test_loop_shifts_hyperbolic_index_by_twice_winding():
    # the loop and the path do not commute here; the shift law must survive
    p = hyperbolic_path(np.log(2.0))
    shifted = full_loop(1).product(p)
    assert conley_zehnder(shifted) == conley_zehnder(p) + 2
    assert abs(mean_index(shifted) - mean_index(p) - 2.0) < 1e-6


# --- unipotent endpoints carry even mean index


def test_full_loop_mean_index_is_twice_winding():
    for m in (1, 2):
        assert abs(mean_index(full_loop(m)) - 2.0 * m) < 1e-6


def test_unipotent_endpoint_mean_index_is_even():
    for path in (shear_path(), full_loop(1)):
        delta = mean_index(path)
        assert abs(delta - 2.0 * round(delta / 2.0)) < 1e-6
