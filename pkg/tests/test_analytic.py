import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.services.analytic import (
    SearchShape,
    chebyshev_u,
    chebyshev_u_table,
    closed_amplitudes,
    failure_prob,
    first_iteration_success,
    iteration_bound,
    lower_bound_curve,
    min_success_over_ratios,
    optimal_real_iterations,
    ratio_grid,
    recurrence_amplitudes,
    required_iterations,
    required_iterations_curve,
    success_lower_bound,
    success_prob,
    success_prob_cosine,
)
from src.services.errors import DomainError

SHAPES = [(N, M) for N in (4, 16, 64, 1024) for M in sorted({1, 2, 3, N // 4, N // 2, 3 * N // 4, N - 1, N})]
WIDE_SHAPES = [(2**n, M) for n in range(2, 13) for M in sorted({1, 2, 3, 2**n // 4, 2**n // 2, 2**n - 1, 2**n})]


def test_search_shape_scalars():
    shape = SearchShape.of(16, 4)
    assert shape.ratio == 0.25
    assert shape.y == 0.75
    assert shape.theta == pytest.approx(math.acos(0.75))
    assert shape.s == 0.25


@pytest.mark.parametrize("N, M", [(12, 1), (16, 0), (16, 17), (0, 0)])
def test_search_shape_rejects_bad_sizes(N, M):
    with pytest.raises(DomainError):
        SearchShape.of(N, M)


def test_ratio_shape_has_no_s():
    with pytest.raises(DomainError):
        SearchShape.from_ratio(0.3).s


@pytest.mark.parametrize("ratio", [0.0, -0.1, 1.5])
def test_ratio_shape_rejects_out_of_range(ratio):
    with pytest.raises(DomainError):
        SearchShape.from_ratio(ratio)


def test_chebyshev_edge_values():
    assert chebyshev_u(-1, 0.3) == 0.0
    assert chebyshev_u(0, 0.3) == pytest.approx(1.0)
    assert chebyshev_u(4, 1.0) == 5.0
    with pytest.raises(DomainError):
        chebyshev_u(2, 1.2)


@settings(max_examples=50, deadline=None)
@given(y=st.floats(0.0, 0.999999), q_max=st.integers(0, 200))
def test_chebyshev_matches_recurrence(y, q_max):
    table = chebyshev_u_table(q_max, y)
    values = np.array([chebyshev_u(q, y) for q in range(q_max + 1)])
    np.testing.assert_allclose(values, table, rtol=1e-10, atol=1e-10)


def test_chebyshev_three_term_identity():
    for y in [*np.linspace(0.0, 0.999, 37), 0.999999]:
        for q in range(200):
            residual = chebyshev_u(q + 1, y) - 2.0 * y * chebyshev_u(q, y) + chebyshev_u(q - 1, y)
            assert abs(residual) <= 1e-10, (y, q)


@pytest.mark.parametrize("N, M", WIDE_SHAPES)
def test_closed_forms_match_recurrence(N, M):
    shape = SearchShape.of(N, M)
    for q in range(101):
        closed = closed_amplitudes(q, shape)
        stepped = recurrence_amplitudes(q, shape)
        assert closed.max_deviation(stepped) <= 1e-9
        assert closed.normalization(N, M) == pytest.approx(1.0, abs=1e-10)


def test_first_iteration_amplitudes():
    triple = closed_amplitudes(1, SearchShape.of(4, 1))
    assert (triple.a, triple.b, triple.c) == pytest.approx((0.25, 0.75, -0.5))


@pytest.mark.parametrize("N, M", SHAPES)
def test_success_and_failure_sum_to_one(N, M):
    shape = SearchShape.of(N, M)
    for q in range(40):
        assert success_prob(q, shape) + failure_prob(q, shape) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("N, M", SHAPES)
def test_cosine_form_agrees(N, M):
    shape = SearchShape.of(N, M)
    for q in range(20):
        assert success_prob_cosine(q, shape) == pytest.approx(success_prob(q, shape), abs=1e-12)


@pytest.mark.parametrize("ratio", [1e-4, 0.01, 0.2, 0.29, 0.5, 0.8])
def test_real_optimum_reaches_one(ratio):
    shape = SearchShape.from_ratio(ratio)
    assert success_prob_cosine(optimal_real_iterations(shape), shape) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("k", range(2, 41))
def test_success_reflects_about_real_optimum(k):
    """With theta = pi/k, 2 q-bar = k - 1 and P_s(q) = P_s(k - 1 - q)."""
    shape = SearchShape.from_ratio(1.0 - math.cos(math.pi / k))
    q_bar = optimal_real_iterations(shape)
    assert 2 * q_bar == pytest.approx(k - 1, abs=1e-9)
    for q in range(k):
        assert success_prob(q, shape) == pytest.approx(success_prob(k - 1 - q, shape), abs=1e-9)


def test_success_reflects_on_half_marked_list():
    shape = SearchShape.of(16, 8)
    assert 2 * optimal_real_iterations(shape) == pytest.approx(2.0)
    for q in range(3):
        assert success_prob(q, shape) == pytest.approx(success_prob(2 - q, shape), abs=1e-9)


@pytest.mark.parametrize("N, M", SHAPES)
def test_cosine_form_reflects_about_real_optimum(N, M):
    shape = SearchShape.of(N, M)
    q_bar = optimal_real_iterations(shape)
    for q in np.linspace(0.0, 2 * q_bar, 17):
        assert success_prob_cosine(q, shape) == pytest.approx(success_prob_cosine(2 * q_bar - q, shape), abs=1e-9)


@pytest.mark.parametrize("N, M", [(4, 1), (16, 3), (64, 10), (1024, 700)])
def test_first_iteration_polynomial(N, M):
    shape = SearchShape.of(N, M)
    assert first_iteration_success(shape.ratio) == pytest.approx(success_prob(1, shape), abs=1e-12)


def test_first_iteration_polynomial_rejects_zero():
    with pytest.raises(DomainError):
        first_iteration_success(0.0)


def test_required_iterations_small_list():
    plan = required_iterations(SearchShape.of(4, 1))
    assert plan.q == 2
    assert plan.p_success == pytest.approx(0.953125)
    assert plan.q <= plan.q_exact
    assert plan.p_lower_bound <= plan.p_success


def test_required_iterations_everything_marked():
    plan = required_iterations(SearchShape.of(16, 16))
    assert plan.q == 1
    assert plan.p_success == pytest.approx(1.0)


def test_iterations_within_bound_for_integer_shapes():
    for n in range(1, 11):
        N = 2**n
        for M in sorted(m for m in {1, 2, 3, 5, N // 3, N // 2, N} if 1 <= m <= N):
            shape = SearchShape.of(N, M)
            plan = required_iterations(shape)
            assert plan.q <= iteration_bound(shape.ratio) + 1e-9
            assert plan.p_success >= success_lower_bound(shape) - 1e-12


def test_required_curve_matches_scalar_forms():
    ratios = np.array([1e-3, 0.05, 0.2928, 0.5, 1.0])
    q, p = required_iterations_curve(ratios)
    for r, qi, pi in zip(ratios, q, p):
        plan = required_iterations(SearchShape.from_ratio(float(r)))
        assert qi == plan.q
        assert pi == pytest.approx(plan.p_success, abs=1e-12)


def test_curve_rejects_zero_ratio():
    with pytest.raises(DomainError):
        required_iterations_curve(np.array([0.0, 0.5]))


def test_ratio_grid_lands_on_one():
    grid = ratio_grid(1e-4)
    assert grid.size == 10000
    assert grid[0] == pytest.approx(1e-4)
    assert grid[-1] == 1.0


def test_minimum_success_probability():
    """Smallest guaranteed success is about 87.88%, near M/N = 0.2928."""
    ratio, p = min_success_over_ratios(step=1e-4)
    assert p == pytest.approx(0.8788, abs=0.005)
    assert ratio == pytest.approx(0.2928, abs=0.005)
    assert p == pytest.approx(3 - 3 / math.sqrt(2), abs=5e-4)


def test_min_success_needs_fine_grid():
    with pytest.raises(DomainError):
        min_success_over_ratios(step=1e-2)


def test_lower_bound_holds_everywhere():
    ratios = ratio_grid(1e-4)
    _, p = required_iterations_curve(ratios)
    assert np.all(lower_bound_curve(ratios) <= p + 1e-12)


def test_lower_bound_minimum():
    ratios = ratio_grid(1e-4)
    bound = lower_bound_curve(ratios)
    assert bound.min() == pytest.approx(2 * math.sqrt(2) - 2, abs=1e-6)
    assert ratios[np.argmin(bound)] == pytest.approx(2 - math.sqrt(2), abs=1e-4)

    shape = SearchShape.from_ratio(2 - math.sqrt(2))
    assert success_lower_bound(shape) == pytest.approx(2 * math.sqrt(2) - 2, abs=1e-12)
    assert required_iterations(shape).q == 1
    assert success_prob(1, shape) == pytest.approx(0.9878, abs=1e-3)


def test_one_iteration_above_a_third():
    """For M/N > 1/3 a single iteration succeeds with probability over 90%."""
    ratios = ratio_grid(1e-4, lower=1 / 3)
    q, p = required_iterations_curve(ratios)
    assert np.all(q == 1)
    assert p.min() >= 0.90
    assert p.min() == pytest.approx(25 / 27, abs=1e-3)
