import math

import numpy as np
import pytest

from src.services.analytic import ratio_grid
from src.services.errors import DomainError, ShapeError
from src.services.grover import (
    GROVER_BOUND_COEFF,
    GroverShape,
    grover_curve,
    grover_iterations,
    grover_simulate,
    grover_success,
)
from src.services.statevector import MarkedSet


def test_grover_shape():
    shape = GroverShape.of(16, 4)
    assert shape.theta_g == pytest.approx(math.pi / 6)
    assert (shape.N, shape.M) == (16, 4)


@pytest.mark.parametrize("N, M", [(16, 0), (16, 17)])
def test_grover_shape_rejects(N, M):
    with pytest.raises(DomainError):
        GroverShape.of(N, M)


def test_single_match_in_four_is_certain_after_one_iteration():
    shape = GroverShape.of(4, 1)
    assert grover_iterations(shape) == 1
    assert grover_success(1, shape) == pytest.approx(1.0)


@pytest.mark.parametrize("ratio", [0.51, 0.6, 0.75, 0.99, 1.0])
def test_single_guess_above_half(ratio):
    shape = GroverShape.from_ratio(ratio)
    q_g = grover_iterations(shape)
    assert q_g == 0
    assert grover_success(q_g, shape) == pytest.approx(ratio, abs=1e-12)


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
def test_simulation_matches_formula(n):
    N = 2**n
    for M in sorted({1, 3, N // 4, N // 2, N - 1}):
        marked = MarkedSet.random(n, M, seed=M)
        shape = GroverShape.of(N, M)
        for q in range(2 * grover_iterations(shape) + 3):
            assert grover_simulate(n, marked, q) == pytest.approx(grover_success(q, shape), abs=1e-9)


def test_simulation_rejects_empty_and_mismatched():
    with pytest.raises(DomainError):
        grover_simulate(3, MarkedSet(n=3), 1)
    with pytest.raises(ShapeError):
        grover_simulate(3, MarkedSet(n=2, members=(1,)), 1)


def test_minimum_near_half():
    ratios = ratio_grid(1e-4)
    _, p = grover_curve(ratios)
    k = int(np.argmin(p))
    assert p[k] == pytest.approx(0.5, abs=1e-3)
    assert ratios[k] == pytest.approx(0.5, abs=1e-3)


def test_iterations_within_bound():
    ratios = ratio_grid(1e-4)
    q_g, _ = grover_curve(ratios)
    assert np.all(q_g <= GROVER_BOUND_COEFF * np.sqrt(1.0 / ratios) + 1e-9)


def test_curve_matches_scalar_forms():
    ratios = np.array([1e-3, 0.1, 0.25, 0.5, 0.9])
    q_g, p = grover_curve(ratios)
    for r, qi, pi in zip(ratios, q_g, p):
        shape = GroverShape.from_ratio(float(r))
        assert qi == grover_iterations(shape)
        assert pi == pytest.approx(grover_success(int(qi), shape), abs=1e-12)


def test_worst_case_is_one_minus_ratio():
    ratios = ratio_grid(1e-4)
    _, p = grover_curve(ratios)
    assert np.all(p >= 1.0 - ratios - 1e-12)
