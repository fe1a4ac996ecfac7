import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.services.analytic import SearchShape, success_prob
from src.services.errors import DomainError, ShapeError
from src.services.statevector import MarkedSet, measure_item_probabilities, run_search
from src.services.unknown_m import (
    CRITICAL_SUCCESS_FLOOR,
    OUT_OF_RANGE,
    DriverConfig,
    SearchDistributionCache,
    average_success_prob,
    expected_cost_grover,
    expected_cost_proposed,
    paired_sine_sum,
    run_unknown_m,
    run_unknown_m_batch,
    run_unknown_m_batch_async,
    summarize_runs,
)

# quoted total-cost coefficient, with 10% headroom for sampling noise
QUOTED_TOTAL = 6.4
HEADROOM = 1.10


def test_driver_config_defaults_and_alias():
    config = DriverConfig()
    assert config.lam == pytest.approx(8 / 7)
    assert DriverConfig(**{"lambda": 1.25}).lam == 1.25
    assert DriverConfig(max_rounds=5).rounds_cap(1024) == 5
    assert DriverConfig().rounds_cap(1024) == 10 * math.ceil(math.log(32, 8 / 7)) + 64


@pytest.mark.parametrize("lam", [1.0, 0.5, 1.4])
def test_driver_config_rejects_lambda(lam):
    with pytest.raises(ValidationError):
        DriverConfig(lam=lam)


def test_everything_marked_finishes_in_first_round():
    marked = MarkedSet.all_items(5)
    record = run_unknown_m(5, marked, DriverConfig(seed=3))
    assert record.rounds == 1
    assert record.total_iterations == 0
    assert record.oracle_calls == 1
    assert marked.contains(record.found_index)


def test_same_seed_same_record():
    marked = MarkedSet(n=8, members=(17,))
    config = DriverConfig(seed=2024)
    assert run_unknown_m(8, marked, config) == run_unknown_m(8, marked, config)


def test_record_accounting():
    marked = MarkedSet(n=8, members=(3, 200))
    for record in run_unknown_m_batch(8, marked, 50, DriverConfig(seed=1)):
        assert record.oracle_calls == record.total_iterations + record.rounds
        assert record.found_index is None or marked.contains(record.found_index)


def test_round_cap_leaves_index_absent():
    marked = MarkedSet(n=10, members=(0,))
    records = [run_unknown_m(10, marked, DriverConfig(seed=s, max_rounds=1)) for s in range(10)]
    assert all(r.rounds == 1 for r in records)
    assert any(r.found_index is None for r in records)


def test_no_matches_is_a_domain_error():
    with pytest.raises(DomainError):
        run_unknown_m(4, MarkedSet(n=4), DriverConfig())


def test_cache_rejects_other_marked_set():
    cache = SearchDistributionCache(4, MarkedSet(n=4, members=(1,)))
    with pytest.raises(ShapeError):
        run_unknown_m(4, MarkedSet(n=4, members=(2,)), DriverConfig(), cache)


def test_cache_matches_fresh_simulation():
    marked = MarkedSet(n=6, members=(5, 9, 40))
    cache = SearchDistributionCache(6, marked, budget_bytes=8 * 64 * 3)
    for j in [4, 1, 7, 0, 4, 9, 2]:
        expected = np.cumsum(measure_item_probabilities(run_search(6, marked, j)))
        np.testing.assert_allclose(cache.cdf(j), expected, atol=1e-12)
    assert len(cache) <= 3


@pytest.mark.asyncio
async def test_async_batch_matches_serial_batch():
    marked = MarkedSet(n=6, members=(11,))
    config = DriverConfig(seed=77)
    serial = run_unknown_m_batch(6, marked, 40, config)
    threaded = await run_unknown_m_batch_async(6, marked, 40, config, workers=4)
    assert threaded == serial


def test_summarize_runs():
    marked = MarkedSet(n=6, members=(11, 12))
    records = run_unknown_m_batch(6, marked, 100, DriverConfig(seed=5))
    summary = summarize_runs(records)
    assert summary.runs == 100
    assert summary.found == 100
    assert summary.success_rate == 1.0
    assert summary.mean_oracle_calls == pytest.approx(summary.mean_total_iterations + summary.mean_rounds)
    assert summary.max_total_iterations == max(r.total_iterations for r in records)


def test_summarize_empty_batch():
    with pytest.raises(DomainError):
        summarize_runs([])


def test_paired_sine_sum_single_term():
    theta = 0.4
    assert paired_sine_sum(1, theta) == pytest.approx(math.sin(theta) ** 2, abs=1e-12)


def test_paired_sine_sum_right_angle():
    assert paired_sine_sum(5, math.pi / 2) == pytest.approx(5.0, abs=1e-12)


@pytest.mark.parametrize("theta", [0.001, 0.05, 0.3, 0.9, 1.4, math.pi / 2])
def test_paired_sine_sum_matches_explicit_sum(theta):
    for m in [1, 2, 7, 50, 123, 500]:
        explicit = sum(math.sin((q + 1) * theta) ** 2 + math.sin(q * theta) ** 2 for q in range(m))
        assert paired_sine_sum(m, theta) == pytest.approx(explicit, abs=1e-12 * max(1.0, m))


def test_paired_sine_sum_rejects_bad_arguments():
    with pytest.raises(DomainError):
        paired_sine_sum(0, 0.3)
    with pytest.raises(DomainError):
        paired_sine_sum(3, 2.0)


def test_average_success_single_round():
    shape = SearchShape.of(64, 5)
    assert average_success_prob(1, shape) == pytest.approx(shape.ratio, abs=1e-12)


@pytest.mark.parametrize("N, M, m", [(16, 4, 3), (1024, 1, 40), (256, 7, 11), (64, 60, 5)])
def test_average_success_is_mean_of_success(N, M, m):
    shape = SearchShape.of(N, M)
    mean = np.mean([success_prob(q, shape) for q in range(m)])
    assert average_success_prob(m, shape) == pytest.approx(mean, abs=1e-12)


@pytest.mark.parametrize("n", [10, 14, 20])
def test_average_success_at_critical_stage(n):
    shape = SearchShape.of(2**n, 1)
    m = math.ceil(1 / math.sin(shape.theta))
    assert average_success_prob(m, shape) > CRITICAL_SUCCESS_FLOOR


def test_expected_cost_coefficients():
    cost = expected_cost_proposed(SearchShape.of(1024, 1))
    assert cost.pre_coefficient == pytest.approx(3.5, abs=1e-9)
    # quoted values are truncated to one decimal
    assert math.floor(cost.post_coefficient * 10) / 10 == 2.9
    assert math.floor(cost.total_coefficient * 10) / 10 == 6.4
    assert cost.post_coefficient == pytest.approx(1 / (2 * (1 - 0.7275 * 8 / 7)), abs=1e-12)


def test_expected_cost_grows_as_lambda_approaches_one():
    shape = SearchShape.of(1024, 1)
    pre = [expected_cost_proposed(shape, lam).pre_coefficient for lam in (1.3, 1.1, 1.01, 1.001)]
    assert pre == sorted(pre)


def test_expected_cost_diverges():
    with pytest.raises(DomainError):
        expected_cost_proposed(SearchShape.of(1024, 1), lam=1.4)


def test_expected_cost_single_match():
    shape = SearchShape.of(1024, 1)
    cost = expected_cost_proposed(shape)
    assert cost.m_q == pytest.approx(1 / math.sin(0.044199), rel=1e-3)
    assert QUOTED_TOTAL * cost.m_q == pytest.approx(144.8, rel=1e-3)
    assert cost.total == pytest.approx(cost.pre_critical + cost.post_critical)


def test_grover_cost_at_three_quarters():
    cost = expected_cost_grover(SearchShape.from_ratio(0.75))
    assert cost.in_range
    assert cost.m_g == pytest.approx(1.1547, abs=1e-4)
    assert cost.total == pytest.approx(9.238, abs=1e-3)


def test_grover_cost_out_of_range():
    cost = expected_cost_grover(SearchShape.from_ratio(0.9))
    assert not cost.in_range
    assert cost.as_value() == OUT_OF_RANGE


def test_grover_cost_single_match():
    cost = expected_cost_grover(SearchShape.of(1024, 1))
    assert cost.total == pytest.approx(128.0, rel=1e-3)


def _mean_iterations(n, M, runs, seed=0):
    marked = MarkedSet.random(n, M, seed=seed)
    records = run_unknown_m_batch(n, marked, runs, DriverConfig(seed=seed))
    assert all(r.found_index is not None and marked.contains(r.found_index) for r in records)
    return summarize_runs(records).mean_total_iterations


def _cells(N):
    return [1, 3, N // 4, N // 2, 3 * N // 4, N]


@pytest.mark.parametrize("M", _cells(2**8))
def test_monte_carlo_cost_small_list(M):
    shape = SearchShape.of(2**8, M)
    mean = _mean_iterations(8, M, runs=5000)
    assert mean <= HEADROOM * QUOTED_TOTAL / math.sin(shape.theta)


@pytest.mark.slow
@pytest.mark.parametrize("M", _cells(2**12))
def test_monte_carlo_cost_large_list(M):
    shape = SearchShape.of(2**12, M)
    mean = _mean_iterations(12, M, runs=5000)
    assert mean <= HEADROOM * QUOTED_TOTAL / math.sin(shape.theta)


def test_driver_handles_dense_matches_where_grover_cost_is_undefined():
    n, M = 8, 230
    assert expected_cost_grover(SearchShape.of(2**n, M)).as_value() == OUT_OF_RANGE
    assert _mean_iterations(n, M, runs=500) < 2.0


@pytest.mark.slow
def test_monte_carlo_cost_scales_with_sqrt_n_over_m():
    scaled = []
    for n in (8, 12):
        for M in (1, 3):
            mean = _mean_iterations(n, M, runs=5000)
            scaled.append(mean / math.sqrt(2**n / M))
    assert max(scaled) / min(scaled) <= 2.0
