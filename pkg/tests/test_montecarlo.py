import numpy as np
import pytest

from rwre_duality.environment import EPS_CLAMP, EnvironmentWindow, sample_environment
from rwre_duality.errors import ConfigurationError, InsufficientWindowError
from rwre_duality.gf import compute_gf_table, gf_column
from rwre_duality.montecarlo import (
    CENSORED,
    UPPER,
    PathStream,
    estimate_gf,
    run_paths,
    simulate_two_barrier,
)

from conftest import P_MODEL, constant_env


def test_near_deterministic_step():
    env = EnvironmentWindow(-4, np.full(5, 1 - EPS_CLAMP))
    assert env.p(0) == 1 - EPS_CLAMP
    ex, st = run_paths(env, 0, 1, -5, 100_000, 1000, seed=3)
    one_step_up = np.count_nonzero((ex == 1) & (st == 1))
    # expected misses: 0.1; 10 would be a 1e-17 event
    assert one_step_up >= 100_000 - 10
    s = simulate_two_barrier(env, 0, 1, -5, 1000, PathStream.from_seed(3), u=0.5)
    assert s.exit_side == UPPER and s.steps == 1 and s.discounted_weight == 0.5


def test_exit_upper_gamblers_ruin():
    ex, _ = run_paths(constant_env(0.5), 0, 1, -2, 100_000, 10**6, seed=5)
    freq = np.mean(ex == 1)
    sigma = np.sqrt(2 / 9 / 100_000)
    assert abs(freq - 2 / 3) <= 3 * sigma
    assert not np.any(ex == 0)


def test_censoring_bias_bound():
    env = constant_env(0.5)
    est = estimate_gf(env, 0.5, 3, 100_000, cap=10, seed=6)
    assert est.bias_bound == 0.5**10 < 1e-3
    exact = gf_column(env, 0.5, 0, 3)[3]
    assert est.estimate <= exact + 3 * est.stderr
    assert abs(est.estimate - exact) <= 3 * est.stderr + est.bias_bound
    assert est.censored_count > 0
    s = simulate_two_barrier(constant_env(0.5), 0, 50, -50, 3, PathStream.from_seed(0))
    assert s.exit_side == CENSORED and s.steps == 3


def test_depth_zero_estimate():
    env = sample_environment(P_MODEL, -3, 3, seed=9)
    est = estimate_gf(env, 0.5, 0, 100_000, seed=9)
    assert abs(est.estimate - env.p(0) * 0.5) <= 3 * est.stderr


def test_symmetric_u1():
    est = estimate_gf(constant_env(0.5), 1.0, 1, 100_000, seed=10)
    assert abs(est.estimate - 2 / 3) <= 3 * est.stderr + est.bias_bound


@pytest.mark.parametrize("seed", range(3))
def test_random_env_against_table(seed):
    env = sample_environment(P_MODEL, -10, 10, seed=seed)
    exact = compute_gf_table(env, 0.5, 5, (0, 0)).f_at(5, 0)
    est = estimate_gf(env, 0.5, 5, 100_000, seed=seed)
    assert abs(est.estimate - exact) <= 3 * est.stderr + est.bias_bound


def test_u1_frequency_against_table():
    env = sample_environment(P_MODEL, -10, 10, seed=21)
    est = estimate_gf(env, 1.0, 6, 100_000, seed=21)
    assert est.censored_count == 0 and est.bias_bound == 0.0
    assert abs(est.estimate - gf_column(env, 1.0, 0, 6)[6]) <= 3 * est.stderr


def test_reproducibility():
    env = sample_environment(P_MODEL, -10, 10, seed=1)
    a = estimate_gf(env, 0.5, 5, 20_000, seed=77)
    b = estimate_gf(env, 0.5, 5, 20_000, seed=77)
    c = estimate_gf(env, 0.5, 5, 20_000, seed=78)
    assert a == b and a.to_dict() == b.to_dict()
    assert a.estimate != c.estimate


def test_validation():
    env = constant_env(0.5, -3, 3)
    with pytest.raises(ConfigurationError):
        run_paths(env, 0, 0, -2, 10, 10, 0)
    with pytest.raises(ConfigurationError):
        run_paths(env, 0, 1, -2, 10, 0, 0)
    with pytest.raises(InsufficientWindowError):
        estimate_gf(env, 0.5, 5, 10)
    with pytest.raises(ConfigurationError):
        estimate_gf(env, 1.2, 1, 10)
    with pytest.raises(ConfigurationError):
        estimate_gf(env, 0.5, 1, 1)
