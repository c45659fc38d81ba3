import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwre_duality import _fallback, kernels
from rwre_duality import rng as R
from rwre_duality.errors import NumericalDegeneracyError

from conftest import _ckernels, BACKENDS

probs = st.lists(st.floats(0.05, 0.95), min_size=2, max_size=40)


def test_backend_reported():
    forced = os.environ.get("RWRE_PURE_PYTHON", "") not in ("", "0")
    if forced or _ckernels is None:
        assert kernels.BACKEND == "python"
    else:
        assert kernels.BACKEND == "cython"


def test_killed_gf_known_values(backend):
    a = np.array([0.25, 0.25])
    b = np.array([0.25, 0.25])
    out = backend.killed_gf(a, b, 1)
    assert out[0, 1] == 0.25
    assert out[1, 1] == pytest.approx(0.25 / (1 - 0.25 * 0.25), rel=1e-15)
    assert np.isnan(out[1, 0])
    rev = backend.killed_gf(a, b, 1, reverse=True)
    assert np.isnan(rev[1, 1])


def test_guard_raises(backend):
    with pytest.raises(NumericalDegeneracyError):
        backend.killed_gf(np.array([1.0, 1.0]), np.array([1.0, 1.0]), 1)
    with pytest.raises(NumericalDegeneracyError):
        backend.cf_convergents(np.array([-1.0, 1.0, 1.0]), 2)
    with pytest.raises(NumericalDegeneracyError):
        backend.evaluate_cf([1.0, 0.0])


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
@settings(max_examples=60, deadline=None)
@given(probs, st.floats(0.05, 1.0), st.integers(0, 45), st.booleans())
def test_gf_backends_bitwise_equal(p, u, depth, reverse):
    p = np.array(p)
    a, b = p * u, (1 - p) * u
    np.testing.assert_array_equal(_fallback.killed_gf(a, b, depth, reverse),
                                  _ckernels.killed_gf(a, b, depth, reverse))


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.1, 10.0), min_size=1, max_size=40), st.integers(0, 45), st.booleans())
def test_cf_backends_bitwise_equal(c, depth, reverse):
    c = np.array(c)
    np.testing.assert_array_equal(_fallback.cf_convergents(c, depth, reverse),
                                  _ckernels.cf_convergents(c, depth, reverse))
    assert _fallback.evaluate_cf(c) == _ckernels.evaluate_cf(c)


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
@pytest.mark.parametrize("seed", [0, 1, 2**63 + 5, -7])
def test_walk_backends_identical(seed):
    p = np.random.default_rng(3).uniform(0.05, 0.95, 9)
    key = R.stream_key(seed, R.STREAM_WALK)
    a = _fallback.simulate_paths(p, -5, 0, 4, -6, 10**6, key, 17, 5000)
    b = _ckernels.simulate_paths(p, -5, 0, 4, -6, 10**6, key, 17, 5000)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_walk_censoring(backend):
    p = np.full(3, 0.5)
    ex, steps = backend.simulate_paths(p, -1, 0, 2, -2, 3, R.stream_key(1, 2), 0, 2000)
    assert set(np.unique(ex)) <= {-1, 0, 1}
    assert np.all(steps[ex == 0] == 3)
    assert np.all((steps >= 1) & (steps <= 3))


def test_path_batching_is_irrelevant(backend):
    p = np.array([0.4, 0.6, 0.3])
    key = R.stream_key(9, R.STREAM_WALK)
    whole = backend.simulate_paths(p, -2, 0, 1, -3, 10**6, key, 0, 300)
    left = backend.simulate_paths(p, -2, 0, 1, -3, 10**6, key, 0, 100)
    right = backend.simulate_paths(p, -2, 0, 1, -3, 10**6, key, 100, 200)
    np.testing.assert_array_equal(whole[1], np.concatenate([left[1], right[1]]))


def test_uniforms_scalar_and_vector_agree():
    key = R.stream_key(5, 2)
    pk = R.path_keys(key, 0, 3)
    for i in range(3):
        assert int(pk[i]) == R.mix64(key + (i + 1) * R.GAMMA)
    u = R.uniforms(pk, 4)
    expect = [(R.mix64(int(k) + 5 * R.GAMMA) >> 11) / 2.0**53 for k in pk]
    np.testing.assert_array_equal(u, expect)
    assert np.all((u >= 0) & (u < 1))
