"""Monte Carlo estimates of two-barrier discounted hitting functionals.

Walk uniforms come from the counter scheme in :mod:`rwre_duality.rng`, so an
estimate depends only on ``(seed, path index)`` and never on batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from . import rng as _rng
from .environment import EnvironmentWindow
from .errors import ConfigurationError
from .gf import check_u

DEFAULT_CAP = 10**6
UPPER, LOWER, CENSORED = "upper", "lower", "censored"
_SIDE = {1: UPPER, -1: LOWER, 0: CENSORED}


@dataclass(frozen=True)
class HittingSample:
    exit_side: str
    steps: int
    discounted_weight: float


@dataclass(frozen=True)
class PathStream:
    """Uniform stream of a single path: ``key`` from :func:`rng.stream_key`."""

    key: int
    index: int = 0

    @classmethod
    def from_seed(cls, seed, index=0):
        return cls(_rng.stream_key(seed, _rng.STREAM_WALK), index)


def _check_barriers(env, start, upper, lower, cap):
    if not lower < start < upper:
        raise ConfigurationError("need lower < start < upper", key="start")
    if cap < 1:
        raise ConfigurationError("cap must be >= 1", key="cap")
    env.require(lower + 1, upper - 1)


def simulate_two_barrier(env: EnvironmentWindow, start, upper, lower, cap, rng_stream: PathStream, u=1.0):
    """Walk from ``start`` until it hits ``upper`` or ``lower`` or makes ``cap`` steps."""
    _check_barriers(env, start, upper, lower, cap)
    p = env.p_range(lower + 1, upper - 1)
    ex, st = kernels.simulate_paths(p, lower + 1, start, upper, lower, int(cap),
                                    rng_stream.key, rng_stream.index, 1)
    steps = int(st[0])
    return HittingSample(_SIDE[int(ex[0])], steps, float(u) ** steps)


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    num_paths: int
    censored_count: int
    bias_bound: float
    seed: int

    def to_dict(self):
        return {"estimate": self.estimate, "stderr": self.stderr, "num_paths": self.num_paths,
                "censored_count": self.censored_count, "bias_bound": self.bias_bound,
                "seed": self.seed}


def run_paths(env, start, upper, lower, num_paths, cap, seed, stream=_rng.STREAM_WALK, first=0):
    _check_barriers(env, start, upper, lower, cap)
    p = env.p_range(lower + 1, upper - 1)
    key = _rng.stream_key(seed, stream)
    return kernels.simulate_paths(p, lower + 1, start, upper, lower, int(cap), key, first, num_paths)


def estimate_gf(env: EnvironmentWindow, u, n, num_paths, cap=DEFAULT_CAP, seed=0, stream=_rng.STREAM_WALK):
    """Estimate ``f[n] = E(u^tau_1 ; tau_1 < tau_{-n-1})`` from site 0.

    Censored paths contribute 0.  For ``u < 1`` the resulting bias is at most
    ``u^cap``; for ``u = 1`` it is at most ``censored_count / num_paths``.
    """
    u = check_u(u)
    if num_paths < 2:
        raise ConfigurationError("num_paths must be >= 2", key="paths")
    ex, st = run_paths(env, 0, 1, -n - 1, num_paths, cap, seed, stream)
    w = np.where(ex == 1, np.power(u, st.astype(np.float64)), 0.0)
    censored = int(np.count_nonzero(ex == 0))
    bias = u ** cap if u < 1.0 else censored / num_paths
    return MCEstimate(float(w.mean()), float(w.std(ddof=1) / math.sqrt(num_paths)),
                      int(num_paths), censored, float(bias), int(seed))
