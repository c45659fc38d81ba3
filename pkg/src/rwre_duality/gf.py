"""Killed hitting-time generating functions of the nearest-neighbour walk.

For a walk started at 0 in environment ``e``::

    f[n](e)  = E_e(u^tau_1  ; tau_1  < tau_{-n-1})
    f'[n](e) = E_e(u^tau_-1 ; tau_-1 < tau_{n+1})

First-step analysis gives ``f[n] = a / (1 - b f[n-1] o S^-1)`` and
``f'[n] = b / (1 - a f'[n-1] o S)`` with ``a = p u``, ``b = q u``,
``f[0] = a``, ``f'[0] = b``.  ``f[n]`` at site ``k`` reads ``p`` on
``[k-n, k]``; ``f'[n]`` reads ``[k, k+n]``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .environment import EnvironmentWindow
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerateConditioningError,
    NumericalDegeneracyError,
)


def check_u(u, allow_one=True):
    u = float(u)
    ok = 0.0 < u <= 1.0 if allow_one else 0.0 < u < 1.0
    if not ok:
        raise ConfigurationError(f"u={u} outside {'(0, 1]' if allow_one else '(0, 1)'}", key="u")
    return u


@dataclass(frozen=True)
class GFTable:
    """``f[n](S^k e)`` and ``f'[n](S^k e)`` for ``0 <= n <= N``, ``lo <= k <= hi``.

    ``f`` and ``fprime`` have shape ``(N + 1, hi - lo + 1)``.
    """

    u: float
    N: int
    lo: int
    hi: int
    f: np.ndarray
    fprime: np.ndarray

    def f_at(self, n, k):
        return float(self.f[n, k - self.lo])

    def fprime_at(self, n, k):
        return float(self.fprime[n, k - self.lo])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["site", "n", "f", "fprime", "u"])
        for j, k in enumerate(range(self.lo, self.hi + 1)):
            for n in range(self.N + 1):
                w.writerow([k, n, repr(float(self.f[n, j])), repr(float(self.fprime[n, j])), repr(self.u)])
        return buf.getvalue()


def _ab(env, lo, hi, u):
    return env.p_range(lo, hi) * u, env.q_range(lo, hi) * u


def forward_table(env, u, lo, hi, depth):
    """Full kernel table of ``f`` on positions ``lo..hi`` (column ``j`` is site ``lo + j``)."""
    a, b = _ab(env, lo, hi, u)
    return kernels.killed_gf(a, b, depth, reverse=False)


def backward_table(env, u, lo, hi, depth):
    a, b = _ab(env, lo, hi, u)
    return kernels.killed_gf(a, b, depth, reverse=True)


def compute_gf_table(env: EnvironmentWindow, u: float, N: int, sites=(0, 0)) -> GFTable:
    """Fill :class:`GFTable` for ``sites = (lo, hi)`` up to depth ``N``.

    The environment must cover ``[lo - N, hi + N]``; this is checked before
    any arithmetic.
    """
    u = check_u(u)
    N = int(N)
    if N < 0:
        raise ConfigurationError("depth N must be >= 0", key="depth")
    lo, hi = int(sites[0]), int(sites[1])
    if lo > hi:
        raise ConfigurationError("sites must satisfy lo <= hi", key="sites")
    env.require(lo - N, hi + N)
    width = hi - lo + 1
    f = np.empty((N + 1, width))
    fp = np.empty((N + 1, width))
    fw = forward_table(env, u, lo - N, hi, N)
    bw = backward_table(env, u, lo, hi + N, N)
    f[:] = fw[:, N:]
    fp[:] = bw[:, :width]
    return GFTable(u, N, lo, hi, f, fp)


def gf_column(env, u, site, depth, which="f"):
    """``f[n]`` (or ``f'[n]``) at ``site`` for ``n = 0..depth``."""
    if which == "f":
        return forward_table(env, u, site - depth, site, depth)[:, depth]
    if which == "fprime":
        return backward_table(env, u, site, site + depth, depth)[:, 0]
    raise ConfigurationError(f"which={which!r}", key="which")


def gf_batch_at_base(p, q, u, n, base, which="f"):
    """Vectorized ``f[n]`` (or ``f'[n]``) at column ``base`` of each row of ``p``.

    ``p`` and ``q`` are ``(count, width)`` arrays; only the ``n + 1`` columns
    read by the recursion are touched.
    """
    a = p * u
    b = q * u
    if which == "f":
        v = a[:, base - n].copy()
        for j in range(base - n + 1, base + 1):
            v = a[:, j] / (1.0 - b[:, j] * v)
    else:
        v = b[:, base + n].copy()
        for j in range(base + n - 1, base - 1, -1):
            v = b[:, j] / (1.0 - a[:, j] * v)
    return v


class LimitResult(NamedTuple):
    value: float
    depth: int
    increment: float
    tail_bound: float


def limit_gf(env, u, site=0, tol=1e-13, which="f", max_depth=None):
    """Truncated limit of ``f[n]`` (or ``f'[n]``) at ``site``.

    Returns ``f[N]`` at the first ``N`` with ``f[N] - f[N-1] < tol``.
    ``tail_bound`` is ``u^(2N+3)``: reaching ``+1`` after visiting ``-N-1``
    takes at least ``2N + 3`` steps, so ``0 <= f - f[N] <= u^(2N+3)``.
    For ``u = 1`` that bound is vacuous and the increment rule is only a
    heuristic stopping criterion.
    """
    u = check_u(u)
    if tol <= 0:
        raise ConfigurationError("tol must be > 0", key="tol")
    avail = site - env.lo if which == "f" else env.hi - site
    if max_depth is not None:
        avail = min(avail, int(max_depth))
    if avail < 1:
        env.require(*((site - 1, site) if which == "f" else (site, site + 1)))
    depth = min(64, avail)
    last_inc = math.inf
    while True:
        col = gf_column(env, u, site, depth, which)
        inc = np.diff(col)
        hit = np.flatnonzero(inc < tol)
        if hit.size:
            N = int(hit[0]) + 1
            return LimitResult(float(col[N]), N, float(inc[N - 1]), u ** (2 * N + 3))
        last_inc = float(inc[-1]) if inc.size else math.inf
        if depth >= avail:
            raise ConvergenceError(
                f"limit of {which} at site {site} not reached within depth {depth}", last_inc
            )
        depth = min(2 * depth, avail)


def conditional_gf(env, u, site=0, tol=1e-13, which="f", max_depth=None):
    """``E(u^tau ; tau < inf) / P(tau < inf)`` as the ratio of truncated limits."""
    u = check_u(u)
    top = limit_gf(env, u, site, tol, which, max_depth).value
    if u == 1.0:
        return 1.0
    bottom = limit_gf(env, 1.0, site, tol, which, max_depth).value
    if bottom < 1e-14:
        raise DegenerateConditioningError(f"hitting probability {bottom!r} below 1e-14")
    return top / bottom


# ---------------------------------------------------------------------------
# Two-barrier quadruple


@dataclass(frozen=True)
class BarrierQuadruple:
    """Two-barrier functionals on a window of sites ``0..n``.

    ``A = E^n(u^tau_{n+1}; tau_{n+1} < tau_{-1}) = f[n] o S^n``,
    ``B = E^0(u^tau_{-1}; tau_{-1} < tau_n) = f'[n-1]``,
    ``C = E^0(u^tau_n; tau_n < tau_{-1})``,
    ``D = E^0(u^tau_{n+1}; tau_{n+1} < tau_{-1})``.
    """

    A: float
    B: float
    C: float
    D: float
    n: int
    u: float

    @property
    def F(self):
        return self.A * self.B


def hit_before(p, q, u, target):
    """``E^0(u^tau_target ; tau_target < tau_-1)`` for sites ``0..target-1``.

    Solves the first-step system ``h(x) = u p_x h(x+1) + u q_x h(x-1)``,
    ``h(-1) = 0``, ``h(target) = 1`` by elimination from the right barrier,
    independently of the left-to-right ratio recursion behind
    :func:`compute_gf_table`.  Writing ``h(x) = alpha_x + beta_x h(x-1)``,
    every update is a product of positive factors except ``1 - u p beta``,
    which stays above ``1 - u``, so small solutions keep full relative
    accuracy (a pivoted dense or banded solve only controls the norm).
    """
    m = int(target)
    if m < 1:
        raise ConfigurationError("target must be >= 1", key="target")
    pu = [float(x) * u for x in p[:m]]
    qu = [float(x) * u for x in q[:m]]
    alpha = pu[m - 1]
    beta = qu[m - 1]
    for x in range(m - 2, -1, -1):
        den = 1.0 - pu[x] * beta
        if den < kernels.DEN_GUARD:
            raise NumericalDegeneracyError(f"two-barrier elimination denominator {den!r} at site {x}")
        alpha = pu[x] * alpha / den
        beta = qu[x] / den
    return alpha


def barrier_quadruple(env: EnvironmentWindow, u: float, n: int) -> BarrierQuadruple:
    """Compute ``(A, B, C, D)`` from the window's sites ``0..n``.

    Barrier sites ``-1`` and ``n+1`` are absorbing and read no probability.
    """
    u = check_u(u)
    n = int(n)
    if n < 1:
        raise ConfigurationError("barrier_quadruple needs n >= 1", key="n")
    env.require(0, n)
    p = env.p_range(0, n)
    q = env.q_range(0, n)
    A = float(forward_table(env, u, 0, n, n)[n, n])
    B = float(backward_table(env, u, 0, n - 1, n - 1)[n - 1, 0])
    C = hit_before(p, q, u, n)
    D = hit_before(p, q, u, n + 1)
    return BarrierQuadruple(A, B, C, D, n, u)


def reverse_involution(env: EnvironmentWindow) -> EnvironmentWindow:
    """Map ``{p_k}`` to ``{q_{hi+lo-k}}`` on the same site range.

    On a window indexed ``0..n`` this is ``k -> q_{n-k}``.  ``p`` and ``q``
    are swapped rather than recomputed, so applying it twice is exact.
    """
    return EnvironmentWindow(env.lo, env.q_array[::-1], q=env.p_array[::-1])


def ruin_probability_lower(env, n, site=0):
    """``P(tau_{-n-1} < tau_1)`` from ``site`` by the product formula.

    Independent of the generating-function recursion.  With
    ``rho_j = q_j / p_j`` on the interior sites ``site-n .. site``, the scale
    function increments are ``W_0 = 1`` and ``W_i = rho_{site-n} ... rho_{site-n+i-1}``;
    starting next to the upper barrier, the lower exit has probability
    ``W_{n+1} / sum_i W_i``.
    """
    p = env.p_range(site - n, site)
    q = env.q_range(site - n, site)
    rho = q / p
    w = np.concatenate(([1.0], np.cumprod(rho)))
    return float(w[-1] / w.sum())
