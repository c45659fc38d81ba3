"""Dual continued fractions built from a c-sequence.

Partial quotients::

    r(0) = c_b,   r(n) = c_{b-n} / r(n-1)     (backward, gives x[n])
    r'(0) = c_b,  r'(n) = c_{b+n} / r'(n-1)   (forward, gives x'[n])

and ``x[n] = [r(0), ..., r(n)]``.  By homogeneity of continued fractions the
convergents also satisfy ``x[n] = c (1 + 1/x[n-1] o S^-1)`` and
``x'[n] = c (1 + 1/x'[n-1] o S)``; the two evaluation routes are kept
separate so that each can check the other.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .environment import CEnvironmentWindow, EnvironmentWindow
from .errors import ConfigurationError, ConvergenceError, NumericalDegeneracyError
from .gf import check_u

BACKWARD = "backward"
FORWARD = "forward"


def _check_direction(direction):
    if direction not in (BACKWARD, FORWARD):
        raise ConfigurationError(f"direction must be 'backward' or 'forward', got {direction!r}",
                                 key="direction")


def _reach(direction, base, n):
    return (base - n, base) if direction == BACKWARD else (base, base + n)


@dataclass(frozen=True)
class CFSequence:
    direction: str
    base: int
    quotients: Optional[np.ndarray] = None
    convergents: Optional[np.ndarray] = None

    def to_csv(self):
        q = self.quotients
        x = self.convergents
        size = len(q) if q is not None else len(x)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["depth", "quotient", "convergent"])
        for k in range(size):
            w.writerow([k,
                        repr(float(q[k])) if q is not None else "",
                        repr(float(x[k])) if x is not None else ""])
        return buf.getvalue()


def partial_quotients(cenv: CEnvironmentWindow, n: int, direction=BACKWARD, base=0) -> CFSequence:
    _check_direction(direction)
    lo, hi = _reach(direction, base, n)
    cenv.require(lo, hi)
    step = -1 if direction == BACKWARD else 1
    r = np.empty(n + 1)
    r[0] = cenv.c(base)
    for k in range(1, n + 1):
        if abs(r[k - 1]) < kernels.DEN_GUARD:
            raise NumericalDegeneracyError(f"partial quotient r({k - 1}) = {r[k - 1]!r} is degenerate")
        r[k] = cenv.c(base + step * k) / r[k - 1]
    return CFSequence(direction, base, quotients=r)


def evaluate_cf(quotients) -> float:
    """``[s_0, ..., s_n] = s_0 + 1/[s_1, ..., s_n]`` by backward recurrence."""
    s = np.asarray(quotients, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise ConfigurationError("quotients must be a non-empty 1-D sequence")
    return float(kernels.evaluate_cf(s))


def convergent_table(cenv, lo, hi, depth, direction=BACKWARD):
    c = cenv.c_range(lo, hi)
    return kernels.cf_convergents(c, depth, reverse=(direction == FORWARD))


def convergent_column(cenv, base, depth, direction=BACKWARD):
    _check_direction(direction)
    lo, hi = _reach(direction, base, depth)
    tab = convergent_table(cenv, lo, hi, depth, direction)
    return tab[:, depth] if direction == BACKWARD else tab[:, 0]


def convergents_recursive(cenv: CEnvironmentWindow, N: int, direction=BACKWARD, base=0) -> CFSequence:
    """``x[0..N]`` (or ``x'[0..N]``) at ``base`` via the shift recursion."""
    _check_direction(direction)
    cenv.require(*_reach(direction, base, N))
    x = convergent_column(cenv, base, N, direction)
    q = partial_quotients(cenv, N, direction, base).quotients
    return CFSequence(direction, base, quotients=q, convergents=x)


class CFLimit(NamedTuple):
    value: float
    depth: int
    bracket: tuple


def cf_limit(cenv: CEnvironmentWindow, base=0, tol=1e-13, direction=BACKWARD, max_depth=None) -> CFLimit:
    """Limit of the convergents, certified by the even/odd bracket.

    For positive quotients consecutive convergents lie on opposite sides of
    the limit, so ``|x - x[N]| <= |x[N] - x[N-1]| < tol``.
    """
    _check_direction(direction)
    cenv.require_positive()
    if tol <= 0:
        raise ConfigurationError("tol must be > 0", key="tol")
    avail = base - cenv.lo if direction == BACKWARD else cenv.hi - base
    if max_depth is not None:
        avail = min(avail, int(max_depth))
    if avail < 1:
        cenv.require(*_reach(direction, base, 1))
    depth = min(64, avail)
    while True:
        col = convergent_column(cenv, base, depth, direction)
        gap = np.abs(np.diff(col))
        hit = np.flatnonzero(gap < tol)
        if hit.size:
            N = int(hit[0]) + 1
            lo, hi = sorted((float(col[N - 1]), float(col[N])))
            return CFLimit(float(col[N]), N, (lo, hi))
        if depth >= avail:
            raise ConvergenceError(
                f"continued fraction at site {base} not converged within depth {depth}; "
                f"bracket width {gap[-1]:.3e}", float(gap[-1]))
        depth = min(2 * depth, avail)


def transcription_c_from_env(env: EnvironmentWindow, u: float) -> CEnvironmentWindow:
    """``c_k = -1 / (a_{k-1} b_k)`` with ``a = p u``, ``b = q u``.

    The result covers ``[env.lo + 1, env.hi]`` and is negative everywhere.
    """
    u = check_u(u, allow_one=False)
    if len(env) < 2:
        env.require(env.lo - 1, env.hi)
    a = env.p_array[:-1] * u
    b = env.q_array[1:] * u
    return CEnvironmentWindow(env.lo + 1, -1.0 / (a * b))
