"""Pure numpy implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` performing the same
floating-point operations in the same order, so both backends agree bitwise.
"""

import numpy as np

from . import rng as _rng
from .errors import NumericalDegeneracyError

DEN_GUARD = 1e-14


def _guard(den, what):
    bad = np.abs(den) < DEN_GUARD
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise NumericalDegeneracyError(f"{what}: |denominator| < {DEN_GUARD:g} at position {idx}")


def killed_gf(a, b, depth, reverse=False):
    """Table of the two-sided killed generating functions.

    ``out[n, j]`` solves ``f[n] = a / (1 - b * f[n-1] o S^-1)`` (``reverse=False``,
    valid for ``j >= n``) or ``f'[n] = b / (1 - a * f'[n-1] o S)``
    (``reverse=True``, valid for ``j <= L-1-n``).  Invalid cells hold NaN.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    L = a.size
    out = np.full((depth + 1, L), np.nan)
    out[0] = b if reverse else a
    for n in range(1, min(depth, L - 1) + 1):
        if reverse:
            den = 1.0 - a[: L - n] * out[n - 1, 1 : L - n + 1]
            _guard(den, "killed_gf")
            out[n, : L - n] = b[: L - n] / den
        else:
            den = 1.0 - b[n:] * out[n - 1, n - 1 : L - 1]
            _guard(den, "killed_gf")
            out[n, n:] = a[n:] / den
    return out


def cf_convergents(c, depth, reverse=False):
    """``out[n, j] = c_j (1 + 1/out[n-1, j-1])`` (or ``j+1`` when ``reverse``)."""
    c = np.ascontiguousarray(c, dtype=np.float64)
    L = c.size
    out = np.full((depth + 1, L), np.nan)
    out[0] = c
    for n in range(1, min(depth, L - 1) + 1):
        if reverse:
            prev = out[n - 1, 1 : L - n + 1]
            _guard(prev, "cf_convergents")
            out[n, : L - n] = c[: L - n] * (1.0 + 1.0 / prev)
        else:
            prev = out[n - 1, n - 1 : L - 1]
            _guard(prev, "cf_convergents")
            out[n, n:] = c[n:] * (1.0 + 1.0 / prev)
    return out


def evaluate_cf(s):
    """Backward recurrence for ``[s_0, s_1, ..., s_n]``."""
    s = np.asarray(s, dtype=np.float64)
    v = float(s[-1])
    for k in range(s.size - 2, -1, -1):
        if abs(v) < DEN_GUARD:
            raise NumericalDegeneracyError(f"evaluate_cf: tail value {v!r} at position {k + 1}")
        v = float(s[k]) + 1.0 / v
    return v


def simulate_paths(p, lo, start, upper, lower, cap, key, first, count):
    """Run ``count`` walks, returning ``(exit, steps)``.

    ``exit`` is +1 (upper), -1 (lower) or 0 (censored at ``cap`` steps).
    Path ``i`` uses counter-based uniforms keyed by ``first + i``.
    """
    p = np.ascontiguousarray(p, dtype=np.float64)
    pk = _rng.path_keys(key, first, count)
    pos = np.full(count, start, dtype=np.int64)
    exit_side = np.zeros(count, dtype=np.int8)
    steps = np.zeros(count, dtype=np.int64)
    active = np.arange(count)
    t = 0
    while active.size and t < cap:
        u = _rng.uniforms(pk[active], t)
        cur = pos[active]
        cur = cur + np.where(u < p[cur - lo], 1, -1)
        pos[active] = cur
        t += 1
        up = cur == upper
        down = cur == lower
        done = up | down
        exit_side[active[up]] = 1
        exit_side[active[down]] = -1
        steps[active[done]] = t
        active = active[~done]
    steps[active] = cap
    return exit_side, steps
