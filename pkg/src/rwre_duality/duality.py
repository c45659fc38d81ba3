"""Residuals and averages for the space-reversal dualities.

Pointwise identities are exact algebraic consequences of the Markov property
in a fixed environment, so their residuals are pure roundoff.  Averaged
identities hold for any shift-invariant law, ergodic or not, and are checked
both by independent resampling and by a spatial telescoping bound.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from . import rng as _rng
from .cf import (
    BACKWARD,
    FORWARD,
    cf_limit,
    convergent_column,
    convergent_table,
    transcription_c_from_env,
)
from .environment import (
    EPS_CLAMP,
    CEnvironmentWindow,
    EnvironmentWindow,
    check_positive_model,
    check_probability_model,
    sample_batch,
    shift_view,
)
from .errors import ConfigurationError
from .gf import (
    backward_table,
    barrier_quadruple,
    check_u,
    forward_table,
    gf_batch_at_base,
    gf_column,
    limit_gf,
    reverse_involution,
)


def rel_residual(lhs, rhs):
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(scale > 0, np.abs(lhs - rhs) / scale, 0.0)
    return r if r.ndim else float(r)


# ---------------------------------------------------------------------------
# Pointwise identities


def fexact_residuals(env, u, N, base=0):
    """Residuals of ``f'[n] f[n-1] o S^n = f'[n-1] f[n] o S^n`` for ``n = 1..N``.

    Only sites ``[base, base + N]`` are read.
    """
    u = check_u(u)
    if N < 1:
        raise ConfigurationError("n must be >= 1", key="n")
    env.require(base, base + N)
    fw = forward_table(env, u, base, base + N, N)
    bw = backward_table(env, u, base, base + N, N)
    n = np.arange(1, N + 1)
    lhs = bw[n, 0] * fw[n - 1, n]
    rhs = bw[n - 1, 0] * fw[n, n]
    return rel_residual(lhs, rhs)


def check_fexact(env, u, n, base=0):
    return float(fexact_residuals(env, u, n, base)[-1])


def quadruple_residuals(env, u, n, base=0):
    """Residuals of the two-barrier decomposition on sites ``base..base+n``.

    Keys: ``F_invariance`` (``A B`` vs its image under the reversal),
    ``F_closed_form`` (``A B`` vs ``B B_I / (1 - C C_I)``), ``D_eq_CA``,
    ``A_markov`` (``A = B_I + C_I D``) and ``fexact`` (``F o I`` against the
    direct product ``f'[n] f[n-1] o S^n``).
    """
    w = shift_view(env, base)
    q = barrier_quadruple(w, u, n)
    qi = barrier_quadruple(reverse_involution(_window_0n(w, n)), u, n)
    direct = (gf_column(w, u, 0, n, "fprime")[n]
              * gf_column(w, u, n, n - 1, "f")[n - 1])
    return {
        "F_invariance": rel_residual(q.F, qi.F),
        "F_closed_form": rel_residual(q.F, q.B * qi.B / (1.0 - q.C * qi.C)),
        "D_eq_CA": rel_residual(q.D, q.C * q.A),
        "A_markov": rel_residual(q.A, qi.B + qi.C * q.D),
        "fexact": rel_residual(qi.F, direct),
    }


def _window_0n(env, n):
    env.require(0, n)
    return EnvironmentWindow(0, env.p_range(0, n), q=env.q_range(0, n))


def check_F_invariance(env, u, n, base=0):
    return quadruple_residuals(env, u, n, base)["F_invariance"]


def xexact_residuals(cenv, N, base=0):
    """Residuals of ``x'[n-1] x[n] o S^{n+1} = x'[n] x[n-1] o S^{n+1}``, ``n = 1..N``."""
    if N < 1:
        raise ConfigurationError("n must be >= 1", key="n")
    lo, hi = base, base + N + 1
    cenv.require(lo, hi)
    tx = convergent_table(cenv, lo, hi, N, BACKWARD)
    tp = convergent_table(cenv, lo, hi, N, FORWARD)
    n = np.arange(1, N + 1)
    lhs = tp[n - 1, 0] * tx[n, n + 1]
    rhs = tp[n, 0] * tx[n - 1, n + 1]
    return rel_residual(lhs, rhs)


def check_xexact(cenv, n, base=0):
    return float(xexact_residuals(cenv, n, base)[-1])


def derriennic_product_residuals(cenv, N, base=0):
    """Log-scale residuals of the product identity for ``n = 0..N``.

    ``c x[n] o S^{n+2} prod_{k<=n} x[k] o S^{k+1} = c_2 x'[n] prod_{k<=n} x[k] o S^{k+2}``
    on sites ``[base, base + N + 2]``; requires positive ``c``.
    """
    cenv.require_positive()
    lo, hi = base, base + N + 2
    cenv.require(lo, hi)
    tx = np.log(convergent_table(cenv, lo, hi, N, BACKWARD))
    tp = np.log(convergent_table(cenv, lo, hi, N, FORWARD))
    k = np.arange(1, N + 1)
    left = np.concatenate(([0.0], np.cumsum(tx[k, k + 1])))
    right = np.concatenate(([0.0], np.cumsum(tx[k, k + 2])))
    n = np.arange(N + 1)
    lhs = math.log(cenv.c(base)) + tx[n, n + 2] + left
    rhs = math.log(cenv.c(base + 2)) + tp[n, 0] + right
    return np.abs(lhs - rhs)


def check_derriennic_product(cenv, n, base=0):
    return float(derriennic_product_residuals(cenv, n, base)[-1])


def transcription_residuals(env, u, N, base=0):
    """Residuals of ``x[n] = -1/(b f[n] o S^-1)`` and ``x'[n] = -1/(a_{-1} f'[n])``.

    ``c`` is transcribed from ``env``; env must cover ``[base - N - 1, base + N]``.
    Returns ``(backward, forward)`` arrays over ``n = 0..N``.
    """
    env.require(base - N - 1, base + N)
    c = transcription_c_from_env(env, u)
    a = env.p_array * u
    b = env.q_array * u
    i = base - env.lo
    x = convergent_column(c, base, N, BACKWARD)
    xp = convergent_column(c, base, N, FORWARD)
    f = gf_column(env, u, base - 1, N, "f")
    fp = gf_column(env, u, base, N, "fprime")
    return rel_residual(x, -1.0 / (b[i] * f)), rel_residual(xp, -1.0 / (a[i - 1] * fp))


def reverse_transcription_residuals(cenv, N, base=0):
    """Check ``f[n] = 1/x[n] o S`` and ``f'[n] = -c/x'[n]`` for ``a = 1/c_1``, ``b = -1``.

    The ``f`` system is run through the generic killed-gf kernel with these
    signed coefficients.  Needs positive ``c`` on ``[base - N + 1, base + N + 1]``.
    """
    cenv.require_positive()
    lo, hi = base - N, base + N
    cenv.require(lo + 1, hi + 1)
    cvals = cenv.c_range(lo + 1, hi + 1)
    a = 1.0 / cvals
    b = -np.ones_like(a)
    fw = kernels.killed_gf(a, b, N, reverse=False)
    bw = kernels.killed_gf(a, b, N, reverse=True)
    j = base - lo
    f = fw[np.arange(N + 1), j]
    fp = bw[np.arange(N + 1), j]
    x_shift = convergent_column(cenv, base + 1, N, BACKWARD)
    xp = convergent_column(cenv, base, N, FORWARD)
    return rel_residual(f, 1.0 / x_shift), rel_residual(fp, -cenv.c(base) / xp)


# ---------------------------------------------------------------------------
# Truncated-limit identities


def h_identity_terms(env, u, tol=1e-13, base=0):
    """``(b f h, a f' h o S)`` with ``h = 1 - f o S^-1 f'`` from truncated limits."""
    u = check_u(u, allow_one=False)
    f_m1 = limit_gf(env, u, base - 1, tol, "f").value
    f_0 = limit_gf(env, u, base, tol, "f").value
    fp_0 = limit_gf(env, u, base, tol, "fprime").value
    fp_1 = limit_gf(env, u, base + 1, tol, "fprime").value
    a0 = env.p(base) * u
    b0 = env.q(base) * u
    h0 = 1.0 - f_m1 * fp_0
    h1 = 1.0 - f_0 * fp_1
    return b0 * f_0 * h0, a0 * fp_0 * h1, (h0, h1)


def check_h_identity(env, u, tol=1e-13, base=0):
    lhs, rhs, _ = h_identity_terms(env, u, tol, base)
    return rel_residual(lhs, rhs)


def check_y_identity(cenv, tol=1e-13, base=0):
    """Residual of ``c_1 x' o S y = c x y o S`` with ``y = c + x x'``."""
    x0 = cf_limit(cenv, base, tol, BACKWARD).value
    x1 = cf_limit(cenv, base + 1, tol, BACKWARD).value
    xp0 = cf_limit(cenv, base, tol, FORWARD).value
    xp1 = cf_limit(cenv, base + 1, tol, FORWARD).value
    c0, c1 = cenv.c(base), cenv.c(base + 1)
    y0 = c0 + x0 * xp0
    y1 = c1 + x1 * xp1
    return rel_residual(c1 * xp1 * y0, c0 * x0 * y1)


def hitting_probability_identity(env, site=0, tol=1e-13, max_depth=None):
    """``log P(tau_1 < inf) - log P(tau_-1 < inf) - log(p/q)`` at ``u = 1``."""
    f = limit_gf(env, 1.0, site, tol, "f", max_depth)
    fp = limit_gf(env, 1.0, site, tol, "fprime", max_depth)
    return math.log(f.value) - math.log(fp.value) - math.log(env.p(site) / env.q(site))


# ---------------------------------------------------------------------------
# Averaged identities


class AverageEstimate(NamedTuple):
    mean: float
    stderr: float
    num_samples: int


def average_statistic_samples(model, u, n, num_samples, seed, which="cgzext", chunk=50_000):
    """Per-environment statistic whose mean vanishes under any stationary law.

    ``cgzext``: ``log f[n] - log f'[n] - log(p_0/q_0)``;
    ``d``: ``log x[n] - log x'[n]``.  Windows span ``[-n, n]``.
    """
    if which == "cgzext":
        u = check_u(u)
        check_probability_model(model)
    elif which == "d":
        check_positive_model(model)
    else:
        raise ConfigurationError(f"which must be 'cgzext' or 'd', got {which!r}", key="which")
    out = np.empty(num_samples)
    done = 0
    index = 0
    while done < num_samples:
        m = min(chunk, num_samples - done)
        vals = sample_batch(model, -n, n, m, seed, stream=_rng.STREAM_AVERAGE, index=index)
        if which == "cgzext":
            p = np.clip(vals, EPS_CLAMP, 1.0 - EPS_CLAMP)
            q = 1.0 - p
            f = gf_batch_at_base(p, q, u, n, n, "f")
            fp = gf_batch_at_base(p, q, u, n, n, "fprime")
            stat = np.log(f) - np.log(fp) - np.log(p[:, n] / q[:, n])
        else:
            x = vals[:, 0].copy()
            for j in range(1, n + 1):
                x = vals[:, j] * (1.0 + 1.0 / x)
            xp = vals[:, 2 * n].copy()
            for j in range(2 * n - 1, n - 1, -1):
                xp = vals[:, j] * (1.0 + 1.0 / xp)
            stat = np.log(x) - np.log(xp)
        out[done : done + m] = stat
        done += m
        index += 1
    return out


def estimate_average_identity(model, u, n, num_samples, seed, which="cgzext"):
    """Sample mean and standard error of the averaged-duality statistic."""
    if num_samples < 2:
        raise ConfigurationError("num_samples must be >= 2", key="samples")
    s = average_statistic_samples(model, u, n, num_samples, seed, which)
    return AverageEstimate(float(s.mean()), float(s.std(ddof=1) / math.sqrt(s.size)), s.size)


class BirkhoffResult(NamedTuple):
    mean: float
    bound: float
    boundary_term: float
    L: int


def birkhoff_spatial_average(env_long, u, n, L, base=0):
    """Spatial mean of ``log f[n] - log f'[n] - log(p/q)`` over ``base .. base+L-1``.

    Summing the pointwise identity over shifts telescopes the sum to edge
    terms ``g_m(k) = log f[m](S^k e) - log f[m-1](S^k e)`` at
    ``k in [base, base+m)`` and ``[base+L, base+L+m)``.  ``bound`` is
    ``(sum of |g| over both edges + roundoff allowance) / L``;
    ``boundary_term`` is the signed telescoped sum divided by ``L``.
    Reads sites ``[base - n, base + L + n - 1]``.
    """
    u = check_u(u)
    if n < 1 or L < 1:
        raise ConfigurationError("need n >= 1 and L >= 1", key="n" if n < 1 else "L")
    lo, hi = base - n, base + L + n - 1
    env_long.require(lo, hi)
    lf = np.log(forward_table(env_long, u, lo, hi, n))
    lfp = np.log(backward_table(env_long, u, lo, hi, n))
    cols = np.arange(n, n + L)
    p = env_long.p_range(base, base + L - 1)
    q = env_long.q_range(base, base + L - 1)
    lr = np.log(p / q)
    terms = lf[n, cols] - lfp[n, cols] - lr
    mean = float(terms.sum() / L)
    edge_abs = 0.0
    edge_signed = 0.0
    for m in range(1, n + 1):
        left = lf[m, n : n + m] - lf[m - 1, n : n + m]
        right = lf[m, n + L : n + L + m] - lf[m - 1, n + L : n + L + m]
        edge_abs += float(np.abs(left).sum() + np.abs(right).sum())
        edge_signed += float(left.sum() - right.sum())
    scale = float(np.abs(lf[n, cols]).sum() + np.abs(lfp[n, cols]).sum() + np.abs(lr).sum())
    allowance = 64 * np.finfo(float).eps * scale
    return BirkhoffResult(mean, float((edge_abs + allowance) / L), edge_signed / L, L)


# ---------------------------------------------------------------------------
# Reports


POINTWISE = "pointwise"
TRUNCATED = "truncated-limit"
SAMPLED = "sampled-average"
BIRKHOFF = "birkhoff-spatial"

# additive floor on the sampled criterion: a deterministic (zero-variance)
# statistic still carries roundoff of this order
SAMPLED_ATOL = 1e-12


@dataclass
class DualityReport:
    identity: str
    mode: str
    tolerance: float
    residual: Optional[float] = None
    mean: Optional[float] = None
    stderr: Optional[float] = None
    num_samples: Optional[int] = None
    verdict: bool = False
    provenance: dict = field(default_factory=dict)

    @classmethod
    def from_residual(cls, identity, mode, residual, tolerance, **prov):
        residual = float(residual)
        return cls(identity, mode, tolerance, residual=residual,
                   verdict=bool(abs(residual) <= tolerance), provenance=prov)

    @classmethod
    def from_average(cls, identity, est, sigmas=3.0, **prov):
        ok = abs(est.mean) <= sigmas * est.stderr + SAMPLED_ATOL
        return cls(identity, SAMPLED, sigmas, mean=est.mean, stderr=est.stderr,
                   num_samples=est.num_samples, verdict=bool(ok), provenance=prov)

    @classmethod
    def from_birkhoff(cls, identity, res, **prov):
        return cls(identity, BIRKHOFF, res.bound, mean=res.mean, num_samples=res.L,
                   verdict=bool(abs(res.mean) <= res.bound), provenance=prov)

    def to_dict(self):
        return asdict(self)


CSV_COLUMNS = ["identity", "mode", "residual", "mean", "stderr", "num_samples",
               "tolerance", "verdict", "seed", "depth", "u", "window"]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "pass" if v else "fail"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return str(v)


def reports_to_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        row = r.to_dict()
        prov = row.pop("provenance")
        row.update({k: prov.get(k) for k in ("seed", "depth", "u", "window")})
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def reports_to_json(reports, provenance=None):
    return json.dumps({"provenance": provenance or {},
                       "all_pass": all(r.verdict for r in reports),
                       "reports": [r.to_dict() for r in reports]},
                      indent=2, sort_keys=True)
