"""Default verification suite: every duality check, on an ergodic and a
non-ergodic stationary law, collected into :class:`DualityReport` rows."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import __version__
from . import duality as d
from . import rng as _rng
from .environment import (
    IID,
    Constant,
    EnvironmentWindow,
    LogUniform,
    Mixture,
    Uniform,
    model_to_dict,
    sample_c_environment,
    sample_environment,
)
from .cf import transcription_c_from_env
from .kernels import BACKEND

DEFAULT_MODEL = IID(Uniform(0.05, 0.95))
DEFAULT_MIXTURE = Mixture(0.5, IID(Uniform(0.1, 0.4)), IID(Uniform(0.6, 0.9)))
DEFAULT_C_MODEL = IID(LogUniform(0.1, 10.0))
DEFAULT_C_MIXTURE = Mixture(0.5, IID(LogUniform(0.1, 1.0)), IID(LogUniform(1.0, 10.0)))


@dataclass
class Tolerances:
    pointwise: float = 1e-10
    quadruple: float = 1e-12
    product: float = 3e-11
    transcription: float = 1e-9
    limit: float = 1e-8
    hitting: float = 1e-6
    sigmas: float = 3.0

    @classmethod
    def uniform(cls, tol):
        return cls(tol, tol, tol, tol, tol, tol)


@dataclass
class VerifyParams:
    model: Any = DEFAULT_MODEL
    c_model: Any = DEFAULT_C_MODEL
    mixture: Any = DEFAULT_MIXTURE
    c_mixture: Any = DEFAULT_C_MIXTURE
    u: float = 0.5
    depth: int = 20
    instances: int = 20
    samples: int = 10_000
    birkhoff_length: int = 10_000
    seed: int = 0
    truncation: float = 1e-13
    tol: Tolerances = field(default_factory=Tolerances)
    average_depths: Optional[tuple] = None


# distinct environment substreams per check family
_IDX = {"fexact": 0, "quadruple": 1, "transcription": 2, "h": 3, "birkhoff": 4,
        "xexact": 5, "product": 6, "reverse": 7, "y": 8}
_LIMIT_HALF_WIDTH = 1024


def _index(check, model_no, i):
    return (_IDX[check] * 8 + model_no) * 1_000_000 + i


def _distinct(*models):
    out = []
    for m in models:
        if m not in out:
            out.append(m)
    return out


def run_verification(params: VerifyParams):
    """Run the suite and return a list of :class:`DualityReport`."""
    P = params
    T = P.tol
    N = P.depth
    reports = []
    base_prov = {"seed": P.seed, "u": P.u, "backend": BACKEND}

    def prov(model, depth, window, **extra):
        return {**base_prov, "model": model_to_dict(model), "depth": depth,
                "window": list(window), **extra}

    avg_depths = P.average_depths or tuple(sorted({1, min(5, N), N}))

    for mi, model in enumerate(_distinct(P.model, P.mixture)):
        tag = "" if mi == 0 else "[mixture]" if model == P.mixture else f"[{mi}]"
        worst = {}
        for i in range(P.instances):
            env = sample_environment(model, -N - 1, 2 * N + 2, P.seed, _index("fexact", mi, i))
            worst.setdefault("fexact", []).append(d.fexact_residuals(env, P.u, N).max())
            for n in range(1, N + 1):
                for key, r in d.quadruple_residuals(env, P.u, n).items():
                    worst.setdefault("q:" + key, []).append(r)
            xb, xf = d.transcription_residuals(env, P.u, N)
            worst.setdefault("transcription", []).append(max(xb.max(), xf.max()))
            ct = transcription_c_from_env(env, P.u)
            worst.setdefault("xexact_transcribed", []).append(
                d.xexact_residuals(ct, min(N, 20)).max())
        window = (-N - 1, 2 * N + 2)
        reports.append(d.DualityReport.from_residual(
            "fexact" + tag, d.POINTWISE, max(worst["fexact"]), T.pointwise,
            **prov(model, N, window, instances=P.instances)))
        for key in ("F_invariance", "F_closed_form", "D_eq_CA", "A_markov"):
            reports.append(d.DualityReport.from_residual(
                key + tag, d.POINTWISE, max(worst["q:" + key]), T.quadruple,
                **prov(model, N, (0, N), instances=P.instances)))
        reports.append(d.DualityReport.from_residual(
            "fexact_from_quadruple" + tag, d.POINTWISE, max(worst["q:fexact"]), T.quadruple,
            **prov(model, N, (0, N), instances=P.instances)))
        reports.append(d.DualityReport.from_residual(
            "transcription" + tag, d.POINTWISE, max(worst["transcription"]), T.transcription,
            **prov(model, N, window, instances=P.instances)))
        reports.append(d.DualityReport.from_residual(
            "xexact_transcribed" + tag, d.POINTWISE, max(worst["xexact_transcribed"]),
            T.transcription, **prov(model, min(N, 20), window, instances=P.instances)))

        h = []
        for i in range(P.instances):
            env = sample_environment(model, -_LIMIT_HALF_WIDTH, _LIMIT_HALF_WIDTH, P.seed,
                                     _index("h", mi, i))
            h.append(d.check_h_identity(env, P.u, P.truncation))
        reports.append(d.DualityReport.from_residual(
            "h_identity" + tag, d.TRUNCATED, max(h), T.limit,
            **prov(model, None, (-_LIMIT_HALF_WIDTH, _LIMIT_HALF_WIDTH),
                   truncation=P.truncation, instances=P.instances)))

        for n in avg_depths:
            est = d.estimate_average_identity(model, P.u, n, P.samples, P.seed + n, "cgzext")
            reports.append(d.DualityReport.from_average(
                f"average_cgzext[n={n}]" + tag, est, T.sigmas,
                **prov(model, n, (-n, n), sample_seed=P.seed + n)))

        L = P.birkhoff_length
        n_b = min(5, N)
        env = sample_environment(model, -n_b, L + n_b, P.seed, _index("birkhoff", mi, 0))
        res = d.birkhoff_spatial_average(env, P.u, n_b, L)
        reports.append(d.DualityReport.from_birkhoff(
            "birkhoff_cgzext" + tag, res, **prov(model, n_b, (-n_b, L + n_b), L=L)))

    for mi, model in enumerate(_distinct(P.c_model, P.c_mixture)):
        tag = "" if mi == 0 else "[mixture]" if model == P.c_mixture else f"[{mi}]"
        xe, pr, rv, ys = [], [], [], []
        nprod = min(N, 30)
        for i in range(P.instances):
            c = sample_c_environment(model, -N - 1, 2 * N + 3, P.seed, _index("xexact", mi, i))
            xe.append(d.xexact_residuals(c, N).max())
            pr.append(d.derriennic_product_residuals(c, nprod).max())
            rb, rf = d.reverse_transcription_residuals(c, N)
            rv.append(max(rb.max(), rf.max()))
            cl = sample_c_environment(model, -_LIMIT_HALF_WIDTH, _LIMIT_HALF_WIDTH, P.seed,
                                      _index("y", mi, i))
            ys.append(d.check_y_identity(cl, P.truncation))
        window = (-N - 1, 2 * N + 3)
        reports.append(d.DualityReport.from_residual(
            "xexact" + tag, d.POINTWISE, max(xe), T.pointwise,
            **prov(model, N, window, instances=P.instances)))
        reports.append(d.DualityReport.from_residual(
            "derriennic_product" + tag, d.POINTWISE, max(pr), T.product,
            **prov(model, nprod, window, instances=P.instances)))
        reports.append(d.DualityReport.from_residual(
            "reverse_transcription" + tag, d.POINTWISE, max(rv), T.transcription,
            **prov(model, N, window, instances=P.instances)))
        reports.append(d.DualityReport.from_residual(
            "y_identity" + tag, d.TRUNCATED, max(ys), T.limit,
            **prov(model, None, (-_LIMIT_HALF_WIDTH, _LIMIT_HALF_WIDTH),
                   truncation=P.truncation, instances=P.instances)))
        for n in avg_depths:
            est = d.estimate_average_identity(model, P.u, n, P.samples, P.seed + n, "d")
            reports.append(d.DualityReport.from_average(
                f"average_d[n={n}]" + tag, est, T.sigmas,
                **prov(model, n, (-n, n), sample_seed=P.seed + n)))

    const = Constant(0.7)
    env = EnvironmentWindow(-400, np.full(801, 0.7))
    r = d.hitting_probability_identity(env, 0, P.truncation, max_depth=200)
    reports.append(d.DualityReport.from_residual(
        "hitting_probability_u1", d.TRUNCATED, r, T.hitting,
        **{**prov(const, 200, (-400, 400)), "u": 1.0}))
    return reports


def suite_provenance(params: VerifyParams):
    return {
        "version": __version__,
        "backend": BACKEND,
        "rng": _rng.SCHEME,
        "seed": params.seed,
        "u": params.u,
        "depth": params.depth,
        "instances": params.instances,
        "samples": params.samples,
        "truncation": params.truncation,
        "tolerances": vars(params.tol),
        "models": {
            "model": model_to_dict(params.model),
            "mixture": model_to_dict(params.mixture),
            "c_model": model_to_dict(params.c_model),
            "c_mixture": model_to_dict(params.c_mixture),
        },
    }
