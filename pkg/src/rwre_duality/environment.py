"""Finite environment windows, the shift action and stationary samplers.

A window stores site values on an absolute integer range ``[lo, hi]``.  The
shift ``S^k`` is pure index arithmetic: :func:`shift_view` shares the
underlying buffer and only moves ``lo``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from . import rng as _rng
from .errors import ConfigurationError, InsufficientWindowError

EPS_CLAMP = 1e-6


def _readonly(arr):
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


class _Window:
    """Shared site-indexing logic for p- and c-windows."""

    __slots__ = ("lo", "_values")

    def __init__(self, lo, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ConfigurationError("window values must be a non-empty 1-D sequence")
        self.lo = int(lo)
        self._values = values

    @property
    def hi(self):
        return self.lo + self._values.size - 1

    @property
    def sites(self):
        return range(self.lo, self.hi + 1)

    def __len__(self):
        return self._values.size

    def require(self, lo, hi):
        """Raise :class:`InsufficientWindowError` unless ``[lo, hi]`` is covered."""
        if lo < self.lo or hi > self.hi:
            raise InsufficientWindowError((lo, hi), (self.lo, self.hi))

    def _slice(self, arr, lo, hi):
        self.require(lo, hi)
        return arr[lo - self.lo : hi - self.lo + 1]

    def _index(self, k):
        k = int(k)
        if k < self.lo or k > self.hi:
            raise InsufficientWindowError((k, k), (self.lo, self.hi))
        return k - self.lo

    def __repr__(self):
        return f"{type(self).__name__}(lo={self.lo}, hi={self.hi})"


class EnvironmentWindow(_Window):
    """Right-step probabilities ``p_k`` for sites ``k`` in ``[lo, hi]``.

    Values are clamped into ``[EPS_CLAMP, 1 - EPS_CLAMP]``.  ``q_k = 1 - p_k``
    is stored alongside ``p`` so that the reversal involution is exact.
    """

    __slots__ = ("_q",)

    def __init__(self, lo, p, q=None):
        super().__init__(lo, p)
        p = self._values
        if not np.all(np.isfinite(p)) or np.any(p <= 0.0) or np.any(p >= 1.0):
            raise ConfigurationError("environment probabilities must lie in (0, 1)", key="p")
        if q is None:
            p = np.clip(p, EPS_CLAMP, 1.0 - EPS_CLAMP)
            q = 1.0 - p
        else:
            q = np.asarray(q, dtype=np.float64)
            if q.shape != p.shape:
                raise ConfigurationError("p and q must have equal length", key="q")
        self._values = p if p.flags.writeable is False else _readonly(p)
        self._q = q if q.flags.writeable is False else _readonly(q)

    @classmethod
    def _view(cls, lo, p, q):
        obj = cls.__new__(cls)
        obj.lo = int(lo)
        obj._values = p
        obj._q = q
        return obj

    def p(self, k):
        return float(self._values[self._index(k)])

    def q(self, k):
        return float(self._q[self._index(k)])

    def p_range(self, lo, hi):
        """Read-only array ``p_lo .. p_hi``; errors if any site is missing."""
        return self._slice(self._values, lo, hi)

    def q_range(self, lo, hi):
        return self._slice(self._q, lo, hi)

    @property
    def p_array(self):
        return self._values

    @property
    def q_array(self):
        return self._q

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["site", "p"])
        for k, v in zip(self.sites, self._values):
            w.writerow([k, repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ConfigurationError("empty environment CSV")
        sites = [int(r["site"]) for r in rows]
        if sites != list(range(sites[0], sites[0] + len(sites))):
            raise ConfigurationError("environment CSV sites must be consecutive", key="site")
        return cls(sites[0], [float(r["p"]) for r in rows])


class CEnvironmentWindow(_Window):
    """Nonzero real sequence ``c_k`` on ``[lo, hi]``.

    ``positive`` records whether every value is > 0; operations that need
    positivity call :meth:`require_positive`.
    """

    __slots__ = ("positive",)

    def __init__(self, lo, c):
        super().__init__(lo, c)
        c = self._values
        if not np.all(np.isfinite(c)) or np.any(c == 0.0):
            raise ConfigurationError("c values must be finite and nonzero", key="c")
        self._values = _readonly(c)
        self.positive = bool(np.all(c > 0.0))

    @classmethod
    def _view(cls, lo, c, positive):
        obj = cls.__new__(cls)
        obj.lo = int(lo)
        obj._values = c
        obj.positive = positive
        return obj

    def c(self, k):
        return float(self._values[self._index(k)])

    def c_range(self, lo, hi):
        return self._slice(self._values, lo, hi)

    @property
    def c_array(self):
        return self._values

    def require_positive(self):
        if not self.positive:
            raise ConfigurationError("operation requires a positive c-sequence", key="c")

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["site", "c"])
        for k, v in zip(self.sites, self._values):
            w.writerow([k, repr(float(v))])
        return buf.getvalue()


def shift_view(env, k):
    """``S^k`` applied to ``env``: site ``i`` of the result reads site ``i + k``.

    No copy is made.
    """
    if isinstance(env, EnvironmentWindow):
        return EnvironmentWindow._view(env.lo - k, env._values, env._q)
    if isinstance(env, CEnvironmentWindow):
        return CEnvironmentWindow._view(env.lo - k, env._values, env.positive)
    raise TypeError(f"cannot shift {type(env).__name__}")


def log_ratio(env, k):
    """``log(p_k / q_k)``."""
    return math.log(env.p(k) / env.q(k))


# ---------------------------------------------------------------------------
# Stationary laws


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def draw(self, gen, size):
        return gen.uniform(self.a, self.b, size)

    def support(self):
        return self.a, self.b


@dataclass(frozen=True)
class LogUniform:
    a: float
    b: float

    def draw(self, gen, size):
        return np.exp(gen.uniform(math.log(self.a), math.log(self.b), size))

    def support(self):
        return self.a, self.b


@dataclass(frozen=True)
class Discrete:
    values: tuple
    weights: tuple

    def draw(self, gen, size):
        w = np.asarray(self.weights, dtype=float)
        return gen.choice(np.asarray(self.values, dtype=float), size=size, p=w / w.sum())

    def support(self):
        return min(self.values), max(self.values)


Distribution = Union[Uniform, LogUniform, Discrete]


@dataclass(frozen=True)
class Constant:
    value: float

    def sample(self, gen, lo, hi, count):
        return np.full((count, hi - lo + 1), float(self.value))

    def support(self):
        return self.value, self.value


@dataclass(frozen=True)
class IID:
    dist: Distribution

    def sample(self, gen, lo, hi, count):
        return self.dist.draw(gen, (count, hi - lo + 1))

    def support(self):
        return self.dist.support()


@dataclass(frozen=True)
class Periodic:
    """Periodic pattern with a uniformly random phase (stationary under S)."""

    pattern: tuple

    def sample(self, gen, lo, hi, count):
        pat = np.asarray(self.pattern, dtype=float)
        phase = gen.integers(0, pat.size, size=count)
        sites = np.arange(lo, hi + 1)
        return pat[(sites[None, :] + phase[:, None]) % pat.size]

    def support(self):
        return min(self.pattern), max(self.pattern)


@dataclass(frozen=True)
class Mixture:
    """With probability ``weight`` draw the whole window from ``first``.

    Stationary but not ergodic when the components differ.
    """

    weight: float
    first: Any
    second: Any

    def sample(self, gen, lo, hi, count):
        pick = gen.random(count) < self.weight
        out = self.second.sample(gen, lo, hi, count)
        n1 = int(pick.sum())
        if n1:
            out[pick] = self.first.sample(gen, lo, hi, n1)
        return out

    def support(self):
        a1, b1 = self.first.support()
        a2, b2 = self.second.support()
        return min(a1, a2), max(b1, b2)


EnvironmentModel = Union[Constant, IID, Periodic, Mixture]


def check_probability_model(model):
    lo, hi = model.support()
    if not (0.0 < lo and hi < 1.0):
        raise ConfigurationError(f"model support [{lo}, {hi}] is not inside (0, 1)", key="model")


def check_positive_model(model):
    lo, _ = model.support()
    if not lo > 0.0:
        raise ConfigurationError("c-model support must be positive", key="c_model")


def sample_batch(model, lo, hi, count, seed, stream=_rng.STREAM_ENVIRONMENT, index=0):
    """``count`` independent windows on ``[lo, hi]`` as a ``(count, width)`` array."""
    if lo > hi:
        raise ConfigurationError("lo must not exceed hi", key="lo")
    gen = _rng.generator(seed, stream, index)
    return np.asarray(model.sample(gen, lo, hi, count), dtype=np.float64)


def sample_environment(model, lo, hi, seed, index=0):
    """Draw one :class:`EnvironmentWindow` on ``[lo, hi]`` from ``model``."""
    check_probability_model(model)
    p = sample_batch(model, lo, hi, 1, seed, index=index)[0]
    return EnvironmentWindow(lo, np.clip(p, EPS_CLAMP, 1.0 - EPS_CLAMP))


def sample_c_environment(model, lo, hi, seed, index=0):
    """Draw one positive :class:`CEnvironmentWindow` on ``[lo, hi]``."""
    check_positive_model(model)
    return CEnvironmentWindow(lo, sample_batch(model, lo, hi, 1, seed, index=index)[0])


# ---------------------------------------------------------------------------
# JSON model descriptions


def _dist_from_dict(d):
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigurationError("distribution must be an object with a 'kind'", key="dist")
    kind = d["kind"]
    try:
        if kind == "uniform":
            a, b = float(d["a"]), float(d["b"])
            if not a < b:
                raise ConfigurationError("uniform needs a < b", key="dist")
            return Uniform(a, b)
        if kind == "loguniform":
            a, b = float(d["a"]), float(d["b"])
            if not 0 < a < b:
                raise ConfigurationError("loguniform needs 0 < a < b", key="dist")
            return LogUniform(a, b)
        if kind == "discrete":
            vals, w = tuple(map(float, d["values"])), tuple(map(float, d["weights"]))
            if len(vals) != len(w) or not vals or min(w) < 0 or sum(w) <= 0:
                raise ConfigurationError("discrete needs matching values/weights", key="dist")
            return Discrete(vals, w)
    except KeyError as exc:
        raise ConfigurationError(f"distribution missing key {exc}", key=str(exc.args[0])) from None
    raise ConfigurationError(f"unknown distribution kind {kind!r}", key="dist.kind")


def model_from_dict(d):
    """Build a model from ``{"kind": ..., "params": {...}}``.

    Kinds: ``constant`` (``p``), ``iid`` (``dist``), ``periodic``
    (``pattern``), ``mixture`` (``weight``, ``first``, ``second``).  A
    constant accepts its value under ``p``, ``c`` or ``value``.
    """
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigurationError("model must be an object with a 'kind'", key="model")
    kind = d["kind"]
    params = d.get("params", {})
    try:
        if kind == "constant":
            key = next((k for k in ("p", "c", "value") if k in params), "p")
            return Constant(float(params[key]))
        if kind == "iid":
            return IID(_dist_from_dict(params["dist"]))
        if kind == "periodic":
            pat = tuple(map(float, params["pattern"]))
            if not pat:
                raise ConfigurationError("periodic pattern is empty", key="pattern")
            return Periodic(pat)
        if kind == "mixture":
            w = float(params["weight"])
            if not 0.0 <= w <= 1.0:
                raise ConfigurationError("mixture weight must be in [0, 1]", key="weight")
            return Mixture(w, model_from_dict(params["first"]), model_from_dict(params["second"]))
    except KeyError as exc:
        raise ConfigurationError(f"model missing key {exc}", key=str(exc.args[0])) from None
    raise ConfigurationError(f"unknown model kind {kind!r}", key="model.kind")


def model_to_dict(model):
    if isinstance(model, Constant):
        return {"kind": "constant", "params": {"p": model.value}}
    if isinstance(model, IID):
        dist = model.dist
        if isinstance(dist, Discrete):
            dd = {"kind": "discrete", "values": list(dist.values), "weights": list(dist.weights)}
        else:
            dd = {"kind": "uniform" if isinstance(dist, Uniform) else "loguniform",
                  "a": dist.a, "b": dist.b}
        return {"kind": "iid", "params": {"dist": dd}}
    if isinstance(model, Periodic):
        return {"kind": "periodic", "params": {"pattern": list(model.pattern)}}
    if isinstance(model, Mixture):
        return {"kind": "mixture", "params": {"weight": model.weight,
                                              "first": model_to_dict(model.first),
                                              "second": model_to_dict(model.second)}}
    raise TypeError(type(model).__name__)
