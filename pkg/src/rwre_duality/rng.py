"""Seed derivation.

Two schemes are used, both keyed by a single master seed:

* Environment draws use ``numpy.random.SeedSequence(entropy=seed,
  spawn_key=(stream, index))`` feeding a PCG64 generator.  Streams are the
  integer constants below, ``index`` is a draw or repeat counter.
* Walk simulation uses a counter-based splitmix64 hash so that the uniform
  consumed by path ``i`` at step ``t`` depends only on ``(seed, stream, i, t)``::

      key      = mix64(mix64(seed) ^ stream)
      path_key = mix64(key + (i + 1) * GAMMA)
      U(i, t)  = (mix64(path_key + (t + 1) * GAMMA) >> 11) * 2**-53

  ``mix64`` is the splitmix64 finalizer and ``GAMMA = 0x9E3779B97F4A7C15``.
  Results are therefore independent of how paths are batched or scheduled, and
  the compiled and numpy walk kernels consume identical uniforms.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

STREAM_ENVIRONMENT = 1
STREAM_WALK = 2
STREAM_AVERAGE = 3
STREAM_SWEEP = 4

SCHEME = {
    "environment": "numpy.SeedSequence(entropy=seed, spawn_key=(stream, index)) -> PCG64",
    "walk": "splitmix64 counter: U(i,t) = mix64(mix64(mix64(mix64(seed)^stream) + (i+1)*G) + (t+1)*G) >> 11",
}


def mix64(z):
    """splitmix64 finalizer on a Python int (wrapping at 64 bits)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z):
    """Vectorized :func:`mix64` on a ``uint64`` array."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def stream_key(seed, stream):
    """64-bit key for ``(seed, stream)``; any Python int is accepted as seed."""
    return mix64(mix64(int(seed) & MASK64) ^ int(stream))


def path_keys(key, first, count):
    idx = np.arange(first + 1, first + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64_array(np.uint64(key) + idx * np.uint64(GAMMA))


def uniforms(pkeys, step):
    """Uniforms in [0, 1) for the given path keys at 0-based ``step``."""
    with np.errstate(over="ignore"):
        z = pkeys + np.uint64(((step + 1) * GAMMA) & MASK64)
    bits = mix64_array(z) >> np.uint64(11)
    return bits.astype(np.float64) * (1.0 / 9007199254740992.0)


def generator(seed, stream, index=0):
    """PCG64 generator for substream ``(stream, index)`` of ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & MASK64, spawn_key=(int(stream), int(index)))
    return np.random.Generator(np.random.PCG64(ss))
