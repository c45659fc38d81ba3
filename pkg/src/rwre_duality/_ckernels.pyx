# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_fallback.py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, NAN
from libc.stdint cimport uint64_t, int64_t, int8_t

from rwre_duality.errors import NumericalDegeneracyError

cnp.import_array()

cdef double DEN_GUARD = 1e-14
cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def killed_gf(a, b, Py_ssize_t depth, bint reverse=False):
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t L = av.shape[0]
    out_arr = np.full((depth + 1, L), np.nan)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t n, j, top
    cdef double den
    cdef int bad = -1
    for j in range(L):
        out[0, j] = bv[j] if reverse else av[j]
    top = depth if depth < L - 1 else L - 1
    with nogil:
        for n in range(1, top + 1):
            if reverse:
                for j in range(L - n):
                    den = 1.0 - av[j] * out[n - 1, j + 1]
                    if fabs(den) < DEN_GUARD:
                        bad = j
                        break
                    out[n, j] = bv[j] / den
            else:
                for j in range(n, L):
                    den = 1.0 - bv[j] * out[n - 1, j - 1]
                    if fabs(den) < DEN_GUARD:
                        bad = j
                        break
                    out[n, j] = av[j] / den
            if bad >= 0:
                break
    if bad >= 0:
        raise NumericalDegeneracyError(
            f"killed_gf: |denominator| < {DEN_GUARD:g} at position {bad}")
    return out_arr


def cf_convergents(c, Py_ssize_t depth, bint reverse=False):
    cdef const double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t L = cv.shape[0]
    out_arr = np.full((depth + 1, L), np.nan)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t n, j, top
    cdef double prev
    cdef int bad = -1
    for j in range(L):
        out[0, j] = cv[j]
    top = depth if depth < L - 1 else L - 1
    with nogil:
        for n in range(1, top + 1):
            if reverse:
                for j in range(L - n):
                    prev = out[n - 1, j + 1]
                    if fabs(prev) < DEN_GUARD:
                        bad = j
                        break
                    out[n, j] = cv[j] * (1.0 + 1.0 / prev)
            else:
                for j in range(n, L):
                    prev = out[n - 1, j - 1]
                    if fabs(prev) < DEN_GUARD:
                        bad = j
                        break
                    out[n, j] = cv[j] * (1.0 + 1.0 / prev)
            if bad >= 0:
                break
    if bad >= 0:
        raise NumericalDegeneracyError(
            f"cf_convergents: |denominator| < {DEN_GUARD:g} at position {bad}")
    return out_arr


def evaluate_cf(s):
    cdef const double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t k
    cdef double v = sv[sv.shape[0] - 1]
    for k in range(sv.shape[0] - 2, -1, -1):
        if fabs(v) < DEN_GUARD:
            raise NumericalDegeneracyError(
                f"evaluate_cf: tail value {v!r} at position {k + 1}")
        v = sv[k] + 1.0 / v
    return v


def simulate_paths(p, Py_ssize_t lo, Py_ssize_t start, Py_ssize_t upper,
                   Py_ssize_t lower, int64_t cap, uint64_t key,
                   uint64_t first, Py_ssize_t count):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    exit_arr = np.zeros(count, dtype=np.int8)
    steps_arr = np.zeros(count, dtype=np.int64)
    cdef int8_t[::1] ex = exit_arr
    cdef int64_t[::1] st = steps_arr
    cdef Py_ssize_t i, x
    cdef int64_t t
    cdef uint64_t pk
    cdef double u
    with nogil:
        for i in range(count):
            pk = mix64(key + (first + <uint64_t>i + 1) * GAMMA)
            x = start
            t = 0
            ex[i] = 0
            while t < cap:
                u = <double>(mix64(pk + <uint64_t>(t + 1) * GAMMA) >> 11) * (1.0 / 9007199254740992.0)
                if u < pv[x - lo]:
                    x += 1
                else:
                    x -= 1
                t += 1
                if x == upper:
                    ex[i] = 1
                    break
                if x == lower:
                    ex[i] = -1
                    break
            st[i] = t
    return exit_arr, steps_arr
