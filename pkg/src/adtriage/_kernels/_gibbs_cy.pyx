# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled collapsed-Gibbs sweep kernels.

Bit-compatible with the pure-Python backend: identical splitmix64 stream,
identical per-topic arithmetic order, identical cumulative-sum selection.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int32_t, uint64_t

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef double INV_2_53 = 2.0 ** -53


cdef inline double _mix_double(uint64_t state) noexcept nogil:
    cdef uint64_t z = state
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    z = z ^ (z >> 31)
    return <double>(z >> 11) * INV_2_53


def fit_sweeps(int32_t[::1] doc_ids, int32_t[::1] word_ids, int32_t[::1] z,
               int32_t[:, ::1] n_dk, int32_t[:, ::1] n_kw, int32_t[::1] n_k,
               double alpha, double beta, int sweeps, state):
    """Run full collapsed-Gibbs sweeps over the token stream in place."""
    cdef Py_ssize_t n_tokens = word_ids.shape[0]
    cdef Py_ssize_t n_topics = n_k.shape[0]
    cdef double vbeta = n_kw.shape[1] * beta
    cdef uint64_t rng = <uint64_t>(<unsigned long long>state)
    cdef double[::1] cum = np.empty(n_topics, dtype=np.float64)
    cdef Py_ssize_t s, t, k, knew
    cdef int32_t d, w, old
    cdef double acc, u, wk

    with nogil:
        for s in range(sweeps):
            for t in range(n_tokens):
                d = doc_ids[t]
                w = word_ids[t]
                old = z[t]
                n_dk[d, old] -= 1
                n_kw[old, w] -= 1
                n_k[old] -= 1
                acc = 0.0
                for k in range(n_topics):
                    wk = (n_kw[k, w] + beta) * (n_dk[d, k] + alpha) / (n_k[k] + vbeta)
                    acc = acc + wk
                    cum[k] = acc
                rng = rng + GAMMA
                u = _mix_double(rng) * acc
                knew = 0
                while knew < n_topics - 1 and cum[knew] <= u:
                    knew += 1
                z[t] = <int32_t>knew
                n_dk[d, knew] += 1
                n_kw[knew, w] += 1
                n_k[knew] += 1
    return int(rng)


def infer_sweeps(int32_t[::1] word_ids, int32_t[::1] z, int32_t[::1] n_doc,
                 double[:, ::1] phi, double alpha, int burn_in, int samples,
                 double[::1] theta_acc, state):
    """Re-sample one document's topics against a fixed topic-word matrix."""
    cdef Py_ssize_t n_tokens = word_ids.shape[0]
    cdef Py_ssize_t n_topics = n_doc.shape[0]
    cdef uint64_t rng = <uint64_t>(<unsigned long long>state)
    cdef double[::1] cum = np.empty(n_topics, dtype=np.float64)
    cdef Py_ssize_t sweep, t, k, knew, total
    cdef int32_t w, old
    cdef double acc, u

    total = burn_in + samples
    with nogil:
        for sweep in range(total):
            for t in range(n_tokens):
                w = word_ids[t]
                old = z[t]
                n_doc[old] -= 1
                acc = 0.0
                for k in range(n_topics):
                    acc = acc + phi[k, w] * (n_doc[k] + alpha)
                    cum[k] = acc
                rng = rng + GAMMA
                u = _mix_double(rng) * acc
                knew = 0
                while knew < n_topics - 1 and cum[knew] <= u:
                    knew += 1
                z[t] = <int32_t>knew
                n_doc[knew] += 1
            if sweep >= burn_in:
                for k in range(n_topics):
                    theta_acc[k] = theta_acc[k] + (n_doc[k] + alpha)
    return int(rng)
