# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: hashed n-gram counting and SGD inner loops.

Every floating-point operation here must happen in the same order as in
pure.py; the extension is compiled with -ffp-contract=off so that no
multiply-add gets fused and both lanes produce bit-identical numbers.
"""

import numpy as np

from libc.math cimport exp, log1p
from libc.stdint cimport int64_t, uint64_t

from ..hashing import CHAR_DOMAIN, WORD_DOMAIN, fnv1a64

cdef uint64_t FNV_PRIME = 0x100000001B3
cdef uint64_t CHAR_SEED = <uint64_t>fnv1a64(CHAR_DOMAIN)
cdef uint64_t WORD_SEED = <uint64_t>fnv1a64(WORD_DOMAIN)


def ngram_bucket_counts(str text, int char_min, int char_max,
                        int word_min, int word_max, long long mask):
    """Bucketed counts of character and word n-grams, FNV-1a over UTF-8."""
    cdef bytes data = text.encode("utf-8")
    cdef const unsigned char* buf = data
    cdef Py_ssize_t n = len(text)
    offs_arr = np.empty(n + 1, dtype=np.int64)
    cdef int64_t[:] offs = offs_arr
    cdef Py_ssize_t i, j, o = 0
    cdef Py_UCS4 ch
    offs[0] = 0
    for i in range(n):
        ch = text[i]
        if ch < 0x80:
            o += 1
        elif ch < 0x800:
            o += 2
        elif ch < 0x10000:
            o += 3
        else:
            o += 4
        offs[i + 1] = o
    counts = {}
    cdef uint64_t h, umask = <uint64_t>mask
    cdef int k
    cdef object b
    for k in range(char_min, char_max + 1):
        for i in range(n - k + 1):
            h = CHAR_SEED
            for j in range(offs[i], offs[i + k]):
                h = (h ^ buf[j]) * FNV_PRIME
            b = <int64_t>(h & umask)
            counts[b] = counts.get(b, 0) + 1
    tokens = text.split()
    cdef Py_ssize_t m = len(tokens)
    cdef bytes gb
    cdef const unsigned char* gp
    cdef Py_ssize_t glen
    for k in range(word_min, word_max + 1):
        for i in range(m - k + 1):
            if k == 1:
                gb = (<str>tokens[i]).encode("utf-8")
            else:
                gb = (" ".join(tokens[i:i + k])).encode("utf-8")
            gp = gb
            glen = len(gb)
            h = WORD_SEED
            for j in range(glen):
                h = (h ^ gp[j]) * FNV_PRIME
            b = <int64_t>(h & umask)
            counts[b] = counts.get(b, 0) + 1
    return counts


def batch_margins(double[:] weights, double bias, int64_t[:] indices,
                  double[:] values, int64_t[:] offsets, double[:] out):
    """Fill out[i] with bias plus the sequential dot product of example i."""
    cdef Py_ssize_t i, j
    cdef double m
    for i in range(out.shape[0]):
        m = bias
        for j in range(offsets[i], offsets[i + 1]):
            m = m + weights[indices[j]] * values[j]
        out[i] = m


def sgd_epoch(double[:] weights, double bias, int64_t[:] indices,
              double[:] values, int64_t[:] offsets, double[:] labels,
              int64_t[:] order, int batch_size, double base_lr, double l2,
              long long step_start, long long total_steps,
              long long warmup_steps):
    """One epoch of mini-batch SGD for L2-regularized logistic regression.

    Same contract and operation order as pure.sgd_epoch: batch margins
    against pre-update weights, whole-vector decay, then per-example
    updates in batch order. Mutates ``weights``; returns (bias, loss sum).
    """
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t dim = weights.shape[0]
    margins_arr = np.empty(batch_size, dtype=np.float64)
    cdef double[:] margins = margins_arr
    cdef Py_ssize_t start = 0, bsz, bi, i, j, k
    cdef long long step = step_start
    cdef double lr, m, p, q, y, g, gsum, coef, factor, maxm, am
    cdef double loss = 0.0
    while start < n:
        bsz = min(batch_size, n - start)
        if step < warmup_steps:
            lr = base_lr * (step + 1) / warmup_steps
        else:
            lr = base_lr * (total_steps - step) / (total_steps - warmup_steps)
        for bi in range(bsz):
            i = order[start + bi]
            m = bias
            for j in range(offsets[i], offsets[i + 1]):
                m = m + weights[indices[j]] * values[j]
            margins[bi] = m
        factor = 1.0 - lr * l2
        for k in range(dim):
            weights[k] = weights[k] * factor
        gsum = 0.0
        for bi in range(bsz):
            i = order[start + bi]
            m = margins[bi]
            y = labels[i]
            if m >= 0.0:
                p = 1.0 / (1.0 + exp(-m))
            else:
                q = exp(m)
                p = q / (1.0 + q)
            maxm = m if m > 0.0 else 0.0
            am = -m if m > 0.0 else m
            loss += maxm - m * y + log1p(exp(am))
            g = (p - y) / bsz
            gsum = gsum + g
            coef = lr * g
            for j in range(offsets[i], offsets[i + 1]):
                weights[indices[j]] = weights[indices[j]] - coef * values[j]
        bias = bias - lr * gsum
        step += 1
        start += bsz
    return bias, loss
