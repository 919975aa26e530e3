"""Pure-Python reference kernels.

These implement the exact numeric contracts of the compiled lane: FNV-1a
hashing of UTF-8 bytes, sequential dot products in storage order, per-batch
weight decay followed by per-example updates, and the shared learning-rate
schedule. Keep the floating-point operation order in lockstep with
_ckernels.pyx; the parity test asserts bit-identical training results.
"""

from __future__ import annotations

import math

from ..hashing import CHAR_DOMAIN, FNV_PRIME, WORD_DOMAIN, fnv1a64

_M64 = (1 << 64) - 1
CHAR_SEED = fnv1a64(CHAR_DOMAIN)
WORD_SEED = fnv1a64(WORD_DOMAIN)


def ngram_bucket_counts(text, char_min, char_max, word_min, word_max, mask):
    """Bucketed counts of character n-grams (over the whole text, spaces
    included) and word n-grams (whitespace tokens joined by single spaces).

    Each gram is hashed with domain-seeded FNV-1a over its UTF-8 bytes and
    masked down to the table size. Returns {bucket: count}.
    """
    counts = {}
    get = counts.get
    data = text.encode("utf-8")
    offs = [0]
    o = 0
    for ch in text:
        c = ord(ch)
        o += 1 if c < 0x80 else 2 if c < 0x800 else 3 if c < 0x10000 else 4
        offs.append(o)
    n = len(text)
    prime = FNV_PRIME
    for k in range(char_min, char_max + 1):
        for i in range(n - k + 1):
            h = CHAR_SEED
            for j in range(offs[i], offs[i + k]):
                h = ((h ^ data[j]) * prime) & _M64
            b = h & mask
            counts[b] = get(b, 0) + 1
    tokens = text.split()
    m = len(tokens)
    for k in range(word_min, word_max + 1):
        for i in range(m - k + 1):
            gram = tokens[i] if k == 1 else " ".join(tokens[i : i + k])
            h = WORD_SEED
            for byte in gram.encode("utf-8"):
                h = ((h ^ byte) * prime) & _M64
            b = h & mask
            counts[b] = get(b, 0) + 1
    return counts


def batch_margins(weights, bias, indices, values, offsets, out):
    """Fill out[i] with bias plus the sequential dot product of example i."""
    item = weights.item
    idx = indices.tolist()
    val = values.tolist()
    offs = offsets.tolist()
    bias = float(bias)
    for i in range(len(out)):
        m = bias
        for j in range(offs[i], offs[i + 1]):
            m += item(idx[j]) * val[j]
        out[i] = m


def sgd_epoch(
    weights,
    bias,
    indices,
    values,
    offsets,
    labels,
    order,
    batch_size,
    base_lr,
    l2,
    step_start,
    total_steps,
    warmup_steps,
):
    """One epoch of mini-batch SGD for L2-regularized logistic regression.

    Per batch: margins are computed against the pre-update weights, the
    whole weight vector is decayed by (1 - lr*l2), then each example applies
    its gradient share in batch order. The learning rate ramps linearly over
    the warmup steps and decays linearly to the final step. Mutates
    ``weights`` in place; returns (new_bias, summed log loss).
    """
    exp = math.exp
    log1p = math.log1p
    item = weights.item
    idx = indices.tolist()
    val = values.tolist()
    offs = offsets.tolist()
    ys = labels.tolist()
    ordered = order.tolist()
    n = len(ordered)
    bias = float(bias)
    loss = 0.0
    step = step_start
    start = 0
    while start < n:
        bsz = min(batch_size, n - start)
        if step < warmup_steps:
            lr = base_lr * (step + 1) / warmup_steps
        else:
            lr = base_lr * (total_steps - step) / (total_steps - warmup_steps)
        batch = ordered[start : start + bsz]
        margins = []
        for i in batch:
            m = bias
            for j in range(offs[i], offs[i + 1]):
                m += item(idx[j]) * val[j]
            margins.append(m)
        weights *= 1.0 - lr * l2
        gsum = 0.0
        for bi in range(bsz):
            i = batch[bi]
            m = margins[bi]
            y = ys[i]
            if m >= 0.0:
                p = 1.0 / (1.0 + exp(-m))
            else:
                q = exp(m)
                p = q / (1.0 + q)
            maxm = m if m > 0.0 else 0.0
            am = -m if m > 0.0 else m
            loss += maxm - m * y + log1p(exp(am))
            g = (p - y) / bsz
            gsum += g
            coef = lr * g
            s, jend = offs[i], offs[i + 1]
            # indices within one example are unique, so the vectorized
            # scatter matches a sequential elementwise update bit for bit
            weights[indices[s:jend]] -= coef * values[s:jend]
        bias -= lr * gsum
        step += 1
        start += bsz
    return bias, loss
