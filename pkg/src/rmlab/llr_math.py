"""Extended-real LLR arithmetic.

All functions accept scalars or numpy arrays and broadcast elementwise.
Infinite LLRs are genuine ``np.inf`` values.
"""
from __future__ import annotations

import numpy as np


def soft_xor(a, b):
    """Exact soft XOR 2*atanh(tanh(a/2)*tanh(b/2)).

    Evaluated as sign(a)sign(b)min(|a|,|b|) plus a two-term log1p correction,
    which is stable for large magnitudes.  (+inf) is the identity and
    (+inf) soft-xor (-inf) is -inf.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    core = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore"):
        corr = np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    corr = np.where(np.isfinite(a) & np.isfinite(b), corr, 0.0)
    out = core + corr
    return out if out.ndim else float(out)


def soft_add(a, b, v):
    """a + (-1)^v b, with (+inf) + (-inf) taken as 0 (complete erasure)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        out = np.where(np.asarray(v, dtype=bool), a - b, a + b)
    out = np.where(np.isnan(out), 0.0, out)
    return out if out.ndim else float(out)


def lsigmoid(x):
    """Negative log-sigmoid ln(1 + exp(-x))."""
    out = np.logaddexp(0.0, -np.asarray(x, dtype=np.float64))
    return out if out.ndim else float(out)


def hard(llr) -> int:
    return int(llr < 0)


def hard_vec(llr) -> np.ndarray:
    return (np.asarray(llr) < 0).astype(np.uint8)


def signs(bits) -> np.ndarray:
    """(-1)^bits as float."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def analog_weight(x, llr):
    """Sum of |llr[i]| over positions where x[i] disagrees with hard(llr[i]).

    Reduces over the last axis; leading axes broadcast.
    """
    x = np.asarray(x)
    llr = np.asarray(llr, dtype=np.float64)
    if x.shape[-1] != llr.shape[-1]:
        raise ValueError(f"length mismatch: {x.shape[-1]} vs {llr.shape[-1]}")
    disagree = x != (llr < 0)
    out = np.sum(np.where(disagree, np.abs(llr), 0.0), axis=-1)
    return out if out.ndim else float(out)


def scl_cost(c, llr):
    """Path cost sum_i lsigmoid((-1)^c[i] * llr[i]) over the last axis."""
    c = np.asarray(c)
    llr = np.asarray(llr, dtype=np.float64)
    if c.shape[-1] != llr.shape[-1]:
        raise ValueError(f"length mismatch: {c.shape[-1]} vs {llr.shape[-1]}")
    out = np.sum(lsigmoid(signs(c) * llr), axis=-1)
    return out if np.ndim(out) else float(out)


def fht(x) -> np.ndarray:
    """Walsh-Hadamard transform over the last axis (natural order).

    y[j] = sum_i (-1)^popcount(i & j) x[i]; m butterfly stages of 2^m
    additions each.
    """
    y = np.array(x, dtype=np.float64)
    n = y.shape[-1]
    if n < 1 or n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    lead = y.shape[:-1]
    h = 1
    while h < n:
        y = y.reshape(*lead, n // (2 * h), 2, h)
        a = y[..., 0, :]
        b = y[..., 1, :]
        y = np.stack([a + b, a - b], axis=-2)
        h *= 2
    return y.reshape(*lead, n)
