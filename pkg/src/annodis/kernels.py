"""Hot numeric kernels for softmax training and inference.

Two interchangeable backends:

* ``numba`` (default when importable) — scalar loops compiled with ``@njit``.
* ``numpy`` — vectorized fallback, no compilation step.

Set ``ANNODIS_BACKEND=numpy`` to force the fallback. Both backends are
individually deterministic; the model-file byte-determinism contract holds
per backend (float summation order differs between the two).

Batches arrive in CSR form: ``indptr`` (N+1), ``indices`` / ``data``
(nnz), dense ``targets`` (N, C). Weights ``W`` (C, D) and bias ``b`` (C)
are updated in place.
"""

from __future__ import annotations

import math
import os

import numpy as np

LOG_CLAMP = 1e-12


def _sgd_epoch_loops(W, b, indptr, indices, data, targets, order, batch_size, lr, l2):
    """One epoch of mini-batch gradient descent; returns mean data loss (nats).

    Loss/gradient per batch: mean cross entropy plus (l2/2)*||W||^2; the
    l2 term enters the update as exact weight decay and is excluded from
    the returned diagnostic.
    """
    n = order.shape[0]
    C = W.shape[0]
    D = W.shape[1]
    total = 0.0
    probs = np.empty((batch_size, C))
    for start in range(0, n, batch_size):
        stop = min(start + batch_size, n)
        B = stop - start
        for bi in range(B):
            si = order[start + bi]
            lo = indptr[si]
            hi = indptr[si + 1]
            m = -1e300
            for c in range(C):
                z = b[c]
                for j in range(lo, hi):
                    z += W[c, indices[j]] * data[j]
                probs[bi, c] = z
                if z > m:
                    m = z
            s = 0.0
            for c in range(C):
                e = math.exp(probs[bi, c] - m)
                probs[bi, c] = e
                s += e
            for c in range(C):
                q = probs[bi, c] / s
                probs[bi, c] = q
                p = targets[si, c]
                if p > 0.0:
                    total -= p * math.log(q if q > LOG_CLAMP else LOG_CLAMP)
        if l2 > 0.0:
            decay = 1.0 - lr * l2
            for c in range(C):
                for d in range(D):
                    W[c, d] *= decay
        scale = lr / B
        for bi in range(B):
            si = order[start + bi]
            lo = indptr[si]
            hi = indptr[si + 1]
            for c in range(C):
                g = (probs[bi, c] - targets[si, c]) * scale
                for j in range(lo, hi):
                    W[c, indices[j]] -= g * data[j]
                b[c] -= g
    return total / n


def _forward_probs_loops(W, b, indptr, indices, data):
    """Softmax probabilities for every CSR row; max-subtracted for stability."""
    N = indptr.shape[0] - 1
    C = W.shape[0]
    out = np.empty((N, C))
    for i in range(N):
        lo = indptr[i]
        hi = indptr[i + 1]
        m = -1e300
        for c in range(C):
            z = b[c]
            for j in range(lo, hi):
                z += W[c, indices[j]] * data[j]
            out[i, c] = z
            if z > m:
                m = z
        s = 0.0
        for c in range(C):
            e = math.exp(out[i, c] - m)
            out[i, c] = e
            s += e
        for c in range(C):
            out[i, c] /= s
    return out


def _sgd_epoch_numpy(W, b, indptr, indices, data, targets, order, batch_size, lr, l2):
    """Vectorized-per-sample equivalent of :func:`_sgd_epoch_loops`."""
    n = order.shape[0]
    total = 0.0
    for start in range(0, n, batch_size):
        batch = order[start : start + batch_size]
        B = batch.shape[0]
        probs = np.empty((B, W.shape[0]))
        for bi, si in enumerate(batch):
            lo, hi = indptr[si], indptr[si + 1]
            logits = W[:, indices[lo:hi]] @ data[lo:hi] + b
            logits -= logits.max()
            e = np.exp(logits)
            q = e / e.sum()
            probs[bi] = q
            p = targets[si]
            total -= float(p @ np.log(np.maximum(q, LOG_CLAMP)))
        if l2 > 0.0:
            W *= 1.0 - lr * l2
        scale = lr / B
        for bi, si in enumerate(batch):
            lo, hi = indptr[si], indptr[si + 1]
            g = (probs[bi] - targets[si]) * scale
            W[:, indices[lo:hi]] -= np.outer(g, data[lo:hi])
            b -= g
    return total / n


def _forward_probs_numpy(W, b, indptr, indices, data):
    N = indptr.shape[0] - 1
    out = np.empty((N, W.shape[0]))
    for i in range(N):
        lo, hi = indptr[i], indptr[i + 1]
        logits = W[:, indices[lo:hi]] @ data[lo:hi] + b
        logits -= logits.max()
        e = np.exp(logits)
        out[i] = e / e.sum()
    return out


def _numpy_impls():
    return {"sgd_epoch": _sgd_epoch_numpy, "forward_probs": _forward_probs_numpy}


def _numba_impls():
    from numba import njit

    return {
        "sgd_epoch": njit(cache=True)(_sgd_epoch_loops),
        "forward_probs": njit(cache=True)(_forward_probs_loops),
    }


def implementations() -> dict[str, dict]:
    """All available backends, for the benchmark and parity tests."""
    impls = {"numpy": _numpy_impls()}
    try:
        impls["numba"] = _numba_impls()
    except ImportError:
        pass
    return impls


_requested = os.environ.get("ANNODIS_BACKEND", "").strip().lower()
if _requested == "numpy":
    BACKEND = "numpy"
    _active = _numpy_impls()
else:
    try:
        _active = _numba_impls()
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        _active = _numpy_impls()
        BACKEND = "numpy"

sgd_epoch = _active["sgd_epoch"]
forward_probs = _active["forward_probs"]
