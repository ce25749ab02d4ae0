"""Batch evaluation kernels for coverage objectives.

The Monte-Carlo multilinear estimator evaluates the same coverage
function on thousands of sampled sets; that inner loop is the only hot
path in the package.  A numba-compiled kernel handles it when numba is
importable and DYNSUB_NO_NUMBA is unset; otherwise a vectorized numpy
fallback is used.  Both backends agree to ~1e-9 (summation order
differs), and each is bit-deterministic on its own.
"""

from __future__ import annotations

import os

import numpy as np

_USE_NUMBA = os.environ.get("DYNSUB_NO_NUMBA", "") not in ("1", "true", "yes")

if _USE_NUMBA:
    try:
        from numba import njit
    except ImportError:
        _USE_NUMBA = False

if _USE_NUMBA:

    @njit(cache=True)
    def _coverage_batch_numba(weights, cover, samples):  # pragma: no cover
        n_s = samples.shape[0]
        n_items = weights.shape[0]
        n_sup = samples.shape[1]
        out = np.empty(n_s, dtype=np.float64)
        for s in range(n_s):
            total = 0.0
            for u in range(n_items):
                hit = False
                for e in range(n_sup):
                    if samples[s, e] != 0 and cover[u, e] != 0:
                        hit = True
                        break
                if hit:
                    total += weights[u]
            out[s] = total
        return out


def _coverage_batch_numpy(weights, cover, samples):
    # (n_s, n_sup) @ (n_sup, n_items) -> hit counts
    covered = samples.astype(np.float64) @ cover.T.astype(np.float64) > 0
    return covered.astype(np.float64) @ weights


def backend_name() -> str:
    return "numba" if _USE_NUMBA else "numpy"


def coverage_batch_eval(weights, cover, samples):
    """Values of a weighted coverage function on a batch of sets.

    weights: (n_items,) float64; cover: (n_items, n_sup) uint8 incidence
    of universe items vs support elements; samples: (n_s, n_sup) uint8
    indicator rows.  Returns (n_s,) float64.
    """
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    cover = np.ascontiguousarray(cover, dtype=np.uint8)
    samples = np.ascontiguousarray(samples, dtype=np.uint8)
    if _USE_NUMBA:
        return _coverage_batch_numba(weights, cover, samples)
    return _coverage_batch_numpy(weights, cover, samples)
