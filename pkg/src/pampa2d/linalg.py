"""Small batched linear-algebra helpers for the per-DoF upwind assembly."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

PINV_RCOND = 1.0e-12
_THREAD_THRESHOLD = 4096


def batched_pinv(S, rcond=PINV_RCOND, workers=1):
    """Moore-Penrose pseudo-inverse of stacked 4x4 matrices.

    The sum of upwind matrices is rank-deficient on the contact subspace at
    (near-)rest states, so a plain solve is not an option; the SVD cutoff
    drops singular values below ``rcond`` times the largest one.  For large
    batches the work is split over ``workers`` threads; chunks are processed
    independently so the output does not depend on the thread count.
    """
    S = np.asarray(S)
    if workers > 1 and S.shape[0] >= _THREAD_THRESHOLD:
        chunks = np.array_split(S, workers)
        with ThreadPoolExecutor(workers) as ex:
            parts = list(
                ex.map(lambda c: np.linalg.pinv(c, rcond=rcond), chunks)
            )
        return np.concatenate(parts)
    return np.linalg.pinv(S, rcond=rcond)


def pinv_apply(S, b, rcond=PINV_RCOND, workers=1):
    """x = pinv(S) @ b for stacked matrices and right-hand sides.

    Rows with non-finite systems (states that left the invariant domain
    upstream) yield NaN results instead of raising, so the a-posteriori
    limiter can flag them.
    """
    bad = ~(
        np.isfinite(S).all(axis=(1, 2)) & np.isfinite(b).all(axis=1)
    )
    if bad.any():
        S = np.where(bad[:, None, None], np.eye(S.shape[-1]), S)
        b = np.where(bad[:, None], 0.0, b)
    P = batched_pinv(S, rcond=rcond, workers=workers)
    x = np.einsum("nij,nj->ni", P, b)
    if bad.any():
        x[bad] = np.nan
    return x
