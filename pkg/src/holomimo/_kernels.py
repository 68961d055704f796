"""Weighted plane-wave sums over antenna position differences.

Both the coupling and correlation integrals reduce to sums of the form
sum_k w_k exp(i (kx_k dx + ky_k dy)) over all pairwise coordinate differences
(dx, dy).  On gridded arrays the number of unique differences per axis is tiny
compared to N^2, so the sum is evaluated on the unique-difference product set
with one small matrix product per node chunk and then scattered back.
"""

from __future__ import annotations

import numpy as np

# Differences are grouped after rounding to this many decimals (wavelengths).
_ROUND = 9


def _unique_differences(coord: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    diff = np.round(coord[:, None] - coord[None, :], _ROUND)
    uniq, inverse = np.unique(diff.ravel(), return_inverse=True)
    return uniq, inverse.reshape(diff.shape)


def phase_kernel(positions: np.ndarray, kx: np.ndarray, ky: np.ndarray,
                 weights: np.ndarray, chunk: int = 32768) -> np.ndarray:
    """N x N matrix M[n, m] = sum_k w_k exp(i k . (r_n - r_m)) for planar r."""
    ux, ix = _unique_differences(positions[:, 0])
    uy, iy = _unique_differences(positions[:, 1])
    table = np.zeros((ux.size, uy.size), dtype=complex)
    kx = np.asarray(kx, dtype=float).ravel()
    ky = np.asarray(ky, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    for start in range(0, kx.size, chunk):
        sl = slice(start, start + chunk)
        ex = np.exp(1j * np.outer(kx[sl], ux))
        ey = np.exp(1j * np.outer(ky[sl], uy))
        table += (ex * weights[sl, None]).T @ ey
    return table[ix, iy]
