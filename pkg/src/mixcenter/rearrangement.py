"""Rearrangement engine: permute quantile columns toward constant row sums.

Couplings that the theory only proves to exist are realized here
approximately: each marginal is discretized into m equiprobable atoms at
mid-quantile levels, stacked as columns, and the columns are repeatedly
re-sorted antitonically against the sum of the others. Each column stays a
permutation of its discretization, so marginals are preserved exactly at
the discretized level while the row-sum spread shrinks toward the
discretization floor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def discretize(model, m: int) -> np.ndarray:
    """m equiprobable atoms of ``model`` at mid-quantile levels (j-1/2)/m."""
    if m < 2:
        raise DomainError("need m >= 2")
    levels = (np.arange(1, m + 1) - 0.5) / m
    q = model.quantile(levels)
    return np.asarray(q, dtype=float)


def default_spread_tol(matrix: np.ndarray) -> float:
    """Attainable discretization floor: twice the summed column ranges over m."""
    m = matrix.shape[0]
    ranges = matrix.max(axis=0) - matrix.min(axis=0)
    return 2.0 * float(ranges.sum()) / m


@dataclass
class FlattenResult:
    matrix: np.ndarray
    spread: float
    sweep_spreads: list
    converged: bool

    def row_sums(self):
        return self.matrix.sum(axis=1)


def ra_flatten(matrix, max_sweeps: int = 100, spread_tol: float = None,
               rng=None) -> FlattenResult:
    """Iteratively re-sort each column antitonically to the rest of the row.

    Stops when the row-sum spread (max - min) drops to ``spread_tol``
    (default: the discretization floor of the matrix) or stops improving.
    Ties in the rest-sums are broken by original row index (stable sort)
    for cross-platform determinism. The matrix with the best spread seen
    is returned, so reported sweep spreads are non-increasing. An optional
    ``rng`` applies independent initial shuffles per column; the identity
    start can be a poor local optimum.
    """
    cur = np.array(matrix, dtype=float, copy=True)
    if cur.ndim != 2:
        raise DomainError("matrix must be two-dimensional")
    m, n = cur.shape
    if n == 1:
        return FlattenResult(cur, 0.0, [0.0], True)
    if spread_tol is None:
        spread_tol = default_spread_tol(cur)
    if rng is not None:
        for j in range(n):
            cur[:, j] = cur[rng.permutation(m), j]

    sums = cur.sum(axis=1)
    best = cur.copy()
    best_spread = float(sums.max() - sums.min())
    sweep_spreads = [best_spread]
    stall = 0
    for _ in range(max_sweeps):
        if best_spread <= spread_tol:
            break
        for j in range(n):
            rest = sums - cur[:, j]
            order = np.argsort(rest, kind="stable")
            newcol = np.empty(m)
            newcol[order] = np.sort(cur[:, j])[::-1]
            sums += newcol - cur[:, j]
            cur[:, j] = newcol
        spread = float(sums.max() - sums.min())
        if spread < best_spread - 1e-15:
            best, best_spread, stall = cur.copy(), spread, 0
        else:
            stall += 1
        sweep_spreads.append(best_spread)
        if stall >= 2:
            break
    return FlattenResult(best, best_spread, sweep_spreads, best_spread <= spread_tol)


def sample_rows(matrix: np.ndarray, count: int, rng) -> np.ndarray:
    """Uniform random rows with uniform random coordinate permutations.

    Each coordinate of the output is distributed as the discretized
    marginal of its column; row sums inherit the flatten spread.
    """
    m, n = matrix.shape
    rows = matrix[rng.integers(0, m, size=count)]
    perm = rng.permuted(np.broadcast_to(np.arange(n), (count, n)).copy(), axis=1)
    return np.take_along_axis(rows, perm, axis=1)
