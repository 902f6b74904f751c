"""Graph-based label spreading over document representation vectors.

Seeds enter as one-hot rows of an N x 2 matrix (column 0 positive, column 1
negative). Scores diffuse over a similarity graph via

    F <- alpha * S @ F + (1 - alpha) * Y,   F0 = Y

where S is the symmetrically normalized affinity matrix. With alpha < 1 the
iteration contracts to the unique fixpoint (1 - alpha) (I - alpha S)^-1 Y,
which ``closed_form_spread`` computes directly for cross-checking.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

DEFAULT_ALPHA = 0.2
DEFAULT_GAMMA = 20.0
DEFAULT_NEIGHBORS = 7
DEFAULT_MAX_ITER = 1000
DEFAULT_TOL = 1e-6

METHOD_RBF = "rbf"
METHOD_KNN = "knn"


@dataclass(frozen=True)
class SpreadResult:
    scores: np.ndarray  # N x 2 diffusion scores
    labels: np.ndarray  # N ints: 0 positive, 1 negative (ties negative)
    iterations: int
    converged: bool
    residual: float

    @property
    def positive_count(self) -> int:
        return int((self.labels == 0).sum())

    @property
    def negative_count(self) -> int:
        return int((self.labels == 1).sum())


@dataclass(frozen=True)
class PrecisionSummary:
    assigned: int
    confirmed: int
    percent: Optional[str]  # 2 decimals, truncated; None when nothing assigned


def _pairwise_sq_dists(points: np.ndarray) -> np.ndarray:
    sq = np.sum(points * points, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def rbf_affinity(points: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """Dense RBF graph: w_ij = exp(-gamma * ||x_i - x_j||^2), zero diagonal."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    w = np.exp(-gamma * _pairwise_sq_dists(points))
    np.fill_diagonal(w, 0.0)
    return w


def knn_affinity(points: np.ndarray, n_neighbors: int = DEFAULT_NEIGHBORS) -> np.ndarray:
    """Binary graph connecting each point to its n nearest neighbors.

    Distance ties resolve toward the lower index; the directed graph is
    symmetrized by union, so w_ij = 1 when either endpoint selected the other.
    """
    n = points.shape[0]
    if not 1 <= n_neighbors < n:
        raise ValueError(f"n_neighbors must be in [1, {n - 1}]")
    d2 = _pairwise_sq_dists(points)
    np.fill_diagonal(d2, np.inf)
    w = np.zeros((n, n), dtype=np.float64)
    # stable argsort keeps equal distances in index order
    order = np.argsort(d2, axis=1, kind="stable")
    rows = np.repeat(np.arange(n), n_neighbors)
    w[rows, order[:, :n_neighbors].ravel()] = 1.0
    return np.maximum(w, w.T)


def symmetric_normalize(w: np.ndarray) -> np.ndarray:
    """S = D^(-1/2) W D^(-1/2); rows of isolated nodes stay zero."""
    degrees = w.sum(axis=1)
    inv_sqrt = np.where(degrees > 0, 1.0 / np.sqrt(np.where(degrees > 0, degrees, 1.0)), 0.0)
    return w * inv_sqrt[:, None] * inv_sqrt[None, :]


def label_spread(
    s: np.ndarray,
    y: np.ndarray,
    alpha: float = DEFAULT_ALPHA,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> SpreadResult:
    """Iterate the diffusion to (approximate) fixpoint.

    Stops when the max absolute score change over one sweep drops to tol or
    below; ``converged`` is False when max_iter ran out first.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    f = y.astype(np.float64).copy()
    residual = np.inf
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        f_next = alpha * (s @ f) + (1.0 - alpha) * y
        residual = float(np.abs(f_next - f).max())
        f = f_next
        if residual <= tol:
            converged = True
            break
    return SpreadResult(
        scores=f,
        labels=hard_labels(f),
        iterations=iterations,
        converged=converged,
        residual=residual,
    )


def closed_form_spread(s: np.ndarray, y: np.ndarray, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """Exact fixpoint (1 - alpha) (I - alpha S)^-1 Y via a linear solve."""
    n = s.shape[0]
    return np.linalg.solve(np.eye(n) - alpha * s, (1.0 - alpha) * y)


def hard_labels(scores: np.ndarray) -> np.ndarray:
    """Column with the larger score wins; exact ties fall to negative."""
    return np.where(scores[:, 0] > scores[:, 1], 0, 1).astype(np.int64)


def spread_labels(
    points: np.ndarray,
    y: np.ndarray,
    method: str = METHOD_RBF,
    alpha: float = DEFAULT_ALPHA,
    gamma: float = DEFAULT_GAMMA,
    n_neighbors: int = DEFAULT_NEIGHBORS,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> SpreadResult:
    """Build the affinity graph for ``method``, normalize, and diffuse."""
    if method == METHOD_RBF:
        w = rbf_affinity(points, gamma=gamma)
    elif method == METHOD_KNN:
        w = knn_affinity(points, n_neighbors=n_neighbors)
    else:
        raise ValueError(f"unknown affinity method: {method!r}")
    return label_spread(symmetric_normalize(w), y, alpha=alpha, max_iter=max_iter, tol=tol)


def truncated_percent(numerator: int, denominator: int) -> str:
    """numerator/denominator as a percent with 2 decimals, truncated not rounded."""
    basis_points = (numerator * 10000) // denominator
    return f"{basis_points // 100}.{basis_points % 100:02d}"


def evaluate_precision(assigned: int, confirmed: int) -> PrecisionSummary:
    if confirmed > assigned:
        raise ValueError("confirmed cannot exceed assigned")
    if assigned == 0:
        return PrecisionSummary(assigned=0, confirmed=confirmed, percent=None)
    return PrecisionSummary(
        assigned=assigned,
        confirmed=confirmed,
        percent=truncated_percent(confirmed, assigned),
    )


def top_terms(
    token_seqs: Iterable[Sequence[str]],
    stopwords: frozenset[str] = frozenset(),
    n: int = 20,
) -> list[tuple[str, int]]:
    """Most frequent tokens across the sequences; purely numeric tokens and
    stopwords are dropped. Count ties order lexicographically."""
    counts: Counter[str] = Counter()
    for tokens in token_seqs:
        for token in tokens:
            if token in stopwords or token.isdigit():
                continue
            counts[token] += 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:n]
