"""Unsupervised filtering and the 2-D sanity projection.

Listings whose 15-bit signal vector is all zero are dropped before any
learning. The projection (exact t-SNE + 2-means purity) is diagnostic
only: it replicates the inside/outside separation check, while downstream
learning always runs on topic vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .features import FeatureVector

TSNE_MAX_POINTS = 5000
TSNE_DEFAULT_PERPLEXITY = 30.0
TSNE_DEFAULT_ITERATIONS = 1000
TSNE_EXAGGERATION = 12.0
TSNE_EXAGGERATION_ITERS = 250


@dataclass(frozen=True)
class FilterReport:
    input_count: int
    kept_ids: tuple[str, ...]
    dropped_count: int


@dataclass(frozen=True)
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia_history: tuple[float, ...]


@dataclass(frozen=True)
class TsneResult:
    coords: np.ndarray
    kl_history: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class ProjectionResult:
    ids: tuple[str, ...]
    coords: np.ndarray
    kmeans_assignment: np.ndarray
    purity: float


def filter_corpus(vectors: Sequence[FeatureVector]) -> FilterReport:
    """Keep exactly the vectors with at least one bit set, in stable order."""
    kept = tuple(v.listing_id for v in vectors if v.any_set())
    return FilterReport(
        input_count=len(vectors),
        kept_ids=kept,
        dropped_count=len(vectors) - len(kept),
    )


def _kmeans_pp_init(points: np.ndarray, k: int, gen: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    centroids[0] = points[int(gen.integers(n))]
    for i in range(1, k):
        dist_sq = np.min(
            ((points[:, None, :] - centroids[None, :i, :]) ** 2).sum(axis=2), axis=1
        )
        total = float(dist_sq.sum())
        if total <= 0.0:
            idx = int(np.argmax(dist_sq))
        else:
            idx = int(gen.choice(n, p=dist_sq / total))
        centroids[i] = points[idx]
    return centroids


def kmeans(points: np.ndarray, k: int, seed: int = 0, max_iter: int = 300) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding.

    Terminates on an assignment fixpoint or after ``max_iter`` rounds;
    the recorded within-cluster sum of squares never increases.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k} n={n}")
    gen = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(points, k, gen)

    assignments = np.full(n, -1, dtype=np.int64)
    history: list[float] = []
    for _ in range(max_iter):
        dists = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignments = np.argmin(dists, axis=1)
        history.append(float(dists[np.arange(n), new_assignments].sum()))
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for j in range(k):
            members = points[assignments == j]
            if members.shape[0] > 0:
                # empty clusters keep their previous centroid
                centroids[j] = members.mean(axis=0)
    return KMeansResult(
        assignments=assignments, centroids=centroids, inertia_history=tuple(history)
    )


def matching_purity(assignments: np.ndarray, labels: np.ndarray) -> float:
    """Agreement fraction under the best cluster-to-label matching (2 clusters:
    the better of the two permutations)."""
    assignments = np.asarray(assignments)
    labels = np.asarray(labels)
    values = np.unique(labels)
    if len(values) > 2 or assignments.max(initial=0) > 1:
        raise ValueError("matching_purity is defined for the 2-cluster check")
    binary = (labels == values[-1]).astype(np.int64)
    direct = float(np.mean(assignments == binary))
    return max(direct, 1.0 - direct)


def _conditional_probabilities(dist_sq: np.ndarray, perplexity: float) -> np.ndarray:
    """Per-row precisions found by binary search so each conditional
    distribution hits the target perplexity."""
    n = dist_sq.shape[0]
    target = np.log(perplexity)
    p = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        others = np.concatenate([np.arange(i), np.arange(i + 1, n)])
        d = dist_sq[i, others]
        beta, beta_min, beta_max = 1.0, -np.inf, np.inf
        row = np.exp(-d * beta)
        for _ in range(50):
            total = row.sum()
            if total <= 0.0:
                total = np.finfo(np.float64).tiny
            entropy = np.log(total) + beta * float((d * row).sum()) / total
            diff = entropy - target
            if abs(diff) < 1e-5:
                break
            if diff > 0:
                beta_min = beta
                beta = beta * 2.0 if np.isinf(beta_max) else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if np.isinf(beta_min) else (beta + beta_min) / 2.0
            row = np.exp(-d * beta)
        total = row.sum()
        if total <= 0.0:
            row = np.ones_like(row)
            total = row.sum()
        p[i, others] = row / total
    return p


def _pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    sq = (x * x).sum(axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(p * np.log(p / q)))


def tsne_project(
    points: np.ndarray,
    perplexity: float = TSNE_DEFAULT_PERPLEXITY,
    iterations: int = TSNE_DEFAULT_ITERATIONS,
    seed: int = 0,
    learning_rate: float = 200.0,
) -> TsneResult:
    """Exact (dense) t-SNE to two dimensions with early exaggeration.

    KL(P||Q) against the unexaggerated P is recorded every 50 iterations.
    Capped at ``TSNE_MAX_POINTS`` points; perplexity must be below n/3.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if n > TSNE_MAX_POINTS:
        raise ValueError(f"exact projection capped at {TSNE_MAX_POINTS} points, got {n}")
    if n < 2:
        raise ValueError("need at least two points")
    if not 0 < perplexity < n / 3:
        raise ValueError(f"perplexity must be in (0, n/3), got {perplexity} for n={n}")

    cond = _conditional_probabilities(_pairwise_sq_dists(points), perplexity)
    p = (cond + cond.T) / (2.0 * n)
    np.maximum(p, 1e-12, out=p)

    gen = np.random.default_rng(seed)
    y = gen.standard_normal((n, 2)) * 1e-4
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    kl_history: list[tuple[int, float]] = []

    for it in range(1, iterations + 1):
        exaggerating = it <= TSNE_EXAGGERATION_ITERS
        p_eff = p * TSNE_EXAGGERATION if exaggerating else p
        num = 1.0 / (1.0 + _pairwise_sq_dists(y))
        np.fill_diagonal(num, 0.0)
        q = num / num.sum()
        np.maximum(q, 1e-12, out=q)

        a = (p_eff - q) * num
        grad = 4.0 * (a.sum(axis=1)[:, None] * y - a @ y)

        momentum = 0.5 if exaggerating else 0.8
        same_sign = np.sign(grad) == np.sign(velocity)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        velocity = momentum * velocity - learning_rate * (gains * grad)
        y = y + velocity
        y -= y.mean(axis=0)

        if it % 50 == 0 or it == iterations:
            kl_history.append((it, _kl_divergence(p, q)))

    return TsneResult(coords=y, kl_history=tuple(kl_history))


def project_with_clusters(
    ids: Sequence[str],
    points: np.ndarray,
    membership: np.ndarray,
    perplexity: float = TSNE_DEFAULT_PERPLEXITY,
    iterations: int = TSNE_DEFAULT_ITERATIONS,
    seed: int = 0,
) -> ProjectionResult:
    """Project, 2-means the embedding, and score purity against a known
    inside/outside membership flag."""
    result = tsne_project(points, perplexity=perplexity, iterations=iterations, seed=seed)
    km = kmeans(result.coords, k=2, seed=seed)
    purity = matching_purity(km.assignments, np.asarray(membership).astype(np.int64))
    return ProjectionResult(
        ids=tuple(ids),
        coords=result.coords,
        kmeans_assignment=km.assignments,
        purity=purity,
    )
