"""Topic modeling: the learner's 25-dimensional feature space.

A collapsed Gibbs sampler fits the topic model; per-document topic
distributions (theta) become the coordinates every downstream kernel sees.
Sampling runs on the compiled kernel when available and on the numpy
fallback otherwise, with bit-identical results for a given seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from ._kernels import rng
from .corpus import Listing

DEFAULT_K = 25
DEFAULT_BETA = 0.01
DEFAULT_ITERATIONS = 1000
DEFAULT_MIN_DF = 2


@dataclass(frozen=True)
class TopicModel:
    k: int
    vocabulary: tuple[str, ...]
    topic_word: np.ndarray  # K x V, rows sum to 1
    alpha: float
    beta: float
    seed: int
    iterations: int

    def word_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.vocabulary)}


@dataclass(frozen=True)
class DocTopicVector:
    listing_id: str
    theta: np.ndarray


@dataclass(frozen=True)
class FitResult:
    model: TopicModel
    doc_topic: np.ndarray  # N x K thetas of the training documents


def default_alpha(k: int) -> float:
    return 50.0 / k


def prepare_docs(
    listings: Sequence[Listing],
    stopwords: frozenset[str] = frozenset(),
    min_df: int = DEFAULT_MIN_DF,
) -> list[list[str]]:
    """Stop-word removal plus a min document-frequency cut, applied before
    fitting. Choices are recorded in the run manifest."""
    kept = [[t for t in listing.tokens if t not in stopwords] for listing in listings]
    if min_df > 1:
        df: dict[str, int] = {}
        for doc in kept:
            for t in set(doc):
                df[t] = df.get(t, 0) + 1
        kept = [[t for t in doc if df[t] >= min_df] for doc in kept]
    return kept


def _encode(docs: Sequence[Sequence[str]]) -> tuple[tuple[str, ...], np.ndarray, np.ndarray, int]:
    vocabulary = tuple(sorted({t for doc in docs for t in doc}))
    if not vocabulary:
        raise ValueError("empty vocabulary: every document is empty")
    index = {w: i for i, w in enumerate(vocabulary)}
    doc_ids = []
    word_ids = []
    for d, doc in enumerate(docs):
        for t in doc:
            doc_ids.append(d)
            word_ids.append(index[t])
    return (
        vocabulary,
        np.asarray(doc_ids, dtype=np.int32),
        np.asarray(word_ids, dtype=np.int32),
        len(vocabulary),
    )


def _uniform_assignments(n_tokens: int, k: int, state: int) -> tuple[np.ndarray, int]:
    us, state = rng.doubles(state, n_tokens)
    z = (us * k).astype(np.int32)
    np.clip(z, 0, k - 1, out=z)
    return z, state


def fit_lda(
    docs: Sequence[Sequence[str]],
    k: int = DEFAULT_K,
    alpha: Optional[float] = None,
    beta: float = DEFAULT_BETA,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
) -> FitResult:
    """Fit by collapsed Gibbs sampling; deterministic for given inputs and seed."""
    if not docs:
        raise ValueError("cannot fit topic model on an empty document list")
    if k < 1:
        raise ValueError("k must be >= 1")
    if alpha is None:
        alpha = default_alpha(k)
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")

    vocabulary, doc_ids, word_ids, v = _encode(docs)
    n_docs = len(docs)
    n_tokens = word_ids.shape[0]

    state = rng.seed_state(seed)
    z, state = _uniform_assignments(n_tokens, k, state)

    n_dk = (
        np.bincount(doc_ids.astype(np.int64) * k + z, minlength=n_docs * k)
        .reshape(n_docs, k)
        .astype(np.int32)
    )
    n_kw = (
        np.bincount(z.astype(np.int64) * v + word_ids, minlength=k * v)
        .reshape(k, v)
        .astype(np.int32)
    )
    n_k = n_kw.sum(axis=1).astype(np.int32)

    _kernels.fit_sweeps(doc_ids, word_ids, z, n_dk, n_kw, n_k, alpha, beta, iterations, state)

    phi_numer = n_kw + beta
    topic_word = phi_numer / phi_numer.sum(axis=1, keepdims=True)
    theta_numer = n_dk + alpha
    doc_topic = theta_numer / theta_numer.sum(axis=1, keepdims=True)

    model = TopicModel(
        k=k,
        vocabulary=vocabulary,
        topic_word=topic_word,
        alpha=alpha,
        beta=beta,
        seed=seed,
        iterations=iterations,
    )
    return FitResult(model=model, doc_topic=doc_topic)


def infer_theta(
    model: TopicModel,
    doc: Sequence[str],
    burn_in: int = 50,
    samples: int = 50,
    seed: int = 0,
) -> np.ndarray:
    """Topic mixture for one document against the fixed topic-word matrix.

    Out-of-vocabulary tokens are ignored; an empty or fully-OOV document
    yields the uniform mixture.
    """
    index = model.word_index()
    word_ids = np.asarray([index[t] for t in doc if t in index], dtype=np.int32)
    k = model.k
    if word_ids.shape[0] == 0:
        return np.full(k, 1.0 / k)

    state = rng.seed_state(seed)
    z, state = _uniform_assignments(word_ids.shape[0], k, state)
    n_doc = np.bincount(z, minlength=k).astype(np.int32)
    theta_acc = np.zeros(k, dtype=np.float64)
    phi = np.ascontiguousarray(model.topic_word, dtype=np.float64)
    _kernels.infer_sweeps(word_ids, z, n_doc, phi, model.alpha, burn_in, samples, theta_acc, state)
    return theta_acc / theta_acc.sum()


def log_likelihood(model: TopicModel, docs: Sequence[Sequence[str]], thetas: np.ndarray) -> float:
    """Token log-likelihood under given document mixtures (OOV tokens skipped)."""
    index = model.word_index()
    total = 0.0
    for theta, doc in zip(thetas, docs):
        mix = theta @ model.topic_word
        for t in doc:
            wid = index.get(t)
            if wid is not None:
                total += float(np.log(mix[wid]))
    return total


def held_out_log_likelihood(
    model: TopicModel,
    docs: Sequence[Sequence[str]],
    burn_in: int = 50,
    samples: int = 50,
    seed: int = 0,
) -> float:
    thetas = np.stack([infer_theta(model, doc, burn_in, samples, seed) for doc in docs])
    return log_likelihood(model, docs, thetas)


# --- persistence -----------------------------------------------------------


def save_topic_model(model: TopicModel, path: str | Path) -> None:
    """One JSON header line, then the row-major float64 topic-word matrix."""
    header = {
        "k": model.k,
        "alpha": model.alpha,
        "beta": model.beta,
        "seed": model.seed,
        "iterations": model.iterations,
        "vocab_size": len(model.vocabulary),
        "vocabulary": list(model.vocabulary),
    }
    with Path(path).open("wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(np.ascontiguousarray(model.topic_word, dtype=np.float64).tobytes())


def load_topic_model(path: str | Path) -> TopicModel:
    with Path(path).open("rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        matrix = np.frombuffer(fh.read(), dtype=np.float64).reshape(
            header["k"], header["vocab_size"]
        )
    return TopicModel(
        k=header["k"],
        vocabulary=tuple(header["vocabulary"]),
        topic_word=matrix,
        alpha=header["alpha"],
        beta=header["beta"],
        seed=header["seed"],
        iterations=header["iterations"],
    )


def write_theta_csv(ids: Sequence[str], thetas: np.ndarray, path: str | Path) -> None:
    k = thetas.shape[1]
    lines = ["listing_id," + ",".join(f"theta_{i}" for i in range(k))]
    for listing_id, row in zip(ids, thetas):
        lines.append(listing_id + "," + ",".join(repr(float(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_theta_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    ids = []
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        ids.append(cells[0])
        rows.append([float(x) for x in cells[1:]])
    return ids, np.asarray(rows, dtype=np.float64)
