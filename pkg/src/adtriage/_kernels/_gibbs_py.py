"""Pure-Python (numpy) collapsed-Gibbs sweep kernels.

Fallback backend: same contract and same random stream as the compiled
kernel, so results are bit-identical across backends. Per-token work is
vectorized over topics; the token loop itself stays sequential because
every draw conditions on the counts left by the previous one.
"""

from __future__ import annotations

import numpy as np

from .rng import doubles


def fit_sweeps(doc_ids, word_ids, z, n_dk, n_kw, n_k, alpha, beta, sweeps, state):
    """Run full collapsed-Gibbs sweeps over the token stream.

    All count tables and the assignment vector are updated in place.
    Returns the advanced RNG state.
    """
    n_tokens = word_ids.shape[0]
    n_topics = n_k.shape[0]
    vbeta = n_kw.shape[1] * beta
    for _ in range(sweeps):
        us, state = doubles(state, n_tokens)
        for t in range(n_tokens):
            d = doc_ids[t]
            w = word_ids[t]
            old = z[t]
            n_dk[d, old] -= 1
            n_kw[old, w] -= 1
            n_k[old] -= 1
            weights = (n_kw[:, w] + beta) * (n_dk[d] + alpha) / (n_k + vbeta)
            cum = np.cumsum(weights)
            u = us[t] * cum[-1]
            k = int(np.searchsorted(cum, u, side="right"))
            if k >= n_topics:
                k = n_topics - 1
            z[t] = k
            n_dk[d, k] += 1
            n_kw[k, w] += 1
            n_k[k] += 1
    return state


def infer_sweeps(word_ids, z, n_doc, phi, alpha, burn_in, samples, theta_acc, state):
    """Re-sample one document's topics against a fixed topic-word matrix.

    ``n_doc`` holds the document's per-topic counts and is updated in place;
    ``theta_acc`` accumulates the unnormalized (count + alpha) vector after
    each post-burn-in sweep. Returns the advanced RNG state.
    """
    n_tokens = word_ids.shape[0]
    n_topics = n_doc.shape[0]
    for sweep in range(burn_in + samples):
        us, state = doubles(state, n_tokens)
        for t in range(n_tokens):
            w = word_ids[t]
            old = z[t]
            n_doc[old] -= 1
            weights = phi[:, w] * (n_doc + alpha)
            cum = np.cumsum(weights)
            u = us[t] * cum[-1]
            k = int(np.searchsorted(cum, u, side="right"))
            if k >= n_topics:
                k = n_topics - 1
            z[t] = k
            n_doc[k] += 1
        if sweep >= burn_in:
            theta_acc += n_doc + alpha
    return state
