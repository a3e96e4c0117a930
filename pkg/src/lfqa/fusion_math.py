"""Numeric kernels for relevance-biased attention and copy-mixture decoding.

Everything is float64.  Every function that produces a distribution
guarantees non-negative entries summing to 1 within 1e-9; inputs that
must already be distributions are validated to the same tolerance.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "softmax",
    "row_softmax",
    "build_bias_matrix",
    "biased_attention",
    "attention_context",
    "gen_gate",
    "evidence_to_vocab",
    "pointer_mixture",
    "decode_step",
]

_SUM_TOL = 1e-9


def _as_array(x, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _check_distribution(p: np.ndarray, name: str) -> None:
    if np.any(p < 0):
        raise ValueError(f"{name} has negative entries")
    if abs(float(p.sum()) - 1.0) > _SUM_TOL:
        raise ValueError(f"{name} does not sum to 1 (got {p.sum()!r})")


def softmax(v) -> np.ndarray:
    """Stable softmax of a non-empty vector (max-subtraction)."""
    arr = _as_array(v, "softmax input", 1)
    shifted = arr - arr.max()
    e = np.exp(shifted)
    return e / e.sum()


def row_softmax(m) -> np.ndarray:
    arr = _as_array(m, "row_softmax input", 2)
    shifted = arr - arr.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def build_bias_matrix(relevance, m: int) -> np.ndarray:
    """Tile one length-n relevance row into an (m, n) bias matrix."""
    row = _as_array(relevance, "relevance", 1)
    if m < 1:
        raise ValueError("m must be >= 1")
    return np.tile(row, (m, 1))


def biased_attention(queries, keys, bias) -> np.ndarray:
    """Row-stochastic softmax((Q K^T) / sqrt(d) + bias)."""
    q = _as_array(queries, "queries", 2)
    k = _as_array(keys, "keys", 2)
    b = _as_array(bias, "bias", 2)
    if q.shape[1] != k.shape[1]:
        raise ValueError("queries and keys must share the feature dimension")
    if b.shape != (q.shape[0], k.shape[0]):
        raise ValueError(
            f"bias must have shape {(q.shape[0], k.shape[0])}, got {b.shape}"
        )
    logits = q @ k.T / np.sqrt(q.shape[1]) + b
    return row_softmax(logits)


def attention_context(h_dec, h_enc) -> tuple[np.ndarray, np.ndarray]:
    """Unscaled cross-attention: A = softmax(h_dec h_enc^T), h_c = A h_enc."""
    d = _as_array(h_dec, "h_dec", 2)
    e = _as_array(h_enc, "h_enc", 2)
    if d.shape[1] != e.shape[1]:
        raise ValueError("h_dec and h_enc must share the feature dimension")
    attn = row_softmax(d @ e.T)
    return attn, attn @ e


def _as_weight_row(w, name: str, length: int) -> np.ndarray:
    arr = np.asarray(w, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[0] == 1:
        arr = arr[0]
    if arr.ndim != 1 or arr.shape[0] != length:
        raise ValueError(f"{name} must map {length} features to one logit")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def gen_gate(h_c, h_dec, w_c, w_g) -> float:
    """sigmoid(w_c . h_c + w_g . h_dec), a scalar in (0, 1)."""
    hc = _as_array(h_c, "h_c", 1)
    hd = _as_array(h_dec, "h_dec", 1)
    wc = _as_weight_row(w_c, "w_c", hc.shape[0])
    wg = _as_weight_row(w_g, "w_g", hd.shape[0])
    logit = float(wc @ hc + wg @ hd)
    if logit >= 0:
        return 1.0 / (1.0 + np.exp(-logit))
    z = np.exp(logit)
    return float(z / (1.0 + z))


def evidence_to_vocab(sentence_probs, token_map, vocab_size: int) -> np.ndarray:
    """Project sentence-level probabilities onto vocabulary ids.

    ``sentence_probs`` iterates (key, probability) pairs, or objects with
    passage_ref/sentence_index/normalized_prob attributes; ``token_map``
    maps each key to the vocab ids occurring in that sentence (repeats
    mean multiplicity).  A word appearing twice in a sentence receives
    twice that sentence's mass before the final renormalization.
    """
    if vocab_size < 1:
        raise ValueError("vocab_size must be >= 1")
    if not token_map:
        raise ValueError("token_map must be non-empty")
    out = np.zeros(vocab_size, dtype=np.float64)
    for item in sentence_probs:
        if hasattr(item, "passage_ref"):
            key = (item.passage_ref, item.sentence_index)
            prob = float(item.normalized_prob)
        else:
            key, prob = item
            prob = float(prob)
        if prob < 0:
            raise ValueError("sentence probabilities must be non-negative")
        for vid in token_map.get(key, ()):
            if not 0 <= vid < vocab_size:
                raise ValueError(f"vocab id {vid} out of range [0, {vocab_size})")
            out[vid] += prob
    mass = float(out.sum())
    if mass <= 0.0:
        raise ValueError("no probability mass reached the vocabulary")
    return out / mass


def pointer_mixture(p_gen: float, gen_dist, copy_dist) -> np.ndarray:
    """Convex combination p_gen * gen + (1 - p_gen) * copy.

    Both inputs must be distributions of equal length; p_gen outside
    [0, 1] is an error.  At p_gen in {0, 1} the corresponding input is
    returned exactly.
    """
    if not 0.0 <= p_gen <= 1.0:
        raise ValueError(f"p_gen must lie in [0, 1], got {p_gen!r}")
    g = _as_array(gen_dist, "gen_dist", 1)
    c = _as_array(copy_dist, "copy_dist", 1)
    if g.shape != c.shape:
        raise ValueError("gen_dist and copy_dist must have equal length")
    _check_distribution(g, "gen_dist")
    _check_distribution(c, "copy_dist")
    if p_gen == 1.0:
        return g.copy()
    if p_gen == 0.0:
        return c.copy()
    return p_gen * g + (1.0 - p_gen) * c


def decode_step(h_dec, h_enc, w_c, w_g, gen_dists, copy_dist) -> np.ndarray:
    """One toy decoding step over m positions.

    Computes cross-attention context vectors, a generation gate per
    position, and mixes each row of ``gen_dists`` (m x V) with the shared
    ``copy_dist`` (V).  Returns an (m, V) matrix of distributions.
    """
    gen = _as_array(gen_dists, "gen_dists", 2)
    _, h_c = attention_context(h_dec, h_enc)
    hd = _as_array(h_dec, "h_dec", 2)
    if gen.shape[0] != hd.shape[0]:
        raise ValueError("gen_dists must have one row per decoder position")
    out = np.empty_like(gen)
    for r in range(gen.shape[0]):
        p = gen_gate(h_c[r], hd[r], w_c, w_g)
        out[r] = pointer_mixture(p, gen[r], copy_dist)
    return out
