"""Subtree attention network: encodes normalized subtrees, scores each with
a sigmoid attention weight, and predicts submission correctness.

The encoder is mean-of-embeddings followed by one tanh dense layer. Pooling
is the attention-weighted mean of subtree encodings; the classifier is a
single logistic unit. Everything is trained end-to-end by mini-batch
gradient descent with hand-derived gradients (finite-difference checked in
the test suite).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import model_io

OOV_TOKEN = "<OOV>"
PLACEHOLDER_TOKENS = ("VAR", "CALL", "TYPE", "NUM", "STR")


def _sigmoid(x):
    return np.where(x >= 0, 1.0 / (1.0 + np.exp(-x)), np.exp(x) / (1.0 + np.exp(x)))


@dataclass
class SannHyperparams:
    d_emb: int = 32
    d_enc: int = 32
    learning_rate: float = 0.5
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0

    def to_dict(self):
        return {
            "d_emb": self.d_emb,
            "d_enc": self.d_enc,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }


@dataclass
class SannModel:
    vocab: dict[str, int]
    params: dict[str, np.ndarray]  # E, W1, b1, u, c, w, b2
    hyperparams: SannHyperparams
    loss_trace: list[float] = field(default_factory=list)

    def token_ids(self, tokens) -> np.ndarray:
        oov = self.vocab[OOV_TOKEN]
        return np.array([self.vocab.get(t, oov) for t in tokens], dtype=np.int64)

    def save(self, path):
        model_io.save_artifact(
            path,
            kind="sann",
            meta={"hyperparams": self.hyperparams.to_dict(),
                  "loss_trace": [float(v) for v in self.loss_trace]},
            tensors=self.params,
            vocab=self.vocab,
        )

    @classmethod
    def load(cls, path):
        meta, tensors, vocab = model_io.load_artifact(path, expect_kind="sann")
        hp = SannHyperparams(**meta["hyperparams"])
        return cls(vocab=vocab, params=tensors, hyperparams=hp,
                   loss_trace=list(meta.get("loss_trace", [])))


@dataclass(frozen=True)
class ScoredSubtree:
    subtree: object  # NormalizedSubtree
    encoding: np.ndarray
    attention: float


def build_vocab(token_sequences) -> dict[str, int]:
    seen = set()
    for seq in token_sequences:
        seen.update(seq)
    seen.update(PLACEHOLDER_TOKENS)
    vocab = {OOV_TOKEN: 0}
    for tok in sorted(seen):
        vocab[tok] = len(vocab)
    return vocab


def init_params(vocab_size: int, hp: SannHyperparams, rng: np.random.Generator):
    scale = 0.1
    return {
        "E": rng.normal(0.0, scale, (vocab_size, hp.d_emb)),
        "W1": rng.normal(0.0, scale, (hp.d_enc, hp.d_emb)),
        "b1": np.zeros(hp.d_enc),
        "u": rng.normal(0.0, scale, hp.d_enc),
        "c": np.zeros(1),
        "w": rng.normal(0.0, scale, hp.d_enc),
        "b2": np.zeros(1),
    }


def encode_subtree(model: SannModel, tokens) -> np.ndarray:
    """Fixed-length encoding: tanh(W1 @ mean-embedding + b1)."""
    tokens = list(tokens)
    if not tokens:
        raise ValueError("empty token list")
    ids = model.token_ids(tokens)
    m = model.params["E"][ids].mean(axis=0)
    return np.tanh(model.params["W1"] @ m + model.params["b1"])


def attention_weight(model: SannModel, encoding: np.ndarray) -> float:
    """Per-subtree sigmoid importance; independent across subtrees."""
    u = model.params["u"]
    if encoding.shape != u.shape:
        raise ValueError(f"encoding dimension {encoding.shape} != {u.shape}")
    return float(_sigmoid(u @ encoding + model.params["c"][0]))


def predict_correctness(model: SannModel, subtrees) -> tuple[float, list[ScoredSubtree]]:
    """Probability the submission is correct, plus per-subtree scores.

    Pools encodings by attention-weighted mean, so the result is invariant
    to subtree order.
    """
    subtrees = list(subtrees)
    if not subtrees:
        raise ValueError("empty subtree list")
    scored = []
    for st in subtrees:
        enc = encode_subtree(model, st.tokens)
        scored.append(ScoredSubtree(subtree=st, encoding=enc, attention=attention_weight(model, enc)))
    att = np.array([s.attention for s in scored])
    encs = np.stack([s.encoding for s in scored])
    pooled = (att[:, None] * encs).sum(axis=0) / att.sum()
    logit = model.params["w"] @ pooled + model.params["b2"][0]
    return float(_sigmoid(logit)), scored


def high_attention_subtrees(model: SannModel, subtrees, threshold: float = 0.5) -> list[ScoredSubtree]:
    """Subtrees at or above the attention threshold, in source order.

    Falls back to the single highest-attention subtree when none pass, so
    downstream KC mapping never sees an empty set.
    """
    if not (0.0 < threshold < 1.0):
        raise ValueError("threshold must be in (0, 1)")
    _, scored = predict_correctness(model, subtrees)
    passing = [s for s in scored if s.attention >= threshold]
    if not passing:
        passing = [max(scored, key=lambda s: s.attention)]
    return passing


# --- training --------------------------------------------------------------


def _forward_backward(params, batch):
    """Mean BCE loss over the batch and gradients for every parameter.

    batch: list of (list_of_token_id_arrays, label). Gradients derived by
    hand through pooling, attention, encoder, and embedding lookup.
    """
    grads = {k: np.zeros_like(v) for k, v in params.items()}
    E, W1, b1, u, c, w, b2 = (
        params["E"], params["W1"], params["b1"], params["u"],
        params["c"], params["w"], params["b2"],
    )
    total_loss = 0.0
    B = len(batch)
    for id_seqs, label in batch:
        means = np.stack([E[ids].mean(axis=0) for ids in id_seqs])  # (S, d_emb)
        z = means @ W1.T + b1  # (S, d_enc)
        h = np.tanh(z)
        logits_a = h @ u + c[0]  # (S,)
        a = _sigmoid(logits_a)
        S_sum = a.sum()
        p = (a[:, None] * h).sum(axis=0) / S_sum
        y_logit = w @ p + b2[0]
        q = float(_sigmoid(y_logit))
        y = 1.0 if label else 0.0
        eps = 1e-12
        total_loss += -(y * np.log(q + eps) + (1 - y) * np.log(1 - q + eps))

        dlogit = (q - y) / B
        grads["w"] += dlogit * p
        grads["b2"][0] += dlogit
        dp = dlogit * w
        da = (h - p) @ dp / S_sum  # (S,)
        dlogits_a = da * a * (1 - a)
        grads["u"] += h.T @ dlogits_a
        grads["c"][0] += dlogits_a.sum()
        dh = (a[:, None] / S_sum) * dp[None, :] + np.outer(dlogits_a, u)
        dz = dh * (1 - h * h)
        grads["W1"] += dz.T @ means
        grads["b1"] += dz.sum(axis=0)
        dmeans = dz @ W1  # (S, d_emb)
        for i, ids in enumerate(id_seqs):
            np.add.at(grads["E"], ids, dmeans[i] / len(ids))
    return total_loss / B, grads


def train_sann(corpus, hp: SannHyperparams | None = None, seed: int | None = None):
    """Train on (token-sequence-set, is_correct) pairs.

    Returns the trained SannModel; its loss_trace holds the mean epoch loss.
    Deterministic for a fixed (corpus, hp, seed).
    """
    hp = hp or SannHyperparams()
    if seed is None:
        seed = hp.seed
    labels = {bool(lbl) for _, lbl in corpus}
    if labels != {True, False}:
        raise ValueError("training corpus must contain both labels")

    sequences = [tuple(st.tokens) if hasattr(st, "tokens") else tuple(st)
                 for seqs, _ in corpus for st in seqs]
    vocab = build_vocab(sequences)
    rng = np.random.default_rng(np.random.PCG64(seed))
    params = init_params(len(vocab), hp, rng)
    oov = vocab[OOV_TOKEN]

    def ids_of(st):
        toks = st.tokens if hasattr(st, "tokens") else st
        return np.array([vocab.get(t, oov) for t in toks], dtype=np.int64)

    data = [([ids_of(st) for st in seqs], bool(lbl)) for seqs, lbl in corpus]

    trace = []
    n = len(data)
    for _epoch in range(hp.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for lo in range(0, n, hp.batch_size):
            batch = [data[i] for i in order[lo : lo + hp.batch_size]]
            loss, grads = _forward_backward(params, batch)
            epoch_loss += loss * len(batch)
            for name in params:
                params[name] -= hp.learning_rate * grads[name]
        trace.append(epoch_loss / n)
    return SannModel(vocab=vocab, params=params, hyperparams=hp, loss_trace=trace)
