"""Decoder-style transformer trunk shared by the sequence generators and
the bidirectional sequence encoders.

Blocks are pre-layer-norm with GELU feed-forward at 4x expansion. Every
input stream has its own embedding table and the embeddings are summed;
positional information comes entirely from the explicit side sequences.
Generators apply a causal mask, encoders attend everywhere. A conditional
variant adds a second path to each feed-forward block that reads a
per-sequence condition vector: block(x, c) = x + mlp(ln(x)) + mlp_c(ln(c)).
The pointer variant emits a query vector per step instead of logits;
affinities against candidate embeddings (plus a learned stop embedding)
are normalized with a softmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor

NEG_INF = -1e9


@dataclass(frozen=True)
class TransformerConfig:
    layers: int = 2
    heads: int = 4
    hidden_dim: int = 64
    max_positions: int = 402
    causal: bool = True
    conditional: bool = False
    pointer_head: bool = False
    continuous_input: bool = False
    token_streams: tuple[tuple[str, int], ...] = ()
    output_streams: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        if self.hidden_dim % self.heads != 0:
            raise ValueError("hidden_dim must be divisible by heads")


def init_weights(config: TransformerConfig, seed: int = 0) -> dict[str, Tensor]:
    """Scaled-normal init (std 0.02) for embeddings and projections, ones
    for layer-norm gains, zeros for every bias and readout offset."""
    rng = np.random.default_rng([seed, config.layers, config.hidden_dim])
    d = config.hidden_dim
    w: dict[str, Tensor] = {}

    def normal(*shape):
        return Tensor(rng.normal(0.0, 0.02, size=shape), requires_grad=True)

    def zeros(*shape):
        return Tensor(np.zeros(shape), requires_grad=True)

    def ones(*shape):
        return Tensor(np.ones(shape), requires_grad=True)

    for name, vocab in config.token_streams:
        w[f"emb.{name}.w"] = normal(vocab, d)
    if config.continuous_input:
        w["start"] = normal(1, d)
    for i in range(config.layers):
        p = f"blk{i}"
        w[f"{p}.ln1.g"], w[f"{p}.ln1.b"] = ones(d), zeros(d)
        for proj in ("wq", "wk", "wv", "wo"):
            w[f"{p}.attn.{proj}"] = normal(d, d)
        for bias in ("bq", "bk", "bv", "bo"):
            w[f"{p}.attn.{bias}"] = zeros(d)
        w[f"{p}.ln2.g"], w[f"{p}.ln2.b"] = ones(d), zeros(d)
        w[f"{p}.ff.w1"], w[f"{p}.ff.b1"] = normal(d, 4 * d), zeros(4 * d)
        w[f"{p}.ff.w2"], w[f"{p}.ff.b2"] = normal(4 * d, d), zeros(d)
        if config.conditional:
            w[f"{p}.cond.ln.g"], w[f"{p}.cond.ln.b"] = ones(d), zeros(d)
            w[f"{p}.cond.w1"], w[f"{p}.cond.b1"] = normal(d, 4 * d), zeros(4 * d)
            w[f"{p}.cond.w2"], w[f"{p}.cond.b2"] = normal(4 * d, d), zeros(d)
    w["out.ln.g"], w["out.ln.b"] = ones(d), zeros(d)
    for name, vocab in config.output_streams:
        w[f"head.{name}.w"] = normal(d, vocab)
        w[f"head.{name}.b"] = zeros(vocab)
    if config.pointer_head:
        w["head.query.w"] = normal(d, d)
        w["head.query.b"] = zeros(d)
        w["stop"] = normal(d)
    return w


@dataclass
class ForwardOutput:
    hidden: Tensor                      # (B, T, D) final, layer-normed
    logits: dict[str, Tensor] = field(default_factory=dict)  # per output stream (B, T, V)
    query: Tensor | None = None         # (B, T, D) pointer queries


def _attention(w, prefix: str, x: Tensor, config: TransformerConfig, key_valid: np.ndarray | None) -> Tensor:
    b, t, d = x.shape
    h = config.heads
    dh = d // h

    def heads_split(m: Tensor) -> Tensor:
        return ad.transpose(ad.reshape(m, (b, t, h, dh)), (0, 2, 1, 3))

    q = heads_split(ad.add(ad.matmul(x, w[f"{prefix}.wq"]), w[f"{prefix}.bq"]))
    k = heads_split(ad.add(ad.matmul(x, w[f"{prefix}.wk"]), w[f"{prefix}.bk"]))
    v = heads_split(ad.add(ad.matmul(x, w[f"{prefix}.wv"]), w[f"{prefix}.bv"]))
    att = ad.mul(ad.matmul(q, ad.transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(dh))
    mask = np.zeros((1, 1, t, t))
    if config.causal:
        mask = mask + np.triu(np.full((t, t), NEG_INF), k=1)
    if key_valid is not None:
        mask = mask + np.where(key_valid, 0.0, NEG_INF)[:, None, None, :]
    att = ad.add(att, mask)
    att = ad.softmax(att, axis=-1)
    out = ad.transpose(ad.matmul(att, v), (0, 2, 1, 3))
    out = ad.reshape(out, (b, t, d))
    return ad.add(ad.matmul(out, w[f"{prefix}.wo"]), w[f"{prefix}.bo"])


def _mlp(w, prefix: str, x: Tensor) -> Tensor:
    hidden = ad.gelu(ad.add(ad.matmul(x, w[f"{prefix}.w1"]), w[f"{prefix}.b1"]))
    return ad.add(ad.matmul(hidden, w[f"{prefix}.w2"]), w[f"{prefix}.b2"])


def forward(
    weights: dict[str, Tensor],
    config: TransformerConfig,
    tokens: dict[str, np.ndarray] | None = None,
    continuous: Tensor | None = None,
    condition: Tensor | None = None,
    key_valid: np.ndarray | None = None,
) -> ForwardOutput:
    """Run the trunk and heads.

    tokens maps stream name to an integer (B, T) array; each stream is
    embedded with its own table and the embeddings are summed. A
    continuous (B, T, D) input is added on top when configured. condition
    is a (B, 1, D) per-sequence vector for conditional models. key_valid
    marks real (non-pad) positions for encoder attention.
    """
    tokens = tokens or {}
    parts: list[Tensor] = []
    shape = None
    for name, _ in config.token_streams:
        if name not in tokens:
            raise KeyError(f"missing input stream {name!r}")
        idx = np.asarray(tokens[name], dtype=np.int64)
        shape = idx.shape
        parts.append(ad.gather_rows(weights[f"emb.{name}.w"], idx))
    if continuous is not None:
        parts.append(continuous)
        shape = continuous.shape[:2]
    if not parts:
        raise ValueError("no input streams")
    if shape is not None and len(shape) != 2:
        raise ValueError("token streams must be (batch, time)")
    t = shape[1]
    if t > config.max_positions:
        raise ValueError(f"sequence length {t} exceeds max_positions {config.max_positions}")
    x = parts[0]
    for p in parts[1:]:
        x = ad.add(x, p)

    if condition is not None and not config.conditional:
        raise ValueError("condition passed to an unconditional model")

    for i in range(config.layers):
        p = f"blk{i}"
        x = ad.add(x, _attention(weights, f"{p}.attn", ad.layer_norm(x, weights[f"{p}.ln1.g"], weights[f"{p}.ln1.b"]), config, key_valid))
        ff = _mlp(weights, f"{p}.ff", ad.layer_norm(x, weights[f"{p}.ln2.g"], weights[f"{p}.ln2.b"]))
        x = ad.add(x, ff)
        if config.conditional:
            if condition is None:
                raise ValueError("conditional model requires a condition vector")
            cpath = _mlp(weights, f"{p}.cond", ad.layer_norm(condition, weights[f"{p}.cond.ln.g"], weights[f"{p}.cond.ln.b"]))
            x = ad.add(x, cpath)

    x = ad.layer_norm(x, weights["out.ln.g"], weights["out.ln.b"])
    out = ForwardOutput(hidden=x)
    for name, _ in config.output_streams:
        out.logits[name] = ad.add(ad.matmul(x, weights[f"head.{name}.w"]), weights[f"head.{name}.b"])
    if config.pointer_head:
        out.query = ad.add(ad.matmul(x, weights["head.query.w"]), weights["head.query.b"])
    return out


def encode_at(
    weights: dict[str, Tensor],
    config: TransformerConfig,
    tokens: dict[str, np.ndarray],
    index: int,
    key_valid: np.ndarray | None = None,
) -> np.ndarray:
    """Sequence-aware embedding of one position (inference only)."""
    t = next(iter(tokens.values())).shape[-1]
    if not 0 <= index < t:
        raise IndexError(f"index {index} out of range for length {t}")
    out = forward(weights, config, tokens=tokens, key_valid=key_valid)
    return out.hidden.data[:, index, :]


def pointer_logits_array(query: np.ndarray, slot_embeddings: np.ndarray, stop: np.ndarray | None = None) -> np.ndarray:
    """Dot-product affinities of one query (D,) against candidates (S, D).
    When a stop embedding is given it is prepended as candidate 0."""
    if slot_embeddings.ndim != 2 or slot_embeddings.shape[0] == 0:
        raise ValueError("slot embeddings must be a non-empty (S, D) array")
    cands = slot_embeddings if stop is None else np.vstack([stop[None, :], slot_embeddings])
    return cands @ query


def pointer_distribution(query: np.ndarray, slot_embeddings: np.ndarray, stop: np.ndarray | None = None) -> np.ndarray:
    logits = pointer_logits_array(query, slot_embeddings, stop)
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()
