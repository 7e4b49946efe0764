"""The three generation stages: model configs, sequence featurization,
and teacher-forced losses.

Stage "nodes" trains a causal generator over (type, depth) token pairs.
Stage "params" trains a causal conditional generator over flattened
parameter values jointly with a bidirectional node-sequence encoder that
supplies the per-node condition vector. Stage "edges" trains a causal
pointer generator jointly with a bidirectional slot encoder; the pointer
candidates are the slot embeddings plus a learned stop embedding at
index 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..graph.graph import MaterialGraph, OperatorLibrary
from ..seq.codec import (
    DEPTH_CAP,
    MAX_EDGES,
    MAX_NODES,
    MAX_PARAM_TOKENS,
    MAX_SLOTS,
    TOKEN_OFFSET,
    TokenizedGraph,
    encode_graph,
)
from ..seq.quantizer import QuantizerSpec
from . import autodiff as ad
from .autodiff import Tensor
from .model import NEG_INF, TransformerConfig, forward

STAGES = ("nodes", "params", "edges")

DEPTH_VOCAB = DEPTH_CAP + 1


@dataclass(frozen=True)
class StageConfigs:
    generator: TransformerConfig
    encoder: TransformerConfig | None = None


def value_vocab_size(library: OperatorLibrary, levels: int = 32) -> int:
    return TOKEN_OFFSET + max(levels, library.max_discrete_span)


def stage_configs(stage: str, library: OperatorLibrary, layers: int = 2, heads: int = 4, hidden_dim: int = 64) -> StageConfigs:
    type_vocab = TOKEN_OFFSET + len(library)
    common = dict(layers=layers, heads=heads, hidden_dim=hidden_dim)
    if stage == "nodes":
        gen = TransformerConfig(
            **common,
            max_positions=MAX_NODES + 2,
            causal=True,
            token_streams=(("tok", type_vocab), ("depth", DEPTH_VOCAB), ("pos", MAX_NODES + 3)),
            output_streams=(("tok", type_vocab), ("depth", DEPTH_VOCAB)),
        )
        return StageConfigs(generator=gen)
    if stage == "params":
        gen = TransformerConfig(
            **common,
            max_positions=MAX_PARAM_TOKENS + 2,
            causal=True,
            conditional=True,
            token_streams=(
                ("val", value_vocab_size(library)),
                ("k", max(library.max_param_count, 1)),
                ("pos", MAX_PARAM_TOKENS + 3),
                ("vec", library.max_vector_dim + 1),
                ("arr", MAX_PARAM_TOKENS + 2),
                ("ord", library.max_param_count + 1),
            ),
            output_streams=(
                ("val", value_vocab_size(library)),
                ("k", max(library.max_param_count, 1)),
            ),
        )
        enc = TransformerConfig(
            **common,
            max_positions=MAX_NODES + 2,
            causal=False,
            token_streams=(("tok", type_vocab), ("depth", DEPTH_VOCAB), ("pos", MAX_NODES + 3)),
        )
        return StageConfigs(generator=gen, encoder=enc)
    if stage == "edges":
        gen = TransformerConfig(
            **common,
            max_positions=2 * MAX_EDGES + 2,
            causal=True,
            continuous_input=True,
            pointer_head=True,
            token_streams=(("pos", 2 * MAX_EDGES + 3), ("tuple", 3)),
        )
        enc = TransformerConfig(
            **common,
            max_positions=MAX_SLOTS,
            causal=False,
            token_streams=(
                ("tok", type_vocab),
                ("npos", MAX_NODES + 2),
                ("depth", DEPTH_VOCAB),
                ("slot", library.max_slots_per_node),
                ("pos", MAX_SLOTS + 1),
            ),
        )
        return StageConfigs(generator=gen, encoder=enc)
    raise ValueError(f"unknown stage {stage!r}, expected one of {STAGES}")


# ---------------------------------------------------------------------------
# featurization


@dataclass
class NodeRow:
    tok: np.ndarray
    depth: np.ndarray
    pos: np.ndarray


@dataclass
class ParamRow:
    graph_index: int
    node_index: int  # 1-based position in the node sequence
    val: np.ndarray
    k: np.ndarray
    pos: np.ndarray
    vec: np.ndarray
    arr: np.ndarray
    ord: np.ndarray


@dataclass
class EdgeRow:
    slot_tok: np.ndarray
    slot_npos: np.ndarray
    slot_depth: np.ndarray
    slot_ord: np.ndarray
    slot_pos: np.ndarray
    edge_slots: np.ndarray  # interior slot indices, length 2m


@dataclass
class StageRows:
    """Featurized corpus for one stage. Node rows double as the encoder
    context for param rows (indexed by graph_index)."""

    stage: str
    node_rows: list[NodeRow] = field(default_factory=list)
    param_rows: list[ParamRow] = field(default_factory=list)
    edge_rows: list[EdgeRow] = field(default_factory=list)

    def __len__(self) -> int:
        if self.stage == "nodes":
            return len(self.node_rows)
        if self.stage == "params":
            return len(self.param_rows)
        return len(self.edge_rows)


def tokenized_to_rows(stage: str, encoded: list[TokenizedGraph]) -> StageRows:
    rows = StageRows(stage=stage)
    for gi, tg in enumerate(encoded):
        ns = tg.nodes
        rows.node_rows.append(NodeRow(
            tok=np.array(ns.tokens, dtype=np.int64),
            depth=np.array(ns.depths, dtype=np.int64),
            pos=np.array(ns.positions, dtype=np.int64),
        ))
        if stage == "params":
            for pseq in tg.params:
                rows.param_rows.append(ParamRow(
                    graph_index=gi,
                    node_index=pseq.node_index,
                    val=np.array(pseq.tokens, dtype=np.int64),
                    k=np.array(pseq.param_index, dtype=np.int64),
                    pos=np.array(pseq.positions, dtype=np.int64),
                    vec=np.array(pseq.vec_index, dtype=np.int64),
                    arr=np.array(pseq.arr_index, dtype=np.int64),
                    ord=np.array(pseq.ordinal, dtype=np.int64),
                ))
        elif stage == "edges":
            ss = tg.slots
            rows.edge_rows.append(EdgeRow(
                slot_tok=np.array(ss.type_tokens, dtype=np.int64),
                slot_npos=np.array(ss.node_pos, dtype=np.int64),
                slot_depth=np.array(ss.depths, dtype=np.int64),
                slot_ord=np.array(ss.slot_ordinal, dtype=np.int64),
                slot_pos=np.array(ss.positions, dtype=np.int64),
                edge_slots=np.array(tg.edges.slots, dtype=np.int64),
            ))
    return rows


def featurize(
    stage: str,
    graphs: list[MaterialGraph],
    ordering: str,
    quantizer: QuantizerSpec,
    seed: int = 0,
) -> StageRows:
    encoded = [encode_graph(g, ordering, quantizer, seed=seed + i) for i, g in enumerate(graphs)]
    return tokenized_to_rows(stage, encoded)


def _pad_stack(arrays: list[np.ndarray], pad: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Stack 1-D int arrays into (B, Tmax) with a validity mask."""
    tmax = max(len(a) for a in arrays)
    out = np.full((len(arrays), tmax), pad, dtype=np.int64)
    valid = np.zeros((len(arrays), tmax), dtype=bool)
    for i, a in enumerate(arrays):
        out[i, : len(a)] = a
        valid[i, : len(a)] = True
    return out, valid


# ---------------------------------------------------------------------------
# losses (teacher forcing: inputs are positions :-1, targets positions 1:)


@dataclass
class LossBreakdown:
    loss: Tensor
    token_count: int


def nodes_loss(weights: dict[str, Tensor], cfg: TransformerConfig, rows: list[NodeRow]) -> LossBreakdown:
    tok, valid = _pad_stack([r.tok for r in rows])
    depth, _ = _pad_stack([r.depth for r in rows])
    pos, _ = _pad_stack([r.pos for r in rows], pad=1)
    out = forward(weights, cfg, tokens={"tok": tok[:, :-1], "depth": depth[:, :-1], "pos": pos[:, :-1]})
    tgt_valid = valid[:, 1:]
    n = int(tgt_valid.sum())
    ce_tok = ad.cross_entropy_sum(out.logits["tok"], tok[:, 1:], tgt_valid)
    ce_dep = ad.cross_entropy_sum(out.logits["depth"], depth[:, 1:], tgt_valid)
    loss = ad.mul(ad.add(ce_tok, ce_dep), 1.0 / max(2 * n, 1))
    return LossBreakdown(loss=loss, token_count=2 * n)


def params_loss(
    gen_weights: dict[str, Tensor],
    enc_weights: dict[str, Tensor],
    cfgs: StageConfigs,
    rows: list[ParamRow],
    node_rows: list[NodeRow],
) -> LossBreakdown:
    assert cfgs.encoder is not None
    graph_ids = sorted({r.graph_index for r in rows})
    slot_of = {gi: i for i, gi in enumerate(graph_ids)}
    ntok, nvalid = _pad_stack([node_rows[gi].tok for gi in graph_ids])
    ndep, _ = _pad_stack([node_rows[gi].depth for gi in graph_ids])
    npos, _ = _pad_stack([node_rows[gi].pos for gi in graph_ids], pad=1)
    enc_out = forward(enc_weights, cfgs.encoder, tokens={"tok": ntok, "depth": ndep, "pos": npos}, key_valid=nvalid)

    # condition vector: encoder hidden state at each row's node position
    flat = ad.reshape(enc_out.hidden, (-1, cfgs.encoder.hidden_dim))
    tmax = ntok.shape[1]
    flat_idx = np.array([slot_of[r.graph_index] * tmax + r.node_index for r in rows], dtype=np.int64)
    cond = ad.reshape(gather_flat(flat, flat_idx), (len(rows), 1, cfgs.generator.hidden_dim))

    val, valid = _pad_stack([r.val for r in rows])
    k, _ = _pad_stack([r.k for r in rows])
    pos, _ = _pad_stack([r.pos for r in rows], pad=1)
    vec, _ = _pad_stack([r.vec for r in rows])
    arr, _ = _pad_stack([r.arr for r in rows])
    orda, _ = _pad_stack([r.ord for r in rows])
    out = forward(
        gen_weights,
        cfgs.generator,
        tokens={
            "val": val[:, :-1], "k": k[:, :-1], "pos": pos[:, :-1],
            "vec": vec[:, :-1], "arr": arr[:, :-1], "ord": orda[:, :-1],
        },
        condition=cond,
    )
    tgt_valid = valid[:, 1:]
    n = int(tgt_valid.sum())
    ce_val = ad.cross_entropy_sum(out.logits["val"], val[:, 1:], tgt_valid)
    ce_k = ad.cross_entropy_sum(out.logits["k"], k[:, 1:], tgt_valid)
    loss = ad.mul(ad.add(ce_val, ce_k), 1.0 / max(2 * n, 1))
    return LossBreakdown(loss=loss, token_count=2 * n)


def gather_flat(flat: Tensor, idx: np.ndarray) -> Tensor:
    return ad.gather_rows(flat, idx)


def edges_loss(
    gen_weights: dict[str, Tensor],
    enc_weights: dict[str, Tensor],
    cfgs: StageConfigs,
    rows: list[EdgeRow],
) -> LossBreakdown:
    assert cfgs.encoder is not None
    stok, svalid = _pad_stack([r.slot_tok for r in rows])
    snpos, _ = _pad_stack([r.slot_npos for r in rows])
    sdep, _ = _pad_stack([r.slot_depth for r in rows])
    sord, _ = _pad_stack([r.slot_ord for r in rows])
    spos, _ = _pad_stack([r.slot_pos for r in rows], pad=1)
    enc_out = forward(
        enc_weights, cfgs.encoder,
        tokens={"tok": stok, "npos": snpos, "depth": sdep, "slot": sord, "pos": spos},
        key_valid=svalid,
    )
    slot_emb = enc_out.hidden  # (B, S, D)

    b = len(rows)
    d = cfgs.generator.hidden_dim
    # teacher-forced input: learned start vector followed by chosen slot embeddings
    tins = [1 + len(r.edge_slots) for r in rows]
    tmax = max(tins)
    sel_idx = np.zeros((b, tmax), dtype=np.int64)
    sel_valid = np.zeros((b, tmax), dtype=bool)
    for i, r in enumerate(rows):
        sel_idx[i, 1 : 1 + len(r.edge_slots)] = r.edge_slots
        sel_valid[i, : 1 + len(r.edge_slots)] = True
    gathered = ad.batched_gather(slot_emb, sel_idx)  # (B, T, D); position 0 replaced below
    start_mask = np.zeros((1, tmax, 1))
    start_mask[0, 0, 0] = 1.0
    keep_mask = 1.0 - start_mask
    start_vec = ad.reshape(gen_weights["start"], (1, 1, d))
    cont = ad.add(ad.mul(gathered, keep_mask), ad.mul(start_vec, start_mask))

    pos = np.tile(np.arange(1, tmax + 1, dtype=np.int64), (b, 1))
    tup = np.zeros((b, tmax), dtype=np.int64)
    interior = np.arange(1, tmax)
    tup[:, 1:] = 1 + ((interior - 1) % 2)
    out = forward(gen_weights, cfgs.generator, tokens={"pos": pos, "tuple": tup}, continuous=cont)
    query = out.query  # (B, T, D)

    stop = ad.reshape(gen_weights["stop"], (1, 1, d))
    stop_tiled = ad.mul(stop, np.ones((b, 1, 1)))
    cands = ad.concat([stop_tiled, slot_emb], axis=1)  # (B, 1+S, D)
    logits = ad.matmul(query, ad.transpose(cands, (0, 2, 1)))  # (B, T, 1+S)
    cand_mask = np.concatenate([np.ones((b, 1), dtype=bool), svalid], axis=1)
    logits = ad.add(logits, np.where(cand_mask, 0.0, NEG_INF)[:, None, :])

    # pointer-space targets: slot i -> i + 1, stop -> 0
    targets = np.zeros((b, tmax), dtype=np.int64)
    tvalid = np.zeros((b, tmax), dtype=bool)
    for i, r in enumerate(rows):
        m = len(r.edge_slots)
        targets[i, :m] = r.edge_slots + 1
        targets[i, m] = 0
        tvalid[i, : m + 1] = True
    n = int(tvalid.sum())
    ce = ad.cross_entropy_sum(logits, targets, tvalid)
    loss = ad.mul(ce, 1.0 / max(n, 1))
    return LossBreakdown(loss=loss, token_count=n)
