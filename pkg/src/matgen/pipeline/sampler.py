"""Three-stage autoregressive graph generation with validity masking.

Stage order: node types and depths, then per-node parameters, then edges
through the pointer head. At every sampling step the temperature is
applied first, invalid choices get probability zero, and the remainder is
renormalized. Masks make invalid graphs unreachable: parameter indices
stay inside the operator's schema, discrete values stay inside their
range, edge sources are output slots, edge destinations are free input
slots on non-ancestor nodes, and the stop token is only legal between
complete edges. Assembled graphs are checked by the independent validator
before they leave the pipeline; a failure there is a pipeline bug and is
raised, never swallowed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..graph.graph import MaterialGraph
from ..graph.types import GraphError, ParamValue, SlotDirection
from ..graph.validation import validate_graph
from ..seq.codec import (
    ALPHA,
    MAX_EDGES,
    MAX_NODES,
    MAX_PARAM_TOKENS,
    OMEGA,
    TOKEN_OFFSET,
    EdgeSequence,
    NodeSequence,
    ParamSequence,
    SlotDescriptorSequence,
    build_slot_sequence,
    clamp_depth,
    decode_edges,
    decode_params,
    token_type,
    type_token,
)
from ..seq.ordering import depth_mode_for
from ..nn.model import forward
from ..nn.training import StageModel


class PipelineError(RuntimeError):
    """Sampler invariant violation; indicates a bug, not bad input."""


@dataclass(frozen=True)
class SamplerConfig:
    temperature: float = 1.0
    seed: int = 0
    greedy: bool = False
    max_nodes: int = MAX_NODES
    max_param_tokens: int = MAX_PARAM_TOKENS
    max_edges: int = MAX_EDGES

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")


@dataclass
class ModelBundle:
    nodes: StageModel
    params: StageModel
    edges: StageModel

    def __post_init__(self) -> None:
        stages = (self.nodes.stage, self.params.stage, self.edges.stage)
        if stages != ("nodes", "params", "edges"):
            raise PipelineError(f"bundle stages mismatched: {stages}")
        hashes = {m.library_hash for m in (self.nodes, self.params, self.edges)}
        if len(hashes) != 1:
            raise PipelineError("stage models were trained against different libraries")
        quants = {m.quantizer.content_hash for m in (self.nodes, self.params, self.edges)}
        if len(quants) != 1:
            raise PipelineError("stage models carry different quantizer bounds")
        orders = {m.ordering for m in (self.nodes, self.params, self.edges)}
        if len(orders) != 1:
            raise PipelineError("stage models were trained with different node orderings")

    @property
    def ordering(self) -> str:
        return self.nodes.ordering

    @property
    def library_hash(self) -> str:
        return self.nodes.library_hash


@dataclass
class GenerationResult:
    graph: MaterialGraph
    node_tokens: list[int]
    node_depths: list[int]
    param_tokens: list[tuple[tuple[int, ...], tuple[int, ...]]]  # (values, indices) per node
    edge_slots: list[int]
    prefix_nodes: int = 0  # number of leading nodes kept from a completion prefix

    def canonical_key(self) -> tuple:
        return (
            tuple(self.node_tokens),
            tuple(self.node_depths),
            tuple(self.param_tokens),
            tuple(self.edge_slots),
        )


def masked_distribution(logits: np.ndarray, legal: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Temperature first, then zero the invalid entries, then renormalize."""
    if logits.shape != legal.shape:
        raise ValueError("logits and mask shapes differ")
    if not legal.any():
        raise PipelineError("mask admits no legal continuation")
    z = logits / max(temperature, 1e-12)
    z = z - z[legal].max()
    p = np.exp(z)
    p[~legal] = 0.0
    total = p.sum()
    if total <= 0.0 or not np.isfinite(total):
        p = legal.astype(np.float64)
        total = p.sum()
    return p / total


def masked_sample(
    logits: np.ndarray, legal: np.ndarray, config: SamplerConfig, rng: np.random.Generator
) -> int:
    if config.greedy or config.temperature == 0.0:
        if not legal.any():
            raise PipelineError("mask admits no legal continuation")
        masked = np.where(legal, logits, -np.inf)
        return int(np.argmax(masked))
    p = masked_distribution(logits, legal, config.temperature)
    return int(rng.choice(len(p), p=p))


@dataclass
class NodePrefix:
    """An unterminated node-stage prefix (start token included)."""

    tokens: list[int] = field(default_factory=lambda: [ALPHA])
    depths: list[int] = field(default_factory=lambda: [0])

    @classmethod
    def from_graph(cls, graph: MaterialGraph, ordering: str) -> "NodePrefix":
        depths = graph.node_depths(depth_mode_for(ordering))
        order = sorted(graph.node_ids())
        return cls(
            tokens=[ALPHA] + [type_token(graph.node(nid).type.id) for nid in order],
            depths=[0] + [clamp_depth(depths[nid]) for nid in order],
        )

    @property
    def num_nodes(self) -> int:
        return len(self.tokens) - 1


def sample_nodes(model: StageModel, prefix: NodePrefix | None, config: SamplerConfig) -> NodeSequence:
    """Extend the prefix with sampled (type, depth) pairs until stop.

    Node types are unmasked apart from the reserved start token; depth
    tokens live in a 32-value vocabulary by construction. Hitting the
    node cap forces the stop token.
    """
    if model.stage != "nodes":
        raise PipelineError("sample_nodes requires the node-stage model")
    prefix = prefix or NodePrefix()
    cfg = model.configs.generator
    cap = min(config.max_nodes, cfg.max_positions - 2)
    rng = np.random.default_rng([config.seed, 101])
    tokens = list(prefix.tokens)
    depths = list(prefix.depths)
    type_vocab = dict(cfg.token_streams)["tok"]
    while True:
        if len(tokens) - 1 >= cap:
            break
        out = forward(
            model.gen_weights,
            cfg,
            tokens={
                "tok": np.array([tokens]),
                "depth": np.array([depths]),
                "pos": np.array([list(range(1, len(tokens) + 1))]),
            },
        )
        tok_logits = out.logits["tok"].data[0, -1]
        legal = np.ones(type_vocab, dtype=bool)
        legal[ALPHA] = False
        tok = masked_sample(tok_logits, legal, config, rng)
        if tok == OMEGA:
            break
        dep_logits = out.logits["depth"].data[0, -1]
        dep = masked_sample(dep_logits, np.ones(dep_logits.shape[0], dtype=bool), config, rng)
        tokens.append(tok)
        depths.append(dep)
    tokens.append(OMEGA)
    depths.append(0)
    return NodeSequence(
        tokens=tokens,
        depths=depths,
        positions=list(range(1, len(tokens) + 1)),
        node_ids=list(range(len(tokens) - 2)),
    )


def encode_node_streams(node_seq: NodeSequence) -> dict[str, np.ndarray]:
    return {
        "tok": np.array([node_seq.tokens]),
        "depth": np.array([node_seq.depths]),
        "pos": np.array([node_seq.positions]),
    }


def node_condition_cache(model: StageModel, node_seq: NodeSequence) -> np.ndarray:
    """Encoder hidden states over the full node sequence, (T, D)."""
    assert model.configs.encoder is not None
    out = forward(model.enc_weights, model.configs.encoder, tokens=encode_node_streams(node_seq))
    return out.hidden.data[0]


def sample_params(
    model: StageModel,
    node_seq: NodeSequence,
    node_index: int,
    library,
    config: SamplerConfig,
    cond_cache: np.ndarray | None = None,
) -> ParamSequence:
    """Sample the (value, parameter-index) pairs of one node.

    The parameter-index head is masked to the operator's parameter count;
    discrete value tokens are masked to the parameter's integer range.
    Operators without parameters can only stop.
    """
    if model.stage != "params":
        raise PipelineError("sample_params requires the param-stage model")
    if not 1 <= node_index <= node_seq.num_nodes:
        raise PipelineError(f"node index {node_index} outside the generated sequence")
    from ..nn.autodiff import Tensor

    cfg = model.configs.generator
    if cond_cache is None:
        cond_cache = node_condition_cache(model, node_seq)
    cond = Tensor(cond_cache[node_index][None, None, :])
    schema = library.schema(token_type(node_seq.tokens[node_index]))
    n_params = len(schema.params)
    val_vocab = dict(cfg.token_streams)["val"]
    k_vocab = dict(cfg.token_streams)["k"]
    rng = np.random.default_rng([config.seed, 211, node_index])

    vals, ks, vecs, arrs, ords = [ALPHA], [0], [0], [0], [0]
    consumed: dict[int, int] = {}
    distinct: list[int] = []
    cap = min(config.max_param_tokens, cfg.max_positions - 2)
    while len(vals) - 1 < cap:
        out = forward(
            model.gen_weights,
            cfg,
            tokens={
                "val": np.array([vals]),
                "k": np.array([ks]),
                "pos": np.array([list(range(1, len(vals) + 1))]),
                "vec": np.array([vecs]),
                "arr": np.array([arrs]),
                "ord": np.array([ords]),
            },
            condition=cond,
        )
        if n_params == 0:
            break
        k_logits = out.logits["k"].data[0, -1]
        k_legal = np.zeros(k_vocab, dtype=bool)
        k_legal[:n_params] = True
        k = masked_sample(k_logits, k_legal, config, rng)
        ps = schema.param(k)
        val_logits = out.logits["val"].data[0, -1]
        val_legal = np.zeros(val_vocab, dtype=bool)
        val_legal[OMEGA] = True
        span = ps.discrete_span if ps.is_discrete else model.quantizer.levels
        val_legal[TOKEN_OFFSET : TOKEN_OFFSET + span] = True
        val = masked_sample(val_logits, val_legal, config, rng)
        if val == OMEGA:
            break
        c = consumed.get(k, 0)
        consumed[k] = c + 1
        if not distinct or distinct[-1] != k:
            if k not in distinct:
                distinct.append(k)
        vals.append(val)
        ks.append(k)
        vecs.append(c % ps.vector_dim + 1)
        arrs.append(c // ps.vector_dim + 1)
        ords.append(distinct.index(k) + 1)
    vals.append(OMEGA)
    ks.append(0)
    vecs.append(0)
    arrs.append(0)
    ords.append(0)
    return ParamSequence(
        node_index=node_index,
        node_id=node_index - 1,
        tokens=vals,
        param_index=ks,
        positions=list(range(1, len(vals) + 1)),
        vec_index=vecs,
        arr_index=arrs,
        ordinal=ords,
    )


class _EdgeMaskState:
    """Occupancy and ancestry tracking during edge sampling."""

    def __init__(self, slot_seq: SlotDescriptorSequence, num_nodes: int):
        self.slot_node = np.array([p - 1 for p in slot_seq.node_pos])  # 0-based node positions
        self.is_input = np.array(slot_seq.is_input, dtype=bool)
        self.occupied = np.zeros(len(slot_seq), dtype=bool)
        self.anc = np.zeros((max(num_nodes, 1), max(num_nodes, 1)), dtype=bool)

    def add_edge(self, src_slot: int, dst_slot: int) -> None:
        u = int(self.slot_node[src_slot])
        v = int(self.slot_node[dst_slot])
        self.occupied[dst_slot] = True
        self.anc[v] |= self.anc[u]
        self.anc[v, u] = True
        desc = self.anc[:, v]
        if desc.any():
            self.anc[desc] |= self.anc[v]

    def legal_destinations(self, src_slot: int) -> np.ndarray:
        m = int(self.slot_node[src_slot])
        dst_nodes = self.slot_node
        return (
            self.is_input
            & ~self.occupied
            & (dst_nodes != m)
            & ~self.anc[m, dst_nodes]
        )

    def legal_sources(self) -> np.ndarray:
        """Output slots whose node still has at least one legal destination."""
        free = self.is_input & ~self.occupied
        free_nodes = self.slot_node[free]
        legal = np.zeros(len(self.slot_node), dtype=bool)
        if free_nodes.size == 0:
            return legal
        out_idx = np.nonzero(~self.is_input)[0]
        for s in out_idx:
            m = int(self.slot_node[s])
            ok = (free_nodes != m) & ~self.anc[m, free_nodes]
            legal[s] = bool(ok.any())
        return legal


def sample_edges(
    model: StageModel,
    skeleton: MaterialGraph,
    node_order: list[int],
    depths: dict[int, int],
    config: SamplerConfig,
    prefix_edges: list[tuple[int, int]] | None = None,
) -> tuple[SlotDescriptorSequence, EdgeSequence]:
    """Sample slot-index pairs through the pointer head.

    Odd tuple positions admit output slots (and stop), even positions
    admit unoccupied input slots on nodes that are not ancestors of the
    pending source. The mask construction guarantees a legal continuation
    always exists; its absence is asserted as a pipeline bug.
    """
    if model.stage != "edges":
        raise PipelineError("sample_edges requires the edge-stage model")
    from ..nn.autodiff import Tensor

    cfgs = model.configs
    assert cfgs.encoder is not None
    slot_seq = build_slot_sequence(skeleton, node_order, depths)
    enc_out = forward(
        model.enc_weights,
        cfgs.encoder,
        tokens={
            "tok": np.array([slot_seq.type_tokens]),
            "npos": np.array([slot_seq.node_pos]),
            "depth": np.array([slot_seq.depths]),
            "slot": np.array([slot_seq.slot_ordinal]),
            "pos": np.array([slot_seq.positions]),
        },
    )
    slot_emb = enc_out.hidden.data[0]  # (S, D)
    n_slots = slot_emb.shape[0]
    state = _EdgeMaskState(slot_seq, len(node_order))
    chosen: list[int] = []
    for src, dst in prefix_edges or []:
        state.add_edge(src, dst)
        chosen.extend((src, dst))

    d = cfgs.generator.hidden_dim
    start = model.gen_weights["start"].data.reshape(1, d)
    stop = model.gen_weights["stop"].data
    rng = np.random.default_rng([config.seed, 307])
    cap_tokens = min(2 * config.max_edges, cfgs.generator.max_positions - 1)

    while True:
        t = len(chosen)  # tokens so far; next token index t+1 (1-based)
        at_edge_start = t % 2 == 0
        if at_edge_start and (t >= cap_tokens or t // 2 >= config.max_edges):
            break
        cont = np.vstack([start, slot_emb[chosen]]) if chosen else start
        pos = np.arange(1, t + 2)
        tup = np.zeros(t + 1, dtype=np.int64)
        if t >= 1:
            tup[1:] = 1 + ((np.arange(1, t + 1) - 1) % 2)
        out = forward(
            model.gen_weights,
            cfgs.generator,
            tokens={"pos": pos[None, :], "tuple": tup[None, :]},
            continuous=Tensor(cont[None, :, :]),
        )
        query = out.query.data[0, -1]
        logits = np.concatenate([[stop @ query], slot_emb @ query])
        legal = np.zeros(n_slots + 1, dtype=bool)
        if at_edge_start:
            legal[0] = True
            legal[1:] = state.legal_sources()
        else:
            legal[1:] = state.legal_destinations(chosen[-1])
            if not legal.any():
                raise PipelineError("edge mask exhausted mid-edge; source mask must prevent this")
        pick = masked_sample(logits, legal, config, rng)
        if pick == 0:
            break
        slot = pick - 1
        chosen.append(slot)
        if len(chosen) % 2 == 0:
            state.add_edge(chosen[-2], chosen[-1])

    return slot_seq, EdgeSequence(slots=chosen)


def generate_graph(
    models: ModelBundle,
    library,
    config: SamplerConfig,
    nodes_config: SamplerConfig | None = None,
    node_prefix: NodePrefix | None = None,
) -> GenerationResult:
    """Run all three stages and assemble a validated MaterialGraph."""
    node_seq = sample_nodes(models.nodes, node_prefix, nodes_config or config)
    return _complete_from_nodes(models, library, node_seq, config, pinned=None)


def _complete_from_nodes(
    models: ModelBundle,
    library,
    node_seq: NodeSequence,
    config: SamplerConfig,
    pinned: MaterialGraph | None,
) -> GenerationResult:
    """Parameter and edge stages over a fixed node sequence, then assembly.

    When `pinned` is given, its nodes map to the first sequence positions:
    their ids, parameters, and mutual edges are preserved verbatim.
    """
    n = node_seq.num_nodes
    pinned_count = len(pinned.nodes) if pinned is not None else 0
    pinned_order = sorted(pinned.node_ids()) if pinned is not None else []

    graph = MaterialGraph(library)
    id_of_pos: list[int] = []
    for j in range(1, n + 1):
        type_id = token_type(node_seq.tokens[j])
        if j <= pinned_count:
            assert pinned is not None
            nid = pinned_order[j - 1]
            src_node = pinned.node(nid)
            if src_node.type.id != type_id:
                raise PipelineError("prefix node type drifted during sampling")
            graph.add_node(src_node.type, [ParamValue(p.param_index, p.values) for p in src_node.params], node_id=nid)
            id_of_pos.append(nid)
        else:
            nid = graph.add_node(library.schema(type_id).type, node_id=(max(id_of_pos) + 1 if id_of_pos else 0))
            id_of_pos.append(nid)

    # parameters for newly generated nodes only
    param_tokens: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    cond_cache = node_condition_cache(models.params, node_seq) if n > pinned_count else None
    for j in range(1, n + 1):
        if j <= pinned_count:
            param_tokens.append(((), ()))
            continue
        pseq = sample_params(models.params, node_seq, j, library, config, cond_cache)
        node = graph.node(id_of_pos[j - 1])
        schema = library.schema(node.type)
        node.params = decode_params(pseq.tokens, pseq.param_index, schema, models.params.quantizer)
        param_tokens.append((tuple(pseq.tokens), tuple(pseq.param_index)))

    if pinned is not None:
        for e in pinned.edges:
            graph.add_edge(e.src, e.dst)

    # depths for the slot encoder: realized for pinned nodes, generated otherwise
    depths: dict[int, int] = {}
    if pinned is not None and pinned_count:
        realized = pinned.node_depths(depth_mode_for(models.ordering))
        for nid in pinned_order:
            depths[nid] = realized[nid]
    for j in range(pinned_count + 1, n + 1):
        depths[id_of_pos[j - 1]] = node_seq.depths[j]

    prefix_pairs: list[tuple[int, int]] = []
    slot_probe = build_slot_sequence(graph, id_of_pos, depths) if pinned is not None and pinned.edges else None
    if slot_probe is not None:
        assert pinned is not None
        keyed = []
        for e in pinned.edges:
            src = slot_probe.find(e.src.node_id, SlotDirection.OUTPUT, e.src.slot_index)
            dst = slot_probe.find(e.dst.node_id, SlotDirection.INPUT, e.dst.slot_index)
            keyed.append((dst, src))
        keyed.sort()
        prefix_pairs = [(src, dst) for dst, src in keyed]

    if n == 0:
        slot_seq, edge_seq = SlotDescriptorSequence(), EdgeSequence(slots=[])
    else:
        slot_seq, edge_seq = sample_edges(
            models.edges, graph, id_of_pos, depths, config, prefix_edges=prefix_pairs
        )
    for src_ref, dst_ref in decode_edges(slot_seq, edge_seq)[len(prefix_pairs):]:
        try:
            graph.add_edge(src_ref, dst_ref)
        except GraphError as err:
            raise PipelineError(f"sampled edge rejected by graph construction: {err}") from err

    problems = validate_graph(graph)
    if problems:
        raise PipelineError("assembled graph failed validation: " + "; ".join(problems))
    return GenerationResult(
        graph=graph,
        node_tokens=list(node_seq.tokens),
        node_depths=list(node_seq.depths),
        param_tokens=param_tokens,
        edge_slots=list(edge_seq.slots),
        prefix_nodes=pinned_count,
    )


@dataclass
class CompletionRequest:
    partial_graph: MaterialGraph
    pinned_node_ids: list[int] | None = None  # None pins every node
    count: int = 3
    config: SamplerConfig = field(default_factory=SamplerConfig)


def autocomplete(models: ModelBundle, library, request: CompletionRequest) -> list[GenerationResult]:
    """Prefix-conditioned completions of a partial graph.

    The pinned subgraph (the whole partial graph unless a pinned subset is
    given) is encoded as prefixes for all three stages. Pinned nodes keep
    their ids, types, parameters, and mutual edges verbatim in every
    completion. Requires a model trained with a front-to-back ordering.
    """
    if models.ordering not in ("rr", "b"):
        raise PipelineError(
            f"autocompletion needs a front-to-back ordering (rr or b), model uses {models.ordering!r}"
        )
    problems = validate_graph(request.partial_graph)
    if problems:
        raise GraphError("invalid partial graph: " + "; ".join(problems))
    pinned_ids = (
        sorted(request.pinned_node_ids)
        if request.pinned_node_ids is not None
        else sorted(request.partial_graph.node_ids())
    )
    pinned = request.partial_graph.subgraph(pinned_ids)
    if len(pinned.nodes) > MAX_NODES:
        raise GraphError(f"partial graph exceeds the {MAX_NODES}-node cap")
    prefix = NodePrefix.from_graph(pinned, models.ordering)
    results = []
    for c in range(request.count):
        cfg = SamplerConfig(
            temperature=request.config.temperature,
            seed=int(np.random.default_rng([request.config.seed, c]).integers(2**31)),
            greedy=request.config.greedy,
            max_nodes=request.config.max_nodes,
            max_param_tokens=request.config.max_param_tokens,
            max_edges=request.config.max_edges,
        )
        node_seq = sample_nodes(models.nodes, prefix, cfg)
        results.append(_complete_from_nodes(models, library, node_seq, cfg, pinned=pinned))
    return results
