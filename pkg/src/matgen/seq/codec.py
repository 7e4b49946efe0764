"""Bidirectional codec between MaterialGraph and token sequences.

Three coupled encodings drive the three generation stages:

  * node sequences: operator-type tokens plus depth and position side
    sequences;
  * per-node parameter sequences: flattened scalar values with parameter
    index, vector element, array entry, and parameter ordinal sides;
  * slot descriptors and edge sequences: one descriptor row per slot of
    every node, and edges as pairs of indices into that slot list.

Token space convention for generated streams: 0 is the start token,
1 the stop token, and payload values are offset by 2. Side sequences
(depths, positions, indices) carry raw small integers with 0 at the
start/stop positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..graph.graph import MaterialGraph, OperatorLibrary
from ..graph.types import GraphError, ParamKind, ParamValue, SlotDirection, SlotRef
from .ordering import depth_mode_for, order_nodes
from .quantizer import QuantizerSpec

ALPHA = 0
OMEGA = 1
TOKEN_OFFSET = 2

DEPTH_CAP = 31
MAX_NODES = 400
MAX_PARAM_TOKENS = 512
MAX_EDGES = 700
MAX_SLOTS = 800


class SequenceOverflow(GraphError):
    """Graph exceeds a hard sequence-length cap."""


def type_token(type_id: int) -> int:
    return type_id + TOKEN_OFFSET


def token_type(token: int) -> int:
    if token < TOKEN_OFFSET:
        raise ValueError(f"token {token} is a reserved special, not an operator type")
    return token - TOKEN_OFFSET


def clamp_depth(d: int) -> int:
    return min(max(d, 0), DEPTH_CAP)


# ---------------------------------------------------------------------------
# node sequences


@dataclass
class NodeSequence:
    """Parallel node-stage sequences, start/stop tokens included."""

    tokens: list[int]
    depths: list[int]
    positions: list[int]
    node_ids: list[int]  # interior only: graph node id per token

    def __post_init__(self) -> None:
        if not (len(self.tokens) == len(self.depths) == len(self.positions)):
            raise ValueError("node sequence streams must have equal length")
        if len(self.node_ids) != len(self.tokens) - 2:
            raise ValueError("node_ids must cover interior tokens only")

    @property
    def num_nodes(self) -> int:
        return len(self.tokens) - 2

    def type_ids(self) -> list[int]:
        return [token_type(t) for t in self.tokens[1:-1]]


def encode_nodes(graph: MaterialGraph, ordering: str, seed: int = 0) -> NodeSequence:
    order = order_nodes(graph, ordering, seed)
    if len(order) > MAX_NODES:
        raise SequenceOverflow(f"{len(order)} nodes exceed the cap of {MAX_NODES}")
    depths = graph.node_depths(depth_mode_for(ordering))
    tokens = [ALPHA] + [type_token(graph.node(nid).type.id) for nid in order] + [OMEGA]
    dseq = [0] + [clamp_depth(depths[nid]) for nid in order] + [0]
    positions = list(range(1, len(tokens) + 1))
    return NodeSequence(tokens=tokens, depths=dseq, positions=positions, node_ids=list(order))


# ---------------------------------------------------------------------------
# parameter sequences


@dataclass
class ParamSequence:
    """Flattened parameter values of one node, with side sequences."""

    node_index: int  # 1-based position of the node in the node sequence
    node_id: int
    tokens: list[int]       # (ALPHA, v+2 ..., OMEGA)
    param_index: list[int]  # (0, k ..., 0)
    positions: list[int]    # 1-based global positions
    vec_index: list[int]    # (0, 1-based vector element ..., 0)
    arr_index: list[int]    # (0, 1-based array entry ..., 0)
    ordinal: list[int]      # (0, 1-based parameter ordinal ..., 0)

    def __post_init__(self) -> None:
        lens = {len(self.tokens), len(self.param_index), len(self.positions),
                len(self.vec_index), len(self.arr_index), len(self.ordinal)}
        if len(lens) != 1:
            raise ValueError("param sequence streams must have equal length")

    @property
    def num_values(self) -> int:
        return len(self.tokens) - 2


def value_to_token(value: float, schema_param, op_name: str, comp: int, quantizer: QuantizerSpec) -> int:
    if schema_param.is_discrete:
        return int(value) - int(schema_param.min_value) + TOKEN_OFFSET
    return quantizer.quantize(value, (op_name, schema_param.name, comp)) + TOKEN_OFFSET


def token_to_value(token: int, schema_param, op_name: str, comp: int, quantizer: QuantizerSpec) -> float:
    raw = token - TOKEN_OFFSET
    if raw < 0:
        raise ValueError(f"token {token} is a reserved special, not a value")
    if schema_param.is_discrete:
        v = int(schema_param.min_value) + raw
        return float(min(max(v, int(schema_param.min_value)), int(schema_param.max_value)))
    v = quantizer.dequantize(min(raw, quantizer.levels - 1), (op_name, schema_param.name, comp))
    return float(min(max(v, schema_param.min_value), schema_param.max_value))


def encode_params(
    graph: MaterialGraph, node_order: list[int], quantizer: QuantizerSpec
) -> list[ParamSequence]:
    """One ParamSequence per node, in node-order. Only explicitly set
    parameters appear; nodes at all defaults encode as (start, stop)."""
    out = []
    for j, nid in enumerate(node_order, start=1):
        node = graph.node(nid)
        schema = graph.library.schema(node.type)
        tokens, kseq, vecs, arrs, ords = [ALPHA], [0], [0], [0], [0]
        for ordinal, pv in enumerate(node.params, start=1):
            ps = schema.param(pv.param_index)
            for i, v in enumerate(pv.values):
                comp = i % ps.vector_dim
                tokens.append(value_to_token(v, ps, schema.type.name, comp, quantizer))
                kseq.append(pv.param_index)
                vecs.append(comp + 1)
                arrs.append(i // ps.vector_dim + 1)
                ords.append(ordinal)
        tokens.append(OMEGA)
        kseq.append(0)
        vecs.append(0)
        arrs.append(0)
        ords.append(0)
        if len(tokens) - 2 > MAX_PARAM_TOKENS:
            raise SequenceOverflow(
                f"node {nid} has {len(tokens) - 2} parameter tokens, cap is {MAX_PARAM_TOKENS}"
            )
        out.append(ParamSequence(
            node_index=j, node_id=nid, tokens=tokens, param_index=kseq,
            positions=list(range(1, len(tokens) + 1)),
            vec_index=vecs, arr_index=arrs, ordinal=ords,
        ))
    return out


def decode_params(
    tokens: list[int],
    param_indices: list[int],
    schema,
    quantizer: QuantizerSpec,
) -> list[ParamValue]:
    """Reconstruct parameter assignments from interior value/index tokens.

    Values are grouped by parameter index in encounter order. Array
    parameters keep the largest multiple of their vector dimension and
    drop the remainder; scalar and vector parameters are truncated or
    padded with default components to their exact size.
    """
    groups: dict[int, list[float]] = {}
    for tok, k in zip(tokens, param_indices):
        if tok in (ALPHA, OMEGA):
            continue
        if not 0 <= k < len(schema.params):
            raise GraphError(f"param index {k} out of range for {schema.type.name}")
        ps = schema.param(k)
        bucket = groups.setdefault(k, [])
        comp = len(bucket) % ps.vector_dim
        bucket.append(token_to_value(tok, ps, schema.type.name, comp, quantizer))
    result = []
    for k in sorted(groups):
        ps = schema.param(k)
        vals = groups[k]
        if ps.kind is ParamKind.ARRAY:
            keep = (len(vals) // ps.vector_dim) * ps.vector_dim
            if keep == 0:
                continue
            vals = vals[:keep]
        else:
            if len(vals) > ps.vector_dim:
                vals = vals[: ps.vector_dim]
            elif len(vals) < ps.vector_dim:
                vals = vals + list(ps.default_value[len(vals):])
        result.append(ParamValue(param_index=k, values=tuple(vals)))
    return result


# ---------------------------------------------------------------------------
# slot descriptors and edge sequences


@dataclass
class SlotDescriptorSequence:
    """One row per slot of every node: all input slots then all output
    slots, in node-sequence order."""

    type_tokens: list[int] = field(default_factory=list)
    node_pos: list[int] = field(default_factory=list)    # 1-based node order position
    node_ids: list[int] = field(default_factory=list)
    depths: list[int] = field(default_factory=list)
    slot_ordinal: list[int] = field(default_factory=list)  # inputs first, then outputs
    is_input: list[bool] = field(default_factory=list)
    slot_index: list[int] = field(default_factory=list)    # direction-local index
    positions: list[int] = field(default_factory=list)     # 1-based global position

    def __len__(self) -> int:
        return len(self.type_tokens)

    def ref(self, slot_pos: int) -> SlotRef:
        direction = SlotDirection.INPUT if self.is_input[slot_pos] else SlotDirection.OUTPUT
        return SlotRef(self.node_ids[slot_pos], direction, self.slot_index[slot_pos])

    def find(self, node_id: int, direction: SlotDirection, slot_index: int) -> int:
        key = (node_id, direction is SlotDirection.INPUT, slot_index)
        try:
            return self._lookup[key]
        except AttributeError:
            self._lookup = {
                (nid, inp, idx): pos
                for pos, (nid, inp, idx) in enumerate(zip(self.node_ids, self.is_input, self.slot_index))
            }
            return self._lookup[key]


def build_slot_sequence(
    graph: MaterialGraph, node_order: list[int], depths: dict[int, int]
) -> SlotDescriptorSequence:
    seq = SlotDescriptorSequence()
    pos = 1
    for j, nid in enumerate(node_order, start=1):
        schema = graph.schema_of(nid)
        rows = [(True, k, k) for k in range(schema.num_input_slots)]
        rows += [(False, k, schema.num_input_slots + k) for k in range(schema.num_output_slots)]
        for is_input, slot_index, ordinal in rows:
            seq.type_tokens.append(type_token(graph.node(nid).type.id))
            seq.node_pos.append(j)
            seq.node_ids.append(nid)
            seq.depths.append(clamp_depth(depths[nid]))
            seq.slot_ordinal.append(ordinal)
            seq.is_input.append(is_input)
            seq.slot_index.append(slot_index)
            seq.positions.append(pos)
            pos += 1
    if len(seq) > MAX_SLOTS:
        raise SequenceOverflow(f"{len(seq)} slots exceed the cap of {MAX_SLOTS}")
    return seq


@dataclass
class EdgeSequence:
    """Edges as a flat sequence of slot positions; consecutive pairs form
    (source output slot, destination input slot)."""

    slots: list[int]  # interior tokens only

    def __post_init__(self) -> None:
        if len(self.slots) % 2 != 0:
            raise ValueError("edge sequence interior length must be even")

    @property
    def num_edges(self) -> int:
        return len(self.slots) // 2

    def pairs(self) -> list[tuple[int, int]]:
        return [(self.slots[i], self.slots[i + 1]) for i in range(0, len(self.slots), 2)]

    def tuple_indices(self) -> list[int]:
        """The (0, 1, 2, 1, 2, ..., 0) side sequence over start + interior + stop."""
        return [0] + [1 + (i % 2) for i in range(len(self.slots))] + [0]


def encode_edges(
    graph: MaterialGraph, node_order: list[int], depths: dict[int, int] | None = None
) -> tuple[SlotDescriptorSequence, EdgeSequence]:
    """Slot descriptors plus the canonical edge sequence.

    Edges are sorted by their destination slot's global position, then by
    source position, which fixes a deterministic training target.
    """
    if depths is None:
        depths = graph.node_depths(depth_mode_for("rr"))
    slot_seq = build_slot_sequence(graph, node_order, depths)
    if len(graph.edges) > MAX_EDGES:
        raise SequenceOverflow(f"{len(graph.edges)} edges exceed the cap of {MAX_EDGES}")
    keyed = []
    for e in graph.edges:
        src = slot_seq.find(e.src.node_id, SlotDirection.OUTPUT, e.src.slot_index)
        dst = slot_seq.find(e.dst.node_id, SlotDirection.INPUT, e.dst.slot_index)
        keyed.append((dst, src))
    keyed.sort()
    slots: list[int] = []
    for dst, src in keyed:
        slots.extend((src, dst))
    return slot_seq, EdgeSequence(slots=slots)


def decode_edges(slot_seq: SlotDescriptorSequence, edge_seq: EdgeSequence) -> list[tuple[SlotRef, SlotRef]]:
    """Map slot-index pairs back to (source, destination) slot references."""
    out = []
    for src, dst in edge_seq.pairs():
        for pos, what in ((src, "source"), (dst, "destination")):
            if not 0 <= pos < len(slot_seq):
                raise GraphError(f"edge {what} slot index {pos} out of range")
        if slot_seq.is_input[src]:
            raise GraphError(f"edge source at slot {src} is an input slot")
        if not slot_seq.is_input[dst]:
            raise GraphError(f"edge destination at slot {dst} is an output slot")
        out.append((slot_seq.ref(src), slot_seq.ref(dst)))
    return out


# ---------------------------------------------------------------------------
# whole-graph round trip


@dataclass
class TokenizedGraph:
    """All sequences of one graph under one ordering."""

    ordering: str
    nodes: NodeSequence
    params: list[ParamSequence]
    slots: SlotDescriptorSequence
    edges: EdgeSequence


def encode_graph(
    graph: MaterialGraph, ordering: str, quantizer: QuantizerSpec, seed: int = 0
) -> TokenizedGraph:
    node_seq = encode_nodes(graph, ordering, seed)
    depths = graph.node_depths(depth_mode_for(ordering))
    params = encode_params(graph, node_seq.node_ids, quantizer)
    slot_seq, edge_seq = encode_edges(graph, node_seq.node_ids, depths)
    return TokenizedGraph(ordering=ordering, nodes=node_seq, params=params, slots=slot_seq, edges=edge_seq)


def decode_graph(
    tokenized: TokenizedGraph, library: OperatorLibrary, quantizer: QuantizerSpec
) -> MaterialGraph:
    """Rebuild a graph from token sequences. Node ids become sequence
    positions (0-based); parameters carry quantization error of at most
    half a bin per component."""
    graph = MaterialGraph(library)
    for type_id in tokenized.nodes.type_ids():
        graph.add_node(library.schema(type_id).type)
    for j, pseq in enumerate(tokenized.params):
        node = graph.node(j)
        schema = library.schema(node.type)
        node.params = decode_params(pseq.tokens, pseq.param_index, schema, quantizer)
    # rebuild the slot table over the decoded graph so edge indices resolve
    order = graph.node_ids()
    slot_seq = build_slot_sequence(graph, order, {nid: 0 for nid in order})
    for src, dst in decode_edges(slot_seq, tokenized.edges):
        graph.add_edge(src, dst)
    return graph
