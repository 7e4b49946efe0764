from .ordering import ORDERINGS, depth_mode_for, order_nodes
from .quantizer import QuantizerSpec
from .codec import (
    ALPHA,
    DEPTH_CAP,
    MAX_EDGES,
    MAX_NODES,
    MAX_PARAM_TOKENS,
    MAX_SLOTS,
    OMEGA,
    TOKEN_OFFSET,
    EdgeSequence,
    NodeSequence,
    ParamSequence,
    SequenceOverflow,
    SlotDescriptorSequence,
    TokenizedGraph,
    build_slot_sequence,
    decode_edges,
    decode_graph,
    decode_params,
    encode_edges,
    encode_graph,
    encode_nodes,
    encode_params,
    token_type,
    type_token,
)

__all__ = [
    "ORDERINGS",
    "depth_mode_for",
    "order_nodes",
    "QuantizerSpec",
    "ALPHA",
    "OMEGA",
    "TOKEN_OFFSET",
    "DEPTH_CAP",
    "MAX_NODES",
    "MAX_PARAM_TOKENS",
    "MAX_EDGES",
    "MAX_SLOTS",
    "EdgeSequence",
    "NodeSequence",
    "ParamSequence",
    "SequenceOverflow",
    "SlotDescriptorSequence",
    "TokenizedGraph",
    "build_slot_sequence",
    "decode_edges",
    "decode_graph",
    "decode_params",
    "encode_edges",
    "encode_graph",
    "encode_nodes",
    "encode_params",
    "token_type",
    "type_token",
]
