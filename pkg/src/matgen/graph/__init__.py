from .types import (
    Edge,
    GraphError,
    Node,
    OperatorSchema,
    OperatorType,
    ParamKind,
    ParamSchema,
    ParamValue,
    SlotDirection,
    SlotRef,
    in_slot,
    out_slot,
)
from .graph import DEPTH_TO_GENERATOR, DEPTH_TO_OUTPUT, MaterialGraph, OperatorLibrary
from .validation import assert_valid, is_valid, validate_graph

__all__ = [
    "Edge",
    "GraphError",
    "Node",
    "OperatorSchema",
    "OperatorType",
    "ParamKind",
    "ParamSchema",
    "ParamValue",
    "SlotDirection",
    "SlotRef",
    "in_slot",
    "out_slot",
    "DEPTH_TO_GENERATOR",
    "DEPTH_TO_OUTPUT",
    "MaterialGraph",
    "OperatorLibrary",
    "assert_valid",
    "is_valid",
    "validate_graph",
]
