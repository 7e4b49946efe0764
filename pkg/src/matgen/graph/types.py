"""Core data types for material node graphs.

A material graph is a directed acyclic multigraph of image operators.
Nodes are typed operator instances carrying sparse parameter overrides,
edges run from output slots to input slots, and each input slot accepts
at most one incoming edge.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field


class ParamKind(enum.Enum):
    SCALAR = "scalar"
    VECTOR = "vector"
    ARRAY = "array"  # variable-length array of fixed-dim vectors


class SlotDirection(enum.Enum):
    INPUT = "input"
    OUTPUT = "output"


class GraphError(Exception):
    """Raised when a graph operation would violate a structural invariant."""


@dataclass(frozen=True)
class OperatorType:
    """Identity of one operator in a library: a dense integer id plus a name."""

    id: int
    name: str

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError(f"operator id must be non-negative, got {self.id}")


@dataclass(frozen=True)
class ParamSchema:
    """Declaration of a single operator parameter.

    ``vector_dim`` is 1 for scalars. For ARRAY kinds the value is a flat
    list whose length is a positive multiple of ``vector_dim``.
    Discrete parameters hold integers; min/max/default are integral.
    """

    name: str
    kind: ParamKind
    vector_dim: int = 1
    is_discrete: bool = False
    min_value: float = 0.0
    max_value: float = 1.0
    default_value: tuple[float, ...] = (0.0,)

    def __post_init__(self) -> None:
        if self.kind is ParamKind.SCALAR and self.vector_dim != 1:
            raise ValueError(f"scalar param {self.name!r} must have vector_dim 1")
        if self.vector_dim < 1:
            raise ValueError(f"param {self.name!r}: vector_dim must be positive")
        if not self.min_value <= self.max_value:
            raise ValueError(f"param {self.name!r}: min {self.min_value} > max {self.max_value}")
        default = tuple(float(v) for v in self.default_value)
        object.__setattr__(self, "default_value", default)
        if self.kind is ParamKind.ARRAY:
            if len(default) == 0 or len(default) % self.vector_dim != 0:
                raise ValueError(f"param {self.name!r}: array default length must be a positive multiple of vector_dim")
        elif len(default) != self.vector_dim:
            raise ValueError(f"param {self.name!r}: default length {len(default)} != vector_dim {self.vector_dim}")
        for v in default:
            if not (self.min_value <= v <= self.max_value) or not math.isfinite(v):
                raise ValueError(f"param {self.name!r}: default component {v} outside [{self.min_value}, {self.max_value}]")
        if self.is_discrete:
            for v in (self.min_value, self.max_value, *default):
                if v != int(v):
                    raise ValueError(f"param {self.name!r}: discrete bounds and defaults must be integral")

    @property
    def discrete_span(self) -> int:
        """Number of admissible integer values for a discrete parameter."""
        if not self.is_discrete:
            raise ValueError(f"param {self.name!r} is not discrete")
        return int(self.max_value) - int(self.min_value) + 1

    def check_values(self, values: tuple[float, ...]) -> None:
        """Validate a flat value tuple against kind, dimension, and bounds."""
        n = len(values)
        if self.kind is ParamKind.ARRAY:
            if n == 0 or n % self.vector_dim != 0:
                raise GraphError(f"param {self.name!r}: array value length {n} is not a positive multiple of {self.vector_dim}")
        elif n != self.vector_dim:
            raise GraphError(f"param {self.name!r}: expected {self.vector_dim} components, got {n}")
        for v in values:
            if not math.isfinite(v):
                raise GraphError(f"param {self.name!r}: non-finite component {v}")
            if not (self.min_value <= v <= self.max_value):
                raise GraphError(f"param {self.name!r}: component {v} outside [{self.min_value}, {self.max_value}]")
            if self.is_discrete and v != int(v):
                raise GraphError(f"param {self.name!r}: discrete component {v} is not integral")


@dataclass(frozen=True)
class OperatorSchema:
    """Full signature of one operator type.

    Generators are exactly the operators with zero input slots. Output
    markers are pass-through annotations that tag which image feeds a
    final material channel.
    """

    type: OperatorType
    num_input_slots: int
    num_output_slots: int
    params: tuple[ParamSchema, ...]
    is_output_marker: bool = False

    def __post_init__(self) -> None:
        if self.num_input_slots < 0:
            raise ValueError(f"{self.type.name}: num_input_slots must be non-negative")
        if self.num_output_slots < 1:
            raise ValueError(f"{self.type.name}: num_output_slots must be positive")
        names = [p.name for p in self.params]
        if names != sorted(names):
            raise ValueError(f"{self.type.name}: params must be sorted alphabetically by name")
        if len(set(names)) != len(names):
            raise ValueError(f"{self.type.name}: duplicate param names")
        if self.is_output_marker and (self.num_input_slots != 1 or self.params):
            raise ValueError(f"{self.type.name}: output markers take one input and no params")

    @property
    def is_generator(self) -> bool:
        return self.num_input_slots == 0

    @property
    def num_slots(self) -> int:
        return self.num_input_slots + self.num_output_slots

    def param(self, index: int) -> ParamSchema:
        return self.params[index]

    def param_index(self, name: str) -> int:
        for i, p in enumerate(self.params):
            if p.name == name:
                return i
        raise KeyError(f"{self.type.name}: no param named {name!r}")


@dataclass(frozen=True)
class ParamValue:
    """A flat value assignment for one parameter of a node."""

    param_index: int
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass
class Node:
    """An operator instance. ``params`` holds only explicitly set entries,
    sorted by strictly increasing param_index."""

    node_id: int
    type: OperatorType
    params: list[ParamValue] = field(default_factory=list)


@dataclass(frozen=True)
class SlotRef:
    """Reference to one input or output slot of a node."""

    node_id: int
    direction: SlotDirection
    slot_index: int

    def __post_init__(self) -> None:
        if self.slot_index < 0:
            raise ValueError("slot_index must be non-negative")


@dataclass(frozen=True)
class Edge:
    """Directed connection from an output slot to an input slot."""

    src: SlotRef
    dst: SlotRef

    def __post_init__(self) -> None:
        if self.src.direction is not SlotDirection.OUTPUT:
            raise ValueError("edge source must be an output slot")
        if self.dst.direction is not SlotDirection.INPUT:
            raise ValueError("edge destination must be an input slot")


def out_slot(node_id: int, slot_index: int = 0) -> SlotRef:
    return SlotRef(node_id, SlotDirection.OUTPUT, slot_index)


def in_slot(node_id: int, slot_index: int = 0) -> SlotRef:
    return SlotRef(node_id, SlotDirection.INPUT, slot_index)
