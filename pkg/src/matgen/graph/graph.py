"""The MaterialGraph container and its structural operations."""

from __future__ import annotations

import heapq
from collections import deque
from typing import Iterable, Sequence

from .types import (
    Edge,
    GraphError,
    Node,
    OperatorSchema,
    OperatorType,
    ParamValue,
    SlotDirection,
    SlotRef,
)

DEPTH_TO_OUTPUT = "to_output"
DEPTH_TO_GENERATOR = "to_generator"


class OperatorLibrary:
    """An immutable, ordered collection of operator schemas.

    Operator ids are dense indices into the library. The library hash
    identifies the exact schema set for checkpoint compatibility checks.
    """

    def __init__(self, schemas: Sequence[OperatorSchema], version: str = "builtin-1"):
        self.schemas = tuple(schemas)
        self.version = version
        for i, s in enumerate(self.schemas):
            if s.type.id != i:
                raise ValueError(f"schema {s.type.name!r} has id {s.type.id}, expected {i}")
        self._by_name = {s.type.name: s for s in self.schemas}
        if len(self._by_name) != len(self.schemas):
            raise ValueError("duplicate operator names in library")

    def __len__(self) -> int:
        return len(self.schemas)

    def __iter__(self):
        return iter(self.schemas)

    def schema(self, type_or_id: OperatorType | int) -> OperatorSchema:
        idx = type_or_id.id if isinstance(type_or_id, OperatorType) else type_or_id
        if not 0 <= idx < len(self.schemas):
            raise GraphError(f"unknown operator id {idx}")
        return self.schemas[idx]

    def by_name(self, name: str) -> OperatorSchema:
        try:
            return self._by_name[name]
        except KeyError:
            raise GraphError(f"unknown operator {name!r}") from None

    @property
    def content_hash(self) -> str:
        import hashlib
        import json

        payload = []
        for s in self.schemas:
            payload.append({
                "name": s.type.name,
                "in": s.num_input_slots,
                "out": s.num_output_slots,
                "marker": s.is_output_marker,
                "params": [
                    {
                        "name": p.name,
                        "kind": p.kind.value,
                        "dim": p.vector_dim,
                        "discrete": p.is_discrete,
                        "min": p.min_value,
                        "max": p.max_value,
                        "default": list(p.default_value),
                    }
                    for p in s.params
                ],
            })
        blob = json.dumps({"version": self.version, "ops": payload}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def generator_ids(self) -> list[int]:
        return [s.type.id for s in self.schemas if s.is_generator and not s.is_output_marker]

    @property
    def output_marker_ids(self) -> list[int]:
        return [s.type.id for s in self.schemas if s.is_output_marker]

    @property
    def max_param_count(self) -> int:
        return max((len(s.params) for s in self.schemas), default=0)

    @property
    def max_vector_dim(self) -> int:
        return max((p.vector_dim for s in self.schemas for p in s.params), default=1)

    @property
    def max_slots_per_node(self) -> int:
        return max((s.num_slots for s in self.schemas), default=1)

    @property
    def max_discrete_span(self) -> int:
        spans = [p.discrete_span for s in self.schemas for p in s.params if p.is_discrete]
        return max(spans, default=0)


class MaterialGraph:
    """Mutable-until-frozen DAG multigraph of operator nodes.

    Nodes get stable integer ids at insertion. Structural invariants
    (acyclicity, one edge per input slot, resolvable slot references)
    are enforced at every mutation, so a graph built through add_node
    and add_edge is valid by construction.
    """

    def __init__(self, library: OperatorLibrary):
        self.library = library
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []
        self._by_id: dict[int, Node] = {}
        self._next_id = 0
        self._frozen = False
        # input slot occupancy: (node_id, slot) -> Edge
        self._in_edge: dict[tuple[int, int], Edge] = {}
        # adjacency by node id
        self._succ: dict[int, set[int]] = {}
        self._pred: dict[int, set[int]] = {}

    @property
    def library_ref(self) -> str:
        return self.library.content_hash

    def __contains__(self, node_id: int) -> bool:
        return node_id in self._by_id

    def node(self, node_id: int) -> Node:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise GraphError(f"no node with id {node_id}") from None

    def schema_of(self, node_id: int) -> OperatorSchema:
        return self.library.schema(self.node(node_id).type)

    def node_ids(self) -> list[int]:
        return [n.node_id for n in self.nodes]

    def freeze(self) -> "MaterialGraph":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _check_mutable(self) -> None:
        if self._frozen:
            raise GraphError("graph is frozen")

    # -- construction ------------------------------------------------------

    def add_node(
        self,
        type: OperatorType | int | str,
        params: Iterable[ParamValue] = (),
        node_id: int | None = None,
    ) -> int:
        """Append a node and return its id.

        Params must reference schema indices in strictly increasing order
        and satisfy the schema's kind, dimension, and bound constraints.
        An explicit node_id may be given (e.g. when parsing a file) and
        must be unused.
        """
        self._check_mutable()
        if isinstance(type, str):
            schema = self.library.by_name(type)
        else:
            schema = self.library.schema(type)
        plist = list(params)
        last = -1
        for pv in plist:
            if not 0 <= pv.param_index < len(schema.params):
                raise GraphError(f"{schema.type.name}: param index {pv.param_index} out of range")
            if pv.param_index <= last:
                raise GraphError(f"{schema.type.name}: param indices must be strictly increasing")
            last = pv.param_index
            schema.param(pv.param_index).check_values(pv.values)
        if node_id is None:
            node_id = self._next_id
        elif node_id in self._by_id:
            raise GraphError(f"node id {node_id} already in use")
        elif node_id < 0:
            raise GraphError("node id must be non-negative")
        node = Node(node_id=node_id, type=schema.type, params=plist)
        self.nodes.append(node)
        self._by_id[node_id] = node
        self._next_id = max(self._next_id, node_id + 1)
        self._succ[node_id] = set()
        self._pred[node_id] = set()
        return node_id

    def _resolve(self, ref: SlotRef) -> OperatorSchema:
        schema = self.schema_of(ref.node_id)
        limit = schema.num_input_slots if ref.direction is SlotDirection.INPUT else schema.num_output_slots
        if ref.slot_index >= limit:
            raise GraphError(
                f"node {ref.node_id} ({schema.type.name}) has no {ref.direction.value} slot {ref.slot_index}"
            )
        return schema

    def _reaches(self, start: int, goal: int) -> bool:
        """True when a directed path start -> ... -> goal exists."""
        if start == goal:
            return True
        seen = {start}
        stack = [start]
        while stack:
            for nxt in self._succ[stack.pop()]:
                if nxt == goal:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    def add_edge(self, src: SlotRef, dst: SlotRef) -> None:
        """Connect an output slot to a free input slot without creating a cycle."""
        self._check_mutable()
        if src.direction is not SlotDirection.OUTPUT:
            raise GraphError("edge source must be an output slot")
        if dst.direction is not SlotDirection.INPUT:
            raise GraphError("edge destination must be an input slot")
        self._resolve(src)
        self._resolve(dst)
        key = (dst.node_id, dst.slot_index)
        if key in self._in_edge:
            raise GraphError(f"input slot {key} already occupied")
        if self._reaches(dst.node_id, src.node_id):
            raise GraphError(f"edge {src.node_id}->{dst.node_id} would create a cycle")
        edge = Edge(src=src, dst=dst)
        self.edges.append(edge)
        self._in_edge[key] = edge
        self._succ[src.node_id].add(dst.node_id)
        self._pred[dst.node_id].add(src.node_id)

    # -- queries -----------------------------------------------------------

    def incoming_edge(self, node_id: int, slot_index: int) -> Edge | None:
        return self._in_edge.get((node_id, slot_index))

    def in_edges(self, node_id: int) -> list[Edge]:
        schema = self.schema_of(node_id)
        found = []
        for k in range(schema.num_input_slots):
            e = self._in_edge.get((node_id, k))
            if e is not None:
                found.append(e)
        return found

    def out_edges(self, node_id: int) -> list[Edge]:
        return [e for e in self.edges if e.src.node_id == node_id]

    def predecessors(self, node_id: int) -> set[int]:
        return set(self._pred[node_id])

    def successors(self, node_id: int) -> set[int]:
        return set(self._succ[node_id])

    def topological_order(self) -> list[int]:
        """Node ids with every edge source before its destination.

        Ties are broken by lowest node id so the result is deterministic.
        """
        indeg = {nid: len(self._pred[nid]) for nid in self._by_id}
        ready = [nid for nid, d in indeg.items() if d == 0]
        heapq.heapify(ready)
        order: list[int] = []
        while ready:
            nid = heapq.heappop(ready)
            order.append(nid)
            for nxt in sorted(self._succ[nid]):
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    heapq.heappush(ready, nxt)
        if len(order) != len(self.nodes):
            raise GraphError("cycle detected in topological_order")
        return order

    def node_depths(self, mode: str) -> dict[int, int]:
        """Hop distance per node to the nearest output marker or generator.

        DEPTH_TO_OUTPUT follows edges forward to the closest output-marker
        node; DEPTH_TO_GENERATOR follows edges backward to the closest
        generator. Nodes with no such path get max observed depth + 1.
        """
        if mode == DEPTH_TO_OUTPUT:
            sources = [n.node_id for n in self.nodes if self.library.schema(n.type).is_output_marker]
            step = self._pred  # walk against edge direction from the markers
        elif mode == DEPTH_TO_GENERATOR:
            sources = [
                n.node_id
                for n in self.nodes
                if self.library.schema(n.type).is_generator and not self.library.schema(n.type).is_output_marker
            ]
            step = self._succ
        else:
            raise ValueError(f"unknown depth mode {mode!r}")
        depths: dict[int, int] = {nid: -1 for nid in self._by_id}
        queue = deque()
        for nid in sorted(sources):
            depths[nid] = 0
            queue.append(nid)
        while queue:
            nid = queue.popleft()
            for nxt in step[nid]:
                if depths[nxt] < 0:
                    depths[nxt] = depths[nid] + 1
                    queue.append(nxt)
        reached = [d for d in depths.values() if d >= 0]
        sentinel = (max(reached) + 1) if reached else 1
        return {nid: (d if d >= 0 else sentinel) for nid, d in depths.items()}

    def node_depth(self, node_id: int, mode: str) -> int:
        if node_id not in self._by_id:
            raise GraphError(f"no node with id {node_id}")
        return self.node_depths(mode)[node_id]

    def subgraph(self, keep_ids: Iterable[int]) -> "MaterialGraph":
        """Induced subgraph on kept node ids, preserving ids and params."""
        keep = set(keep_ids)
        unknown = keep - set(self._by_id)
        if unknown:
            raise GraphError(f"subgraph references unknown nodes {sorted(unknown)}")
        sub = MaterialGraph(self.library)
        for n in self.nodes:
            if n.node_id in keep:
                sub.add_node(n.type, [ParamValue(p.param_index, p.values) for p in n.params], node_id=n.node_id)
        for e in self.edges:
            if e.src.node_id in keep and e.dst.node_id in keep:
                sub.add_edge(e.src, e.dst)
        return sub

    def copy(self) -> "MaterialGraph":
        return self.subgraph(self._by_id)
