"""Standalone graph validator, independent of the construction-time checks.

add_node/add_edge already guard every invariant incrementally; this module
re-derives validity from scratch (DFS cycle detection, slot occupancy
counting, reference resolution, param bounds) so tests and the generation
pipeline can audit graphs without trusting the construction path.
"""

from __future__ import annotations

from .graph import MaterialGraph
from .types import GraphError, SlotDirection


def validate_graph(graph: MaterialGraph) -> list[str]:
    """Return a list of violation messages; empty means the graph is valid."""
    problems: list[str] = []
    ids = [n.node_id for n in graph.nodes]
    if len(set(ids)) != len(ids):
        problems.append("duplicate node ids")
    id_set = set(ids)

    # node-level checks
    for n in graph.nodes:
        try:
            schema = graph.library.schema(n.type)
        except GraphError:
            problems.append(f"node {n.node_id}: unknown operator id {n.type.id}")
            continue
        last = -1
        for pv in n.params:
            if not 0 <= pv.param_index < len(schema.params):
                problems.append(f"node {n.node_id}: param index {pv.param_index} out of range")
                continue
            if pv.param_index <= last:
                problems.append(f"node {n.node_id}: param indices not strictly increasing")
            last = pv.param_index
            try:
                schema.param(pv.param_index).check_values(pv.values)
            except GraphError as err:
                problems.append(f"node {n.node_id}: {err}")

    # edge-level checks
    seen_inputs: set[tuple[int, int]] = set()
    adjacency: dict[int, list[int]] = {nid: [] for nid in id_set}
    for i, e in enumerate(graph.edges):
        ok = True
        if e.src.direction is not SlotDirection.OUTPUT or e.dst.direction is not SlotDirection.INPUT:
            problems.append(f"edge {i}: direction mismatch")
            ok = False
        for ref, what in ((e.src, "source"), (e.dst, "destination")):
            if ref.node_id not in id_set:
                problems.append(f"edge {i}: dangling {what} node {ref.node_id}")
                ok = False
                continue
            schema = graph.library.schema(graph.node(ref.node_id).type)
            limit = schema.num_input_slots if ref.direction is SlotDirection.INPUT else schema.num_output_slots
            if ref.slot_index >= limit:
                problems.append(f"edge {i}: {what} slot {ref.slot_index} out of range for {schema.type.name}")
                ok = False
        if not ok:
            continue
        key = (e.dst.node_id, e.dst.slot_index)
        if key in seen_inputs:
            problems.append(f"edge {i}: input slot {key} has multiple incoming edges")
        seen_inputs.add(key)
        adjacency[e.src.node_id].append(e.dst.node_id)

    # cycle detection by iterative three-color DFS
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {nid: WHITE for nid in id_set}
    for root in ids:
        if color.get(root) != WHITE:
            continue
        stack: list[tuple[int, int]] = [(root, 0)]
        color[root] = GRAY
        while stack:
            nid, child_idx = stack[-1]
            children = adjacency.get(nid, [])
            if child_idx < len(children):
                stack[-1] = (nid, child_idx + 1)
                nxt = children[child_idx]
                if color.get(nxt) == GRAY:
                    problems.append(f"cycle through node {nxt}")
                    return problems
                if color.get(nxt) == WHITE:
                    color[nxt] = GRAY
                    stack.append((nxt, 0))
            else:
                color[nid] = BLACK
                stack.pop()

    return problems


def assert_valid(graph: MaterialGraph) -> None:
    problems = validate_graph(graph)
    if problems:
        raise GraphError("invalid graph: " + "; ".join(problems))


def is_valid(graph: MaterialGraph) -> bool:
    return not validate_graph(graph)
