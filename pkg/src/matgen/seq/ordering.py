"""Node orderings used to linearize a graph into a sequence.

Four strategies, from most to least consistent:

  r  -- breadth-first from the output markers, walking against edge
        direction, parents visited in input-slot order ("back to front").
  rr -- elementwise reversal of r ("front to back").
  b  -- breadth-first from the root nodes (no incoming edges), children
        visited in output-slot order; children sharing one output slot
        are shuffled with the given seed.
  t  -- a seeded random valid topological order.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ..graph.graph import MaterialGraph

ORDERINGS = ("r", "rr", "b", "t")


def _order_back_to_front(graph: MaterialGraph) -> list[int]:
    markers = sorted(
        n.node_id for n in graph.nodes if graph.library.schema(n.type).is_output_marker
    )
    order: list[int] = []
    visited: set[int] = set()

    def bfs(roots: list[int]) -> None:
        queue = deque(r for r in roots if r not in visited)
        visited.update(queue)
        while queue:
            nid = queue.popleft()
            order.append(nid)
            schema = graph.schema_of(nid)
            for k in range(schema.num_input_slots):
                edge = graph.incoming_edge(nid, k)
                if edge is not None and edge.src.node_id not in visited:
                    visited.add(edge.src.node_id)
                    queue.append(edge.src.node_id)

    bfs(markers)
    while len(order) < len(graph.nodes):
        leftover = min(nid for nid in graph.node_ids() if nid not in visited)
        bfs([leftover])
    return order


def _order_breadth_forward(graph: MaterialGraph, rng: np.random.Generator) -> list[int]:
    roots = sorted(nid for nid in graph.node_ids() if not graph.predecessors(nid))
    order: list[int] = []
    visited: set[int] = set(roots)
    queue = deque(roots)
    # group outgoing edges by (source node, source slot) once
    by_slot: dict[tuple[int, int], list[int]] = {}
    for e in graph.edges:
        by_slot.setdefault((e.src.node_id, e.src.slot_index), []).append(e.dst.node_id)
    while queue:
        nid = queue.popleft()
        order.append(nid)
        schema = graph.schema_of(nid)
        for j in range(schema.num_output_slots):
            kids = sorted(set(by_slot.get((nid, j), [])))
            if len(kids) > 1:
                rng.shuffle(kids)
            for kid in kids:
                if kid not in visited:
                    visited.add(kid)
                    queue.append(kid)
    # unreachable nodes cannot exist in a DAG (every node traces back to a root)
    assert len(order) == len(graph.nodes)
    return order


def _order_random_topological(graph: MaterialGraph, rng: np.random.Generator) -> list[int]:
    indeg = {nid: len(graph.predecessors(nid)) for nid in graph.node_ids()}
    ready = sorted(nid for nid, d in indeg.items() if d == 0)
    order: list[int] = []
    while ready:
        pick = int(rng.integers(len(ready)))
        nid = ready.pop(pick)
        order.append(nid)
        for nxt in sorted(graph.successors(nid)):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
        ready.sort()
    assert len(order) == len(graph.nodes)
    return order


def order_nodes(graph: MaterialGraph, ordering: str, seed: int = 0) -> list[int]:
    """Permutation of all node ids under the requested strategy."""
    if ordering not in ORDERINGS:
        raise ValueError(f"unknown ordering {ordering!r}, expected one of {ORDERINGS}")
    if ordering == "r":
        return _order_back_to_front(graph)
    if ordering == "rr":
        return list(reversed(_order_back_to_front(graph)))
    rng = np.random.default_rng([seed, len(graph.nodes)])
    if ordering == "b":
        return _order_breadth_forward(graph, rng)
    return _order_random_topological(graph, rng)


def depth_mode_for(ordering: str) -> str:
    """Depth side-sequence semantics: distance to the closest output marker
    for the back-to-front ordering, distance to the closest generator for
    all others."""
    from ..graph.graph import DEPTH_TO_GENERATOR, DEPTH_TO_OUTPUT

    return DEPTH_TO_OUTPUT if ordering == "r" else DEPTH_TO_GENERATOR
