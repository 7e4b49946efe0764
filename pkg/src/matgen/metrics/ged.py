"""Graph edit distance with node and edge insertions/deletions.

Node substitution is allowed only between equal operator types at zero
cost, so the distance decomposes as

    cost = node_cost * (|V1| + |V2| - 2 Mv) + edge_cost * (|E1| + |E2| - 2 Me)

over type-preserving partial node matchings; edges (including their slot
indices) count as matched when both endpoints are matched and the slots
agree. The search is A* over matchings with an admissible bound from
type-multiset and edge-count surpluses; above the exact-size cutoff a
beam-limited variant returns a flagged non-exact estimate.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass

from ..graph.graph import MaterialGraph

EXACT_CUTOFF = 12


@dataclass(frozen=True)
class GedResult:
    cost: float
    exact: bool


@dataclass(frozen=True)
class _Compact:
    types: tuple[int, ...]
    # edges keyed by endpoint indices: (u, out_slot, v, in_slot)
    edges: frozenset[tuple[int, int, int, int]]


def _compact(graph: MaterialGraph) -> _Compact:
    order = {nid: i for i, nid in enumerate(sorted(graph.node_ids()))}
    types = tuple(graph.node(nid).type.id for nid in sorted(graph.node_ids()))
    edges = frozenset(
        (order[e.src.node_id], e.src.slot_index, order[e.dst.node_id], e.dst.slot_index)
        for e in graph.edges
    )
    return _Compact(types=types, edges=edges)


def _edges_with(compact: _Compact, i: int, decided: int) -> list[tuple[int, int, int, int]]:
    """Edges joining node i with nodes < decided (i included)."""
    out = []
    for u, os_, v, is_ in compact.edges:
        if (u == i and v < decided) or (v == i and u < decided) or (u == i and v == i):
            out.append((u, os_, v, is_))
    return out


def _search(
    g1: _Compact,
    g2: _Compact,
    node_cost: float,
    edge_cost: float,
    beam_width: int | None,
    deadline: float | None,
) -> tuple[float, bool]:
    n1, n2 = len(g1.types), len(g2.types)
    e1, e2 = len(g1.edges), len(g2.edges)
    by_type2: dict[int, list[int]] = {}
    for j, t in enumerate(g2.types):
        by_type2.setdefault(t, []).append(j)

    def heuristic(i: int, used: frozenset[int], matched_edges: int, decided_e1: int) -> float:
        rem1: dict[int, int] = {}
        for t in g1.types[i:]:
            rem1[t] = rem1.get(t, 0) + 1
        avail2: dict[int, int] = {}
        for t, js in by_type2.items():
            avail2[t] = sum(1 for j in js if j not in used)
        future_mv = sum(min(c, avail2.get(t, 0)) for t, c in rem1.items())
        n_del = (n1 - i) - future_mv
        n_ins = (n2 - len(used)) - future_mv
        e1_rest = e1 - decided_e1
        e2_rest = e2 - matched_edges
        future_me = min(e1_rest, e2_rest)
        return node_cost * (n_del + n_ins) + edge_cost * ((e1_rest - future_me) + (e2_rest - future_me))

    # state: (f, tiebreak, i, mapping tuple, used, g_cost, matched_edges, decided_e1)
    start_h = heuristic(0, frozenset(), 0, 0)
    counter = itertools.count()
    heap = [(start_h, next(counter), 0, (), frozenset(), 0.0, 0, 0)]
    best_seen: dict[tuple[int, tuple], float] = {}
    exact = True

    while heap:
        if deadline is not None and time.monotonic() > deadline:
            exact = False
        if beam_width is not None and len(heap) > 4 * beam_width:
            heap = heapq.nsmallest(beam_width, heap)
            heapq.heapify(heap)
            exact = False
        f, _, i, mapping, used, g, matched_edges, decided_e1 = heapq.heappop(heap)
        if i == n1:
            # remaining g2 nodes inserted, remaining edges of both sides edited
            total = g + node_cost * (n2 - len(used)) + edge_cost * ((e1 - decided_e1) + (e2 - matched_edges))
            return total, exact
        key = (i, mapping)
        if best_seen.get(key, float("inf")) <= g:
            continue
        best_seen[key] = g

        local = _edges_with(g1, i, i + 1)
        # option 1: delete g1 node i (its decided edges are all deleted)
        g_del = g + node_cost + edge_cost * len(local)
        h_del = heuristic(i + 1, used, matched_edges, decided_e1 + len(local))
        heapq.heappush(heap, (g_del + h_del, next(counter), i + 1, mapping + (-1,), used, g_del, matched_edges, decided_e1 + len(local)))
        # option 2: map to an unused same-type g2 node
        for j in by_type2.get(g1.types[i], []):
            if j in used:
                continue
            img = dict(zip(range(i), mapping))
            img[i] = j
            new_matched = 0
            for u, os_, v, is_ in local:
                mu = img.get(u, -1)
                mv = img.get(v, -1)
                if mu >= 0 and mv >= 0 and (mu, os_, mv, is_) in g2.edges:
                    new_matched += 1
            g_map = g + edge_cost * (len(local) - new_matched)
            used2 = used | {j}
            h_map = heuristic(i + 1, used2, matched_edges + new_matched, decided_e1 + len(local))
            heapq.heappush(
                heap,
                (g_map + h_map, next(counter), i + 1, mapping + (j,), used2, g_map, matched_edges + new_matched, decided_e1 + len(local)),
            )
    raise RuntimeError("edit-distance search exhausted without reaching a goal")


def graph_edit_distance(
    g1: MaterialGraph,
    g2: MaterialGraph,
    node_cost: float = 1.0,
    edge_cost: float = 1.0,
    exact_cutoff: int = EXACT_CUTOFF,
    beam_width: int = 128,
    timeout: float | None = None,
) -> GedResult:
    c1, c2 = _compact(g1), _compact(g2)
    use_beam = max(len(c1.types), len(c2.types)) > exact_cutoff
    deadline = time.monotonic() + timeout if timeout is not None else None
    cost, exact = _search(c1, c2, node_cost, edge_cost, beam_width if use_beam else None, deadline)
    return GedResult(cost=cost, exact=exact and not use_beam)
