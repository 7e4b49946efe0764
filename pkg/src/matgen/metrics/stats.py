"""Corpus-level graph statistics and their histogram comparison.

Seven statistic families: node count, weakly connected component count,
longest path, and, per operator type, node count, distance to the closest
output marker, connected input-slot count, plus the shortest directed
distance between every pair of operator types. Integer statistics bin at
unit width; pairwise distances cap at 32 with one overflow bin. Two
corpora are compared by normalizing each family histogram and averaging
the one-dimensional EMDs.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from ..graph.graph import DEPTH_TO_OUTPUT, MaterialGraph
from .emd import emd_1d, normalize_counts

PAIR_DISTANCE_CAP = 32  # larger distances land in the overflow bin


@dataclass
class GraphCorpusStats:
    graph_count: int = 0
    node_count: Counter = field(default_factory=Counter)
    component_count: Counter = field(default_factory=Counter)
    longest_path: Counter = field(default_factory=Counter)
    type_node_count: dict[str, Counter] = field(default_factory=dict)
    type_output_distance: dict[str, Counter] = field(default_factory=dict)
    type_input_degree: dict[str, Counter] = field(default_factory=dict)
    pair_distance: dict[tuple[str, str], Counter] = field(default_factory=dict)


def _components(graph: MaterialGraph) -> int:
    ids = graph.node_ids()
    if not ids:
        return 0
    seen: set[int] = set()
    comps = 0
    for root in ids:
        if root in seen:
            continue
        comps += 1
        queue = deque([root])
        seen.add(root)
        while queue:
            nid = queue.popleft()
            for nxt in graph.successors(nid) | graph.predecessors(nid):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return comps


def _longest_path(graph: MaterialGraph) -> int:
    best = {nid: 0 for nid in graph.node_ids()}
    for nid in graph.topological_order():
        for nxt in graph.successors(nid):
            best[nxt] = max(best[nxt], best[nid] + 1)
    return max(best.values(), default=0)


def _pair_distances(graph: MaterialGraph) -> dict[tuple[str, str], int]:
    """Minimum directed distance between nodes of each ordered type pair."""
    name_of = {n.node_id: n.type.name for n in graph.nodes}
    result: dict[tuple[str, str], int] = {}
    for src in graph.node_ids():
        dist = {src: 0}
        queue = deque([src])
        while queue:
            nid = queue.popleft()
            for nxt in graph.successors(nid):
                if nxt not in dist:
                    dist[nxt] = dist[nid] + 1
                    queue.append(nxt)
        for nid, d in dist.items():
            if nid == src:
                continue
            key = (name_of[src], name_of[nid])
            if key not in result or d < result[key]:
                result[key] = d
    return result


def graph_statistics(corpus: list[MaterialGraph]) -> GraphCorpusStats:
    stats = GraphCorpusStats(graph_count=len(corpus))
    for g in corpus:
        stats.node_count[len(g.nodes)] += 1
        stats.component_count[_components(g)] += 1
        stats.longest_path[_longest_path(g)] += 1
        depths = g.node_depths(DEPTH_TO_OUTPUT)
        per_type = Counter(n.type.name for n in g.nodes)
        for name, count in per_type.items():
            stats.type_node_count.setdefault(name, Counter())[count] += 1
        for n in g.nodes:
            stats.type_output_distance.setdefault(n.type.name, Counter())[depths[n.node_id]] += 1
            connected = len(g.in_edges(n.node_id))
            stats.type_input_degree.setdefault(n.type.name, Counter())[connected] += 1
        for key, d in _pair_distances(g).items():
            stats.pair_distance.setdefault(key, Counter())[min(d, PAIR_DISTANCE_CAP + 1)] += 1
    return stats


def _emd_between(ca: Counter, cb: Counter) -> float:
    top = max(max(ca, default=0), max(cb, default=0))
    return emd_1d(normalize_counts(ca, top), normalize_counts(cb, top))


def compare_stats(a: GraphCorpusStats, b: GraphCorpusStats) -> tuple[float, dict[str, float]]:
    """Mean EMD over every statistic histogram, with a per-family breakdown.

    Per-type count histograms treat a type absent from one corpus as a
    point mass at zero. The distance, degree, and pair families compare
    only keys present on both sides (an empty histogram has no
    distribution to compare against).
    """
    emds: list[float] = []
    breakdown: dict[str, float] = {}

    def record(name: str, values: list[float]) -> None:
        if values:
            breakdown[name] = sum(values) / len(values)
            emds.extend(values)

    record("node_count", [_emd_between(a.node_count, b.node_count)])
    record("component_count", [_emd_between(a.component_count, b.component_count)])
    record("longest_path", [_emd_between(a.longest_path, b.longest_path)])

    vals = []
    for name in sorted(set(a.type_node_count) | set(b.type_node_count)):
        ca = a.type_node_count.get(name) or Counter({0: max(a.graph_count, 1)})
        cb = b.type_node_count.get(name) or Counter({0: max(b.graph_count, 1)})
        ca = ca + Counter({0: a.graph_count - sum(ca.values())}) if sum(ca.values()) < a.graph_count else ca
        cb = cb + Counter({0: b.graph_count - sum(cb.values())}) if sum(cb.values()) < b.graph_count else cb
        vals.append(_emd_between(ca, cb))
    record("type_node_count", vals)

    for family, da, db in (
        ("type_output_distance", a.type_output_distance, b.type_output_distance),
        ("type_input_degree", a.type_input_degree, b.type_input_degree),
    ):
        record(family, [_emd_between(da[k], db[k]) for k in sorted(set(da) & set(db))])
    record(
        "pair_distance",
        [_emd_between(a.pair_distance[k], b.pair_distance[k]) for k in sorted(set(a.pair_distance) & set(b.pair_distance))],
    )

    overall = sum(emds) / len(emds) if emds else 0.0
    return overall, breakdown


def graph_stats_distance(corpus_a: list[MaterialGraph], corpus_b: list[MaterialGraph]) -> float:
    overall, _ = compare_stats(graph_statistics(corpus_a), graph_statistics(corpus_b))
    return overall
