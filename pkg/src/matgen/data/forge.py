"""Synthetic training corpus: templated random material graphs with
parameter-perturbation augmentation, size filtering, and train/val splits.

Graphs follow layered-material recipes rather than uniform random wiring:
one or more generator chains are merged into a trunk, the trunk feeds the
albedo output, and optional side branches feed the normal, height,
roughness, and metallic channels. A tree-only mode restricts every
non-marker node to a single consumer, which yields front-to-back
sequences whose prefixes are closed under ancestry (useful for
autocompletion experiments).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..graph.graph import MaterialGraph, OperatorLibrary
from ..graph.types import ParamKind, ParamValue, in_slot, out_slot

GRAY_GENERATORS = (
    "brick", "cell_edges", "cell_noise", "checker", "crosshatch", "diamonds",
    "dots", "gradient_ramp", "grid_lines", "hex_dots", "polygon", "ridged_noise",
    "rings", "scratches", "speckle", "spiral", "staircase", "stripes",
    "triangles", "value_noise", "waves",
)
CHAIN_FILTERS = (
    "blur", "edge_detect", "height_scale", "invert", "levels", "mirror",
    "posterize", "sharpen", "threshold", "tile", "transform2d",
)
MERGE_FILTERS = ("blend", "warp")


@dataclass
class FilterThresholds:
    max_nodes: int = 400
    max_edges: int = 700
    max_input_slots: int = 21
    max_output_slots: int = 14


@dataclass
class CorpusSpec:
    graph_count: int = 200
    augmentations_per_graph: int = 100
    min_nodes: int = 5
    max_nodes: int = 120
    seed: int = 0
    tree_only: bool = False
    param_density: float = 0.4


@dataclass
class CorpusSample:
    graph: MaterialGraph
    base_index: int
    aug_index: int


def random_param_values(schema_param, rng: np.random.Generator) -> tuple[float, ...]:
    lo, hi = schema_param.min_value, schema_param.max_value
    if schema_param.is_discrete:
        return tuple(float(rng.integers(int(lo), int(hi) + 1)) for _ in range(schema_param.vector_dim))
    if schema_param.kind is ParamKind.ARRAY:
        entries = int(rng.integers(2, 6))
        n = entries * schema_param.vector_dim
    else:
        n = schema_param.vector_dim
    return tuple(float(v) for v in rng.uniform(lo, hi, size=n))


def random_params(schema, rng: np.random.Generator, density: float) -> list[ParamValue]:
    out = []
    for k, p in enumerate(schema.params):
        if rng.random() < density:
            out.append(ParamValue(param_index=k, values=random_param_values(p, rng)))
    return out


class _Builder:
    """Incremental graph builder tracking loose ends for padding."""

    def __init__(self, library: OperatorLibrary, rng: np.random.Generator, density: float):
        self.g = MaterialGraph(library)
        self.rng = rng
        self.density = density

    def add(self, name: str) -> int:
        schema = self.g.library.by_name(name)
        return self.g.add_node(schema.type, random_params(schema, self.rng, self.density))

    def chain(self, length: int) -> int:
        """Generator followed by `length` single-input filters; returns the tail."""
        tail = self.add(str(self.rng.choice(GRAY_GENERATORS)))
        for _ in range(length):
            tail = self.extend(tail)
        return tail

    def extend(self, tail: int) -> int:
        nid = self.add(str(self.rng.choice(CHAIN_FILTERS)))
        self.g.add_edge(out_slot(tail), in_slot(nid, 0))
        return nid

    def merge(self, a: int, b: int) -> int:
        nid = self.add(str(self.rng.choice(MERGE_FILTERS)))
        self.g.add_edge(out_slot(a), in_slot(nid, 0))
        self.g.add_edge(out_slot(b), in_slot(nid, 1))
        return nid

    def count(self) -> int:
        return len(self.g.nodes)


def synthesize_graph(
    library: OperatorLibrary,
    rng: np.random.Generator,
    min_nodes: int = 5,
    max_nodes: int = 120,
    tree_only: bool = False,
    param_density: float = 0.4,
) -> MaterialGraph:
    """One recipe-structured random graph with exactly `target` nodes,
    where target is drawn uniformly from [min_nodes, max_nodes]."""
    target = int(rng.integers(min_nodes, max_nodes + 1))
    b = _Builder(library, rng, param_density)

    # decide which material channels get a marker; albedo always does
    extra_channels = [c for c in ("normal", "height", "roughness", "metallic") if rng.random() < 0.75]
    branch_cost = 2 if tree_only else 1  # tree branches need their own generator
    markers = 1 + len(extra_channels)
    # trim channels that do not fit the budget (marker + branch overhead each)
    while extra_channels and markers + len(extra_channels) * branch_cost + 3 > target:
        extra_channels.pop()
        markers -= 1

    interior_budget = target - markers

    # trunk: 1..3 generator chains merged pairwise
    n_chains = int(rng.integers(1, 4))
    tails = []
    for _ in range(n_chains):
        if b.count() + (n_chains - len(tails)) * 2 >= interior_budget:
            break
        tails.append(b.chain(int(rng.integers(0, 3))))
    if not tails:
        tails.append(b.chain(0))
    while len(tails) > 1 and b.count() < interior_budget:
        a = tails.pop(int(rng.integers(len(tails))))
        c = tails.pop(int(rng.integers(len(tails))))
        tails.append(b.merge(a, c))
    trunk = tails[0]

    # side branches; in shared mode they tap existing nodes, in tree mode
    # they grow from fresh generators so every node keeps a single consumer
    branch_tails: dict[str, int] = {}
    for chan in extra_channels:
        if tree_only or b.count() + 2 > interior_budget:
            if b.count() + 2 <= interior_budget:
                src = b.chain(0)
            else:
                src = trunk if not tree_only else None
            if src is None:
                continue
        else:
            candidates = [n.node_id for n in b.g.nodes if not b.g.library.schema(n.type).is_output_marker]
            src = int(rng.choice(candidates))
        if chan == "normal":
            nid = b.add("normal_from_height")
        elif chan == "height":
            nid = b.add("height_scale")
        elif chan == "roughness":
            nid = b.add(str(rng.choice(("invert", "levels", "blur"))))
        else:
            nid = b.add("threshold")
        b.g.add_edge(out_slot(src), in_slot(nid, 0))
        branch_tails[chan] = nid

    # albedo gets a coloring stage when budget allows
    albedo_tail = trunk
    if b.count() < interior_budget:
        nid = b.add(str(rng.choice(("colorize", "to_color"))))
        b.g.add_edge(out_slot(albedo_tail), in_slot(nid, 0))
        albedo_tail = nid

    # pad loose ends until the interior budget is consumed exactly
    loose = [albedo_tail] + list(branch_tails.values())
    while b.count() < interior_budget:
        pick = int(rng.integers(len(loose)))
        loose[pick] = b.extend(loose[pick])
    albedo_tail = loose[0]
    for i, chan in enumerate(branch_tails):
        branch_tails[chan] = loose[1 + i]

    # attach markers
    def attach(chan: str, src: int) -> None:
        nid = b.add(f"output_{chan}")
        b.g.add_edge(out_slot(src), in_slot(nid, 0))

    attach("albedo", albedo_tail)
    for chan, src in branch_tails.items():
        attach(chan, src)

    return b.g


def synthesize_overfit_graph(
    library: OperatorLibrary,
    rng: np.random.Generator,
    lead_generator: str,
    min_nodes: int = 40,
    max_nodes: int = 52,
) -> MaterialGraph:
    """A tree graph whose front-to-back sequence starts with `lead_generator`.

    The lead generator heads a main chain strictly longer than every other
    root-to-marker path, so the back-to-front traversal ends on it and its
    reversal starts with it. Memorization corpora built this way have
    pairwise distinct sequences from the first token on, which keeps
    greedy prefix completion unambiguous at every cut.
    """
    target = int(rng.integers(min_nodes, max_nodes + 1))
    b = _Builder(library, rng, density=0.5)

    main_len = 10 + int(rng.integers(0, 4))
    main = b.add(lead_generator)
    for _ in range(main_len):
        main = b.extend(main)

    for _ in range(2 + int(rng.integers(0, 2))):
        side = b.chain(int(rng.integers(0, max(1, main_len - 6))))
        main = b.merge(side, main)

    branch_tails: dict[str, int] = {}
    for chan in ("normal", "height", "roughness", "metallic"):
        if rng.random() < 0.8:
            src = b.chain(int(rng.integers(0, 3)))
            if chan == "normal":
                nid = b.add("normal_from_height")
            elif chan == "height":
                nid = b.add("height_scale")
            elif chan == "roughness":
                nid = b.add(str(rng.choice(("invert", "levels", "blur"))))
            else:
                nid = b.add("threshold")
            b.g.add_edge(out_slot(src), in_slot(nid, 0))
            branch_tails[chan] = nid

    nid = b.add(str(rng.choice(("colorize", "to_color"))))
    b.g.add_edge(out_slot(main), in_slot(nid, 0))
    main = nid

    markers = 1 + len(branch_tails)
    while b.count() < target - markers:
        main = b.extend(main)

    for chan, src in [("albedo", main)] + list(branch_tails.items()):
        m = b.add(f"output_{chan}")
        b.g.add_edge(out_slot(src), in_slot(m, 0))
    return b.g


def overfit_corpus(
    library: OperatorLibrary,
    count: int = 20,
    seed: int = 0,
    min_nodes: int = 40,
    max_nodes: int = 52,
) -> list[MaterialGraph]:
    """Memorization corpus: `count` tree graphs, each led by a distinct
    generator type so the front-to-back sequences disagree at position one."""
    from ..seq.ordering import order_nodes

    if count > len(GRAY_GENERATORS):
        raise ValueError(f"at most {len(GRAY_GENERATORS)} distinct lead generators available")
    graphs = []
    for i in range(count):
        lead = GRAY_GENERATORS[i]
        for attempt in range(20):
            rng = np.random.default_rng([seed, i, attempt])
            g = synthesize_overfit_graph(library, rng, lead, min_nodes, max_nodes)
            back_to_front = order_nodes(g, "r")
            if back_to_front[-1] == 0 and g.node(0).type.name == lead:
                graphs.append(g)
                break
        else:
            raise RuntimeError(f"could not build an overfit graph led by {lead!r}")
    return graphs


def synthesize_base_graphs(library: OperatorLibrary, spec: CorpusSpec) -> list[MaterialGraph]:
    """Deterministic per seed; graph i uses the rng stream (seed, i)."""
    graphs = []
    for i in range(spec.graph_count):
        rng = np.random.default_rng([spec.seed, i])
        graphs.append(
            synthesize_graph(
                library,
                rng,
                min_nodes=spec.min_nodes,
                max_nodes=spec.max_nodes,
                tree_only=spec.tree_only,
                param_density=spec.param_density,
            )
        )
    return graphs


def augment(graph: MaterialGraph, count: int = 100, seed: int = 0) -> list[MaterialGraph]:
    """`count` structural copies with every explicitly set continuous
    component v redrawn uniformly from [0.8v, 1.2v] (endpoints sorted for
    negative v), then clamped to the schema bounds. Discrete parameters
    and the graph structure are untouched."""
    out = []
    for c in range(count):
        rng = np.random.default_rng([seed, c])
        copy = MaterialGraph(graph.library)
        for node in graph.nodes:
            schema = graph.library.schema(node.type)
            new_params = []
            for pv in node.params:
                ps = schema.param(pv.param_index)
                if ps.is_discrete:
                    new_params.append(ParamValue(pv.param_index, pv.values))
                    continue
                vals = []
                for v in pv.values:
                    lo, hi = sorted((0.8 * v, 1.2 * v))
                    drawn = rng.uniform(lo, hi) if hi > lo else v
                    vals.append(min(max(drawn, ps.min_value), ps.max_value))
                new_params.append(ParamValue(pv.param_index, tuple(vals)))
            copy.add_node(node.type, new_params, node_id=node.node_id)
        for e in graph.edges:
            copy.add_edge(e.src, e.dst)
        out.append(copy)
    return out


def filter_corpus(
    graphs: list[MaterialGraph], thresholds: FilterThresholds = FilterThresholds()
) -> tuple[list[MaterialGraph], dict[str, int]]:
    """Drop graphs breaching any size threshold; report per-criterion counts."""
    kept = []
    drops = {"nodes": 0, "edges": 0, "input_slots": 0, "output_slots": 0}
    for g in graphs:
        reasons = []
        if len(g.nodes) > thresholds.max_nodes:
            reasons.append("nodes")
        if len(g.edges) > thresholds.max_edges:
            reasons.append("edges")
        for n in g.nodes:
            schema = g.library.schema(n.type)
            if schema.num_input_slots > thresholds.max_input_slots:
                reasons.append("input_slots")
                break
        for n in g.nodes:
            schema = g.library.schema(n.type)
            if schema.num_output_slots > thresholds.max_output_slots:
                reasons.append("output_slots")
                break
        if reasons:
            for r in reasons:
                drops[r] += 1
        else:
            kept.append(g)
    return kept, drops


def build_corpus(library: OperatorLibrary, spec: CorpusSpec) -> list[CorpusSample]:
    """Base graphs expanded into augmentations; the corpus holds the
    augmented copies only."""
    if spec.augmentations_per_graph < 1:
        raise ValueError("augmentations_per_graph must be >= 1")
    bases = synthesize_base_graphs(library, spec)
    bases, _ = filter_corpus(bases)
    samples = []
    for i, base in enumerate(bases):
        for j, g in enumerate(augment(base, spec.augmentations_per_graph, seed=spec.seed * 100003 + i)):
            samples.append(CorpusSample(graph=g, base_index=i, aug_index=j))
    return samples


def split_corpus(
    samples: list[CorpusSample], validation_base_graphs: int = 5, seed: int = 0
) -> tuple[list[CorpusSample], list[CorpusSample]]:
    """All augmentations of the chosen base graphs form the validation set;
    no base graph contributes to both splits."""
    base_ids = sorted({s.base_index for s in samples})
    if len(base_ids) < validation_base_graphs + 1:
        raise ValueError(
            f"need at least {validation_base_graphs + 1} base graphs, have {len(base_ids)}"
        )
    rng = np.random.default_rng([seed, len(base_ids)])
    val_bases = set(rng.permutation(base_ids)[:validation_base_graphs].tolist())
    train = [s for s in samples if s.base_index not in val_bases]
    val = [s for s in samples if s.base_index in val_bases]
    return train, val
