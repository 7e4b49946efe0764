import numpy as np
import pytest

from matgen.graph import MaterialGraph, OperatorLibrary, ParamValue, validate_graph
from matgen.graph.types import OperatorSchema, OperatorType
from matgen.data import (
    CorpusSpec,
    augment,
    build_corpus,
    filter_corpus,
    overfit_corpus,
    split_corpus,
    synthesize_base_graphs,
    synthesize_graph,
)
from matgen.seq import encode_graph


def test_synthesis_deterministic(library):
    spec = CorpusSpec(graph_count=6, augmentations_per_graph=1, seed=13, max_nodes=20)
    a = synthesize_base_graphs(library, spec)
    b = synthesize_base_graphs(library, spec)
    from matgen.io import serialize_graph

    assert [serialize_graph(g) for g in a] == [serialize_graph(g) for g in b]


def test_synthesized_graphs_valid_and_sized(library):
    counts = []
    for i in range(120):
        g = synthesize_graph(library, np.random.default_rng([55, i]), 5, 120)
        assert validate_graph(g) == []
        markers = [n for n in g.nodes if library.schema(n.type).is_output_marker]
        generators = [n for n in g.nodes if library.schema(n.type).is_generator]
        assert markers and generators
        counts.append(len(g.nodes))
    assert min(counts) >= 5 and max(counts) <= 120
    assert max(counts) > 60  # the size range is actually exercised


def test_augment_preserves_structure_and_zero(library):
    g = MaterialGraph(library)
    checker = library.by_name("checker")
    levels = library.by_name("levels")
    a = g.add_node("checker", [ParamValue(checker.param_index("low"), (0.0,))])
    b = g.add_node("levels", [ParamValue(levels.param_index("gamma"), (2.0,))])
    from matgen.graph import in_slot, out_slot

    g.add_edge(out_slot(a), in_slot(b))
    copies = augment(g, count=20, seed=3)
    for c in copies:
        assert validate_graph(c) == []
        assert len(c.nodes) == 2 and len(c.edges) == 1
        assert c.node(a).params[0].values == (0.0,)  # 0.8*0 == 1.2*0
        gamma = c.node(b).params[0].values[0]
        assert 1.6 <= gamma <= 2.4


def test_augment_clamps_to_schema(library):
    g = MaterialGraph(library)
    checker = library.by_name("checker")
    g.add_node("checker", [ParamValue(checker.param_index("high"), (1.0,))])
    for c in augment(g, count=50, seed=5):
        v = c.node(0).params[0].values[0]
        assert 0.8 <= v <= 1.0


def test_augment_leaves_discrete_untouched(library):
    g = MaterialGraph(library)
    checker = library.by_name("checker")
    g.add_node("checker", [ParamValue(checker.param_index("tiles"), (7.0,))])
    assert all(c.node(0).params[0].values == (7.0,) for c in augment(g, count=10, seed=1))


def test_filter_drops_oversized_node_count(library):
    g = MaterialGraph(library)
    from matgen.graph import in_slot, out_slot

    prev = g.add_node("checker")
    for _ in range(401):
        nid = g.add_node("invert")
        g.add_edge(out_slot(prev), in_slot(nid))
        prev = nid
    kept, drops = filter_corpus([g])
    assert kept == [] and drops["nodes"] == 1


def test_filter_drops_wide_slots():
    wide = OperatorSchema(
        type=OperatorType(0, "wide"),
        num_input_slots=22,
        num_output_slots=1,
        params=(),
    )
    single = OperatorSchema(
        type=OperatorType(1, "single"),
        num_input_slots=0,
        num_output_slots=15,
        params=(),
    )
    lib = OperatorLibrary([wide, single], version="toy")
    g1 = MaterialGraph(lib)
    g1.add_node("wide")
    g2 = MaterialGraph(lib)
    g2.add_node("single")
    kept, drops = filter_corpus([g1, g2])
    assert kept == []
    assert drops["input_slots"] == 1 and drops["output_slots"] == 1


def test_filter_keeps_compliant_corpus(library, small_corpus):
    kept, drops = filter_corpus(small_corpus)
    assert kept == small_corpus
    assert all(v == 0 for v in drops.values())


def test_split_paper_counts(library):
    spec = CorpusSpec(graph_count=6, augmentations_per_graph=100, seed=2, min_nodes=5, max_nodes=8)
    samples = build_corpus(library, spec)
    assert len(samples) == 600
    train, val = split_corpus(samples, validation_base_graphs=5, seed=2)
    assert len(val) == 500
    assert {s.base_index for s in train}.isdisjoint({s.base_index for s in val})
    train2, val2 = split_corpus(samples, validation_base_graphs=5, seed=2)
    assert [id(s.graph) for s in val] == [id(s.graph) for s in val2]


def test_split_needs_enough_bases(library):
    spec = CorpusSpec(graph_count=4, augmentations_per_graph=2, seed=0, max_nodes=10)
    samples = build_corpus(library, spec)
    with pytest.raises(ValueError, match="at least"):
        split_corpus(samples, validation_base_graphs=5)


def test_build_corpus_rejects_zero_augment(library):
    with pytest.raises(ValueError, match=">= 1"):
        build_corpus(library, CorpusSpec(graph_count=2, augmentations_per_graph=0))


def test_corpus_encodes_within_caps(library, small_corpus, quantizer):
    for g in small_corpus[:10]:
        for ordering in ("r", "rr"):
            encode_graph(g, ordering, quantizer)  # raises SequenceOverflow on breach


def test_overfit_corpus_distinct_lead_tokens(library):
    graphs = overfit_corpus(library, count=8, seed=3, min_nodes=30, max_nodes=40)
    firsts = set()
    for g in graphs:
        assert validate_graph(g) == []
        from matgen.seq import encode_nodes

        seq = encode_nodes(g, "rr")
        firsts.add((seq.tokens[1], seq.depths[1]))
        outdeg = {}
        for e in g.edges:
            outdeg[e.src.node_id] = outdeg.get(e.src.node_id, 0) + 1
        assert all(v <= 1 for v in outdeg.values())
    assert len(firsts) == 8
