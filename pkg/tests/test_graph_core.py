import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matgen.graph import (
    DEPTH_TO_GENERATOR,
    DEPTH_TO_OUTPUT,
    GraphError,
    MaterialGraph,
    ParamValue,
    in_slot,
    out_slot,
    validate_graph,
)


def chain(library, names):
    g = MaterialGraph(library)
    ids = [g.add_node(name) for name in names]
    for a, b in zip(ids, ids[1:]):
        g.add_edge(out_slot(a), in_slot(b))
    return g, ids


def test_first_node_gets_id_zero(library):
    g = MaterialGraph(library)
    assert g.add_node("uniform_color") == 0


def test_sequential_ids(library):
    g = MaterialGraph(library)
    assert [g.add_node("checker") for _ in range(3)] == [0, 1, 2]


def test_param_above_max_rejected(library):
    g = MaterialGraph(library)
    schema = library.by_name("checker")
    k = schema.param_index("tiles")
    with pytest.raises(GraphError, match="outside"):
        g.add_node("checker", [ParamValue(k, (99.0,))])


def test_param_index_out_of_range(library):
    g = MaterialGraph(library)
    with pytest.raises(GraphError, match="out of range"):
        g.add_node("invert", [ParamValue(3, (0.5,))])


def test_unknown_type_rejected(library):
    g = MaterialGraph(library)
    with pytest.raises(GraphError, match="unknown operator"):
        g.add_node("no_such_op")


def test_add_edge_then_two_cycle_rejected(library):
    g = MaterialGraph(library)
    a = g.add_node("blur")
    b = g.add_node("invert")
    g.add_edge(out_slot(a), in_slot(b))
    with pytest.raises(GraphError, match="cycle"):
        g.add_edge(out_slot(b), in_slot(a))


def test_longer_cycle_rejected(library):
    g = MaterialGraph(library)
    a = g.add_node("blur")
    b = g.add_node("invert")
    c = g.add_node("sharpen")
    g.add_edge(out_slot(a), in_slot(b))
    g.add_edge(out_slot(b), in_slot(c))
    with pytest.raises(GraphError, match="cycle"):
        g.add_edge(out_slot(c), in_slot(a))


def test_occupied_input_slot(library):
    g = MaterialGraph(library)
    a = g.add_node("checker")
    b = g.add_node("brick")
    c = g.add_node("invert")
    g.add_edge(out_slot(a), in_slot(c))
    with pytest.raises(GraphError, match="occupied"):
        g.add_edge(out_slot(b), in_slot(c))


def test_direction_mismatch(library):
    g = MaterialGraph(library)
    a = g.add_node("checker")
    b = g.add_node("invert")
    with pytest.raises(GraphError, match="output slot"):
        g.add_edge(in_slot(b), in_slot(b))
    with pytest.raises(GraphError, match="input slot"):
        g.add_edge(out_slot(a), out_slot(b))


def test_dangling_slot_ref(library):
    g = MaterialGraph(library)
    a = g.add_node("checker")
    with pytest.raises(GraphError, match="no node"):
        g.add_edge(out_slot(a), in_slot(7))
    b = g.add_node("invert")
    with pytest.raises(GraphError, match="has no"):
        g.add_edge(out_slot(a, 5), in_slot(b))


def test_topological_order_chain(library):
    g, ids = chain(library, ["checker", "invert", "output_albedo"])
    assert g.topological_order() == ids


def test_topological_order_disconnected_tie_break(library):
    g = MaterialGraph(library)
    g.add_node("checker")
    g.add_node("brick")
    assert g.topological_order() == [0, 1]


def test_topological_order_diamond_brute_force(library):
    # A feeds B and C, both feed blend D through separate input slots
    g = MaterialGraph(library)
    a = g.add_node("checker")
    b = g.add_node("invert")
    c = g.add_node("blur")
    d = g.add_node("blend")
    g.add_edge(out_slot(a), in_slot(b))
    g.add_edge(out_slot(a), in_slot(c))
    g.add_edge(out_slot(b), in_slot(d, 0))
    g.add_edge(out_slot(c), in_slot(d, 1))

    precede = [(a, b), (a, c), (b, d), (c, d)]
    valid_orders = [
        perm
        for perm in itertools.permutations([a, b, c, d])
        if all(perm.index(u) < perm.index(v) for u, v in precede)
    ]
    order = g.topological_order()
    assert tuple(order) in set(valid_orders)
    assert order[0] == a and order[-1] == d
    assert g.topological_order() == order  # deterministic


def test_depth_output_marker_is_zero(library):
    g, ids = chain(library, ["checker", "invert", "output_albedo"])
    assert g.node_depth(ids[2], DEPTH_TO_OUTPUT) == 0


def test_depth_generator_is_zero(library):
    g, ids = chain(library, ["checker", "invert", "output_albedo"])
    assert g.node_depth(ids[0], DEPTH_TO_GENERATOR) == 0


def test_depth_chain_bfs(library):
    g, ids = chain(library, ["checker", "invert", "blur", "output_albedo"])
    assert g.node_depth(ids[1], DEPTH_TO_OUTPUT) == 2
    assert g.node_depth(ids[1], DEPTH_TO_GENERATOR) == 1
    assert g.node_depth(ids[0], DEPTH_TO_OUTPUT) == 3


def test_depth_unreachable_sentinel(library):
    g = MaterialGraph(library)
    a = g.add_node("checker")
    b = g.add_node("invert")
    m = g.add_node("output_albedo")
    g.add_edge(out_slot(a), in_slot(b))
    g.add_edge(out_slot(b), in_slot(m))
    lone = g.add_node("brick")  # no path to the marker
    depths = g.node_depths(DEPTH_TO_OUTPUT)
    assert depths[lone] == max(depths[a], depths[b], depths[m]) + 1


def test_freeze_blocks_mutation(library):
    g, _ = chain(library, ["checker", "invert"])
    g.freeze()
    with pytest.raises(GraphError, match="frozen"):
        g.add_node("brick")


def test_subgraph_preserves_ids_and_params(library):
    g = MaterialGraph(library)
    schema = library.by_name("checker")
    a = g.add_node("checker", [ParamValue(schema.param_index("tiles"), (7.0,))])
    b = g.add_node("invert")
    m = g.add_node("output_albedo")
    g.add_edge(out_slot(a), in_slot(b))
    g.add_edge(out_slot(b), in_slot(m))
    sub = g.subgraph([a, b])
    assert sub.node_ids() == [a, b]
    assert sub.node(a).params[0].values == (7.0,)
    assert len(sub.edges) == 1
    assert not validate_graph(sub)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_validity_closed_under_construction(library, data):
    rng_seed = data.draw(st.integers(0, 2**30))
    rng = np.random.default_rng(rng_seed)
    g = MaterialGraph(library)
    pool = [s.type.name for s in library]
    for _ in range(data.draw(st.integers(1, 14))):
        g.add_node(pool[int(rng.integers(len(pool)))])
    for _ in range(data.draw(st.integers(0, 25))):
        src = int(rng.integers(len(g.nodes)))
        dst = int(rng.integers(len(g.nodes)))
        src_schema = g.schema_of(src)
        dst_schema = g.schema_of(dst)
        if dst_schema.num_input_slots == 0:
            continue
        try:
            g.add_edge(
                out_slot(src, int(rng.integers(src_schema.num_output_slots))),
                in_slot(dst, int(rng.integers(dst_schema.num_input_slots))),
            )
        except GraphError:
            pass  # rejected mutations must leave the graph untouched
    assert validate_graph(g) == []
    order = g.topological_order()
    position = {nid: i for i, nid in enumerate(order)}
    for e in g.edges:
        assert position[e.src.node_id] < position[e.dst.node_id]
