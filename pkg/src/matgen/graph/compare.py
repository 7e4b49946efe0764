"""Structural graph comparison under an explicit node-id mapping."""

from __future__ import annotations

from .graph import MaterialGraph


def equal_under_mapping(
    a: MaterialGraph,
    b: MaterialGraph,
    mapping: dict[int, int],
    value_tolerance,
) -> bool:
    """True when `b` is `a` with node ids renamed through `mapping`.

    Types and edges must match exactly. Parameter entries must agree on
    indices and sizes; each component pair (va, vb) must satisfy
    value_tolerance(op_name, param, component, va, vb).
    """
    if len(a.nodes) != len(b.nodes) or len(a.edges) != len(b.edges):
        return False
    if set(mapping) != {n.node_id for n in a.nodes}:
        return False
    if set(mapping.values()) != {n.node_id for n in b.nodes}:
        return False
    for na in a.nodes:
        nb = b.node(mapping[na.node_id])
        if na.type.id != nb.type.id:
            return False
        if len(na.params) != len(nb.params):
            return False
        schema = a.library.schema(na.type)
        for pa, pb in zip(na.params, nb.params):
            if pa.param_index != pb.param_index or len(pa.values) != len(pb.values):
                return False
            ps = schema.param(pa.param_index)
            for i, (va, vb) in enumerate(zip(pa.values, pb.values)):
                if not value_tolerance(schema.type.name, ps, i % ps.vector_dim, va, vb):
                    return False
    edges_a = {
        (mapping[e.src.node_id], e.src.slot_index, mapping[e.dst.node_id], e.dst.slot_index)
        for e in a.edges
    }
    edges_b = {
        (e.src.node_id, e.src.slot_index, e.dst.node_id, e.dst.slot_index) for e in b.edges
    }
    return edges_a == edges_b


def quantization_tolerance(quantizer):
    """Tolerance: discrete exact, continuous within half a quantizer bin."""

    def check(op_name, ps, comp, va, vb):
        if ps.is_discrete:
            return va == vb
        half_bin = quantizer.bin_width((op_name, ps.name, comp)) * 0.5
        return abs(va - vb) <= half_bin * (1.0 + 1e-9) + 1e-15

    return check
