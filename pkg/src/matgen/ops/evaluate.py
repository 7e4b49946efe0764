"""Graph evaluation: run kernels in topological order to produce material channels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..graph.graph import MaterialGraph
from ..graph.types import GraphError, Node, ParamKind
from .image import ChannelImage
from .library import MATERIAL_CHANNELS, builtin_kernels


@dataclass
class MaterialOutput:
    """The five named material channels at a shared resolution."""

    albedo: ChannelImage
    normal: ChannelImage
    roughness: ChannelImage
    height: ChannelImage
    metallic: ChannelImage

    def channel(self, name: str) -> ChannelImage:
        return getattr(self, name)

    def channels(self) -> dict[str, ChannelImage]:
        return {name: getattr(self, name) for name in MATERIAL_CHANNELS}


def resolve_params(graph: MaterialGraph, node: Node) -> dict:
    """Full parameter assignment for a node: schema defaults overlaid with
    the node's explicit entries, shaped per kind (scalar float/int, vector
    array, array-of-vectors as an (n, dim) array)."""
    schema = graph.library.schema(node.type)
    values = {p.name: np.asarray(p.default_value, dtype=np.float64) for p in schema.params}
    for pv in node.params:
        ps = schema.param(pv.param_index)
        values[ps.name] = np.asarray(pv.values, dtype=np.float64)
    shaped = {}
    for p in schema.params:
        raw = values[p.name]
        if p.kind is ParamKind.SCALAR:
            shaped[p.name] = int(raw[0]) if p.is_discrete else float(raw[0])
        elif p.kind is ParamKind.VECTOR:
            shaped[p.name] = raw
        else:
            shaped[p.name] = raw.reshape(-1, p.vector_dim)
    return shaped


def evaluate_graph(graph: MaterialGraph, resolution: int = 128) -> MaterialOutput:
    """Evaluate every node and collect the output-marker channels.

    Unconnected input slots receive an all-zero grayscale image. Channels
    whose marker is absent or unconnected come back as all zeros. When a
    channel has several markers, the lowest node id wins.
    """
    if resolution <= 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    kernels = builtin_kernels()
    w = h = resolution
    produced: dict[tuple[int, int], ChannelImage] = {}
    for nid in graph.topological_order():
        node = graph.node(nid)
        schema = graph.library.schema(node.type)
        if schema.type.name not in kernels:
            raise GraphError(f"no kernel for operator {schema.type.name!r}")
        inputs = []
        for k in range(schema.num_input_slots):
            edge = graph.incoming_edge(nid, k)
            if edge is None:
                inputs.append(ChannelImage.zeros(w, h, 1))
            else:
                inputs.append(produced[(edge.src.node_id, edge.src.slot_index)])
        outputs = kernels[schema.type.name].eval(inputs, resolve_params(graph, node), w, h)
        if len(outputs) != schema.num_output_slots:
            raise GraphError(f"{schema.type.name}: kernel produced {len(outputs)} outputs, schema says {schema.num_output_slots}")
        for j, img in enumerate(outputs):
            produced[(nid, j)] = img

    channels: dict[str, ChannelImage] = {}
    for name in MATERIAL_CHANNELS:
        marker_nodes = sorted(
            n.node_id for n in graph.nodes if n.type.name == f"output_{name}"
        )
        img = None
        if marker_nodes:
            img = produced.get((marker_nodes[0], 0))
        if img is None:
            img = ChannelImage.zeros(w, h, 1)
        if name in ("albedo", "normal"):
            img = img.to_rgb()
        else:
            img = img.to_gray()
        channels[name] = img
    return MaterialOutput(**channels)
