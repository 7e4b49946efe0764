"""Canonical text format for material graphs.

JSON documents with a fixed canonical form: nodes sorted by id,
parameters by schema index, edges by (destination node, destination slot,
source node, source slot), keys sorted, two-space indent, trailing
newline. Parsing a canonical file and re-serializing it is byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..graph.graph import MaterialGraph, OperatorLibrary
from ..graph.types import GraphError, ParamValue, in_slot, out_slot

FORMAT_VERSION = 1


class GraphFileError(GraphError):
    pass


def graph_to_doc(graph: MaterialGraph) -> dict:
    nodes = []
    for n in sorted(graph.nodes, key=lambda n: n.node_id):
        schema = graph.library.schema(n.type)
        nodes.append({
            "id": n.node_id,
            "type": n.type.name,
            "params": [
                {"name": schema.param(p.param_index).name, "values": list(p.values)}
                for p in n.params
            ],
        })
    edges = sorted(
        (
            {
                "from": [e.src.node_id, e.src.slot_index],
                "to": [e.dst.node_id, e.dst.slot_index],
            }
            for e in graph.edges
        ),
        key=lambda e: (e["to"][0], e["to"][1], e["from"][0], e["from"][1]),
    )
    return {
        "format_version": FORMAT_VERSION,
        "library": {"version": graph.library.version, "hash": graph.library.content_hash},
        "nodes": nodes,
        "edges": edges,
    }


def serialize_graph(graph: MaterialGraph) -> str:
    return json.dumps(graph_to_doc(graph), sort_keys=True, indent=2) + "\n"


def parse_graph(text: str, library: OperatorLibrary, strict_library: bool = True) -> MaterialGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise GraphFileError(f"not valid JSON: {err}") from None
    if doc.get("format_version") != FORMAT_VERSION:
        raise GraphFileError(f"unsupported format version {doc.get('format_version')!r}")
    lib_info = doc.get("library", {})
    if strict_library and lib_info.get("hash") not in (None, library.content_hash):
        raise GraphFileError(
            f"library hash mismatch: file has {lib_info.get('hash')}, expected {library.content_hash}"
        )
    graph = MaterialGraph(library)
    for node in doc.get("nodes", []):
        schema = library.by_name(node["type"])
        params = []
        for p in node.get("params", []):
            params.append(ParamValue(schema.param_index(p["name"]), tuple(p["values"])))
        params.sort(key=lambda p: p.param_index)
        graph.add_node(schema.type, params, node_id=int(node["id"]))
    for edge in doc.get("edges", []):
        graph.add_edge(
            out_slot(int(edge["from"][0]), int(edge["from"][1])),
            in_slot(int(edge["to"][0]), int(edge["to"][1])),
        )
    return graph


def save_graph(graph: MaterialGraph, path: str | Path) -> None:
    Path(path).write_text(serialize_graph(graph))


def load_graph(path: str | Path, library: OperatorLibrary, strict_library: bool = True) -> MaterialGraph:
    return parse_graph(Path(path).read_text(), library, strict_library=strict_library)
