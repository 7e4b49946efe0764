from .graphfile import (
    GraphFileError,
    graph_to_doc,
    load_graph,
    parse_graph,
    save_graph,
    serialize_graph,
)
from .corpus import CorpusOnDisk, read_corpus, write_corpus

__all__ = [
    "GraphFileError",
    "graph_to_doc",
    "load_graph",
    "parse_graph",
    "save_graph",
    "serialize_graph",
    "CorpusOnDisk",
    "read_corpus",
    "write_corpus",
]
