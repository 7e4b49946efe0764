"""Corpus directory layout: one graph file per sample plus a manifest."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..data.forge import CorpusSample
from ..graph.graph import MaterialGraph, OperatorLibrary
from .graphfile import load_graph, save_graph

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1


@dataclass
class CorpusOnDisk:
    train: list[MaterialGraph]
    val: list[MaterialGraph]
    manifest: dict


def write_corpus(
    out_dir: str | Path,
    train: list[CorpusSample],
    val: list[CorpusSample],
    library: OperatorLibrary,
    seed: int,
) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    samples = []
    for split, group in (("train", train), ("val", val)):
        for s in group:
            fname = f"g{s.base_index:05d}_{s.aug_index:03d}.json"
            save_graph(s.graph, out / fname)
            samples.append({"file": fname, "base": s.base_index, "aug": s.aug_index, "split": split})
    samples.sort(key=lambda s: s["file"])
    manifest = {
        "format_version": MANIFEST_VERSION,
        "seed": seed,
        "library_version": library.version,
        "library_hash": library.content_hash,
        "train_count": len(train),
        "val_count": len(val),
        "samples": samples,
    }
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


def read_corpus(corpus_dir: str | Path, library: OperatorLibrary) -> CorpusOnDisk:
    root = Path(corpus_dir)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.exists():
        raise FileNotFoundError(f"no {MANIFEST_NAME} in {root}")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("library_hash") != library.content_hash:
        raise ValueError(
            f"corpus was built against library {manifest.get('library_hash')}, "
            f"current library is {library.content_hash}"
        )
    train, val = [], []
    for s in manifest["samples"]:
        g = load_graph(root / s["file"], library)
        (train if s["split"] == "train" else val).append(g)
    return CorpusOnDisk(train=train, val=val, manifest=manifest)
