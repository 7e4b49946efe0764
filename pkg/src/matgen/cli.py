"""Command-line interface for the full workflow: corpus forging, stage
training, sampling, evaluation, validation, rendering, bundling, and the
HTTP service."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data.forge import CorpusSpec, build_corpus, split_corpus
from .graph.validation import validate_graph
from .io.corpus import read_corpus, write_corpus
from .io.graphfile import load_graph, save_graph
from .metrics.distances import evaluate_corpora
from .nn.training import (
    TrainSettings,
    load_stage_model,
    load_training_state,
    save_stage_model,
    train_stage,
)
from .ops.evaluate import evaluate_graph
from .ops.export import write_png, write_ppm
from .ops.library import builtin_library
from .pipeline.sampler import ModelBundle, SamplerConfig, generate_graph

STAGE_FILES = {"nodes": "nodes.ckpt", "params": "params.ckpt", "edges": "edges.ckpt"}


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def cmd_forge_data(args) -> int:
    if args.augment < 1:
        return _fail("--augment must be >= 1")
    if args.graphs < 1:
        return _fail("--graphs must be >= 1")
    library = builtin_library()
    spec = CorpusSpec(
        graph_count=args.graphs,
        augmentations_per_graph=args.augment,
        min_nodes=args.min_nodes,
        max_nodes=args.max_nodes,
        seed=args.seed,
        tree_only=args.tree,
    )
    samples = build_corpus(library, spec)
    if args.val_bases > 0 and args.graphs > args.val_bases:
        train, val = split_corpus(samples, validation_base_graphs=args.val_bases, seed=args.seed)
    else:
        train, val = samples, []
    manifest = write_corpus(args.out, train, val, library, seed=args.seed)
    print(f"wrote {manifest['train_count']} train + {manifest['val_count']} val graphs to {args.out}")
    return 0


def cmd_train(args) -> int:
    library = builtin_library()
    corpus = read_corpus(args.corpus, library)
    settings = TrainSettings(
        ordering=args.order,
        seed=args.seed,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        patience=args.patience,
        max_steps=args.max_steps,
    )
    resume_state = None
    if args.resume:
        stage, resume_state, header = load_training_state(args.resume)
        if stage != args.stage:
            return _fail(f"snapshot is for stage {stage!r}, requested {args.stage!r}")
    result = train_stage(
        args.stage,
        corpus.train,
        corpus.val,
        library,
        settings=settings,
        resume_state=resume_state,
        snapshot_path=args.snapshot,
        log=print,
    )
    save_stage_model(result.model, args.out, history=result.history)
    log_path = Path(args.out).with_suffix(".log.json")
    log_path.write_text(json.dumps({"history": result.history, "steps": result.steps}, indent=2) + "\n")
    print(f"saved {args.stage} checkpoint (ordering {args.order}) to {args.out}; log at {log_path}")
    return 0


def load_bundle(models_dir: str | Path) -> tuple[ModelBundle, object]:
    library = builtin_library()
    root = Path(models_dir)
    loaded = {}
    for stage, fname in STAGE_FILES.items():
        path = root / fname
        if not path.exists():
            raise FileNotFoundError(f"missing {fname} in {root}")
        loaded[stage] = load_stage_model(path)
    for stage, model in loaded.items():
        if model.library_hash != library.content_hash:
            raise ValueError(
                f"{stage} checkpoint was trained against library {model.library_hash}, "
                f"current library is {library.content_hash}"
            )
    bundle = ModelBundle(nodes=loaded["nodes"], params=loaded["params"], edges=loaded["edges"])
    return bundle, library


def cmd_bundle(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    hashes = {}
    for stage, src in (("nodes", args.nodes), ("params", args.params), ("edges", args.edges)):
        model = load_stage_model(src)
        if model.stage != stage:
            return _fail(f"{src} holds a {model.stage!r} model, expected {stage!r}")
        save_stage_model(model, out / STAGE_FILES[stage])
        hashes[stage] = {
            "library_hash": model.library_hash,
            "quantizer_hash": model.quantizer.content_hash,
            "ordering": model.ordering,
        }
    if len({h["library_hash"] for h in hashes.values()}) != 1:
        return _fail("stage checkpoints disagree on the library hash")
    if len({h["quantizer_hash"] for h in hashes.values()}) != 1:
        return _fail("stage checkpoints disagree on the quantizer bounds")
    (out / "bundle.json").write_text(json.dumps(hashes, sort_keys=True, indent=2) + "\n")
    print(f"bundled three stages into {out}")
    return 0


def cmd_sample(args) -> int:
    try:
        bundle, library = load_bundle(args.models)
    except (FileNotFoundError, ValueError) as err:
        return _fail(str(err))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        config = SamplerConfig(
            temperature=args.temperature,
            seed=args.seed * 1_000_003 + i,
            greedy=args.greedy,
            max_nodes=args.max_nodes,
        )
        result = generate_graph(bundle, library, config)
        save_graph(result.graph, out / f"s{i:05d}.json")
        if args.render:
            output = evaluate_graph(result.graph, args.resolution)
            for name, img in output.channels().items():
                write_png(img, out / f"s{i:05d}_{name}.png")
    print(f"sampled {args.count} graphs into {out}")
    return 0


def _load_graph_dir(path: str | Path, library) -> list:
    root = Path(path)
    graphs = []
    for f in sorted(root.glob("*.json")):
        if f.name in ("manifest.json", "bundle.json"):
            continue
        graphs.append(load_graph(f, library))
    if not graphs:
        raise FileNotFoundError(f"no graph files in {root}")
    return graphs


def cmd_eval(args) -> int:
    library = builtin_library()
    try:
        generated = _load_graph_dir(args.generated, library)
        reference = _load_graph_dir(args.reference, library)
    except FileNotFoundError as err:
        return _fail(str(err))
    report = evaluate_corpora(generated, reference, resolution=args.resolution, with_renders=not args.no_render)
    payload = report.to_json()
    Path(args.out).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    print(f"graph-stats EMD:      {report.graph_stats_emd:.6f}")
    if report.render_stat_distance is not None:
        print(f"render-stat distance: {report.render_stat_distance:.6f}")
    if report.nn_edit is not None:
        print(
            f"nn edit distance:     {report.nn_edit.value:.4f} "
            f"({report.nn_edit.eligible_generated} generated / {report.nn_edit.eligible_reference} reference eligible)"
        )
    else:
        print(f"nn edit distance:     unavailable ({report.nn_edit_error})")
    print(f"report written to {args.out}")
    return 0


def cmd_validate(args) -> int:
    library = builtin_library()
    bad = 0
    for path in args.paths:
        try:
            g = load_graph(path, library)
            problems = validate_graph(g)
        except Exception as err:  # parse errors count as invalid files
            problems = [str(err)]
        if problems:
            bad += 1
            print(f"INVALID {path}: {'; '.join(problems)}")
        else:
            print(f"ok      {path}")
    return 1 if bad else 0


def cmd_render(args) -> int:
    library = builtin_library()
    g = load_graph(args.graph, library)
    output = evaluate_graph(g, args.resolution)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.graph).stem
    for name, img in output.channels().items():
        if args.format == "png":
            write_png(img, out / f"{stem}_{name}.png")
        else:
            ext = "pgm" if img.channels == 1 else "ppm"
            write_ppm(img, out / f"{stem}_{name}.{ext}")
    print(f"rendered {args.graph} at {args.resolution}px into {out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(models_dir=args.models, data_dir=args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matgen", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forge-data", help="synthesize a training corpus")
    p.add_argument("--graphs", type=int, required=True, help="number of base graphs")
    p.add_argument("--augment", type=int, default=100, help="perturbed copies per base graph (>= 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--min-nodes", type=int, default=5)
    p.add_argument("--max-nodes", type=int, default=120)
    p.add_argument("--val-bases", type=int, default=5, help="base graphs reserved for validation (0 disables)")
    p.add_argument("--tree", action="store_true", help="restrict every node to a single consumer")
    p.set_defaults(func=cmd_forge_data)

    p = sub.add_parser("train", help="train one generation stage")
    p.add_argument("--stage", choices=("nodes", "params", "edges"), required=True)
    p.add_argument("--order", choices=("r", "rr", "b", "t"), default="r")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--snapshot", default=None, help="write a resume-grade snapshot after each epoch")
    p.add_argument("--resume", default=None, help="resume from a training snapshot")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bundle", help="package three stage checkpoints")
    p.add_argument("--nodes", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bundle)

    p = sub.add_parser("sample", help="generate graphs from trained models")
    p.add_argument("--models", required=True, help="directory holding nodes/params/edges checkpoints")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--greedy", action="store_true")
    p.add_argument("--max-nodes", type=int, default=400)
    p.add_argument("--render", action="store_true")
    p.add_argument("--resolution", type=int, default=128)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="compare a generated corpus against a reference")
    p.add_argument("--generated", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--no-render", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("validate", help="validate graph files")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render", help="evaluate one graph to material channel images")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--format", choices=("png", "ppm"), default="png")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("serve", help="run the HTTP completion service")
    p.add_argument("--models", required=True)
    p.add_argument("--data-dir", default=None, help="session persistence directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as err:
        return _fail(str(err))


if __name__ == "__main__":
    sys.exit(main())
