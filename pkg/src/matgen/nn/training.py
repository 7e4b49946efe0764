"""Teacher-forced training with early stopping on validation loss.

Each stage is trained separately. The param and edge stages train their
generator jointly with the paired sequence encoder; both weight sets live
in one parameter dict under "f." and "g." prefixes so a single optimizer
state covers them. All randomness (weight init, batch shuffling) flows
from one generator whose state is captured in training snapshots, making
single-threaded resume bit-exact.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..graph.graph import MaterialGraph, OperatorLibrary
from ..seq.quantizer import QuantizerSpec
from .adam import AdamState, adam_step
from .autodiff import Tensor, zero_grads
from .checkpoint import load_checkpoint, save_checkpoint, tensors_to_params
from .model import TransformerConfig, init_weights
from .stages import (
    STAGES,
    StageConfigs,
    StageRows,
    edges_loss,
    featurize,
    nodes_loss,
    params_loss,
    stage_configs,
)


class TrainingError(RuntimeError):
    pass


@dataclass
class StageModel:
    """A trained stage: generator weights, optional encoder weights, and
    everything needed to reuse them consistently."""

    stage: str
    ordering: str
    configs: StageConfigs
    gen_weights: dict[str, Tensor]
    enc_weights: dict[str, Tensor] | None
    quantizer: QuantizerSpec
    library_hash: str

    def merged_params(self) -> dict[str, Tensor]:
        merged = {f"f.{k}": v for k, v in self.gen_weights.items()}
        if self.enc_weights is not None:
            merged.update({f"g.{k}": v for k, v in self.enc_weights.items()})
        return merged


def _config_to_json(cfg: TransformerConfig) -> dict:
    return {
        "layers": cfg.layers,
        "heads": cfg.heads,
        "hidden_dim": cfg.hidden_dim,
        "max_positions": cfg.max_positions,
        "causal": cfg.causal,
        "conditional": cfg.conditional,
        "pointer_head": cfg.pointer_head,
        "continuous_input": cfg.continuous_input,
        "token_streams": [list(s) for s in cfg.token_streams],
        "output_streams": [list(s) for s in cfg.output_streams],
    }


def _config_from_json(payload: dict) -> TransformerConfig:
    return TransformerConfig(
        layers=payload["layers"],
        heads=payload["heads"],
        hidden_dim=payload["hidden_dim"],
        max_positions=payload["max_positions"],
        causal=payload["causal"],
        conditional=payload["conditional"],
        pointer_head=payload["pointer_head"],
        continuous_input=payload["continuous_input"],
        token_streams=tuple((n, v) for n, v in payload["token_streams"]),
        output_streams=tuple((n, v) for n, v in payload["output_streams"]),
    )


def save_stage_model(model: StageModel, path: str | Path, history: list[dict] | None = None) -> None:
    header = {
        "kind": "stage_model",
        "stage": model.stage,
        "ordering": model.ordering,
        "library_hash": model.library_hash,
        "quantizer": model.quantizer.to_json(),
        "config_gen": _config_to_json(model.configs.generator),
        "config_enc": _config_to_json(model.configs.encoder) if model.configs.encoder else None,
        "history": history or [],
    }
    save_checkpoint(path, model.merged_params(), header, dtype="f32")


def load_stage_model(path: str | Path) -> StageModel:
    tensors, header = load_checkpoint(path)
    if header.get("kind") != "stage_model":
        raise TrainingError(f"{path}: not a stage model checkpoint")
    gen = {k[2:]: v for k, v in tensors.items() if k.startswith("f.")}
    enc = {k[2:]: v for k, v in tensors.items() if k.startswith("g.")}
    cfg_enc = header["config_enc"]
    return StageModel(
        stage=header["stage"],
        ordering=header["ordering"],
        configs=StageConfigs(
            generator=_config_from_json(header["config_gen"]),
            encoder=_config_from_json(cfg_enc) if cfg_enc else None,
        ),
        gen_weights=tensors_to_params(gen),
        enc_weights=tensors_to_params(enc) if enc else None,
        quantizer=QuantizerSpec.from_json(header["quantizer"]),
        library_hash=header["library_hash"],
    )


@dataclass
class TrainSettings:
    ordering: str = "r"
    seed: int = 0
    epochs: int = 30
    batch_size: int = 64  # the edge stage defaults to 16, see train_stage
    lr: float = 1e-4
    patience: int = 3
    max_steps: int | None = None
    stop_train_loss: float | None = None
    log_every: int | None = None


@dataclass
class TrainResult:
    model: StageModel
    history: list[dict] = field(default_factory=list)
    steps: int = 0
    best_val: float = math.inf
    stopped_early: bool = False


def _split_params(merged: dict[str, Tensor]) -> tuple[dict[str, Tensor], dict[str, Tensor] | None]:
    gen = {k[2:]: v for k, v in merged.items() if k.startswith("f.")}
    enc = {k[2:]: v for k, v in merged.items() if k.startswith("g.")}
    return gen, (enc or None)


def _batch_loss(stage: str, cfgs: StageConfigs, merged: dict[str, Tensor], rows: StageRows, idxs: list[int]):
    gen, enc = _split_params(merged)
    if stage == "nodes":
        return nodes_loss(gen, cfgs.generator, [rows.node_rows[i] for i in idxs])
    if stage == "params":
        assert enc is not None
        return params_loss(gen, enc, cfgs, [rows.param_rows[i] for i in idxs], rows.node_rows)
    assert enc is not None
    return edges_loss(gen, enc, cfgs, [rows.edge_rows[i] for i in idxs])


def evaluate_loss(stage: str, cfgs: StageConfigs, merged: dict[str, Tensor], rows: StageRows, batch_size: int = 64) -> float:
    """Mean teacher-forced loss over a row set, weighted by token count."""
    total, count = 0.0, 0
    for lo in range(0, len(rows), batch_size):
        idxs = list(range(lo, min(lo + batch_size, len(rows))))
        breakdown = _batch_loss(stage, cfgs, merged, rows, idxs)
        total += float(breakdown.loss.data) * breakdown.token_count
        count += breakdown.token_count
    return total / max(count, 1)


@dataclass
class _LoopState:
    merged: dict[str, Tensor]
    adam: AdamState
    rng: np.random.Generator
    epoch: int = 0
    steps: int = 0
    best_val: float = math.inf
    bad_epochs: int = 0
    best_snapshot: dict[str, np.ndarray] | None = None


def train_stage(
    stage: str,
    train_graphs: list[MaterialGraph],
    val_graphs: list[MaterialGraph],
    library: OperatorLibrary,
    quantizer: QuantizerSpec | None = None,
    settings: TrainSettings = TrainSettings(),
    layers: int = 2,
    heads: int = 4,
    hidden_dim: int = 64,
    resume_state: "_LoopState | None" = None,
    snapshot_path: str | Path | None = None,
    log=None,
) -> TrainResult:
    """Train one stage to the validation-loss minimum.

    Reencodes per epoch for the randomized orderings ("b", "t") so the
    model sees fresh linearizations; "r" and "rr" are deterministic and
    encoded once. Early stopping restores the best-validation weights.
    """
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    if not train_graphs:
        raise TrainingError("empty training set")
    if quantizer is None:
        quantizer = QuantizerSpec.from_corpus(library, train_graphs)
    cfgs = stage_configs(stage, library, layers=layers, heads=heads, hidden_dim=hidden_dim)
    batch_size = settings.batch_size if stage != "edges" else min(settings.batch_size, 16)

    if resume_state is None:
        gen_w = init_weights(cfgs.generator, seed=settings.seed)
        merged = {f"f.{k}": v for k, v in gen_w.items()}
        if cfgs.encoder is not None:
            enc_w = init_weights(cfgs.encoder, seed=settings.seed + 1)
            merged.update({f"g.{k}": v for k, v in enc_w.items()})
        state = _LoopState(merged=merged, adam=AdamState(), rng=np.random.default_rng(settings.seed))
    else:
        state = resume_state

    randomized = settings.ordering in ("b", "t")
    cached_train = cached_val = None
    if not randomized:
        cached_train = featurize(stage, train_graphs, settings.ordering, quantizer, seed=0)
        cached_val = featurize(stage, val_graphs, settings.ordering, quantizer, seed=0) if val_graphs else None

    history: list[dict] = []
    result = TrainResult(model=None, history=history)  # type: ignore[arg-type]
    t0 = time.time()
    stop = False
    while state.epoch < settings.epochs and not stop:
        epoch = state.epoch
        if randomized:
            train_rows = featurize(stage, train_graphs, settings.ordering, quantizer, seed=settings.seed * 1000 + epoch)
            val_rows = featurize(stage, val_graphs, settings.ordering, quantizer, seed=900001 + epoch) if val_graphs else None
        else:
            train_rows, val_rows = cached_train, cached_val

        perm = state.rng.permutation(len(train_rows))
        epoch_total, epoch_count = 0.0, 0
        for lo in range(0, len(perm), batch_size):
            idxs = perm[lo : lo + batch_size].tolist()
            breakdown = _batch_loss(stage, cfgs, state.merged, train_rows, idxs)
            loss_val = float(breakdown.loss.data)
            if not math.isfinite(loss_val):
                raise TrainingError(f"non-finite loss {loss_val} at step {state.steps} (stage {stage})")
            zero_grads(state.merged)
            breakdown.loss.backward()
            adam_step(state.merged, state.adam, lr=settings.lr)
            epoch_total += loss_val * breakdown.token_count
            epoch_count += breakdown.token_count
            state.steps += 1
            if settings.log_every and log and state.steps % settings.log_every == 0:
                log(f"[{stage}/{settings.ordering}] step {state.steps} loss {loss_val:.4f}")
            if settings.max_steps is not None and state.steps >= settings.max_steps:
                stop = True
                break
            if settings.stop_train_loss is not None and loss_val < settings.stop_train_loss:
                stop = True
                break

        train_loss = epoch_total / max(epoch_count, 1)
        val_loss = (
            evaluate_loss(stage, cfgs, state.merged, val_rows, batch_size) if val_rows is not None else train_loss
        )
        history.append({
            "epoch": epoch,
            "train_loss": train_loss,
            "val_loss": val_loss,
            "steps": state.steps,
            "seconds": round(time.time() - t0, 3),
        })
        if log:
            log(f"[{stage}/{settings.ordering}] epoch {epoch} train {train_loss:.4f} val {val_loss:.4f}")

        if val_loss < state.best_val - 1e-12:
            state.best_val = val_loss
            state.bad_epochs = 0
            state.best_snapshot = {k: v.data.copy() for k, v in state.merged.items()}
        else:
            state.bad_epochs += 1
            if state.bad_epochs >= settings.patience:
                stop = True

        state.epoch += 1
        if snapshot_path is not None:
            save_training_state(snapshot_path, stage, settings, state, library, quantizer)

    if state.best_snapshot is not None:
        for k, v in state.merged.items():
            v.data = state.best_snapshot[k].copy()

    gen, enc = _split_params(state.merged)
    result.model = StageModel(
        stage=stage,
        ordering=settings.ordering,
        configs=cfgs,
        gen_weights=gen,
        enc_weights=enc,
        quantizer=quantizer,
        library_hash=library.content_hash,
    )
    result.steps = state.steps
    result.best_val = state.best_val if state.best_val < math.inf else (history[-1]["val_loss"] if history else math.inf)
    result.stopped_early = stop
    return result


# ---------------------------------------------------------------------------
# resume-grade snapshots (float64, includes optimizer and rng state)


def save_training_state(
    path: str | Path,
    stage: str,
    settings: TrainSettings,
    state: _LoopState,
    library: OperatorLibrary,
    quantizer: QuantizerSpec,
) -> None:
    tensors: dict[str, np.ndarray] = {}
    for k, v in state.merged.items():
        tensors[f"w.{k}"] = v.data
    for k, v in state.adam.m.items():
        tensors[f"adam.m.{k}"] = v
    for k, v in state.adam.v.items():
        tensors[f"adam.v.{k}"] = v
    if state.best_snapshot:
        for k, v in state.best_snapshot.items():
            tensors[f"best.{k}"] = v
    header = {
        "kind": "train_state",
        "stage": stage,
        "ordering": settings.ordering,
        "seed": settings.seed,
        "library_hash": library.content_hash,
        "quantizer": quantizer.to_json(),
        "adam_step": state.adam.step,
        "epoch": state.epoch,
        "steps": state.steps,
        "best_val": state.best_val if math.isfinite(state.best_val) else None,
        "bad_epochs": state.bad_epochs,
        "rng_state": _rng_state_to_json(state.rng),
    }
    save_checkpoint(path, tensors, header, dtype="f64")


def load_training_state(path: str | Path) -> tuple[str, _LoopState, dict]:
    tensors, header = load_checkpoint(path)
    if header.get("kind") != "train_state":
        raise TrainingError(f"{path}: not a training snapshot")
    merged = {k[2:]: Tensor(v, requires_grad=True) for k, v in tensors.items() if k.startswith("w.")}
    adam = AdamState(step=header["adam_step"])
    for k, v in tensors.items():
        if k.startswith("adam.m."):
            adam.m[k[len("adam.m."):]] = v
        elif k.startswith("adam.v."):
            adam.v[k[len("adam.v."):]] = v
    best = {k[len("best."):]: v for k, v in tensors.items() if k.startswith("best.")}
    rng = _rng_state_from_json(header["rng_state"])
    state = _LoopState(
        merged=merged,
        adam=adam,
        rng=rng,
        epoch=header["epoch"],
        steps=header["steps"],
        best_val=header["best_val"] if header["best_val"] is not None else math.inf,
        bad_epochs=header["bad_epochs"],
        best_snapshot=best or None,
    )
    return header["stage"], state, header


def _rng_state_to_json(rng: np.random.Generator) -> dict:
    st = rng.bit_generator.state
    return {
        "bit_generator": st["bit_generator"],
        "state": {k: (int(v) if isinstance(v, (int, np.integer)) else v.tolist() if isinstance(v, np.ndarray) else v)
                  for k, v in st["state"].items()},
        "has_uint32": int(st.get("has_uint32", 0)),
        "uinteger": int(st.get("uinteger", 0)),
    }


def _rng_state_from_json(payload: dict) -> np.random.Generator:
    rng = np.random.default_rng(0)
    st = dict(payload)
    inner = dict(st["state"])
    for k, v in inner.items():
        if isinstance(v, list):
            inner[k] = np.array(v, dtype=np.uint64)
    rng.bit_generator.state = {
        "bit_generator": st["bit_generator"],
        "state": inner,
        "has_uint32": st["has_uint32"],
        "uinteger": st["uinteger"],
    }
    return rng
