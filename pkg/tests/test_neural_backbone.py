import math

import numpy as np
import pytest

from matgen.nn import (
    AdamState,
    Tensor,
    TrainSettings,
    adam_step,
    forward,
    init_weights,
    load_checkpoint,
    pointer_distribution,
    save_checkpoint,
    stage_configs,
    train_stage,
)
from matgen.nn.checkpoint import CheckpointError
from matgen.nn.model import TransformerConfig
from matgen.nn.training import (
    _LoopState,
    load_stage_model,
    load_training_state,
    save_stage_model,
)
from matgen.data.forge import synthesize_graph


def tiny_config(**overrides):
    base = dict(
        layers=1,
        heads=2,
        hidden_dim=8,
        max_positions=16,
        causal=True,
        token_streams=(("tok", 10), ("pos", 20)),
        output_streams=(("tok", 10),),
    )
    base.update(overrides)
    return TransformerConfig(**base)


def test_hidden_dim_divisibility_enforced():
    with pytest.raises(ValueError, match="divisible"):
        tiny_config(heads=3)


def test_zero_weights_give_uniform_logits():
    cfg = tiny_config()
    w = init_weights(cfg, seed=0)
    for t in w.values():
        t.data[...] = 0.0
    out = forward(w, cfg, tokens={"tok": np.array([[1, 2, 3]]), "pos": np.array([[1, 2, 3]])})
    logits = out.logits["tok"].data
    assert np.allclose(logits, logits[..., :1])


def test_causality_exact():
    cfg = tiny_config()
    w = init_weights(cfg, seed=1)
    toks = np.array([[1, 2, 3, 4, 5]])
    pos = np.array([[1, 2, 3, 4, 5]])
    base = forward(w, cfg, tokens={"tok": toks, "pos": pos}).logits["tok"].data
    toks2 = toks.copy()
    toks2[0, 3] = 9  # positions 0..2 must not change
    changed = forward(w, cfg, tokens={"tok": toks2, "pos": pos}).logits["tok"].data
    assert np.array_equal(base[0, :3], changed[0, :3])
    assert not np.array_equal(base[0, 3:], changed[0, 3:])


def test_encoder_sees_whole_sequence():
    cfg = tiny_config(causal=False, output_streams=())
    w = init_weights(cfg, seed=2)
    toks = np.array([[1, 2, 3, 4]])
    pos = np.array([[1, 2, 3, 4]])
    base = forward(w, cfg, tokens={"tok": toks, "pos": pos}).hidden.data[0, 1]
    toks2 = toks.copy()
    toks2[0, 3] = 7
    changed = forward(w, cfg, tokens={"tok": toks2, "pos": pos}).hidden.data[0, 1]
    assert not np.array_equal(base, changed)


def test_encoder_sensitive_to_permutation_elsewhere():
    cfg = tiny_config(causal=False, output_streams=())
    w = init_weights(cfg, seed=9)
    toks = np.array([[1, 2, 3, 4]])
    pos = np.array([[1, 2, 3, 4]])
    base = forward(w, cfg, tokens={"tok": toks, "pos": pos}).hidden.data[0, 1]
    swapped = toks.copy()
    swapped[0, [2, 3]] = swapped[0, [3, 2]]  # permute positions other than 1
    changed = forward(w, cfg, tokens={"tok": swapped, "pos": pos}).hidden.data[0, 1]
    assert not np.array_equal(base, changed)


def test_encoder_purity_and_length_one():
    cfg = tiny_config(causal=False, output_streams=())
    w = init_weights(cfg, seed=3)
    toks = np.array([[4]])
    pos = np.array([[1]])
    a = forward(w, cfg, tokens={"tok": toks, "pos": pos}).hidden.data
    b = forward(w, cfg, tokens={"tok": toks, "pos": pos}).hidden.data
    assert np.array_equal(a, b)


def test_condition_zero_matches_unconditional_path():
    cond_cfg = tiny_config(conditional=True)
    w = init_weights(cond_cfg, seed=4)
    toks = {"tok": np.array([[1, 2, 3]]), "pos": np.array([[1, 2, 3]])}
    zero_cond = Tensor(np.zeros((1, 1, cond_cfg.hidden_dim)))
    with_cond = forward(w, cond_cfg, tokens=toks, condition=zero_cond).logits["tok"].data

    plain_cfg = tiny_config(conditional=False)
    with_out = forward(w, plain_cfg, tokens=toks).logits["tok"].data
    assert np.array_equal(with_cond, with_out)


def test_conditional_model_requires_condition():
    cfg = tiny_config(conditional=True)
    w = init_weights(cfg, seed=5)
    with pytest.raises(ValueError, match="condition"):
        forward(w, cfg, tokens={"tok": np.array([[1]]), "pos": np.array([[1]])})


def test_sequence_length_cap():
    cfg = tiny_config(max_positions=4)
    w = init_weights(cfg, seed=6)
    with pytest.raises(ValueError, match="max_positions"):
        forward(w, cfg, tokens={"tok": np.zeros((1, 5), int), "pos": np.zeros((1, 5), int)})


# -- pointer head ----------------------------------------------------------------


def test_pointer_uniform_for_equal_embeddings():
    q = np.ones(4)
    slots = np.tile(np.arange(4.0), (5, 1))
    p = pointer_distribution(q, slots)
    assert np.allclose(p, 0.2)
    assert p.sum() == pytest.approx(1.0)


def test_pointer_saturation():
    q = np.array([10.0, 0.0])
    slots = np.array([[50.0, 0.0], [0.0, 0.1], [0.1, 0.0]])
    p = pointer_distribution(q, slots)
    assert p[0] > 0.999999


def test_pointer_closed_form():
    q = np.array([1.0])
    slots = np.array([[0.0], [math.log(2)], [math.log(4)]])
    p = pointer_distribution(q, slots)
    assert np.allclose(p, [1 / 7, 2 / 7, 4 / 7])


def test_pointer_empty_slots_rejected():
    with pytest.raises(ValueError, match="non-empty"):
        pointer_distribution(np.ones(3), np.zeros((0, 3)))


# -- loss sanity -------------------------------------------------------------------


def test_uniform_logits_loss_is_log_vocab(library):
    from matgen.nn.stages import nodes_loss, tokenized_to_rows
    from matgen.seq import encode_graph, QuantizerSpec

    cfg = stage_configs("nodes", library, layers=1, heads=2, hidden_dim=8)
    w = init_weights(cfg.generator, seed=0)
    for t in w.values():
        t.data[...] = 0.0
    g = synthesize_graph(library, np.random.default_rng(7), 6, 10)
    quant = QuantizerSpec.from_library(library)
    rows = tokenized_to_rows("nodes", [encode_graph(g, "r", quant)])
    breakdown = nodes_loss(w, cfg.generator, rows.node_rows)
    type_vocab = dict(cfg.generator.token_streams)["tok"]
    expected = (math.log(type_vocab) + math.log(32)) / 2  # two heads averaged
    assert float(breakdown.loss.data) == pytest.approx(expected, rel=1e-6)


def test_confident_logits_loss_near_zero():
    from matgen.nn import autodiff as ad

    logits = np.full((1, 3, 5), -50.0)
    targets = np.array([[1, 2, 3]])
    for t in range(3):
        logits[0, t, targets[0, t]] = 50.0
    loss = ad.cross_entropy_sum(Tensor(logits), targets, np.ones((1, 3), bool))
    assert float(loss.data) < 1e-8


# -- Adam ---------------------------------------------------------------------------


def test_adam_zero_gradient_keeps_weights():
    params = {"w": Tensor(np.array([1.0, -2.0]), requires_grad=True)}
    params["w"].grad = np.zeros(2)
    state = adam_step(params, AdamState(), lr=0.1)
    assert np.array_equal(params["w"].data, [1.0, -2.0])
    assert state.step == 1


def test_adam_first_step_closed_form():
    g = np.array([0.3, -0.02, 5.0])
    params = {"w": Tensor(np.zeros(3), requires_grad=True)}
    params["w"].grad = g.copy()
    lr, eps = 1e-2, 1e-8
    adam_step(params, AdamState(), lr=lr, eps=eps)
    expected = -lr * g / (np.abs(g) + eps)
    np.testing.assert_allclose(params["w"].data, expected, rtol=1e-12)


def test_adam_deterministic():
    def run():
        params = {"w": Tensor(np.array([1.0, 2.0, 3.0]), requires_grad=True)}
        state = AdamState()
        for step in range(5):
            params["w"].grad = params["w"].data * 0.1 + step
            adam_step(params, state, lr=1e-3)
        return params["w"].data.copy()

    assert np.array_equal(run(), run())


def test_adam_shape_mismatch():
    params = {"w": Tensor(np.zeros(3), requires_grad=True)}
    params["w"].grad = np.zeros(4)
    with pytest.raises(ValueError, match="shape"):
        adam_step(params, AdamState())


# -- checkpoint container --------------------------------------------------------------


def test_checkpoint_roundtrip_f32_and_f64(tmp_path):
    tensors = {"a.w": np.random.default_rng(0).normal(size=(3, 4)), "b": np.arange(5.0)}
    header = {"kind": "test", "note": 7}
    for dtype, tol in (("f32", 1e-6), ("f64", 0.0)):
        path = tmp_path / f"ck_{dtype}.bin"
        save_checkpoint(path, tensors, header, dtype=dtype)
        loaded, h = load_checkpoint(path)
        assert h == header
        assert set(loaded) == set(tensors)
        if dtype == "f64":
            assert np.array_equal(loaded["a.w"], tensors["a.w"])
        else:
            np.testing.assert_allclose(loaded["a.w"], tensors["a.w"], atol=tol)
        assert loaded["a.w"].dtype == np.float64


def test_checkpoint_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(CheckpointError, match="magic"):
        load_checkpoint(path)


def test_stage_model_save_load_roundtrip(tmp_path, library, quantizer):
    from tests.conftest import make_random_model

    model = make_random_model(library, "params", 3, quantizer=quantizer)
    path = tmp_path / "params.ckpt"
    save_stage_model(model, path)
    loaded = load_stage_model(path)
    assert loaded.stage == "params"
    assert loaded.ordering == model.ordering
    assert loaded.library_hash == model.library_hash
    assert loaded.quantizer.content_hash == model.quantizer.content_hash
    assert set(loaded.gen_weights) == set(model.gen_weights)
    np.testing.assert_allclose(
        loaded.gen_weights["blk0.ff.w1"].data, model.gen_weights["blk0.ff.w1"].data, atol=1e-6
    )


# -- training loop ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def mini_graphs(library):
    return [synthesize_graph(library, np.random.default_rng([71, i]), 5, 9) for i in range(8)]


def test_training_loss_decreases(library, mini_graphs):
    res = train_stage(
        "nodes",
        mini_graphs,
        [],
        library,
        settings=TrainSettings(ordering="r", seed=0, epochs=3, batch_size=8, lr=3e-3, patience=99),
        layers=1,
        heads=2,
        hidden_dim=16,
    )
    losses = [h["train_loss"] for h in res.history]
    assert len(losses) == 3
    assert losses[0] > losses[1] > losses[2]


def test_training_deterministic(library, mini_graphs):
    def run():
        res = train_stage(
            "nodes",
            mini_graphs,
            mini_graphs[:2],
            library,
            settings=TrainSettings(ordering="r", seed=5, epochs=2, batch_size=4, lr=1e-3, patience=99),
            layers=1,
            heads=2,
            hidden_dim=16,
        )
        return [h["train_loss"] for h in res.history]

    assert run() == run()


def test_training_nonfinite_loss_raises(library, mini_graphs):
    from matgen.nn.training import TrainingError

    cfg = stage_configs("nodes", library, layers=1, heads=2, hidden_dim=16)
    w = init_weights(cfg.generator, seed=0)
    w["emb.tok.w"].data[0, 0] = np.nan
    poisoned = _LoopState(
        merged={f"f.{k}": v for k, v in w.items()},
        adam=AdamState(),
        rng=np.random.default_rng(0),
    )
    with pytest.raises(TrainingError, match="non-finite"):
        train_stage(
            "nodes",
            mini_graphs,
            [],
            library,
            settings=TrainSettings(ordering="r", seed=0, epochs=2, batch_size=8, lr=1e-3, patience=99),
            layers=1,
            heads=2,
            hidden_dim=16,
            resume_state=poisoned,
        )


def test_resume_reproduces_next_epoch_loss(library, mini_graphs, tmp_path):
    snapshot = tmp_path / "state.ckpt"
    settings = TrainSettings(ordering="r", seed=9, epochs=2, batch_size=4, lr=1e-3, patience=99)
    train_stage("nodes", mini_graphs, mini_graphs[:2], library,
                settings=settings, snapshot_path=snapshot, layers=1, heads=2, hidden_dim=16)

    # continue the run for one more epoch, uninterrupted
    settings3 = TrainSettings(ordering="r", seed=9, epochs=3, batch_size=4, lr=1e-3, patience=99)
    full = train_stage("nodes", mini_graphs, mini_graphs[:2], library,
                       settings=settings3, layers=1, heads=2, hidden_dim=16)

    stage, state, _ = load_training_state(snapshot)
    assert stage == "nodes"
    resumed = train_stage("nodes", mini_graphs, mini_graphs[:2], library,
                          settings=settings3, resume_state=state, layers=1, heads=2, hidden_dim=16)
    assert resumed.history[-1]["train_loss"] == full.history[-1]["train_loss"]
    assert resumed.history[-1]["val_loss"] == full.history[-1]["val_loss"]


def test_early_stopping_restores_best(library, mini_graphs):
    res = train_stage(
        "nodes",
        mini_graphs,
        mini_graphs[:3],
        library,
        settings=TrainSettings(ordering="r", seed=1, epochs=30, batch_size=4, lr=5e-3, patience=2),
        layers=1,
        heads=2,
        hidden_dim=16,
    )
    vals = [h["val_loss"] for h in res.history]
    assert res.best_val == pytest.approx(min(vals))
