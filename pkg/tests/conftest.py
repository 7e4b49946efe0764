import numpy as np
import pytest

from matgen.ops.library import builtin_library
from matgen.data.forge import synthesize_graph
from matgen.seq.quantizer import QuantizerSpec
from matgen.nn.model import init_weights
from matgen.nn.stages import stage_configs
from matgen.nn.training import StageModel
from matgen.pipeline.sampler import ModelBundle


@pytest.fixture(scope="session")
def library():
    return builtin_library()


@pytest.fixture(scope="session")
def small_corpus(library):
    return [synthesize_graph(library, np.random.default_rng([41, i]), 5, 30) for i in range(30)]


@pytest.fixture(scope="session")
def quantizer(library, small_corpus):
    return QuantizerSpec.from_corpus(library, small_corpus)


def make_random_model(library, stage, seed, ordering="rr", quantizer=None,
                      layers=1, heads=2, hidden_dim=16):
    cfgs = stage_configs(stage, library, layers=layers, heads=heads, hidden_dim=hidden_dim)
    gen = init_weights(cfgs.generator, seed=seed)
    enc = init_weights(cfgs.encoder, seed=seed + 1) if cfgs.encoder else None
    return StageModel(
        stage=stage,
        ordering=ordering,
        configs=cfgs,
        gen_weights=gen,
        enc_weights=enc,
        quantizer=quantizer or QuantizerSpec.from_library(library),
        library_hash=library.content_hash,
    )


@pytest.fixture(scope="session")
def micro_bundle(library):
    quant = QuantizerSpec.from_library(library)
    return ModelBundle(
        nodes=make_random_model(library, "nodes", 11, quantizer=quant),
        params=make_random_model(library, "params", 23, quantizer=quant),
        edges=make_random_model(library, "edges", 37, quantizer=quant),
    )
