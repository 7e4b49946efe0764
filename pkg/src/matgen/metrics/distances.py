"""Nearest-neighbor novelty metrics and the render-statistics distance.

The normalized nearest-neighbor distance divides the mean distance from
each generated sample to its closest reference by the reference set's own
leave-one-out mean; values near 1.0 indicate a matched distribution,
values well below 1.0 indicate copying. The render-statistics distance is
a Frechet distance between Gaussian fits of fixed image features
(per-channel mean and variance, an 8-bin albedo luminance histogram, and
the mean gradient magnitude), standing in for pretrained-network image
metrics at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ..graph.graph import MaterialGraph
from ..ops.evaluate import MaterialOutput, evaluate_graph
from ..ops.image import LUMA
from .ged import graph_edit_distance
from .stats import graph_statistics, compare_stats

EDIT_METRIC_MIN_NODES = 50


class MetricError(RuntimeError):
    pass


def render_features(output: MaterialOutput) -> np.ndarray:
    """Fixed 19-dim feature vector of one material render."""
    feats: list[float] = []
    for name in ("albedo", "normal", "roughness", "height", "metallic"):
        img = output.channel(name)
        luma = img.data @ LUMA if img.channels == 3 else img.data[..., 0]
        feats.append(float(luma.mean()))
        feats.append(float(luma.var()))
    albedo = output.albedo.data @ LUMA
    hist, _ = np.histogram(albedo, bins=8, range=(0.0, 1.0))
    feats.extend((hist / max(albedo.size, 1)).tolist())
    gx = np.roll(albedo, -1, axis=1) - albedo
    gy = np.roll(albedo, -1, axis=0) - albedo
    feats.append(float(np.hypot(gx, gy).mean()))
    return np.array(feats)


def frechet_distance(features_a: np.ndarray, features_b: np.ndarray, eps: float = 1e-10) -> float:
    """Squared Frechet distance between Gaussian fits of two feature sets."""
    a = np.asarray(features_a, dtype=np.float64)
    b = np.asarray(features_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] < 2 or b.shape[0] < 2:
        raise MetricError("need at least two feature vectors per population")
    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    cov_a = np.cov(a, rowvar=False) + eps * np.eye(a.shape[1])
    cov_b = np.cov(b, rowvar=False) + eps * np.eye(b.shape[1])
    covmean = scipy.linalg.sqrtm(cov_a @ cov_b)
    if np.iscomplexobj(covmean):
        covmean = covmean.real
    diff = mu_a - mu_b
    value = float(diff @ diff + np.trace(cov_a + cov_b - 2.0 * covmean))
    return max(value, 0.0)


def render_stat_distance(
    generated: list[MaterialOutput], reference: list[MaterialOutput]
) -> float:
    ga = np.stack([render_features(o) for o in generated])
    gb = np.stack([render_features(o) for o in reference])
    return frechet_distance(ga, gb)


def _nn_normalized(dist_fn, generated: list, reference: list) -> float:
    if len(reference) < 2:
        raise MetricError("reference set needs at least two samples")
    if not generated:
        raise MetricError("no eligible generated samples")
    gen_mins = []
    for g in generated:
        gen_mins.append(min(dist_fn(g, r) for r in reference))
    ref_mins = []
    for i, r in enumerate(reference):
        ref_mins.append(min(dist_fn(r, o) for j, o in enumerate(reference) if j != i))
    denominator = float(np.mean(ref_mins))
    if denominator <= 0:
        raise MetricError("reference self-distance is zero; normalization undefined")
    return float(np.mean(gen_mins)) / denominator


@dataclass
class NearestNeighborReport:
    value: float
    eligible_generated: int
    eligible_reference: int
    metric: str


def nearest_neighbor_distance(
    generated: list[MaterialGraph],
    reference: list[MaterialGraph],
    metric: str = "edit",
    resolution: int = 64,
    ged_kwargs: dict | None = None,
) -> NearestNeighborReport:
    if metric == "edit":
        gen = [g for g in generated if len(g.nodes) >= EDIT_METRIC_MIN_NODES]
        ref = [g for g in reference if len(g.nodes) >= EDIT_METRIC_MIN_NODES]
        if not gen or len(ref) < 2:
            raise MetricError(
                f"edit metric needs graphs with >= {EDIT_METRIC_MIN_NODES} nodes "
                f"(eligible: {len(gen)} generated, {len(ref)} reference)"
            )
        kwargs = ged_kwargs or {}

        def dist(a, b):
            return graph_edit_distance(a, b, **kwargs).cost

        return NearestNeighborReport(
            value=_nn_normalized(dist, gen, ref),
            eligible_generated=len(gen),
            eligible_reference=len(ref),
            metric="edit",
        )
    if metric == "render_stat":
        feats_g = [render_features(evaluate_graph(g, resolution)) for g in generated]
        feats_r = [render_features(evaluate_graph(g, resolution)) for g in reference]

        def dist(a, b):
            return float(np.linalg.norm(a - b))

        return NearestNeighborReport(
            value=_nn_normalized(dist, feats_g, feats_r),
            eligible_generated=len(feats_g),
            eligible_reference=len(feats_r),
            metric="render_stat",
        )
    raise ValueError(f"unknown metric {metric!r}")


@dataclass
class MetricReport:
    graph_stats_emd: float
    graph_stats_breakdown: dict[str, float]
    render_stat_distance: float | None
    nn_edit: NearestNeighborReport | None
    nn_edit_error: str | None = None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "graph_stats_emd": self.graph_stats_emd,
            "graph_stats_breakdown": self.graph_stats_breakdown,
            "render_stat_distance": self.render_stat_distance,
            "nn_edit": (
                {
                    "value": self.nn_edit.value,
                    "eligible_generated": self.nn_edit.eligible_generated,
                    "eligible_reference": self.nn_edit.eligible_reference,
                }
                if self.nn_edit
                else None
            ),
            "nn_edit_error": self.nn_edit_error,
            "notes": self.notes,
        }


def evaluate_corpora(
    generated: list[MaterialGraph],
    reference: list[MaterialGraph],
    resolution: int = 64,
    with_renders: bool = True,
    ged_kwargs: dict | None = None,
) -> MetricReport:
    overall, breakdown = compare_stats(graph_statistics(generated), graph_statistics(reference))
    render = None
    notes = []
    if with_renders:
        if len(generated) >= 2 and len(reference) >= 2:
            render = render_stat_distance(
                [evaluate_graph(g, resolution) for g in generated],
                [evaluate_graph(g, resolution) for g in reference],
            )
        else:
            notes.append("render distance skipped: need two samples per side")
    nn_edit = None
    nn_err = None
    try:
        nn_edit = nearest_neighbor_distance(generated, reference, metric="edit", ged_kwargs=ged_kwargs)
    except MetricError as err:
        nn_err = str(err)
    return MetricReport(
        graph_stats_emd=overall,
        graph_stats_breakdown=breakdown,
        render_stat_distance=render,
        nn_edit=nn_edit,
        nn_edit_error=nn_err,
        notes=notes,
    )
