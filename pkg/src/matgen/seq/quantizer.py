"""Uniform 32-level quantization of continuous parameter values.

Bounds are tracked per (operator, parameter, component) and normally come
from the minimum and maximum values observed in a training corpus, falling
back to the schema bounds for components never seen. Discrete parameters
are not quantized here; they are tokenized exactly as offsets from their
schema minimum.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..graph.graph import MaterialGraph, OperatorLibrary

QuantKey = tuple[str, str, int]  # (operator name, param name, component index)

DEFAULT_LEVELS = 32


@dataclass
class QuantizerSpec:
    levels: int = DEFAULT_LEVELS
    bounds: dict[QuantKey, tuple[float, float]] = field(default_factory=dict)
    widened: set[QuantKey] = field(default_factory=set)

    def __post_init__(self) -> None:
        if self.levels < 2:
            raise ValueError("levels must be >= 2")

    def _get(self, key: QuantKey) -> tuple[float, float]:
        try:
            return self.bounds[key]
        except KeyError:
            raise KeyError(f"no quantizer bounds for {key}") from None

    def set_bounds(self, key: QuantKey, lo: float, hi: float) -> None:
        """Record bounds, widening degenerate ranges by one ulp."""
        if hi <= lo:
            hi = lo + max(abs(lo) * 2.0 ** -52, 2.0 ** -100)
            self.widened.add(key)
        self.bounds[key] = (float(lo), float(hi))

    def quantize(self, value: float, key: QuantKey) -> int:
        lo, hi = self._get(key)
        v = min(max(value, lo), hi)
        level = int((v - lo) / (hi - lo) * self.levels)
        return min(max(level, 0), self.levels - 1)

    def dequantize(self, level: int, key: QuantKey) -> float:
        lo, hi = self._get(key)
        if not 0 <= level < self.levels:
            raise ValueError(f"level {level} outside [0, {self.levels})")
        return lo + (level + 0.5) * (hi - lo) / self.levels

    def bin_width(self, key: QuantKey) -> float:
        lo, hi = self._get(key)
        return (hi - lo) / self.levels

    # -- construction ------------------------------------------------------

    @classmethod
    def from_library(cls, library: OperatorLibrary, levels: int = DEFAULT_LEVELS) -> "QuantizerSpec":
        """Schema-bound quantizer (used when no corpus statistics exist)."""
        spec = cls(levels=levels)
        for schema in library:
            for p in schema.params:
                if p.is_discrete:
                    continue
                for c in range(p.vector_dim):
                    spec.set_bounds((schema.type.name, p.name, c), p.min_value, p.max_value)
        return spec

    @classmethod
    def from_corpus(
        cls, library: OperatorLibrary, graphs: list[MaterialGraph], levels: int = DEFAULT_LEVELS
    ) -> "QuantizerSpec":
        """Observed min/max bounds over all explicit parameter values in the
        corpus, with schema bounds for components that never occur."""
        observed: dict[QuantKey, tuple[float, float]] = {}
        for g in graphs:
            for node in g.nodes:
                schema = library.schema(node.type)
                for pv in node.params:
                    ps = schema.param(pv.param_index)
                    if ps.is_discrete:
                        continue
                    for i, v in enumerate(pv.values):
                        key = (schema.type.name, ps.name, i % ps.vector_dim)
                        lo, hi = observed.get(key, (v, v))
                        observed[key] = (min(lo, v), max(hi, v))
        spec = cls.from_library(library, levels=levels)
        for key, (lo, hi) in observed.items():
            spec.set_bounds(key, lo, hi)
        return spec

    # -- persistence -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "levels": self.levels,
            "bounds": [[list(k), lo, hi] for k, (lo, hi) in sorted(self.bounds.items())],
            "widened": sorted(list(k) for k in self.widened),
        }

    @classmethod
    def from_json(cls, payload: dict) -> "QuantizerSpec":
        spec = cls(levels=int(payload["levels"]))
        for key, lo, hi in payload["bounds"]:
            spec.bounds[(key[0], key[1], int(key[2]))] = (float(lo), float(hi))
        for key in payload.get("widened", []):
            spec.widened.add((key[0], key[1], int(key[2])))
        return spec

    @property
    def content_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]
