"""Channel images and shared sampling helpers for operator kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LUMA = np.array([0.299, 0.587, 0.114])


@dataclass
class ChannelImage:
    """A grayscale (1-channel) or RGB (3-channel) image with values in [0, 1].

    data has shape (height, width, channels), dtype float64, row-major.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.ndim != 3 or self.data.shape[2] not in (1, 3):
            raise ValueError(f"expected (h, w, 1|3) array, got shape {self.data.shape}")
        self.data = np.clip(np.nan_to_num(self.data.astype(np.float64), nan=0.0), 0.0, 1.0)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @classmethod
    def zeros(cls, width: int, height: int, channels: int = 1) -> "ChannelImage":
        return cls(np.zeros((height, width, channels)))

    @classmethod
    def constant(cls, width: int, height: int, value, channels: int | None = None) -> "ChannelImage":
        value = np.atleast_1d(np.asarray(value, dtype=np.float64))
        if channels is None:
            channels = value.shape[0]
        return cls(np.broadcast_to(value, (height, width, channels)).copy())

    def to_gray(self) -> "ChannelImage":
        if self.channels == 1:
            return self
        return ChannelImage((self.data @ LUMA)[..., None])

    def to_rgb(self) -> "ChannelImage":
        if self.channels == 3:
            return self
        return ChannelImage(np.repeat(self.data, 3, axis=2))


def uv_grid(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Pixel-center uv coordinates in [0, 1) as (u, v) arrays of shape (h, w)."""
    u = (np.arange(width) + 0.5) / width
    v = (np.arange(height) + 0.5) / height
    return np.meshgrid(u, v)


def sample_bilinear_wrap(img: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sample an (h, w, c) image at uv coordinates with toroidal wrapping."""
    h, w = img.shape[:2]
    x = u * w - 0.5
    y = v * h - 0.5
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    fx = (x - x0)[..., None]
    fy = (y - y0)[..., None]
    x0m, x1m = x0 % w, (x0 + 1) % w
    y0m, y1m = y0 % h, (y0 + 1) % h
    a = img[y0m, x0m]
    b = img[y0m, x1m]
    c = img[y1m, x0m]
    d = img[y1m, x1m]
    return (a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy


def smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)
