"""Image export helpers: 8-bit PNG via Pillow and plain PPM/PGM."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .image import ChannelImage


def to_uint8(img: ChannelImage) -> np.ndarray:
    return np.clip(np.round(img.data * 255.0), 0, 255).astype(np.uint8)


def to_pil(img: ChannelImage) -> Image.Image:
    arr = to_uint8(img)
    if arr.shape[2] == 1:
        return Image.fromarray(arr[..., 0], mode="L")
    return Image.fromarray(arr, mode="RGB")


def write_png(img: ChannelImage, path: str | Path) -> None:
    to_pil(img).save(str(path), format="PNG")


def png_bytes(img: ChannelImage, resize: int | None = None) -> bytes:
    pil = to_pil(img)
    if resize is not None and pil.size != (resize, resize):
        pil = pil.resize((resize, resize), Image.NEAREST)
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def write_ppm(img: ChannelImage, path: str | Path) -> None:
    """Binary PPM (P6) for RGB images, PGM (P5) for grayscale."""
    arr = to_uint8(img)
    h, w, c = arr.shape
    magic = b"P5" if c == 1 else b"P6"
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (w, h))
        fh.write(arr.tobytes())
