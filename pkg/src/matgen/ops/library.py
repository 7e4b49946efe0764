"""Built-in library of image operators.

Generators synthesize images from parameters alone, filters transform
their inputs, and output markers tag which image feeds each material
channel. Every kernel is a pure function of (inputs, params, resolution):
noise takes an integer seed parameter, so evaluation is fully
deterministic. Kernel outputs are clamped to [0, 1] at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..graph.types import OperatorSchema, OperatorType, ParamKind, ParamSchema
from ..graph.graph import OperatorLibrary
from .image import ChannelImage, sample_bilinear_wrap, smoothstep, uv_grid

MATERIAL_CHANNELS = ("albedo", "normal", "roughness", "height", "metallic")

KernelFn = Callable[[list[ChannelImage], dict, int, int], list[ChannelImage]]


@dataclass(frozen=True)
class OperatorKernel:
    schema: OperatorSchema
    eval: KernelFn


def scalar(name, lo, hi, default, discrete=False):
    return ParamSchema(name, ParamKind.SCALAR, 1, discrete, lo, hi, (default,))


def vector(name, dim, lo, hi, default):
    return ParamSchema(name, ParamKind.VECTOR, dim, False, lo, hi, tuple(default))


def varray(name, dim, lo, hi, default):
    return ParamSchema(name, ParamKind.ARRAY, dim, False, lo, hi, tuple(default))


_DECLS: list[tuple[str, int, int, list[ParamSchema], bool, KernelFn]] = []


def _register(name, n_in, n_out, params, fn, marker=False):
    _DECLS.append((name, n_in, n_out, sorted(params, key=lambda p: p.name), marker, fn))


def _img(arr: np.ndarray) -> ChannelImage:
    if arr.ndim == 2:
        arr = arr[..., None]
    return ChannelImage(arr)


# -- generators --------------------------------------------------------------

def _k_uniform_color(inputs, p, w, h):
    return [ChannelImage.constant(w, h, p["color"])]


def _k_checker(inputs, p, w, h):
    u, v = uv_grid(w, h)
    t = int(p["tiles"])
    parity = (np.floor(u * t) + np.floor(v * t)) % 2
    return [_img(np.where(parity > 0.5, p["high"], p["low"]))]


def _k_brick(inputs, p, w, h):
    u, v = uv_grid(w, h)
    rows, cols = int(p["rows"]), int(p["cols"])
    mortar, offset = p["mortar"], p["offset"]
    y = v * rows
    row_idx = np.floor(y)
    x = u * cols + (row_idx % 2) * offset
    fx, fy = x - np.floor(x), y - row_idx
    body = (fx >= mortar) & (fy >= mortar)
    return [_img(body.astype(np.float64))]


def _k_value_noise(inputs, p, w, h):
    scale, octaves, seed = int(p["scale"]), int(p["octaves"]), int(p["seed"])
    persistence = p["persistence"]
    u, v = uv_grid(w, h)
    total = np.zeros((h, w))
    amplitude, norm = 1.0, 0.0
    for o in range(octaves):
        cells = scale * (2 ** o)
        rng = np.random.default_rng([seed, o, cells])
        lattice = rng.random((cells, cells))
        x = u * cells
        y = v * cells
        x0 = np.floor(x).astype(np.int64)
        y0 = np.floor(y).astype(np.int64)
        fx = smoothstep(x - x0)
        fy = smoothstep(y - y0)
        x0m, x1m = x0 % cells, (x0 + 1) % cells
        y0m, y1m = y0 % cells, (y0 + 1) % cells
        a = lattice[y0m, x0m]
        b = lattice[y0m, x1m]
        c = lattice[y1m, x0m]
        d = lattice[y1m, x1m]
        layer = (a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy
        total += amplitude * layer
        norm += amplitude
        amplitude *= persistence
    return [_img(total / norm)]


def _k_cell_noise(inputs, p, w, h):
    cells, seed, jitter = int(p["cells"]), int(p["seed"]), p["jitter"]
    rng = np.random.default_rng([seed, cells])
    jx = rng.random((cells, cells))
    jy = rng.random((cells, cells))
    gx, gy = np.meshgrid(np.arange(cells), np.arange(cells))
    px = (gx + 0.5 + (jx - 0.5) * jitter) / cells
    py = (gy + 0.5 + (jy - 0.5) * jitter) / cells
    u, v = uv_grid(w, h)
    best = np.full((h, w), np.inf)
    # search the 3x3 cell neighborhood with toroidal wrapping
    cu = np.floor(u * cells).astype(np.int64)
    cv = np.floor(v * cells).astype(np.int64)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            nx = (cu + dx) % cells
            ny = (cv + dy) % cells
            fx = px[ny, nx] + (cu + dx - nx) / cells  # unwrapped feature position
            fy = py[ny, nx] + (cv + dy - ny) / cells
            d = np.hypot(u - fx, v - fy)
            best = np.minimum(best, d)
    return [_img(np.clip(best * cells / np.sqrt(2.0), 0.0, 1.0))]


def _k_gradient_ramp(inputs, p, w, h):
    u, v = uv_grid(w, h)
    orient = int(p["orientation"])
    if orient == 0:
        g = u
    elif orient == 1:
        g = v
    else:
        g = np.clip(np.hypot(u - 0.5, v - 0.5) / (0.5 * np.sqrt(2.0)), 0.0, 1.0)
    return [_img(np.power(g, p["exponent"]))]


def _k_polygon(inputs, p, w, h):
    u, v = uv_grid(w, h)
    sides, radius, soft = int(p["sides"]), p["radius"], p["softness"]
    x, y = u - 0.5, v - 0.5
    theta = np.arctan2(y, x)
    r = np.hypot(x, y)
    # distance from center to the polygon boundary along theta
    sector = np.pi / sides
    boundary = radius * np.cos(sector) / np.cos(((theta + sector) % (2 * sector)) - sector)
    if soft <= 0:
        mask = (r <= boundary).astype(np.float64)
    else:
        mask = 1.0 - smoothstep((r - boundary + soft) / (2 * soft))
    return [_img(mask)]


def _k_stripes(inputs, p, w, h):
    u, v = uv_grid(w, h)
    angle = np.deg2rad(p["angle"])
    t = u * np.cos(angle) + v * np.sin(angle)
    return [_img(0.5 + 0.5 * np.sin(2 * np.pi * int(p["frequency"]) * t))]


def _k_dots(inputs, p, w, h):
    u, v = uv_grid(w, h)
    n = int(p["spacing"])
    radius, soft = p["radius"] / n, max(p["softness"] / n, 1e-6)
    du = (u * n) % 1.0 - 0.5
    dv = (v * n) % 1.0 - 0.5
    d = np.hypot(du, dv) / n
    return [_img(1.0 - smoothstep((d - radius + soft) / (2 * soft)))]


def _k_grid_lines(inputs, p, w, h):
    u, v = uv_grid(w, h)
    n = int(p["cells"])
    t = p["thickness"]
    fu = np.abs((u * n) % 1.0 - 0.5)
    fv = np.abs((v * n) % 1.0 - 0.5)
    line = (fu > 0.5 - t) | (fv > 0.5 - t)
    return [_img(line.astype(np.float64))]


def _k_rings(inputs, p, w, h):
    u, v = uv_grid(w, h)
    r = np.hypot(u - 0.5, v - 0.5) * 2.0
    phase = (r * int(p["count"])) % 1.0
    return [_img((phase < p["thickness"]).astype(np.float64))]


def _k_spiral(inputs, p, w, h):
    u, v = uv_grid(w, h)
    x, y = u - 0.5, v - 0.5
    r = np.hypot(x, y) * 2.0
    theta = np.arctan2(y, x) / (2 * np.pi)
    phase = (r * int(p["turns"]) - theta) % 1.0
    return [_img((phase < p["thickness"]).astype(np.float64))]


def _k_diamonds(inputs, p, w, h):
    u, v = uv_grid(w, h)
    n = int(p["tiles"])
    fu = np.abs((u * n) % 1.0 - 0.5)
    fv = np.abs((v * n) % 1.0 - 0.5)
    return [_img(np.clip(1.0 - (fu + fv) * 2.0, 0.0, 1.0))]


def _k_hex_dots(inputs, p, w, h):
    u, v = uv_grid(w, h)
    n = int(p["cells"])
    row = np.floor(v * n)
    uu = (u * n + (row % 2) * 0.5) % 1.0 - 0.5
    vv = (v * n) % 1.0 - 0.5
    d = np.hypot(uu, vv * 1.1547)
    return [_img(np.clip(1.0 - d / max(p["radius"], 1e-6), 0.0, 1.0))]


def _k_triangles(inputs, p, w, h):
    u, v = uv_grid(w, h)
    n = int(p["tiles"])
    fu = (u * n) % 1.0
    fv = (v * n) % 1.0
    return [_img(np.abs(fu - fv))]


def _k_waves(inputs, p, w, h):
    u, v = uv_grid(w, h)
    f = int(p["frequency"])
    a = np.sin(2 * np.pi * f * u + np.sin(2 * np.pi * f * v) * p["bend"])
    return [_img(0.5 + 0.5 * a)]


def _k_staircase(inputs, p, w, h):
    u, v = uv_grid(w, h)
    n = int(p["steps"])
    g = u if int(p["orientation"]) == 0 else v
    return [_img(np.floor(g * n) / max(n - 1, 1))]


def _k_crosshatch(inputs, p, w, h):
    u, v = uv_grid(w, h)
    f = int(p["frequency"])
    a = 0.5 + 0.5 * np.sin(2 * np.pi * f * u)
    b = 0.5 + 0.5 * np.sin(2 * np.pi * f * v)
    return [_img(np.maximum(a, b))]


def _k_ridged_noise(inputs, p, w, h):
    base = _k_value_noise(inputs, {"scale": p["scale"], "octaves": p["octaves"],
                                   "seed": p["seed"], "persistence": 0.5}, w, h)[0]
    return [_img(1.0 - np.abs(2.0 * base.data[..., 0] - 1.0))]


def _k_cell_edges(inputs, p, w, h):
    cells, seed, jitter = int(p["cells"]), int(p["seed"]), p["jitter"]
    rng = np.random.default_rng([seed + 7, cells])
    jx = rng.random((cells, cells))
    jy = rng.random((cells, cells))
    gx, gy = np.meshgrid(np.arange(cells), np.arange(cells))
    px = (gx + 0.5 + (jx - 0.5) * jitter) / cells
    py = (gy + 0.5 + (jy - 0.5) * jitter) / cells
    u, v = uv_grid(w, h)
    d1 = np.full((h, w), np.inf)
    d2 = np.full((h, w), np.inf)
    cu = np.floor(u * cells).astype(np.int64)
    cv = np.floor(v * cells).astype(np.int64)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            nx = (cu + dx) % cells
            ny = (cv + dy) % cells
            fx = px[ny, nx] + (cu + dx - nx) / cells
            fy = py[ny, nx] + (cv + dy - ny) / cells
            d = np.hypot(u - fx, v - fy)
            closer = d < d1
            d2 = np.where(closer, d1, np.minimum(d2, d))
            d1 = np.where(closer, d, d1)
    return [_img(np.clip((d2 - d1) * cells, 0.0, 1.0))]


def _k_scratches(inputs, p, w, h):
    count, seed = int(p["count"]), int(p["seed"])
    width = p["width"]
    rng = np.random.default_rng([seed + 13, count])
    u, v = uv_grid(w, h)
    out = np.zeros((h, w))
    for _ in range(count):
        x0, y0 = rng.random(2)
        ang = rng.random() * np.pi
        half = 0.05 + rng.random() * 0.2
        dx, dy = np.cos(ang) * half, np.sin(ang) * half
        ax, ay = x0 - dx, y0 - dy
        bx, by = x0 + dx, y0 + dy
        t = np.clip(((u - ax) * (bx - ax) + (v - ay) * (by - ay)) / max((bx - ax) ** 2 + (by - ay) ** 2, 1e-12), 0.0, 1.0)
        d = np.hypot(u - (ax + t * (bx - ax)), v - (ay + t * (by - ay)))
        out = np.maximum(out, (d < width).astype(np.float64))
    return [_img(out)]


def _k_speckle(inputs, p, w, h):
    count, seed = int(p["count"]), int(p["seed"])
    radius = p["radius"]
    rng = np.random.default_rng([seed + 29, count])
    centers = rng.random((count, 2))
    u, v = uv_grid(w, h)
    out = np.zeros((h, w))
    for cx, cy in centers:
        dx = np.abs(u - cx)
        dy = np.abs(v - cy)
        dx = np.minimum(dx, 1.0 - dx)
        dy = np.minimum(dy, 1.0 - dy)
        out = np.maximum(out, (np.hypot(dx, dy) < radius).astype(np.float64))
    return [_img(out)]


# -- filters -----------------------------------------------------------------

def _k_invert(inputs, p, w, h):
    return [ChannelImage(1.0 - inputs[0].data)]


def _k_levels(inputs, p, w, h):
    lo, hi = p["in_low"], p["in_high"]
    span = max(hi - lo, 1e-9)
    x = np.clip((inputs[0].data - lo) / span, 0.0, 1.0)
    x = np.power(x, 1.0 / p["gamma"])
    return [ChannelImage(p["out_low"] + x * (p["out_high"] - p["out_low"]))]


def _gauss_kernel(sigma: float) -> np.ndarray:
    radius = max(1, int(np.ceil(3 * sigma)))
    xs = np.arange(-radius, radius + 1)
    k = np.exp(-0.5 * (xs / sigma) ** 2)
    return k / k.sum()


def _blur_wrap(data: np.ndarray, sigma_px: float) -> np.ndarray:
    if sigma_px <= 1e-6:
        return data.copy()
    k = _gauss_kernel(sigma_px)
    r = len(k) // 2
    out = data
    for axis in (0, 1):
        padded = np.concatenate([out.take(range(-r, 0), axis=axis, mode="wrap"),
                                 out,
                                 out.take(range(0, r), axis=axis, mode="wrap")], axis=axis)
        out = np.apply_along_axis(lambda m: np.convolve(m, k, mode="valid"), axis, padded)
    return out


def _k_blur(inputs, p, w, h):
    sigma = p["radius"] * w / 64.0
    return [ChannelImage(_blur_wrap(inputs[0].data, sigma))]


def _k_sharpen(inputs, p, w, h):
    x = inputs[0].data
    soft = _blur_wrap(x, 1.0)
    return [ChannelImage(x + p["amount"] * (x - soft))]


def _k_transform2d(inputs, p, w, h):
    u, v = uv_grid(w, h)
    ox, oy = p["offset"]
    sx, sy = p["scale"]
    ang = np.deg2rad(p["rotation"])
    cx, cy = u - 0.5 - ox, v - 0.5 - oy
    ru = (np.cos(ang) * cx + np.sin(ang) * cy) / sx + 0.5
    rv = (-np.sin(ang) * cx + np.cos(ang) * cy) / sy + 0.5
    return [ChannelImage(sample_bilinear_wrap(inputs[0].data, ru % 1.0, rv % 1.0))]


def _k_tile(inputs, p, w, h):
    u, v = uv_grid(w, h)
    return [ChannelImage(sample_bilinear_wrap(inputs[0].data,
                                              (u * int(p["tiles_x"])) % 1.0,
                                              (v * int(p["tiles_y"])) % 1.0))]


def _k_warp(inputs, p, w, h):
    u, v = uv_grid(w, h)
    disp = (inputs[1].to_gray().data[..., 0] - 0.5) * p["intensity"]
    return [ChannelImage(sample_bilinear_wrap(inputs[0].data, (u + disp) % 1.0, (v + disp) % 1.0))]


def _k_blend(inputs, p, w, h):
    fg, bg = inputs[0], inputs[1]
    if fg.channels != bg.channels:
        fg, bg = fg.to_rgb(), bg.to_rgb()
    a, b = fg.data, bg.data
    mode = int(p["mode"])
    if mode == 0:
        mixed = a
    elif mode == 1:
        mixed = np.clip(a + b, 0.0, 1.0)
    elif mode == 2:
        mixed = a * b
    elif mode == 3:
        mixed = 1.0 - (1.0 - a) * (1.0 - b)
    else:
        mixed = np.clip(b - a, 0.0, 1.0)
    t = p["opacity"]
    return [ChannelImage(t * mixed + (1.0 - t) * b)]


def _k_to_color(inputs, p, w, h):
    gray = inputs[0].to_gray().data
    tint = np.asarray(p["tint"])
    return [ChannelImage(gray * tint[None, None, :])]


def _k_to_gray(inputs, p, w, h):
    return [inputs[0].to_gray()]


def _k_threshold(inputs, p, w, h):
    x = inputs[0].data
    t, s = p["threshold"], p["softness"]
    if s <= 0:
        out = (x >= t).astype(np.float64)
    else:
        out = smoothstep((x - t + s) / (2 * s))
    return [ChannelImage(out)]


def _k_colorize(inputs, p, w, h):
    gray = inputs[0].to_gray().data[..., 0]
    anchors = np.asarray(p["gradient"])  # (n, 3), evenly spaced on [0, 1]
    n = anchors.shape[0]
    if n == 1:
        return [ChannelImage.constant(w, h, anchors[0])]
    ts = np.linspace(0.0, 1.0, n)
    out = np.stack([np.interp(gray, ts, anchors[:, c]) for c in range(3)], axis=-1)
    return [ChannelImage(out)]


def _k_normal_from_height(inputs, p, w, h):
    z = inputs[0].to_gray().data[..., 0]
    s = p["strength"]
    dx = (np.roll(z, -1, axis=1) - np.roll(z, 1, axis=1)) * 0.5 * s
    dy = (np.roll(z, -1, axis=0) - np.roll(z, 1, axis=0)) * 0.5 * s
    norm = np.sqrt(dx * dx + dy * dy + 1.0)
    n = np.stack([-dx / norm, -dy / norm, 1.0 / norm], axis=-1)
    return [ChannelImage((n + 1.0) * 0.5)]


def _k_height_scale(inputs, p, w, h):
    gray = inputs[0].to_gray().data
    return [ChannelImage(gray * p["scale"] + p["offset"])]


def _k_merge_rgb(inputs, p, w, h):
    chans = [img.to_gray().data[..., 0] for img in inputs]
    return [ChannelImage(np.stack(chans, axis=-1))]


def _k_split_rgb(inputs, p, w, h):
    rgb = inputs[0].to_rgb().data
    return [_img(rgb[..., c]) for c in range(3)]


def _k_edge_detect(inputs, p, w, h):
    z = inputs[0].to_gray().data[..., 0]
    dx = (np.roll(z, -1, axis=1) - np.roll(z, 1, axis=1)) * 0.5
    dy = (np.roll(z, -1, axis=0) - np.roll(z, 1, axis=0)) * 0.5
    return [_img(np.clip(np.hypot(dx, dy) * p["strength"], 0.0, 1.0))]


def _k_posterize(inputs, p, w, h):
    n = int(p["levels"])
    return [ChannelImage(np.round(inputs[0].data * (n - 1)) / (n - 1))]


def _k_mirror(inputs, p, w, h):
    u, v = uv_grid(w, h)
    if int(p["axis"]) == 0:
        u = 1.0 - np.abs(1.0 - 2.0 * u)
    else:
        v = 1.0 - np.abs(1.0 - 2.0 * v)
    return [ChannelImage(sample_bilinear_wrap(inputs[0].data, u, v))]


def _k_passthrough(inputs, p, w, h):
    return [ChannelImage(inputs[0].data.copy())]


_register("brick", 0, 1, [
    scalar("cols", 1, 16, 4, discrete=True),
    scalar("mortar", 0.0, 0.45, 0.1),
    scalar("offset", 0.0, 1.0, 0.5),
    scalar("rows", 1, 16, 4, discrete=True),
], _k_brick)
_register("cell_noise", 0, 1, [
    scalar("cells", 2, 32, 8, discrete=True),
    scalar("jitter", 0.0, 1.0, 1.0),
    scalar("seed", 0, 99, 0, discrete=True),
], _k_cell_noise)
_register("checker", 0, 1, [
    scalar("high", 0.0, 1.0, 1.0),
    scalar("low", 0.0, 1.0, 0.0),
    scalar("tiles", 1, 16, 4, discrete=True),
], _k_checker)
_register("gradient_ramp", 0, 1, [
    scalar("exponent", 0.25, 4.0, 1.0),
    scalar("orientation", 0, 2, 0, discrete=True),
], _k_gradient_ramp)
_register("polygon", 0, 1, [
    scalar("radius", 0.1, 0.5, 0.35),
    scalar("sides", 3, 12, 6, discrete=True),
    scalar("softness", 0.0, 0.25, 0.01),
], _k_polygon)
_register("stripes", 0, 1, [
    scalar("angle", 0.0, 180.0, 0.0),
    scalar("frequency", 1, 32, 4, discrete=True),
], _k_stripes)
_register("uniform_color", 0, 1, [
    vector("color", 3, 0.0, 1.0, (0.5, 0.5, 0.5)),
], _k_uniform_color)
_register("value_noise", 0, 1, [
    scalar("octaves", 1, 6, 3, discrete=True),
    scalar("persistence", 0.1, 0.9, 0.5),
    scalar("scale", 1, 64, 8, discrete=True),
    scalar("seed", 0, 99, 0, discrete=True),
], _k_value_noise)
_register("dots", 0, 1, [
    scalar("radius", 0.05, 0.45, 0.25),
    scalar("softness", 0.005, 0.2, 0.02),
    scalar("spacing", 2, 16, 6, discrete=True),
], _k_dots)
_register("grid_lines", 0, 1, [
    scalar("cells", 1, 16, 4, discrete=True),
    scalar("thickness", 0.01, 0.25, 0.05),
], _k_grid_lines)
_register("rings", 0, 1, [
    scalar("count", 1, 24, 6, discrete=True),
    scalar("thickness", 0.05, 0.95, 0.5),
], _k_rings)
_register("spiral", 0, 1, [
    scalar("thickness", 0.05, 0.95, 0.5),
    scalar("turns", 1, 16, 4, discrete=True),
], _k_spiral)
_register("diamonds", 0, 1, [
    scalar("tiles", 1, 16, 4, discrete=True),
], _k_diamonds)
_register("hex_dots", 0, 1, [
    scalar("cells", 2, 16, 6, discrete=True),
    scalar("radius", 0.1, 0.7, 0.4),
], _k_hex_dots)
_register("triangles", 0, 1, [
    scalar("tiles", 1, 16, 4, discrete=True),
], _k_triangles)
_register("waves", 0, 1, [
    scalar("bend", 0.0, 4.0, 1.0),
    scalar("frequency", 1, 24, 4, discrete=True),
], _k_waves)
_register("staircase", 0, 1, [
    scalar("orientation", 0, 1, 0, discrete=True),
    scalar("steps", 2, 16, 4, discrete=True),
], _k_staircase)
_register("crosshatch", 0, 1, [
    scalar("frequency", 1, 24, 4, discrete=True),
], _k_crosshatch)
_register("ridged_noise", 0, 1, [
    scalar("octaves", 1, 6, 3, discrete=True),
    scalar("scale", 1, 64, 8, discrete=True),
    scalar("seed", 0, 99, 0, discrete=True),
], _k_ridged_noise)
_register("cell_edges", 0, 1, [
    scalar("cells", 2, 32, 8, discrete=True),
    scalar("jitter", 0.0, 1.0, 1.0),
    scalar("seed", 0, 99, 0, discrete=True),
], _k_cell_edges)
_register("scratches", 0, 1, [
    scalar("count", 1, 30, 10, discrete=True),
    scalar("seed", 0, 99, 0, discrete=True),
    scalar("width", 0.001, 0.02, 0.004),
], _k_scratches)
_register("speckle", 0, 1, [
    scalar("count", 1, 40, 15, discrete=True),
    scalar("radius", 0.005, 0.08, 0.02),
    scalar("seed", 0, 99, 0, discrete=True),
], _k_speckle)

_register("blend", 2, 1, [
    scalar("mode", 0, 4, 0, discrete=True),
    scalar("opacity", 0.0, 1.0, 0.5),
], _k_blend)
_register("blur", 1, 1, [scalar("radius", 0.0, 8.0, 1.0)], _k_blur)
_register("colorize", 1, 1, [
    varray("gradient", 3, 0.0, 1.0, (0.0, 0.0, 0.0, 1.0, 1.0, 1.0)),
], _k_colorize)
_register("edge_detect", 1, 1, [scalar("strength", 0.0, 16.0, 4.0)], _k_edge_detect)
_register("height_scale", 1, 1, [
    scalar("offset", -1.0, 1.0, 0.0),
    scalar("scale", 0.0, 2.0, 1.0),
], _k_height_scale)
_register("invert", 1, 1, [], _k_invert)
_register("levels", 1, 1, [
    scalar("gamma", 0.1, 10.0, 1.0),
    scalar("in_high", 0.0, 1.0, 1.0),
    scalar("in_low", 0.0, 1.0, 0.0),
    scalar("out_high", 0.0, 1.0, 1.0),
    scalar("out_low", 0.0, 1.0, 0.0),
], _k_levels)
_register("merge_rgb", 3, 1, [], _k_merge_rgb)
_register("mirror", 1, 1, [scalar("axis", 0, 1, 0, discrete=True)], _k_mirror)
_register("normal_from_height", 1, 1, [scalar("strength", 0.0, 8.0, 2.0)], _k_normal_from_height)
_register("posterize", 1, 1, [scalar("levels", 2, 16, 4, discrete=True)], _k_posterize)
_register("sharpen", 1, 1, [scalar("amount", 0.0, 4.0, 1.0)], _k_sharpen)
_register("split_rgb", 1, 3, [], _k_split_rgb)
_register("threshold", 1, 1, [
    scalar("softness", 0.0, 0.25, 0.0),
    scalar("threshold", 0.0, 1.0, 0.5),
], _k_threshold)
_register("tile", 1, 1, [
    scalar("tiles_x", 1, 8, 2, discrete=True),
    scalar("tiles_y", 1, 8, 2, discrete=True),
], _k_tile)
_register("to_color", 1, 1, [vector("tint", 3, 0.0, 1.0, (1.0, 1.0, 1.0))], _k_to_color)
_register("to_gray", 1, 1, [], _k_to_gray)
_register("transform2d", 1, 1, [
    vector("offset", 2, -1.0, 1.0, (0.0, 0.0)),
    scalar("rotation", 0.0, 360.0, 0.0),
    vector("scale", 2, 0.25, 4.0, (1.0, 1.0)),
], _k_transform2d)
_register("warp", 2, 1, [scalar("intensity", 0.0, 1.0, 0.2)], _k_warp)

for _chan in MATERIAL_CHANNELS:
    _register(f"output_{_chan}", 1, 1, [], _k_passthrough, marker=True)


_KERNELS: dict[str, OperatorKernel] | None = None
_LIBRARY: OperatorLibrary | None = None


def _build() -> tuple[OperatorLibrary, dict[str, OperatorKernel]]:
    decls = sorted(_DECLS, key=lambda d: d[0])
    schemas = []
    kernels = {}
    for i, (name, n_in, n_out, params, marker, fn) in enumerate(decls):
        schema = OperatorSchema(
            type=OperatorType(i, name),
            num_input_slots=n_in,
            num_output_slots=n_out,
            params=tuple(params),
            is_output_marker=marker,
        )
        schemas.append(schema)
        kernels[name] = OperatorKernel(schema=schema, eval=fn)
    return OperatorLibrary(schemas), kernels


def builtin_library() -> OperatorLibrary:
    global _LIBRARY, _KERNELS
    if _LIBRARY is None:
        _LIBRARY, _KERNELS = _build()
    return _LIBRARY


def builtin_kernels() -> dict[str, OperatorKernel]:
    builtin_library()
    assert _KERNELS is not None
    return _KERNELS
