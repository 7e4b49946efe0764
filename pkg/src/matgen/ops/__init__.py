from .image import ChannelImage, sample_bilinear_wrap, uv_grid
from .library import MATERIAL_CHANNELS, OperatorKernel, builtin_kernels, builtin_library
from .evaluate import MaterialOutput, evaluate_graph, resolve_params
from .export import png_bytes, write_png, write_ppm

__all__ = [
    "ChannelImage",
    "sample_bilinear_wrap",
    "uv_grid",
    "MATERIAL_CHANNELS",
    "OperatorKernel",
    "builtin_kernels",
    "builtin_library",
    "MaterialOutput",
    "evaluate_graph",
    "resolve_params",
    "png_bytes",
    "write_png",
    "write_ppm",
]
