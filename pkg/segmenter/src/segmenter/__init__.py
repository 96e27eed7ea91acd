"""Instance-segmentation adapter.

Runs a pretrained detector on an image and writes a mask-volume JSON file
(128x128 frame, one run-length-encoded binary mask per detected object)
that the gridtone encoder accepts as input.
"""

from .adapter import (
    FRAME_SIDE,
    AdapterConfig,
    AdapterError,
    Detection,
    TorchvisionBackend,
    build_volume,
    default_allowlist,
    encode_rle,
    load_allowlist,
    load_image,
    segment_image,
    write_volume,
)

__version__ = "0.1.0"

__all__ = [
    "FRAME_SIDE",
    "AdapterConfig",
    "AdapterError",
    "Detection",
    "TorchvisionBackend",
    "build_volume",
    "default_allowlist",
    "encode_rle",
    "load_allowlist",
    "load_image",
    "segment_image",
    "write_volume",
]
