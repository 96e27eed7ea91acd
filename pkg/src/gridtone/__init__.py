"""Image-to-audio sonification: per-object masks become note sequences.

A 128x128 scene with per-object segmentation masks is quantized to an
8x8 grid, each object class maps to a three-note codeword, rows pick
octaves and columns pick onset times, and everything mixes into one
one-second frame.  A spectral decoder inverts the rendering for
round-trip verification, and an HTTP trainer runs the listening tests.
"""

from .classes import DEFAULT_ALLOWLIST, MAX_CLASSES, load_allowlist
from .codebook import (
    Codebook,
    Codeword,
    Note,
    NOTES,
    classify_trend,
    default_codebook,
    distance,
    generate,
    published_codebook,
    validate,
)
from .decoder import (
    DEFAULT_DECODER,
    DecoderConfig,
    Decoding,
    decode_frame,
    decode_object_stream,
    segment_energy,
)
from .errors import (
    CapacityError,
    DecodeError,
    DomainError,
    FormatError,
    GridtoneError,
    ValidationError,
)
from .maskmodel import (
    DEFAULT_THRESHOLD,
    GridMask,
    MaskVolume,
    ObjectMask,
    decode_rle,
    encode_rle,
    load_mask_volume,
    parse_mask_volume,
    quantize,
)
from .mixer import FrameAudio, mix, read_wav, wav_bytes, write_wav
from .pipeline import EncodeResult, encode_file, encode_volume, manifest_json
from .synth import (
    DEFAULT_CONFIG,
    ObjectStream,
    SynthConfig,
    note_frequency,
    render_object,
    synthesize_note,
    time_stretch,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "Codebook",
    "Codeword",
    "DecodeError",
    "DecoderConfig",
    "Decoding",
    "DEFAULT_ALLOWLIST",
    "DEFAULT_CONFIG",
    "DEFAULT_DECODER",
    "DEFAULT_THRESHOLD",
    "DomainError",
    "EncodeResult",
    "FormatError",
    "FrameAudio",
    "GridMask",
    "GridtoneError",
    "MAX_CLASSES",
    "MaskVolume",
    "NOTES",
    "Note",
    "ObjectMask",
    "ObjectStream",
    "SynthConfig",
    "ValidationError",
    "classify_trend",
    "decode_frame",
    "decode_object_stream",
    "decode_rle",
    "default_codebook",
    "distance",
    "encode_file",
    "encode_rle",
    "encode_volume",
    "generate",
    "load_allowlist",
    "load_mask_volume",
    "manifest_json",
    "mix",
    "note_frequency",
    "parse_mask_volume",
    "published_codebook",
    "quantize",
    "read_wav",
    "render_object",
    "segment_energy",
    "synthesize_note",
    "time_stretch",
    "validate",
    "wav_bytes",
    "write_wav",
    "__version__",
]
