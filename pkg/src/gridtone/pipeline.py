"""Frame encoding: mask volume in, mixed one-second frame plus manifest out.

Each object is quantized to the 8x8 grid, mapped to its codeword, rendered
as a three-note stream, and mixed into the frame by sample-wise mean.  The
manifest records the geometry and codeword of every rendered object so that
downstream checks never re-derive them from audio.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .codebook import Codebook
from .errors import ValidationError
from .maskmodel import DEFAULT_THRESHOLD, MaskVolume, load_mask_volume
from .mixer import FrameAudio, mix, write_wav
from .synth import DEFAULT_CONFIG, ObjectStream, SynthConfig, render_object

MANIFEST_SUFFIX = ".manifest.json"


@dataclass(frozen=True)
class EncodeResult:
    audio: FrameAudio
    streams: tuple[ObjectStream, ...]
    manifest: dict


def encode_volume(
    volume: MaskVolume,
    codebook: Codebook,
    config: SynthConfig = DEFAULT_CONFIG,
    threshold: float = DEFAULT_THRESHOLD,
) -> EncodeResult:
    """Render and mix every object of a mask volume into one frame.

    Objects keep their input order in the manifest.  A class missing from
    the codebook is a validation error naming that class.
    """
    streams: list[ObjectStream] = []
    entries: list[dict] = []
    for obj in volume.objects:
        word = codebook.entries.get(obj.class_name)
        if word is None:
            raise ValidationError(f"class {obj.class_name!r} is not in the codebook")
        grid = obj.quantized(threshold)
        stream = render_object(grid, word, config)
        streams.append(stream)
        entries.append(
            {
                "class_id": obj.class_id,
                "class_name": obj.class_name,
                "codeword": str(word),
                "rows": sorted(stream.rows),
                "col_start": stream.col_start,
                "width": stream.width,
                "onset_seconds": stream.onset_seconds,
                "voiced_seconds": stream.voiced_seconds,
            }
        )
    audio = mix(streams, config)
    manifest = {
        "frame": {
            "sample_rate": config.sample_rate,
            "samples": config.frame_samples,
            "seconds": config.frame_seconds,
        },
        "source_count": audio.source_count,
        "objects": entries,
    }
    return EncodeResult(audio=audio, streams=tuple(streams), manifest=manifest)


def manifest_json(manifest: dict) -> str:
    """Canonical manifest serialization: sorted keys, two-space indent."""
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"


def manifest_path_for(wav_path: str | Path) -> Path:
    """Manifest sits alongside the WAV: frame.wav -> frame.manifest.json."""
    wav_path = Path(wav_path)
    return wav_path.with_name(wav_path.stem + MANIFEST_SUFFIX)


def encode_file(
    volume_path: str | Path,
    codebook: Codebook,
    out_wav: str | Path,
    config: SynthConfig = DEFAULT_CONFIG,
    threshold: float = DEFAULT_THRESHOLD,
    allowlist=None,
) -> EncodeResult:
    """Encode a mask-volume file to a WAV plus manifest on disk."""
    volume = load_mask_volume(volume_path, allowlist)
    result = encode_volume(volume, codebook, config, threshold)
    write_wav(result.audio, out_wav)
    manifest_file = manifest_path_for(out_wav)
    try:
        manifest_file.write_text(manifest_json(result.manifest), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write manifest {manifest_file}: {exc}") from exc
    return result
