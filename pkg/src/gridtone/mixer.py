"""Stream mixing and 16-bit mono WAV I/O.

The frame audio is the sample-wise mean of all object streams, so adding
objects never clips.  On disk the only format is RIFF/WAVE PCM, mono, 16-bit
little-endian; writing scales by 32767 with round-half-away-from-zero so +/-
full scale maps to +/-32767 symmetrically.
"""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Sequence

import numpy as np

from .errors import DomainError, FormatError
from .synth import DEFAULT_CONFIG, ObjectStream, SynthConfig

PCM_FULL_SCALE = 32767


@dataclass
class FrameAudio:
    """Final mono audio of one frame plus the source count it averaged."""

    samples: np.ndarray
    sample_rate: int
    source_count: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1:
            raise DomainError("frame audio must be a mono (1-D) buffer")


def mix(streams: Sequence[ObjectStream], config: SynthConfig = DEFAULT_CONFIG) -> FrameAudio:
    """Average the object streams; an empty scene yields a silent frame.

    The 1/M scaling applies uniformly, including the identity case M=1; the
    config supplies length and rate only when there is no stream to read them
    from.
    """
    if not streams:
        return FrameAudio(
            samples=np.zeros(config.frame_samples),
            sample_rate=config.sample_rate,
            source_count=0,
        )
    length = len(streams[0].samples)
    rate = streams[0].sample_rate
    for s in streams:
        if len(s.samples) != length:
            raise DomainError(
                f"stream lengths differ: {len(s.samples)} vs {length}"
            )
        if s.sample_rate != rate:
            raise DomainError(f"sample rates differ: {s.sample_rate} vs {rate}")
    total = np.sum([s.samples for s in streams], axis=0)
    return FrameAudio(samples=total / len(streams), sample_rate=rate, source_count=len(streams))


def _quantize_pcm(samples: np.ndarray) -> np.ndarray:
    scaled = samples * PCM_FULL_SCALE
    rounded = np.copysign(np.floor(np.abs(scaled) + 0.5), scaled)
    return np.clip(rounded, -32768, 32767).astype("<i2")


def write_wav(audio: FrameAudio, destination: str | Path | BinaryIO) -> int:
    """Write PCM WAV; returns the number of audio payload bytes."""
    pcm = _quantize_pcm(audio.samples)
    payload = pcm.tobytes()
    try:
        if isinstance(destination, (str, Path)):
            # Open the file before wave sees it so a bad path fails cleanly.
            with open(destination, "wb") as stream:
                _write_wav_stream(stream, audio.sample_rate, payload)
        else:
            _write_wav_stream(destination, audio.sample_rate, payload)
    except OSError as exc:
        raise OSError(f"cannot write WAV to {destination}: {exc}") from exc
    return len(payload)


def _write_wav_stream(stream: BinaryIO, sample_rate: int, payload: bytes) -> None:
    with wave.open(stream, "wb") as handle:
        handle.setnchannels(1)
        handle.setsampwidth(2)
        handle.setframerate(sample_rate)
        handle.writeframes(payload)


def wav_bytes(audio: FrameAudio) -> bytes:
    """The complete WAV file as a bytes object."""
    buffer = io.BytesIO()
    write_wav(audio, buffer)
    return buffer.getvalue()


def read_wav(source: str | Path | bytes | BinaryIO) -> FrameAudio:
    """Read a mono 16-bit PCM WAV back to float samples in [-1, 1]."""
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    try:
        if isinstance(source, (str, Path)):
            handle = wave.open(str(source), "rb")
        else:
            handle = wave.open(source, "rb")
        with handle:
            if handle.getnchannels() != 1:
                raise FormatError(
                    f"expected mono audio, got {handle.getnchannels()} channels"
                )
            if handle.getsampwidth() != 2:
                raise FormatError(
                    f"expected 16-bit samples, got {8 * handle.getsampwidth()}-bit"
                )
            if handle.getcomptype() != "NONE":
                raise FormatError(f"expected PCM, got {handle.getcomptype()}")
            count = handle.getnframes()
            raw = handle.readframes(count)
            if len(raw) < 2 * count:
                raise FormatError(
                    f"data chunk truncated: {len(raw)} bytes for {count} frames"
                )
            rate = handle.getframerate()
    except wave.Error as exc:
        raise FormatError(f"malformed WAV: {exc}") from exc
    except EOFError as exc:
        raise FormatError("malformed WAV: file too short") from exc
    samples = np.frombuffer(raw, dtype="<i2").astype(float) / PCM_FULL_SCALE
    return FrameAudio(samples=np.clip(samples, -1.0, 1.0), sample_rate=rate, source_count=1)
