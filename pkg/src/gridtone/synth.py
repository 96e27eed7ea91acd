"""Note synthesis and per-object stream assembly.

Each object becomes a one-second mono stream: its codeword's three notes, each
pitched by octave per occupied grid row, stretched to width-proportional
length by an STFT phase vocoder, and placed at the onset implied by the
leftmost occupied column.  All arithmetic is deterministic; rendering the same
inputs twice yields identical buffers.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .codebook import NOTE_BY_CODE, Codeword
from .errors import DomainError

MAX_ROW = 8
NOTES_PER_WORD = 3
SLOTS_PER_FRAME = 8

DEFAULT_TIMBRE: tuple[tuple[int, float], ...] = (
    (1, 1.0),
    (2, 0.5),
    (3, 0.25),
    (4, 0.125),
    (5, 0.0625),
)


@dataclass(frozen=True)
class SynthConfig:
    """Immutable synthesis settings; hashable so renders can be memoized."""

    sample_rate: int = 44100
    frame_seconds: float = 1.0
    timbre: tuple[tuple[int, float], ...] = DEFAULT_TIMBRE
    attack_ms: float = 5.0
    release_ms: float = 5.0
    tsm_window: int = 2048
    tsm_hop: int = 512
    # Bypass the stretch step and synthesize at target length, for A/B runs.
    direct_synthesis: bool = False

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise DomainError(f"sample_rate must be positive, got {self.sample_rate}")
        n = self.frame_seconds * self.sample_rate
        if abs(n - round(n)) > 1e-9 or round(n) <= 0:
            raise DomainError(
                f"frame_seconds * sample_rate must be a positive integer, got {n}"
            )
        timbre = tuple((int(k), float(a)) for k, a in self.timbre)
        if not timbre or timbre[0][0] != 1 or timbre[0][1] <= 0:
            raise DomainError("timbre must start with harmonic 1 at positive amplitude")
        if any(k < 1 or a < 0 for k, a in timbre):
            raise DomainError("timbre harmonics must be >= 1 with nonnegative amplitudes")
        object.__setattr__(self, "timbre", timbre)
        if self.tsm_window < 4 or self.tsm_hop < 1 or self.tsm_hop > self.tsm_window:
            raise DomainError("tsm window/hop out of range")

    @property
    def frame_samples(self) -> int:
        return round(self.frame_seconds * self.sample_rate)

    @property
    def slot_seconds(self) -> float:
        return self.frame_seconds / SLOTS_PER_FRAME

    @property
    def note_base_seconds(self) -> float:
        return self.frame_seconds / (SLOTS_PER_FRAME * NOTES_PER_WORD)

    @property
    def nyquist(self) -> float:
        return self.sample_rate / 2


DEFAULT_CONFIG = SynthConfig()


def note_frequency(code: int, row: int) -> float:
    """Frequency of a note code at a grid row: base doubled once per row."""
    if code not in NOTE_BY_CODE:
        raise DomainError(f"note code must be in 1..7, got {code}")
    if not 1 <= row <= MAX_ROW:
        raise DomainError(f"row must be in 1..{MAX_ROW}, got {row}")
    return NOTE_BY_CODE[code].base_frequency * 2 ** (row - 1)


def kept_harmonics(frequency: float, config: SynthConfig) -> tuple[tuple[int, float], ...]:
    """Timbre entries whose partial stays below Nyquist at this fundamental."""
    return tuple((k, a) for k, a in config.timbre if k * frequency < config.nyquist)


def additive_peak(frequency: float, duration: float, config: SynthConfig) -> float:
    """Peak amplitude of the raw (un-normalized) harmonic stack.

    The decoder uses this to reproduce the encoder's per-note normalization
    when predicting chord spectra.
    """
    return float(np.max(np.abs(_additive(frequency, duration, config))))


def _additive(frequency: float, duration: float, config: SynthConfig) -> np.ndarray:
    n = round(duration * config.sample_rate)
    t = np.arange(n) / config.sample_rate
    signal = np.zeros(n)
    for k, amp in kept_harmonics(frequency, config):
        signal += amp * np.sin(2 * np.pi * k * frequency * t)
    return signal


def synthesize_note(frequency: float, duration: float, config: SynthConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Additive tone of round(duration * sample_rate) samples.

    Harmonics at or above Nyquist are dropped; the result is peak-normalized
    then shaped by linear attack/release ramps.
    """
    if duration <= 0:
        raise DomainError(f"duration must be positive, got {duration}")
    if frequency >= config.nyquist:
        raise DomainError(
            f"fundamental {frequency} Hz is at or above Nyquist ({config.nyquist} Hz)"
        )
    signal = _additive(frequency, duration, config)
    peak = np.max(np.abs(signal))
    if peak > 0:
        signal = signal / peak
    return signal * _envelope(len(signal), config)


def _envelope(n: int, config: SynthConfig) -> np.ndarray:
    env = np.ones(n)
    attack = min(round(config.attack_ms / 1000 * config.sample_rate), n // 2)
    release = min(round(config.release_ms / 1000 * config.sample_rate), n // 2)
    if attack > 0:
        env[:attack] = (np.arange(attack) + 1) / attack
    if release > 0:
        env[n - release:] *= ((np.arange(release) + 1) / release)[::-1]
    return env


def periodic_hann(n: int) -> np.ndarray:
    return 0.5 * (1.0 - np.cos(2 * np.pi * np.arange(n) / n))


def _stft(x: np.ndarray, n_fft: int, hop: int, window: np.ndarray) -> np.ndarray:
    padded = np.pad(x, (n_fft // 2, n_fft // 2))
    count = 1 + (len(padded) - n_fft) // hop
    frames = np.empty((n_fft // 2 + 1, count), dtype=complex)
    for f in range(count):
        frames[:, f] = np.fft.rfft(padded[f * hop:f * hop + n_fft] * window)
    return frames


def _istft(frames: np.ndarray, n_fft: int, hop: int, window: np.ndarray, length: int) -> np.ndarray:
    count = frames.shape[1]
    total = n_fft + hop * (count - 1)
    out = np.zeros(total)
    norm = np.zeros(total)
    wsq = window * window
    for f in range(count):
        out[f * hop:f * hop + n_fft] += np.fft.irfft(frames[:, f], n=n_fft) * window
        norm[f * hop:f * hop + n_fft] += wsq
    good = norm > 1e-10
    out[good] /= norm[good]
    pad = n_fft // 2
    result = np.zeros(length)
    usable = min(length, total - pad)
    if usable > 0:
        result[:usable] = out[pad:pad + usable]
    return result


def _phase_vocoder(frames: np.ndarray, hop: int, factor: float) -> np.ndarray:
    """Re-time STFT frames by the stretch factor, accumulating phase so each
    bin's instantaneous frequency is preserved."""
    bins, count = frames.shape
    n_fft = 2 * (bins - 1)
    steps = np.arange(0, count, 1.0 / factor)
    expected = 2 * np.pi * hop * np.arange(bins) / n_fft
    padded = np.pad(frames, [(0, 0), (0, 2)])
    out = np.empty((bins, len(steps)), dtype=complex)
    phase = np.angle(frames[:, 0])
    for t, step in enumerate(steps):
        i = int(step)
        frac = step - i
        left = padded[:, i]
        right = padded[:, i + 1]
        magnitude = (1 - frac) * np.abs(left) + frac * np.abs(right)
        out[:, t] = magnitude * np.exp(1j * phase)
        delta = np.angle(right) - np.angle(left) - expected
        delta -= 2 * np.pi * np.round(delta / (2 * np.pi))
        phase = phase + expected + delta
    return out


def _pv_stretch(x: np.ndarray, factor: float, n_fft: int, hop: int) -> np.ndarray:
    target = round(len(x) * factor)
    window = periodic_hann(n_fft)
    frames = _stft(x, n_fft, hop, window)
    stretched = _phase_vocoder(frames, hop, factor)
    return _istft(stretched, n_fft, hop, window, target)


def time_stretch(samples: Sequence[float], factor: float, config: SynthConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Stretch a buffer to round(len * factor) samples, pitch preserved.

    STFT analysis with a periodic Hann window, magnitude interpolation across
    analysis frames, and per-bin phase accumulation; the overlap-added result
    is trimmed or zero-padded to the exact target length.
    """
    x = np.asarray(samples, dtype=float)
    if factor <= 0:
        raise DomainError(f"stretch factor must be positive, got {factor}")
    if len(x) < config.tsm_window:
        raise DomainError(
            f"input ({len(x)} samples) is shorter than the analysis window "
            f"({config.tsm_window})"
        )
    if factor == 1:
        return x.copy()
    return _pv_stretch(x, factor, config.tsm_window, config.tsm_hop)


def _fitted_window(length: int, config: SynthConfig) -> tuple[int, int]:
    """Largest power-of-two window that fits the buffer, hop a quarter of it.

    Base notes are shorter than the default analysis window, so the stretch
    step shrinks the window instead of refusing the input.
    """
    n_fft = config.tsm_window
    while n_fft > length:
        n_fft //= 2
    n_fft = max(n_fft, 4)
    return n_fft, max(n_fft // 4, 1)


@dataclass
class ObjectStream:
    """One object's rendered contribution to the frame."""

    samples: np.ndarray
    sample_rate: int
    onset_seconds: float
    voiced_seconds: float
    codeword: Codeword
    rows: frozenset[int]
    col_start: int
    width: int


@functools.lru_cache(maxsize=4096)
def _render_segment(
    digit: int, rows: tuple[int, ...], width: int, config: SynthConfig
) -> np.ndarray:
    """One note segment: the row chord for a digit, stretched to width share.

    Cached because frames repeat (digit, rows, width) combinations heavily;
    callers must not mutate the returned buffer.
    """
    target = round(width * config.frame_samples / (SLOTS_PER_FRAME * NOTES_PER_WORD))
    if config.direct_synthesis:
        duration = target / config.sample_rate
        chord = _row_chord(digit, rows, duration, config)
        return _fit_length(chord, target)
    chord = _row_chord(digit, rows, config.note_base_seconds, config)
    if width == 1:
        return _fit_length(chord, target)
    n_fft, hop = _fitted_window(len(chord), config)
    return _fit_length(_pv_stretch(chord, float(width), n_fft, hop), target)


def _row_chord(digit: int, rows: Iterable[int], duration: float, config: SynthConfig) -> np.ndarray:
    rows = tuple(rows)
    parts = [synthesize_note(note_frequency(digit, r), duration, config) for r in rows]
    return np.sum(parts, axis=0) / len(rows)


def _fit_length(x: np.ndarray, target: int) -> np.ndarray:
    if len(x) >= target:
        return x[:target]
    return np.pad(x, (0, target - len(x)))


def render_object(grid, word: Codeword, config: SynthConfig = DEFAULT_CONFIG) -> ObjectStream:
    """Render one object's full-frame stream.

    The three codeword notes play back to back inside the voiced span
    [(col_start-1)/8, (col_start-1+width)/8) of the frame, each a chord over
    the occupied rows with one octave doubling per row above the bottom.
    """
    for row in sorted(grid.rows):
        for digit in word.digits:
            if note_frequency(digit, row) >= config.nyquist:
                raise DomainError(
                    f"note {digit} at row {row} is at or above Nyquist "
                    f"({config.nyquist} Hz)"
                )
    rows_key = tuple(sorted(grid.rows))
    segments = [
        _render_segment(digit, rows_key, grid.width, config) for digit in word.digits
    ]
    voiced = np.concatenate(segments)
    peak = np.max(np.abs(voiced)) if len(voiced) else 0.0
    if peak > 1.0:
        voiced = voiced / peak

    frame = np.zeros(config.frame_samples)
    onset = round((grid.col_start - 1) * config.frame_samples / SLOTS_PER_FRAME)
    end = min(onset + len(voiced), config.frame_samples)
    frame[onset:end] = voiced[:end - onset]
    return ObjectStream(
        samples=frame,
        sample_rate=config.sample_rate,
        onset_seconds=(grid.col_start - 1) * config.slot_seconds,
        voiced_seconds=grid.width * config.slot_seconds,
        codeword=word,
        rows=frozenset(grid.rows),
        col_start=grid.col_start,
        width=grid.width,
    )


def clear_render_cache() -> None:
    _render_segment.cache_clear()
