"""Spectral decoder: recover object facts from rendered frame audio.

Inverts the encoding for verification.  Slot energies give each object's
column span; the voiced span splits into three equal note segments; each
segment is identified by analysis-by-synthesis: every feasible (note digit,
row set) hypothesis is rendered through the synthesis pipeline and its
magnitude spectrum compared against the measured one.  The stretch step
leaves deterministic sidebands on short low-pitched notes, and comparing
against rendered references makes the decoder exact despite them, while a
high similarity bar plus a strict frequency check on the strongest peak keeps
foreign audio out.  All decisions are relative to the spectrum's own scale,
so decoding is insensitive to global gain.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .codebook import Codebook
from .errors import DecodeError, DomainError
from .synth import (
    DEFAULT_CONFIG,
    MAX_ROW,
    NOTES_PER_WORD,
    SLOTS_PER_FRAME,
    SynthConfig,
    _render_segment,
    kept_harmonics,
    note_frequency,
    periodic_hann,
)


@dataclass(frozen=True)
class DecoderConfig:
    """Detection thresholds; defaults are tuned for the default synth."""

    slot_rel_threshold: float = 0.05   # voiced slot: RMS vs loudest slot
    silence_floor: float = 1e-4        # below this, a frame counts as silent
    fft_size_min: int = 16384          # zero-padded FFT length floor
    significant_fraction: float = 0.30  # peak counts as significant vs max
    grid_gate_tolerance: float = 0.06  # strongest peak vs a hypothesis grid
    lattice_tolerance: float = 0.02    # strongest peak vs accepted reference
    min_similarity: float = 0.98       # spectral cosine acceptance
    max_chord_rows: int = 2            # largest row set searched per object
    band_margin: float = 1.3           # spectrum band cap relative to content
    min_peak_frequency: float = 40.0   # ignore spectral content below this


DEFAULT_DECODER = DecoderConfig()


@dataclass
class Decoding:
    """Everything the decoder recovered about one object."""

    digits: tuple[int, int, int]
    rows: frozenset[int]
    col_start: int
    width: int
    confidence: tuple[float, ...]
    class_name: str | None = None

    def __post_init__(self):
        if len(self.digits) != 3 or any(d < 1 or d > 7 for d in self.digits):
            raise DomainError(f"decoded digits out of range: {self.digits}")
        if not self.rows or not all(1 <= r <= MAX_ROW for r in self.rows):
            raise DomainError(f"decoded rows out of range: {sorted(self.rows)}")
        if not 1 <= self.col_start <= SLOTS_PER_FRAME or not (
            1 <= self.width <= SLOTS_PER_FRAME - self.col_start + 1
        ):
            raise DomainError(
                f"decoded geometry out of range: col {self.col_start}, width {self.width}"
            )


def slot_boundaries(config: SynthConfig = DEFAULT_CONFIG) -> list[int]:
    n = config.frame_samples
    return [round(i * n / SLOTS_PER_FRAME) for i in range(SLOTS_PER_FRAME + 1)]


def segment_energy(samples: Sequence[float], config: SynthConfig = DEFAULT_CONFIG) -> np.ndarray:
    """RMS of each of the 8 frame slots."""
    x = np.asarray(samples, dtype=float)
    if len(x) != config.frame_samples:
        raise DomainError(
            f"expected a frame of {config.frame_samples} samples, got {len(x)}"
        )
    bounds = slot_boundaries(config)
    return np.array(
        [
            np.sqrt(np.mean(x[bounds[i]:bounds[i + 1]] ** 2))
            for i in range(SLOTS_PER_FRAME)
        ]
    )


def _voiced_runs(rms: np.ndarray, dc: DecoderConfig) -> list[tuple[int, int]]:
    """Maximal runs of voiced slots as (start_col, width), 1-based."""
    cutoff = max(dc.silence_floor, dc.slot_rel_threshold * float(rms.max()))
    voiced = rms > cutoff
    runs: list[tuple[int, int]] = []
    i = 0
    while i < len(voiced):
        if voiced[i]:
            j = i
            while j + 1 < len(voiced) and voiced[j + 1]:
                j += 1
            runs.append((i + 1, j - i + 1))
            i = j + 1
        else:
            i += 1
    return runs


def lattice_frequencies(config: SynthConfig = DEFAULT_CONFIG) -> tuple[float, ...]:
    """Every audible (note, row) frequency, ascending."""
    values = []
    for code in range(1, 8):
        for row in range(1, MAX_ROW + 1):
            f = note_frequency(code, row)
            if f < config.nyquist:
                values.append(f)
    return tuple(sorted(values))


def _spectrum(segment: np.ndarray, dc: DecoderConfig) -> tuple[np.ndarray, int]:
    n = len(segment)
    nfft = dc.fft_size_min
    while nfft < n:
        nfft *= 2
    windowed = segment * periodic_hann(n)
    return np.abs(np.fft.rfft(windowed, nfft)), nfft


def _interpolate_peak(mags: np.ndarray, i: int) -> float:
    """Sub-bin peak position via log-parabolic interpolation."""
    if i <= 0 or i >= len(mags) - 1:
        return float(i)
    a, b, c = np.log(mags[i - 1:i + 2] + 1e-300)
    denom = a - 2 * b + c
    if denom >= 0:
        return float(i)
    return i + float(0.5 * (a - c) / denom)


def _significant_peaks(
    mags: np.ndarray, nfft: int, sample_rate: int, dc: DecoderConfig
) -> list[tuple[float, float]]:
    """Local spectral maxima at least significant_fraction of the strongest,
    as (frequency, magnitude), strongest first."""
    lo = max(1, int(np.ceil(dc.min_peak_frequency * nfft / sample_rate)))
    m = mags.copy()
    m[:lo] = 0.0
    top = float(m.max())
    if top <= 0:
        return []
    inner = m[1:-1]
    is_peak = (inner >= m[:-2]) & (inner >= m[2:]) & (inner >= dc.significant_fraction * top)
    indices = np.nonzero(is_peak)[0] + 1
    peaks = [
        (_interpolate_peak(m, int(i)) * sample_rate / nfft, float(m[i])) for i in indices
    ]
    peaks.sort(key=lambda p: -p[1])
    return peaks


@functools.lru_cache(maxsize=4096)
def _reference_spectrum(
    digit: int,
    rows: tuple[int, ...],
    width: int,
    seg_len: int,
    config: SynthConfig,
    dc: DecoderConfig,
) -> tuple[np.ndarray, tuple[tuple[float, float], ...]]:
    """Band-trimmed magnitude spectrum of the hypothesis's rendered segment,
    plus its significant peaks.  Callers must not mutate the array."""
    seg = _render_segment(digit, rows, width, config)[:seg_len]
    mags, nfft = _spectrum(np.asarray(seg, dtype=float), dc)
    peaks = _significant_peaks(mags, nfft, config.sample_rate, dc)
    top = max(
        (k * note_frequency(digit, r) for r in rows for k, _ in
         kept_harmonics(note_frequency(digit, r), config)),
        default=config.nyquist,
    )
    cap = min(len(mags), int(top * dc.band_margin * nfft / config.sample_rate) + 1)
    return mags[:cap].copy(), tuple(peaks[:12])


@dataclass
class _SegmentReading:
    digit: int
    rows: frozenset[int]
    similarity: float
    confidence: float


def _decode_segment(
    segment: np.ndarray, width: int, config: SynthConfig, dc: DecoderConfig
) -> _SegmentReading:
    if len(segment) < 8 or not np.any(segment):
        raise DecodeError("note segment is empty")
    mags, nfft = _spectrum(segment, dc)
    peaks = _significant_peaks(mags, nfft, config.sample_rate, dc)
    if not peaks:
        raise DecodeError("no spectral peak above the noise floor")
    strongest = peaks[0][0]

    # Prefix norms let the cosine run over any band in constant time.
    cumsq = np.concatenate(([0.0], np.cumsum(mags * mags)))
    meas_cap = int(
        max(f for f, m in peaks if m >= 0.05 * peaks[0][1])
        * dc.band_margin * nfft / config.sample_rate
    ) + 1

    # A hypothesis base grid is admitted when any prominent measured peak
    # lands near one of its multiples; stretch artifacts can push even the
    # strongest peak off-grid, so no single peak is trusted alone.
    gate_peaks = [f for f, _ in peaks[:6]]
    admitted: set[tuple[int, int]] = set()
    for digit in range(1, 8):
        for r_min in range(1, MAX_ROW + 1):
            base = note_frequency(digit, r_min)
            if base >= config.nyquist:
                continue
            for f_p in gate_peaks:
                m = round(f_p / base)
                if m >= 1 and abs(f_p - m * base) <= dc.grid_gate_tolerance * m * base:
                    admitted.add((digit, r_min))
                    break

    best_key: tuple | None = None
    best: tuple[int, frozenset[int], float, tuple[tuple[float, float], ...]] | None = None
    for digit, r_min in sorted(admitted):
        higher = [
            r for r in range(r_min + 1, MAX_ROW + 1)
            if note_frequency(digit, r) < config.nyquist
        ]
        for size in range(min(dc.max_chord_rows, len(higher) + 1)):
            for extra in itertools.combinations(higher, size):
                rows = (r_min,) + extra
                ref, ref_peaks = _reference_spectrum(
                    digit, rows, width, len(segment), config, dc
                )
                band = min(len(mags), max(len(ref), meas_cap))
                dot = float(np.dot(ref, mags[:len(ref)]))
                norm = float(np.linalg.norm(ref)) * float(np.sqrt(cumsq[band]))
                cos = dot / (norm + 1e-300)
                key = (cos, -len(rows), -digit, rows)
                if best_key is None or key > best_key:
                    best_key = key
                    best = (digit, frozenset(rows), cos, ref_peaks)
    if best is None:
        raise DecodeError(
            f"strongest peak at {strongest:.1f} Hz is not near any note's "
            "harmonic grid"
        )
    digit, rows, cos, ref_peaks = best
    if cos < dc.min_similarity:
        raise DecodeError(
            f"no (note, row set) hypothesis matches the spectrum "
            f"(best cosine {cos:.3f})"
        )
    # The strongest measured peak must coincide with a major reference peak;
    # near-tied components may swap rank, so any major one is acceptable.
    ref_top = ref_peaks[0][1] if ref_peaks else 0.0
    if not any(
        m_r >= 0.5 * ref_top
        and abs(strongest - f_r) <= dc.lattice_tolerance * f_r
        for f_r, m_r in ref_peaks
    ):
        raise DecodeError(
            f"strongest peak at {strongest:.1f} Hz does not match any major "
            "component of the best hypothesis"
        )
    confidence = float(mags.max() / (np.median(mags) + 1e-300))
    return _SegmentReading(digit=digit, rows=rows, similarity=cos, confidence=confidence)


def _decode_span(
    x: np.ndarray,
    col_start: int,
    width: int,
    config: SynthConfig,
    codebook: Codebook | None,
    dc: DecoderConfig,
) -> Decoding:
    n = config.frame_samples
    onset = round((col_start - 1) * n / SLOTS_PER_FRAME)
    seg_len = round(width * n / (SLOTS_PER_FRAME * NOTES_PER_WORD))
    readings: list[_SegmentReading] = []
    for k in range(NOTES_PER_WORD):
        start = onset + k * seg_len
        stop = min(onset + (k + 1) * seg_len, n)
        if stop <= start:
            raise DecodeError(f"note segment {k + 1} is outside the frame")
        readings.append(_decode_segment(x[start:stop], width, config, dc))
    row_sets = {r.rows for r in readings}
    if len(row_sets) != 1:
        raise DecodeError(
            "note segments disagree on the row set: "
            + ", ".join(str(sorted(r.rows)) for r in readings)
        )
    digits = tuple(r.digit for r in readings)
    return Decoding(
        digits=digits,  # type: ignore[arg-type]
        rows=readings[0].rows,
        col_start=col_start,
        width=width,
        confidence=tuple(r.confidence for r in readings),
        class_name=codebook.class_for(digits) if codebook else None,
    )


def decode_object_stream(
    samples: Sequence[float],
    config: SynthConfig = DEFAULT_CONFIG,
    codebook: Codebook | None = None,
    decoder: DecoderConfig = DEFAULT_DECODER,
) -> Decoding:
    """Decode a frame known to contain exactly one rendered object."""
    x = np.asarray(samples, dtype=float)
    rms = segment_energy(x, config)
    runs = _voiced_runs(rms, decoder)
    if not runs:
        raise DecodeError("frame is silent")
    if len(runs) > 1:
        raise DecodeError(
            f"expected one voiced span, found {len(runs)}; use decode_frame"
        )
    col_start, width = runs[0]
    return _decode_span(x, col_start, width, config, codebook, decoder)


def _compositions(total: int) -> Iterator[tuple[int, ...]]:
    """Ordered splits of a column span, fewest parts first."""
    for parts in range(1, total + 1):
        for cuts in itertools.combinations(range(1, total), parts - 1):
            edges = (0,) + cuts + (total,)
            yield tuple(edges[i + 1] - edges[i] for i in range(parts))


def decode_frame(
    samples: Sequence[float],
    config: SynthConfig = DEFAULT_CONFIG,
    codebook: Codebook | None = None,
    decoder: DecoderConfig = DEFAULT_DECODER,
) -> list[Decoding]:
    """Decode a mixed frame of objects with non-overlapping voiced spans.

    Each voiced run may hold several objects back to back (same class in
    adjacent columns plays its codeword repeatedly), so runs are tried against
    every ordered split into sub-spans, fewest objects first; the first split
    whose parts all decode wins.  A silent frame decodes to an empty list.
    """
    x = np.asarray(samples, dtype=float)
    rms = segment_energy(x, config)
    results: list[Decoding] = []
    for col_start, width in _voiced_runs(rms, decoder):
        for split in _compositions(width):
            col = col_start
            parts: list[Decoding] = []
            try:
                for part_width in split:
                    parts.append(_decode_span(x, col, part_width, config, codebook, decoder))
                    col += part_width
            except DecodeError:
                continue
            results.extend(parts)
            break
        else:
            raise DecodeError(
                f"voiced span at columns {col_start}..{col_start + width - 1} "
                "cannot be decoded under any object split"
            )
    return results
