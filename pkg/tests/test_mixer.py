"""Sample-wise mean mixing and 16-bit PCM WAV round trips."""

import io
import struct
import wave

import numpy as np
import pytest

from conftest import grid_for
from gridtone.errors import DomainError, FormatError
from gridtone.mixer import FrameAudio, mix, read_wav, wav_bytes, write_wav
from gridtone.synth import DEFAULT_CONFIG, ObjectStream, SynthConfig, render_object


def noise_stream(rng, scale=1.0) -> ObjectStream:
    return ObjectStream(
        samples=rng.uniform(-scale, scale, DEFAULT_CONFIG.frame_samples),
        sample_rate=DEFAULT_CONFIG.sample_rate,
        onset_seconds=0.0,
        voiced_seconds=1.0,
        codeword=None,
        rows=frozenset({1}),
        col_start=1,
        width=8,
    )


class TestMix:
    def test_empty_scene_is_silence(self):
        audio = mix([])
        assert audio.source_count == 0
        assert len(audio.samples) == 44100
        assert not audio.samples.any()

    def test_single_stream_passes_through(self, book):
        stream = render_object(grid_for({1}, 1, 2), book.lookup("person"))
        audio = mix([stream])
        assert audio.source_count == 1
        assert np.array_equal(audio.samples, stream.samples)

    def test_mean_of_three(self):
        rng = np.random.default_rng(3)
        streams = [noise_stream(rng) for _ in range(3)]
        audio = mix(streams)
        expected = np.mean([s.samples for s in streams], axis=0)
        assert np.max(np.abs(audio.samples - expected)) < 1e-12

    def test_mismatched_length_rejected(self):
        rng = np.random.default_rng(4)
        full = noise_stream(rng)
        short = ObjectStream(
            samples=full.samples[:100],
            sample_rate=full.sample_rate,
            onset_seconds=0.0,
            voiced_seconds=1.0,
            codeword=None,
            rows=frozenset({1}),
            col_start=1,
            width=8,
        )
        with pytest.raises(DomainError):
            mix([full, short])

    def test_mismatched_rate_rejected(self):
        rng = np.random.default_rng(5)
        a = noise_stream(rng)
        b = ObjectStream(
            samples=a.samples.copy(),
            sample_rate=22050,
            onset_seconds=0.0,
            voiced_seconds=1.0,
            codeword=None,
            rows=frozenset({1}),
            col_start=1,
            width=8,
        )
        with pytest.raises(DomainError):
            mix([a, b])


class TestPcmQuantization:
    def round_trip_one(self, value: float) -> int:
        audio = FrameAudio(
            samples=np.full(44100, value), sample_rate=44100, source_count=1
        )
        payload = wav_bytes(audio)
        with wave.open(io.BytesIO(payload)) as reader:
            frame = reader.readframes(1)
        return struct.unpack("<h", frame)[0]

    def test_full_scale_positive(self):
        assert self.round_trip_one(1.0) == 32767

    def test_full_scale_negative(self):
        assert self.round_trip_one(-1.0) == -32767

    def test_half_scale_rounds_away_from_zero(self):
        # 0.5 * 32767 = 16383.5, which rounds away from zero to 16384.
        assert self.round_trip_one(0.5) == 16384
        assert self.round_trip_one(-0.5) == -16384

    def test_zero(self):
        assert self.round_trip_one(0.0) == 0


class TestWavIo:
    def test_header_and_payload_size(self, tmp_path):
        audio = FrameAudio(
            samples=np.zeros(44100), sample_rate=44100, source_count=0
        )
        path = tmp_path / "frame.wav"
        write_wav(audio, path)
        with wave.open(str(path)) as reader:
            assert reader.getnchannels() == 1
            assert reader.getsampwidth() == 2
            assert reader.getframerate() == 44100
            assert reader.getnframes() == 44100
        assert path.stat().st_size == 44 + 88200

    def test_file_and_bytes_agree(self, tmp_path, book):
        stream = render_object(grid_for({2}, 1, 3), book.lookup("cat"))
        audio = mix([stream])
        path = tmp_path / "frame.wav"
        write_wav(audio, path)
        assert path.read_bytes() == wav_bytes(audio)

    def test_round_trip_error_within_one_step(self, book):
        stream = render_object(grid_for({1, 3}, 2, 4), book.lookup("dog"))
        audio = mix([stream])
        back = read_wav(wav_bytes(audio))
        assert back.sample_rate == 44100
        assert len(back.samples) == 44100
        assert np.max(np.abs(back.samples - audio.samples)) <= 1.0 / 32767

    def test_stereo_rejected(self):
        buffer = io.BytesIO()
        with wave.open(buffer, "wb") as writer:
            writer.setnchannels(2)
            writer.setsampwidth(2)
            writer.setframerate(44100)
            writer.writeframes(b"\x00" * 400)
        with pytest.raises(FormatError):
            read_wav(buffer.getvalue())

    def test_eight_bit_rejected(self):
        buffer = io.BytesIO()
        with wave.open(buffer, "wb") as writer:
            writer.setnchannels(1)
            writer.setsampwidth(1)
            writer.setframerate(44100)
            writer.writeframes(b"\x00" * 400)
        with pytest.raises(FormatError):
            read_wav(buffer.getvalue())

    def test_truncated_payload_rejected(self):
        audio = FrameAudio(
            samples=np.zeros(44100), sample_rate=44100, source_count=0
        )
        payload = wav_bytes(audio)
        with pytest.raises(FormatError):
            read_wav(payload[: len(payload) - 1001])

    def test_garbage_rejected(self):
        with pytest.raises(FormatError):
            read_wav(b"definitely not a wav file")

    def test_write_error_names_path(self):
        audio = FrameAudio(
            samples=np.zeros(44100), sample_rate=44100, source_count=0
        )
        with pytest.raises(OSError) as err:
            write_wav(audio, "/nonexistent-dir/frame.wav")
        assert "/nonexistent-dir/frame.wav" in str(err.value)
