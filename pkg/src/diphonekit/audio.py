"""Mono PCM16 clips: WAV I/O, time slicing and concatenation."""

from __future__ import annotations

import io
import math
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Sequence

import numpy as np

INT16_MIN, INT16_MAX = -32768, 32767


class AudioError(ValueError):
    pass


class UnsupportedEncoding(AudioError):
    pass


class CorruptHeader(AudioError):
    pass


class OutOfRange(AudioError):
    pass


class RateMismatch(AudioError):
    pass


class CrossfadeTooLong(AudioError):
    pass


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True, eq=False)
class AudioClip:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1:
            raise ValueError("AudioClip is mono; samples must be one-dimensional")
        if samples.dtype != np.int16:
            samples = np.clip(np.round(samples), INT16_MIN, INT16_MAX).astype(np.int16)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def channel_count(self) -> int:
        return 1

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)

    def __eq__(self, other):
        if not isinstance(other, AudioClip):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(self.samples, other.samples)

    __hash__ = None

    def __repr__(self):
        return f"AudioClip({len(self.samples)} samples @ {self.sample_rate} Hz)"


def read_wav(source: bytes | BinaryIO | str | Path) -> AudioClip:
    """Read a PCM16 WAV file; stereo is averaged down to mono."""
    if isinstance(source, (str, Path)):
        source = Path(source).read_bytes()
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    try:
        with wave.open(source, "rb") as w:
            width = w.getsampwidth()
            channels = w.getnchannels()
            rate = w.getframerate()
            frames = w.readframes(w.getnframes())
    except wave.Error as exc:
        if "unknown format" in str(exc):
            raise UnsupportedEncoding(f"non-PCM WAV ({exc})") from None
        raise CorruptHeader(str(exc)) from None
    except (EOFError, ValueError, OSError) as exc:
        raise CorruptHeader(str(exc) or "truncated header") from None
    if width != 2:
        raise UnsupportedEncoding(f"expected 16-bit samples, got {8 * width}-bit")
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"expected mono or stereo, got {channels} channels")
    if rate <= 0:
        raise CorruptHeader(f"invalid sample rate {rate}")
    usable = len(frames) - len(frames) % (2 * channels)
    data = np.frombuffer(frames[:usable], dtype="<i2")
    if channels == 2:
        pairs = data.reshape(-1, 2).astype(np.int32)
        data = (pairs[:, 0] + pairs[:, 1]) // 2
    return AudioClip(data.astype(np.int16), rate)


def wav_bytes(clip: AudioClip) -> bytes:
    buf = io.BytesIO()
    write_wav(clip, buf)
    return buf.getvalue()


def write_wav(clip: AudioClip, sink: BinaryIO | str | Path) -> None:
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(wav_bytes(clip))
        return
    with wave.open(sink, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(clip.sample_rate)
        w.writeframes(clip.samples.astype("<i2").tobytes())


def slice_clip(clip: AudioClip, start: float, end: float) -> AudioClip:
    """Samples ``[round(start*rate), round(end*rate))``, rounding half up."""
    tol = 0.5 / clip.sample_rate
    if not (0 <= start < end <= clip.duration + tol):
        raise OutOfRange(f"slice [{start}, {end}] outside clip of {clip.duration:.6f} s")
    i = _round_half_up(start * clip.sample_rate)
    j = min(_round_half_up(end * clip.sample_rate), len(clip))
    return AudioClip(clip.samples[i:j], clip.sample_rate)


def concat(clips: Sequence[AudioClip], crossfade_ms: float = 0.0) -> AudioClip:
    """Join clips end to end, optionally overlapping each join with linear ramps."""
    if not clips:
        raise ValueError("concat needs at least one clip")
    rate = clips[0].sample_rate
    for c in clips[1:]:
        if c.sample_rate != rate:
            raise RateMismatch(f"{c.sample_rate} Hz clip joined to {rate} Hz clip")
    if crossfade_ms < 0:
        raise ValueError("crossfade must be non-negative")
    if len(clips) == 1:
        return clips[0]
    n = _round_half_up(crossfade_ms * rate / 1000)
    if n == 0:
        return AudioClip(np.concatenate([c.samples for c in clips]), rate)
    for c in clips:
        if 2 * n > len(c):
            raise CrossfadeTooLong(f"{crossfade_ms} ms crossfade exceeds half of a {len(c)}-sample clip")

    fade_in = np.arange(1, n + 1, dtype=np.float64) / (n + 1)
    fade_out = 1.0 - fade_in
    total = sum(len(c) for c in clips) - (len(clips) - 1) * n
    out = np.zeros(total, dtype=np.float64)
    pos = 0
    for k, c in enumerate(clips):
        seg = c.samples.astype(np.float64)
        if k > 0:
            seg[:n] *= fade_in
        if k < len(clips) - 1:
            seg[len(seg) - n:] *= fade_out
        out[pos:pos + len(seg)] += seg
        pos += len(seg) - n
    return AudioClip(np.clip(np.round(out), INT16_MIN, INT16_MAX).astype(np.int16), rate)


def silence(duration: float, rate: int) -> AudioClip:
    if duration < 0:
        raise ValueError("duration must be non-negative")
    return AudioClip(np.zeros(_round_half_up(duration * rate), dtype=np.int16), rate)
