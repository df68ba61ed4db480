"""Signal container, WAV I/O, resampling and SNR-controlled noise mixing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly


class AudioError(ValueError):
    """Raised for unreadable, unsupported or degenerate audio."""


@dataclass(frozen=True, eq=False)
class AudioSignal:
    """Mono waveform with its sample rate.

    ``meta`` carries per-operation bookkeeping (e.g. the gains applied by
    :func:`mix_at_snr`) and is not part of the signal's identity.
    """

    samples: np.ndarray
    sample_rate: int
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 1:
            raise AudioError(f"expected mono samples, got array of shape {x.shape}")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise AudioError(f"sample rate must be a positive integer, got {self.sample_rate}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def segment(self, start: int, stop: int) -> "AudioSignal":
        if not 0 <= start < stop <= len(self):
            raise AudioError(f"invalid span [{start}, {stop}) for signal of {len(self)} samples")
        return AudioSignal(self.samples[start:stop], self.sample_rate)


@dataclass(frozen=True)
class NoiseCondition:
    snr_db: float
    noise_id: str = "babble"

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise ValueError(f"SNR must be finite, got {self.snr_db}")


def load_wav(path: str | Path) -> AudioSignal:
    """Read a PCM16 or float32 RIFF/WAVE file; stereo is averaged to mono."""
    try:
        rate, data = wavfile.read(str(path))
    except FileNotFoundError:
        raise
    except Exception as exc:  # scipy raises ValueError/struct.error on bad headers
        raise AudioError(f"{path}: unreadable WAV file ({exc})") from exc

    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        x = data.astype(np.float64)
    else:
        raise AudioError(f"{path}: unsupported encoding {data.dtype} (need PCM16 or float32)")

    if x.ndim == 2:
        x = x.mean(axis=1)
    if x.size == 0:
        raise AudioError(f"{path}: zero-length audio")
    return AudioSignal(x, rate)


def write_wav(path: str | Path, signal: AudioSignal, encoding: str = "pcm16") -> None:
    x = signal.samples
    if encoding == "pcm16":
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    elif encoding == "float32":
        data = x.astype(np.float32)
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    wavfile.write(str(path), signal.sample_rate, data)


def rms(signal: AudioSignal | np.ndarray) -> float:
    x = signal.samples if isinstance(signal, AudioSignal) else np.asarray(signal, dtype=np.float64)
    if x.size == 0:
        raise AudioError("RMS of an empty signal")
    return float(np.sqrt(np.mean(np.square(x))))


def resample(signal: AudioSignal, target_rate: int) -> AudioSignal:
    """Polyphase windowed-sinc resampling with anti-alias filtering."""
    if target_rate <= 0:
        raise ValueError(f"target rate must be positive, got {target_rate}")
    if target_rate == signal.sample_rate:
        return AudioSignal(signal.samples, signal.sample_rate)
    ratio = Fraction(int(target_rate), signal.sample_rate)
    y = resample_poly(signal.samples, ratio.numerator, ratio.denominator)
    return AudioSignal(y, target_rate)


def noise_segment(noise: AudioSignal, length: int, offset: int = 0) -> np.ndarray:
    """``length`` samples of noise starting at ``offset``, wrapping circularly."""
    idx = (int(offset) + np.arange(length)) % len(noise)
    return noise.samples[idx]


def noise_gain(speech: np.ndarray, segment: np.ndarray, snr_db: float) -> float:
    s, n = rms(speech), rms(segment)
    if s == 0.0:
        raise AudioError("speech has zero RMS; SNR is undefined")
    if n == 0.0:
        raise AudioError("noise segment has zero RMS; SNR is undefined")
    return (s / n) * 10.0 ** (-snr_db / 20.0)


def mix_at_snr(
    speech: AudioSignal,
    noise: AudioSignal,
    condition: NoiseCondition,
    noise_offset: int = 0,
) -> AudioSignal:
    """Add noise to ``speech`` so the whole-utterance SNR equals ``condition.snr_db``.

    If the mixture would clip, speech and noise are rescaled together so the
    peak is 0.999; the SNR is unaffected. ``meta`` records ``noise_gain``
    (before rescaling), ``output_scale`` and ``noise_offset``.
    """
    if speech.sample_rate != noise.sample_rate:
        raise AudioError(
            f"sample-rate mismatch: speech {speech.sample_rate} Hz, noise {noise.sample_rate} Hz"
        )
    if len(speech) == 0 or len(noise) == 0:
        raise AudioError("cannot mix empty signals")

    seg = noise_segment(noise, len(speech), noise_offset)
    g = noise_gain(speech.samples, seg, condition.snr_db)
    mixture = speech.samples + g * seg

    scale = 1.0
    peak = float(np.max(np.abs(mixture)))
    if peak > 1.0:
        scale = 0.999 / peak
        mixture = mixture * scale

    meta = {
        "noise_gain": g,
        "output_scale": scale,
        "noise_offset": int(noise_offset) % len(noise),
        "snr_db": float(condition.snr_db),
        "noise_id": condition.noise_id,
    }
    return AudioSignal(mixture, speech.sample_rate, meta)


def achieved_snr(speech: AudioSignal, mixture: AudioSignal) -> float:
    """SNR of a mixture produced by :func:`mix_at_snr` from ``speech``."""
    scale = mixture.meta.get("output_scale", 1.0)
    clean = scale * speech.samples
    return 20.0 * math.log10(rms(clean) / rms(mixture.samples - clean))
