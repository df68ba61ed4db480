"""Short-Time Objective Intelligibility (STOI).

Clean and degraded signals are resampled to 10 kHz, frames that are silent in
the clean signal are dropped, both signals are decomposed into one-third
octave band envelopes, and short-time envelope segments (30 frames, about
384 ms) are correlated after normalising and clipping the degraded envelope.
The score is the mean correlation over all bands and segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .audio import AudioSignal, resample


class StoiError(ValueError):
    pass


@dataclass(frozen=True)
class StoiConfig:
    working_rate: int = 10000
    frame_len: int = 256
    frame_shift: int = 128
    fft_len: int = 512
    band_count: int = 15
    band_start_cf: float = 150.0
    analysis_len: int = 30
    clip_db: float = -15.0
    silence_range_db: float = 40.0

    def __post_init__(self):
        if self.frame_len % 2 or self.frame_shift * 2 != self.frame_len:
            raise ValueError("frame_shift must be half of an even frame_len")
        if self.band_count < 1 or self.analysis_len < 1:
            raise ValueError("band_count and analysis_len must be >= 1")
        if self.fft_len < self.frame_len:
            raise ValueError("fft_len must be at least frame_len")
        top_edge = self.band_start_cf * 2 ** ((2 * (self.band_count - 1) + 1) / 6)
        if top_edge >= self.working_rate / 2:
            raise ValueError("highest band exceeds the Nyquist frequency")

    @property
    def center_frequencies(self) -> np.ndarray:
        return self.band_start_cf * 2.0 ** (np.arange(self.band_count) / 3.0)


DEFAULT_CONFIG = StoiConfig()


@lru_cache(maxsize=8)
def _window(n: int) -> np.ndarray:
    # Hann without the zero end points.
    w = np.hanning(n + 2)[1:-1]
    w.setflags(write=False)
    return w


@lru_cache(maxsize=8)
def third_octave_matrix(config: StoiConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Binary band x bin matrix grouping one-sided FFT bins into third-octave bands."""
    freqs = np.linspace(0, config.working_rate, config.fft_len + 1)[: config.fft_len // 2 + 1]
    k = np.arange(config.band_count)
    lo = config.band_start_cf * 2.0 ** ((2 * k - 1) / 6)
    hi = config.band_start_cf * 2.0 ** ((2 * k + 1) / 6)
    matrix = np.zeros((config.band_count, freqs.size))
    for j in range(config.band_count):
        a = int(np.argmin((freqs - lo[j]) ** 2))
        b = int(np.argmin((freqs - hi[j]) ** 2))
        matrix[j, a:b] = 1.0
    matrix.setflags(write=False)
    return matrix


def frame_count(n_samples: int, config: StoiConfig = DEFAULT_CONFIG) -> int:
    """Number of STFT frames; a partial last frame is zero-padded."""
    if n_samples < config.frame_len:
        raise StoiError(
            f"signal of {n_samples} samples is shorter than one frame ({config.frame_len})"
        )
    return math.ceil((n_samples - config.frame_len) / config.frame_shift) + 1


def _frames(x: np.ndarray, config: StoiConfig) -> np.ndarray:
    m = frame_count(x.size, config)
    needed = (m - 1) * config.frame_shift + config.frame_len
    if needed > x.size:
        x = np.concatenate([x, np.zeros(needed - x.size)])
    return sliding_window_view(x, config.frame_len)[:: config.frame_shift][:m]


def remove_silent_frames(
    clean: AudioSignal, degraded: AudioSignal, config: StoiConfig = DEFAULT_CONFIG
) -> tuple[AudioSignal, AudioSignal]:
    """Excise frames more than ``silence_range_db`` below the loudest clean frame.

    Only complete frames are screened; the kept windowed frames of both signals
    are overlap-added back together at the same positions.
    """
    if len(clean) != len(degraded):
        raise StoiError(f"length mismatch: {len(clean)} vs {len(degraded)} samples")
    if clean.sample_rate != degraded.sample_rate:
        raise StoiError("sample-rate mismatch")
    n, k = config.frame_len, config.frame_shift
    if len(clean) < n:
        raise StoiError(f"signal of {len(clean)} samples is shorter than one frame ({n})")

    w = _window(n)
    x_frames = sliding_window_view(clean.samples, n)[::k] * w
    y_frames = sliding_window_view(degraded.samples, n)[::k] * w

    norms = np.linalg.norm(x_frames, axis=1)
    if not np.any(norms > 0):
        raise StoiError("all frames silent")
    with np.errstate(divide="ignore"):
        energy = 20.0 * np.log10(norms / math.sqrt(n))
    keep = energy - energy.max() + config.silence_range_db > 0

    x_kept, y_kept = x_frames[keep], y_frames[keep]
    out_len = (x_kept.shape[0] - 1) * k + n
    x_out = np.zeros(out_len)
    y_out = np.zeros(out_len)
    for i in range(x_kept.shape[0]):
        x_out[i * k : i * k + n] += x_kept[i]
        y_out[i * k : i * k + n] += y_kept[i]
    return AudioSignal(x_out, clean.sample_rate), AudioSignal(y_out, degraded.sample_rate)


def third_octave_envelopes(signal: AudioSignal, config: StoiConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Band x frame matrix of one-third octave band magnitudes."""
    if signal.sample_rate != config.working_rate:
        raise StoiError(
            f"envelopes need a {config.working_rate} Hz signal, got {signal.sample_rate} Hz"
        )
    frames = _frames(signal.samples, config) * _window(config.frame_len)
    spec = np.fft.rfft(frames, n=config.fft_len, axis=1)
    power = np.square(np.abs(spec))
    return np.sqrt(third_octave_matrix(config) @ power.T)


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _segment_correlations(
    clean_env: np.ndarray, degraded_env: np.ndarray, config: StoiConfig
) -> np.ndarray:
    """Correlation for every band and every analysis segment, shape (bands, segments)."""
    n = config.analysis_len
    x = sliding_window_view(clean_env, n, axis=1)
    y = sliding_window_view(degraded_env, n, axis=1)

    x_norm = np.linalg.norm(x, axis=2, keepdims=True)
    y_norm = np.linalg.norm(y, axis=2, keepdims=True)
    y_scaled = y * _safe_div(x_norm, y_norm)
    y_clipped = np.minimum(y_scaled, x * (1.0 + 10.0 ** (-config.clip_db / 20.0)))

    xc = x - x.mean(axis=2, keepdims=True)
    yc = y_clipped - y_clipped.mean(axis=2, keepdims=True)
    num = np.sum(xc * yc, axis=2)
    den = np.linalg.norm(xc, axis=2) * np.linalg.norm(yc, axis=2)
    return np.clip(_safe_div(num, den), -1.0, 1.0)


def _to_working_rate(signal: AudioSignal, config: StoiConfig) -> AudioSignal:
    if signal.sample_rate < config.working_rate:
        raise StoiError(
            f"sample rate {signal.sample_rate} Hz is below the {config.working_rate} Hz working rate"
        )
    return resample(signal, config.working_rate)


def compute_stoi(
    clean: AudioSignal, degraded: AudioSignal, config: StoiConfig = DEFAULT_CONFIG
) -> float:
    """STOI score in [-1, 1]; higher means more intelligible.

    The two signals may differ in length by less than one frame (at the
    working rate); the longer one is truncated.
    """
    x = _to_working_rate(clean, config)
    y = _to_working_rate(degraded, config)
    if abs(len(x) - len(y)) >= config.frame_len:
        raise StoiError(
            f"duration mismatch: {clean.duration:.4f} s vs {degraded.duration:.4f} s"
        )
    n = min(len(x), len(y))
    x = AudioSignal(x.samples[:n], x.sample_rate)
    y = AudioSignal(y.samples[:n], y.sample_rate)

    x, y = remove_silent_frames(x, y, config)
    clean_env = third_octave_envelopes(x, config)
    degraded_env = third_octave_envelopes(y, config)
    if clean_env.shape[1] < config.analysis_len:
        raise StoiError(
            f"only {clean_env.shape[1]} non-silent frames; STOI needs at least "
            f"{config.analysis_len} (~{config.analysis_len * config.frame_shift / config.working_rate:.3f} s)"
        )
    return float(np.mean(_segment_correlations(clean_env, degraded_env, config)))
