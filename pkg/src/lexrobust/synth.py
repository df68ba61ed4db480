"""Synthetic speech-like test signals and babble.

These are stand-ins for recorded utterances: voiced syllables built from a
harmonic series shaped by random formant envelopes, separated by short
pauses, with occasional fricative noise bursts. Babble is a sum of several
independent talkers. ``simulate_responses`` fakes a listening experiment
for exercising the analysis pipeline end to end.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .audio import AudioSignal, NoiseCondition
from .hrs import PLACEHOLDER, ResponseRecord
from .lexicon import SynonymPairRecord


def _formant_envelope(freqs: np.ndarray, formants, bandwidths) -> np.ndarray:
    env = np.zeros_like(freqs)
    for f, bw in zip(formants, bandwidths):
        env += np.exp(-0.5 * ((freqs - f) / bw) ** 2)
    return env + 0.02


def _syllable(rng: np.random.Generator, n: int, rate: int) -> np.ndarray:
    t = np.arange(n) / rate
    f0 = rng.uniform(100.0, 220.0)
    glide = rng.uniform(-0.25, 0.25)
    f0_track = f0 * (1.0 + glide * t / max(t[-1], 1e-9))
    phase = 2 * np.pi * np.cumsum(f0_track) / rate
    formants = (rng.uniform(300, 900), rng.uniform(900, 2300), rng.uniform(2300, 3400))
    bandwidths = (80.0, 120.0, 180.0)

    x = np.zeros(n)
    for h in range(1, int(min(4500.0, rate / 2 - 200) // f0) + 1):
        amp = _formant_envelope(np.array([h * f0]), formants, bandwidths)[0] / h**0.5
        x += amp * np.sin(h * phase + rng.uniform(0, 2 * np.pi))
    envelope = np.sin(np.pi * np.arange(n) / n) ** 2
    return x * envelope


def _fricative(rng: np.random.Generator, n: int, rate: int) -> np.ndarray:
    noise = rng.standard_normal(n)
    spec = np.fft.rfft(noise)
    freqs = np.fft.rfftfreq(n, 1 / rate)
    lo = rng.uniform(2000, 3500)
    spec[(freqs < lo) | (freqs > min(rate / 2, 4900))] = 0
    burst = np.fft.irfft(spec, n)
    return burst * np.hanning(n)


def speech_like(
    rng: np.random.Generator, duration: float = 1.5, rate: int = 16000, peak: float = 0.5
) -> AudioSignal:
    """Syllabic, formant-shaped harmonic signal with pauses and fricatives."""
    total = int(round(duration * rate))
    out = np.zeros(total)
    pos = int(rng.uniform(0.02, 0.08) * rate)
    while pos < total:
        n = int(rng.uniform(0.12, 0.28) * rate)
        seg = _syllable(rng, n, rate)
        if rng.random() < 0.3:
            m = int(rng.uniform(0.04, 0.08) * rate)
            burst = _fricative(rng, m, rate)
            seg = np.concatenate([0.3 * np.std(seg) * burst / np.std(burst), seg])
        stop = min(total, pos + seg.size)
        out[pos:stop] += seg[: stop - pos] * rng.uniform(0.5, 1.0)
        pos = stop + int(rng.uniform(0.01, 0.12) * rate)
    out *= peak / np.max(np.abs(out))
    return AudioSignal(out, rate)


def babble(
    rng: np.random.Generator, duration: float = 3.0, rate: int = 16000, talkers: int = 6
) -> AudioSignal:
    """Multi-talker babble: several independent speech-like streams summed."""
    x = sum(speech_like(rng, duration, rate).samples for _ in range(talkers))
    x = x / np.max(np.abs(x)) * 0.5
    return AudioSignal(x, rate)


def tone(freq: float, duration: float, rate: int, amplitude: float = 1.0) -> AudioSignal:
    t = np.arange(int(round(duration * rate))) / rate
    return AudioSignal(amplitude * np.sin(2 * np.pi * freq * t), rate)


def simulate_responses(
    pairs: Sequence[SynonymPairRecord],
    snrs: Sequence[float],
    rng: np.random.Generator,
    listeners: int = 6,
    word_effect: Mapping[str, float] | None = None,
    base: float = 1.0,
    slope: float = 0.25,
) -> list[ResponseRecord]:
    """Transcripts from simulated listeners, a separate group per SNR.

    A word is heard with probability ``logistic(base + slope * snr + effect)``,
    where ``effect`` comes from ``word_effect`` or is drawn once per word.
    Unheard targets are transcribed as ``...``. Stimulus ids are
    ``"<pair_id>:<word>"``.
    """
    effects = dict(word_effect or {})
    records = []
    for snr in snrs:
        cond = NoiseCondition(float(snr))
        for pair in pairs:
            for word in pair.words:
                if word not in effects:
                    effects[word] = float(rng.normal(0.0, 1.0))
                p = 1.0 / (1.0 + np.exp(-(base + slope * snr + effects[word])))
                for i in range(listeners):
                    heard = rng.random() < p
                    text = pair.realize(word if heard else PLACEHOLDER)
                    records.append(ResponseRecord(f"{pair.pair_id}:{word}", word, cond, f"L{snr:g}-{i}", text))
    return records
