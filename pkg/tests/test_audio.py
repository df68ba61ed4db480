import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.io import wavfile

from lexrobust.audio import (
    AudioError, AudioSignal, NoiseCondition, achieved_snr, load_wav, mix_at_snr, noise_segment,
    resample, rms, write_wav,
)


def test_load_pcm16_scaling(tmp_path):
    path = tmp_path / "c.wav"
    wavfile.write(path, 16000, np.full(16000, 16384, dtype=np.int16))
    sig = load_wav(path)
    assert sig.sample_rate == 16000
    assert len(sig) == 16000
    assert np.all(sig.samples == 0.5)


def test_load_stereo_downmix(tmp_path):
    path = tmp_path / "s.wav"
    data = np.tile(np.array([[0.2, 0.4]], dtype=np.float32), (800, 1))
    wavfile.write(path, 8000, data)
    sig = load_wav(path)
    np.testing.assert_allclose(sig.samples, 0.3, atol=1e-7)


def test_load_empty_data_chunk(tmp_path):
    path = tmp_path / "e.wav"
    wavfile.write(path, 16000, np.zeros(0, dtype=np.int16))
    with pytest.raises(AudioError, match="zero-length audio"):
        load_wav(path)


def test_load_rejects_other_encodings(tmp_path):
    path = tmp_path / "u8.wav"
    wavfile.write(path, 8000, np.full(100, 128, dtype=np.uint8))
    with pytest.raises(AudioError, match="unsupported encoding"):
        load_wav(path)


def test_load_garbage(tmp_path):
    path = tmp_path / "junk.wav"
    path.write_bytes(b"not a wave file at all")
    with pytest.raises(AudioError, match="unreadable"):
        load_wav(path)


@pytest.mark.parametrize("encoding,tol", [("pcm16", 1 / 32768), ("float32", 1e-7)])
def test_wav_round_trip(tmp_path, speech, encoding, tol):
    path = tmp_path / "rt.wav"
    write_wav(path, speech, encoding)
    back = load_wav(path)
    assert back.sample_rate == speech.sample_rate
    np.testing.assert_allclose(back.samples, speech.samples, atol=tol)


def test_signal_invariants():
    with pytest.raises(AudioError):
        AudioSignal(np.zeros(10), 0)
    with pytest.raises(AudioError):
        AudioSignal(np.zeros((10, 2)), 8000)
    with pytest.raises(ValueError):
        NoiseCondition(math.inf)


def test_rms_examples():
    assert rms(AudioSignal(np.full(100, 0.5), 8000)) == 0.5
    t = np.arange(8000) / 8000
    assert rms(AudioSignal(np.sin(2 * np.pi * 10 * t), 8000)) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert rms(AudioSignal(np.zeros(10), 8000)) == 0.0
    with pytest.raises(AudioError):
        rms(np.zeros(0))


@given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=50), st.integers(-10**4, 10**4))
def test_rms_scale_equivariance(ints, c_milli):
    # scaled integers keep squares clear of float underflow
    x = np.array(ints) / 1000
    c = c_milli / 1000
    assert rms(c * x) == pytest.approx(abs(c) * rms(x), rel=1e-12, abs=1e-300)


def test_resample_identity(speech):
    out = resample(speech, speech.sample_rate)
    assert np.array_equal(out.samples, speech.samples)


def test_resample_length():
    sig = AudioSignal(np.random.default_rng(0).standard_normal(16000), 16000)
    out = resample(sig, 10000)
    assert abs(len(out) - 10000) <= 1
    assert out.sample_rate == 10000


def test_resample_keeps_tone_frequency():
    rate = 44100
    t = np.arange(rate) / rate
    out = resample(AudioSignal(np.sin(2 * np.pi * 440 * t), rate), 10000)
    # FFT peak-pick with 0.1 Hz bin spacing
    nfft = 10 * out.sample_rate * 10
    spec = np.abs(np.fft.rfft(out.samples * np.hanning(len(out)), nfft))
    freqs = np.fft.rfftfreq(nfft, 1 / out.sample_rate)
    assert abs(freqs[np.argmax(spec)] - 440.0) <= 2.0


def test_resample_round_trip_band_limited():
    rng = np.random.default_rng(3)
    rate, other = 16000, 10000
    t = np.arange(2 * rate) / rate
    freqs = rng.uniform(50, 0.4 * other, 12)
    x = sum(np.sin(2 * np.pi * f * t + rng.uniform(0, 6.3)) for f in freqs)
    back = resample(resample(AudioSignal(x, rate), other), rate)
    core = slice(1000, len(x) - 1000)  # filter edge transients
    err = rms(back.samples[core] - x[core]) / rms(x[core])
    assert err < 0.01


def test_noise_segment_wraps():
    noise = AudioSignal(np.arange(5, dtype=float), 8000)
    assert list(noise_segment(noise, 7, 3)) == [3, 4, 0, 1, 2, 3, 4]


def test_mix_zero_db_equal_rms(speech, noise):
    out = mix_at_snr(speech, noise, NoiseCondition(0.0), 100)
    scaled_noise = out.samples / out.meta["output_scale"] - speech.samples
    assert rms(scaled_noise) == pytest.approx(rms(speech), rel=1e-12)


def test_mix_gain_twenty_db():
    rng = np.random.default_rng(1)
    s = rng.standard_normal(1000)
    n = rng.standard_normal(1000)
    n *= np.sqrt(np.mean(s**2) / np.mean(n**2))
    out = mix_at_snr(AudioSignal(0.1 * s, 8000), AudioSignal(0.1 * n, 8000), NoiseCondition(20.0))
    assert out.meta["noise_gain"] == pytest.approx(0.1, rel=1e-12)


def test_mix_negative_snr_gain_and_achieved():
    rng = np.random.default_rng(2)
    s = rng.standard_normal(4000)
    s *= 0.1 / np.sqrt(np.mean(s**2))
    n = rng.standard_normal(4000)
    n *= 0.4 / np.sqrt(np.mean(n**2))
    speech, noise = AudioSignal(s, 8000), AudioSignal(n, 8000)
    out = mix_at_snr(speech, noise, NoiseCondition(-5.0))
    assert out.meta["noise_gain"] == pytest.approx(0.25 * 10**0.25, rel=1e-9)  # 0.4446
    # independent recomputation from the output samples
    k = out.meta["output_scale"]
    residual = out.samples - k * s
    snr = 10 * np.log10(np.sum((k * s) ** 2) / np.sum(residual**2))
    assert abs(snr - (-5.0)) < 0.01


def test_mix_clipping_rescales_uniformly():
    s = np.full(100, 0.9)
    s[::2] = -0.9
    n = np.ones(100)
    out = mix_at_snr(AudioSignal(s, 8000), AudioSignal(n, 8000), NoiseCondition(-10.0))
    assert np.max(np.abs(out.samples)) == pytest.approx(0.999)
    assert out.meta["output_scale"] < 1
    assert achieved_snr(AudioSignal(s, 8000), out) == pytest.approx(-10.0, abs=1e-9)


def test_mix_linear_in_speech_for_fixed_gain(speech, noise):
    cond = NoiseCondition(3.0)
    ref = mix_at_snr(speech, noise, cond, 17)
    g = ref.meta["noise_gain"]
    seg = noise_segment(noise, len(speech), 17)
    doubled = 2 * speech.samples + g * seg
    np.testing.assert_allclose(doubled - ref.samples / ref.meta["output_scale"], speech.samples, atol=1e-12)


def test_mix_errors(speech):
    with pytest.raises(AudioError, match="sample-rate mismatch"):
        mix_at_snr(speech, AudioSignal(np.ones(100), 8000), NoiseCondition(0))
    with pytest.raises(AudioError, match="zero RMS"):
        mix_at_snr(AudioSignal(np.zeros(100), 16000), AudioSignal(np.ones(100), 16000), NoiseCondition(0))
    with pytest.raises(AudioError, match="zero RMS"):
        mix_at_snr(speech, AudioSignal(np.zeros(100), 16000), NoiseCondition(0))


@settings(max_examples=40, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.floats(-10, 20),
    st.integers(50, 3000),
    st.integers(20, 5000),
    st.integers(0, 10**6),
)
def test_mix_snr_exact_property(seed, snr, n_speech, n_noise, offset):
    rng = np.random.default_rng(seed)
    speech = AudioSignal(rng.uniform(-0.5, 0.5, n_speech), 8000)
    noise = AudioSignal(rng.standard_normal(n_noise), 8000)
    out = mix_at_snr(speech, noise, NoiseCondition(snr), offset)
    assert abs(achieved_snr(speech, out) - snr) < 0.01
