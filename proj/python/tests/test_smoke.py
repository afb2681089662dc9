import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.environ.get("RFSEP_MODULE_DIR", "build"))

import _rfsep as rf  # noqa: E402


def tone(fs, f, seconds):
    t = np.arange(int(fs * seconds)) / fs
    return np.exp(2j * np.pi * f * t)


def voice(fs=8000.0, seconds=2.0, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(int(fs * seconds)) / fs
    x = np.zeros_like(t)
    for f, m in [(220, 2.1), (450, 3.7), (870, 5.3)]:
        x += 0.2 * (0.6 + 0.4 * np.sin(2 * np.pi * m * t)) * np.sin(2 * np.pi * f * t)
    x += 0.01 * rng.standard_normal(t.size)
    return rf.AudioSignal(x, fs)


def test_latency_model_anchors():
    assert rf.buffer_latency(1, 10240, 50000.0) == 0.2048
    assert rf.output_throughput(1, 10240, 0.025) == 409600.0


def test_frequency_shift_moves_peak():
    x = rf.IqSignal(tone(8192.0, 1000.0, 1.0), 8192.0)
    y = rf.frequency_shift(x, 512.0)
    spec = np.abs(np.fft.fft(y.samples))
    assert spec.argmax() == 1512


def test_fm_round_trip_correlates():
    a = voice()
    demod = rf.fm_demodulate(rf.fm_modulate(a))
    n = min(len(a), len(demod))
    ra = a.samples[:n] - a.samples[:n].mean()
    rd = demod.samples[:n] - demod.samples[:n].mean()
    lags = np.correlate(ra, rd, "full")
    corr = lags.max() / math.sqrt((ra**2).sum() * (rd**2).sum())
    assert corr > 0.95


def test_mixing_hits_target_sinr():
    soi = rf.fm_modulate(voice())
    cfg = rf.OfdmConfig()
    cfg.num_symbols = 3000
    interference = rf.resample(rf.ofdm_generate(cfg), 5, 96)  # 960 kHz -> 50 kHz
    n = min(len(soi), len(interference))
    soi = rf.IqSignal(soi.samples[:n], soi.sample_rate_hz)
    interference = rf.unit_normalize(rf.IqSignal(interference.samples[:n], 50000.0))
    band = rf.occupied_band(soi)
    ex = rf.mix_at_sinr(soi, interference, 5.0, band)
    assert abs(ex.achieved_sinr_db - 5.0) < 0.1
    np.testing.assert_allclose(
        ex.mixture.samples, ex.soi.samples + ex.interference_scaled.samples, atol=1e-9
    )


def test_separator_passthrough_and_wavenet_shapes():
    x = rf.IqSignal(tone(50000.0, 3000.0, 0.05), 50000.0)
    assert np.array_equal(rf.SeparatorModel.passthrough().separate(x).samples, x.samples)
    cfg = rf.WaveNetConfig()
    cfg.residual_channels = 8
    cfg.num_blocks = 4
    model = rf.SeparatorModel.wavenet(cfg, 0)
    y = model.separate(x)
    assert len(y) == len(x)
    assert model.parameter_count() > 0


def test_checkpoint_round_trip(tmp_path):
    cfg = rf.WaveNetConfig()
    cfg.residual_channels = 8
    cfg.num_blocks = 4
    model = rf.SeparatorModel.wavenet(cfg, 1)
    x = rf.IqSignal(tone(50000.0, 3000.0, 0.05), 50000.0)
    before = model.separate(x).samples
    prefix = str(tmp_path / "ckpt")
    model.save(prefix)
    other = rf.SeparatorModel.wavenet(cfg, 2)
    other.load(prefix)
    np.testing.assert_array_equal(other.separate(x).samples, before)


def test_metrics_self_scores():
    a = voice(seconds=1.0)
    assert rf.sdr(a, a) == 100.0
    assert rf.lsd(a, a) == pytest.approx(0.0, abs=1e-9)
    assert rf.mel_cd(a, a) == pytest.approx(0.0, abs=1e-9)
    report = rf.score(a, a)
    assert report.stoi_band == "good"
    assert '"sdr_db"' in report.json()


def test_rfiq_round_trip(tmp_path):
    x = rf.IqSignal(tone(50000.0, 1234.0, 0.02), 50000.0)
    path = str(tmp_path / "x.rfiq")
    rf.rfiq_write(path, x)
    y = rf.rfiq_read(path)
    assert y.sample_rate_hz == 50000.0
    np.testing.assert_allclose(y.samples, x.samples, atol=1e-6)  # f32 container
