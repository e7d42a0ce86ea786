import logging
import wave

import numpy as np
import pytest

from dfremix.audio import AudioBuffer, read_wav, write_wav
from dfremix.exceptions import InvalidInputError


def test_float_round_trip(tmp_path, rng):
    x = AudioBuffer(rng.uniform(-3, 3, (2, 1000)))
    y = read_wav(write_wav(tmp_path / "a.wav", x))
    np.testing.assert_array_equal(y.samples, x.samples.astype(np.float32))
    assert y.sample_rate == 44100


def test_mono_round_trip(tmp_path, rng):
    x = AudioBuffer(rng.uniform(-1, 1, 500))
    assert read_wav(write_wav(tmp_path / "m.wav", x)).channels == 1


def test_int16_export_saturates_with_warning(tmp_path, caplog):
    x = AudioBuffer(np.array([[0.5, 2.0, -2.0]]))
    with caplog.at_level(logging.WARNING):
        y = read_wav(write_wav(tmp_path / "i.wav", x, subtype="int16"))
    assert "saturated" in caplog.text
    np.testing.assert_allclose(y.samples, [[0.5, 32767 / 32768, -1.0]])


def test_reads_24_bit_pcm(tmp_path):
    values = np.array([0, 2**22, -(2**23), 2**23 - 1])
    raw = b"".join(int(v).to_bytes(3, "little", signed=True) for v in values)
    path = tmp_path / "p24.wav"
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(3)
        w.setframerate(44100)
        w.writeframes(raw)
    np.testing.assert_allclose(read_wav(path).samples[0], values / 2**23)


def test_rejects_other_sample_rates(tmp_path):
    write_wav(tmp_path / "r.wav", AudioBuffer(np.zeros((1, 10)), 48000))
    with pytest.raises(InvalidInputError, match="48000"):
        read_wav(tmp_path / "r.wav")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.wav"):
        read_wav(tmp_path / "nope.wav")


def test_buffer_validation():
    with pytest.raises(InvalidInputError):
        AudioBuffer(np.zeros((3, 10)))
    with pytest.raises(InvalidInputError):
        AudioBuffer(np.zeros((1, 10)), 0)
    buf = AudioBuffer(np.zeros(10))
    assert buf.channels == 1 and buf.n_samples == 10
    with pytest.raises(ValueError):
        buf.samples[0, 0] = 1.0
