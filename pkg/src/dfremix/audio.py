"""Time-domain audio container and WAV file I/O."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .exceptions import InvalidInputError

logger = logging.getLogger(__name__)

SAMPLE_RATE = 44100


@dataclass(frozen=True)
class AudioBuffer:
    """Multichannel audio.

    ``samples`` has shape ``(channels, n_samples)`` and is stored as
    float64. Nominal full scale is 1.0.
    """

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2:
            raise InvalidInputError(
                f"samples must be 1-D or (channels, n), got shape {samples.shape}"
            )
        if samples.shape[0] not in (1, 2):
            raise InvalidInputError(
                f"only mono or stereo audio is supported, got {samples.shape[0]} channels"
            )
        if self.sample_rate <= 0:
            raise InvalidInputError(f"sample_rate must be positive, got {self.sample_rate}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> "AudioBuffer":
        return AudioBuffer(samples, self.sample_rate)


def read_wav(path, expected_rate: int | None = SAMPLE_RATE) -> AudioBuffer:
    """Read a 16/24/32-bit PCM or 32-bit float WAV file.

    Integer formats are scaled to [-1, 1). A file whose rate differs from
    ``expected_rate`` is rejected; no resampling is done.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"audio file not found: {path}")
    rate, data = wavfile.read(path)
    if expected_rate is not None and rate != expected_rate:
        raise InvalidInputError(
            f"{path}: sample rate {rate} Hz, expected {expected_rate} Hz"
        )
    if data.dtype == np.int16:
        x = data / 32768.0
    elif data.dtype == np.int32:
        # scipy left-justifies 24-bit samples into int32
        x = data / 2147483648.0
    elif data.dtype == np.uint8:
        x = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        x = data.astype(np.float64)
    else:
        raise InvalidInputError(f"{path}: unsupported sample format {data.dtype}")
    x = x.T if x.ndim == 2 else x[np.newaxis, :]
    return AudioBuffer(x, rate)


def write_wav(path, audio: AudioBuffer, subtype: str = "float32") -> Path:
    """Write ``audio`` as 32-bit float (unclipped) or 16-bit PCM (saturating)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x = audio.samples.T
    if subtype == "float32":
        data = x.astype(np.float32)
    elif subtype == "int16":
        scaled = np.round(x * 32768.0)
        n_clipped = int(np.count_nonzero((scaled > 32767) | (scaled < -32768)))
        if n_clipped:
            logger.warning("%s: %d samples saturated during 16-bit export", path, n_clipped)
        data = np.clip(scaled, -32768, 32767).astype(np.int16)
    else:
        raise InvalidInputError(f"unsupported WAV subtype {subtype!r}")
    if data.shape[1] == 1:
        data = data[:, 0]
    wavfile.write(path, audio.sample_rate, data)
    return path
