"""Framed STFT analysis and weighted overlap-add synthesis.

Frames are centred: frame ``t`` spans samples
``[t*hop - fft_size//2, t*hop + fft_size//2)`` of the input, with zeros
outside the signal. Synthesis divides the overlap-added, windowed frames
by the summed squared window, which reconstructs the input exactly for
any hop that keeps the envelope positive (hop 441 against a 2048 Hann
window is not a constant-overlap-add configuration, so plain OLA would
not be exact).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import get_window

from .audio import SAMPLE_RATE, AudioBuffer
from .exceptions import InvalidInputError

ENVELOPE_FLOOR = 1e-10


@dataclass(frozen=True)
class StftParams:
    win_size: int = 2048
    fft_size: int = 2048
    hop: int = 441
    window: str = "hann"
    center: bool = True

    def __post_init__(self):
        if self.hop < 1:
            raise InvalidInputError(f"hop must be >= 1, got {self.hop}")
        if self.win_size > self.fft_size:
            raise InvalidInputError("win_size must not exceed fft_size")
        if self.hop > self.win_size:
            raise InvalidInputError("hop must not exceed win_size")
        if self.fft_size % 2:
            raise InvalidInputError("fft_size must be even")

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    def n_frames(self, length: int) -> int:
        if self.center:
            return length // self.hop + 1
        return 1 + max(length - self.fft_size, 0) // self.hop

    def analysis_window(self) -> np.ndarray:
        """Periodic window of ``win_size`` zero-padded to ``fft_size``, centred."""
        w = get_window(self.window, self.win_size, fftbins=True).astype(np.float64)
        lpad = (self.fft_size - self.win_size) // 2
        return np.pad(w, (lpad, self.fft_size - self.win_size - lpad))


@dataclass(frozen=True)
class Spectrogram:
    """Complex onesided spectrogram, ``data`` shaped ``(channels, T, F)``."""

    data: np.ndarray
    params: StftParams = field(default_factory=StftParams)
    source_length: int = 0
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.ndim != 3:
            raise InvalidInputError(
                f"spectrogram data must be (channels, T, F), got shape {data.shape}"
            )
        if data.shape[2] != self.params.n_bins:
            raise InvalidInputError(
                f"expected {self.params.n_bins} bins for fft_size "
                f"{self.params.fft_size}, got {data.shape[2]}"
            )
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]

    @property
    def n_bins(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def with_data(self, data: np.ndarray) -> "Spectrogram":
        return replace(self, data=data)


def stft(audio: AudioBuffer, params: StftParams | None = None) -> Spectrogram:
    params = params or StftParams()
    if audio.n_samples == 0:
        raise InvalidInputError("cannot analyse empty audio")
    n = audio.n_samples
    x = audio.samples
    if params.center:
        half = params.fft_size // 2
        x = np.pad(x, ((0, 0), (half, half)))
    n_frames = params.n_frames(n)
    need = (n_frames - 1) * params.hop + params.fft_size
    if x.shape[1] < need:
        x = np.pad(x, ((0, 0), (0, need - x.shape[1])))
    frames = np.lib.stride_tricks.sliding_window_view(x, params.fft_size, axis=1)
    frames = frames[:, : (n_frames - 1) * params.hop + 1 : params.hop]
    data = np.fft.rfft(frames * params.analysis_window(), axis=-1)
    return Spectrogram(data, params, n, audio.sample_rate)


def istft(spec: Spectrogram) -> AudioBuffer:
    params = spec.params
    n_frames = params.n_frames(spec.source_length)
    if spec.source_length < 1 or spec.n_frames != n_frames:
        raise InvalidInputError(
            f"spectrogram has {spec.n_frames} frames, but source_length "
            f"{spec.source_length} with hop {params.hop} implies {n_frames}"
        )
    window = params.analysis_window()
    frames = np.fft.irfft(spec.data, n=params.fft_size, axis=-1) * window
    total = (n_frames - 1) * params.hop + params.fft_size
    out = np.zeros((spec.channels, total))
    envelope = np.zeros(total)
    wsq = window**2
    # fixed frame order keeps the accumulation deterministic
    for t in range(n_frames):
        start = t * params.hop
        out[:, start : start + params.fft_size] += frames[:, t]
        envelope[start : start + params.fft_size] += wsq
    nonzero = envelope > ENVELOPE_FLOOR
    out[:, nonzero] /= envelope[nonzero]
    offset = params.fft_size // 2 if params.center else 0
    out = out[:, offset : offset + spec.source_length]
    if out.shape[1] < spec.source_length:
        out = np.pad(out, ((0, 0), (0, spec.source_length - out.shape[1])))
    return AudioBuffer(out, spec.sample_rate)
