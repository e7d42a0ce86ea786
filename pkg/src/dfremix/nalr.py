"""NAL-R linear hearing-aid amplification.

The NAL-R rule (Byrne & Dillon, 1986) prescribes insertion gain per
audiometric frequency from the hearing thresholds::

    X     = 0.05 * (H500 + H1000 + H2000)
    IG(f) = X + 0.31 * H(f) + k(f)

The prescription is realised as a symmetric (type-I, linear-phase) FIR
filter applied separately to each ear.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .audio import SAMPLE_RATE, AudioBuffer
from .exceptions import InvalidInputError

AUDIOGRAM_FREQUENCIES = (250, 500, 1000, 2000, 3000, 4000, 6000)
NALR_CORRECTION_DB = {250: -17.0, 500: -8.0, 1000: 1.0, 2000: -1.0, 3000: -2.0, 4000: -2.0, 6000: -2.0}
MIN_LEVEL_DB_HL = -10.0
MAX_LEVEL_DB_HL = 120.0
DEFAULT_TAPS = 221


@dataclass(frozen=True)
class Audiogram:
    """Hearing thresholds in dB HL at the seven audiometric frequencies."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        if len(levels) != len(AUDIOGRAM_FREQUENCIES):
            raise InvalidInputError(
                f"audiogram needs {len(AUDIOGRAM_FREQUENCIES)} levels, got {len(levels)}"
            )
        for f, v in zip(AUDIOGRAM_FREQUENCIES, levels):
            if not np.isfinite(v) or not MIN_LEVEL_DB_HL <= v <= MAX_LEVEL_DB_HL:
                raise InvalidInputError(
                    f"level {v} dB HL at {f} Hz outside [{MIN_LEVEL_DB_HL}, {MAX_LEVEL_DB_HL}]"
                )
        object.__setattr__(self, "levels", levels)

    @property
    def frequencies(self) -> tuple:
        return AUDIOGRAM_FREQUENCIES

    @classmethod
    def flat(cls, level: float) -> "Audiogram":
        return cls((level,) * len(AUDIOGRAM_FREQUENCIES))

    @classmethod
    def from_dict(cls, d: dict) -> "Audiogram":
        freqs = [int(f) for f in d.get("frequencies", AUDIOGRAM_FREQUENCIES)]
        if tuple(freqs) != AUDIOGRAM_FREQUENCIES:
            raise InvalidInputError(
                f"audiogram frequencies must be {list(AUDIOGRAM_FREQUENCIES)}, got {freqs}"
            )
        return cls(tuple(d["levels"]))

    def to_dict(self) -> dict:
        return {"frequencies": list(AUDIOGRAM_FREQUENCIES), "levels": list(self.levels)}


@dataclass(frozen=True)
class ListenerProfile:
    left: Audiogram
    right: Audiogram
    identifier: str = "listener"

    @classmethod
    def from_dict(cls, d: dict) -> "ListenerProfile":
        return cls(
            Audiogram.from_dict(d["left"]),
            Audiogram.from_dict(d["right"]),
            str(d.get("id", "listener")),
        )

    def to_dict(self) -> dict:
        return {"id": self.identifier, "left": self.left.to_dict(), "right": self.right.to_dict()}


@dataclass(frozen=True)
class FirFilter:
    coefficients: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.coefficients, dtype=np.float64)
        if h.ndim != 1 or h.size % 2 == 0:
            raise InvalidInputError("FIR filter must have an odd number of taps")
        object.__setattr__(self, "coefficients", h)

    @property
    def taps(self) -> int:
        return self.coefficients.size

    @property
    def group_delay(self) -> int:
        return (self.taps - 1) // 2

    def response_db(self, frequencies, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
        """Magnitude response in dB at arbitrary frequencies."""
        n = np.arange(self.taps) - self.group_delay
        phase = 2 * np.pi * np.outer(np.atleast_1d(frequencies), n) / sample_rate
        zero_phase = np.cos(phase) @ self.coefficients
        return 20 * np.log10(np.maximum(np.abs(zero_phase), 1e-300))


def nalr_gains(audiogram: Audiogram) -> np.ndarray:
    """Insertion gain in dB at each audiogram frequency (no clamping)."""
    h = dict(zip(AUDIOGRAM_FREQUENCIES, audiogram.levels))
    x = 0.05 * (h[500] + h[1000] + h[2000])
    return np.array([x + 0.31 * h[f] + NALR_CORRECTION_DB[f] for f in AUDIOGRAM_FREQUENCIES])


def _gain_curve(gains_db, freqs):
    # linear in dB over log frequency, held flat outside 250..6000 Hz
    anchors = np.log(AUDIOGRAM_FREQUENCIES)
    lf = np.log(np.clip(freqs, AUDIOGRAM_FREQUENCIES[0], AUDIOGRAM_FREQUENCIES[-1]))
    return np.interp(lf, anchors, gains_db)


def design_fir(gains_db, sample_rate: int = SAMPLE_RATE, taps: int = DEFAULT_TAPS) -> FirFilter:
    """Linear-phase FIR realising a gain curve given at the audiogram frequencies.

    The interpolated magnitude is sampled on a dense FFT grid and the
    zero-phase impulse response is truncated to ``taps`` (the least-squares
    optimal truncation). A minimum-norm correction of the taps then makes
    the response exact at the seven prescription frequencies, which the
    truncation alone misses on steep prescriptions.
    """
    if taps % 2 == 0:
        raise InvalidInputError(f"taps must be odd, got {taps}")
    if taps < 31:
        raise InvalidInputError(f"taps must be >= 31, got {taps}")
    gains_db = np.asarray(gains_db, dtype=np.float64)
    if gains_db.shape != (len(AUDIOGRAM_FREQUENCIES),):
        raise InvalidInputError("one gain per audiogram frequency is required")
    if AUDIOGRAM_FREQUENCIES[-1] >= sample_rate / 2:
        raise InvalidInputError(f"sample rate {sample_rate} too low for the prescription")

    half = (taps - 1) // 2
    nfft = max(8192, 1 << int(np.ceil(np.log2(8 * taps))))
    grid = np.fft.rfftfreq(nfft, 1.0 / sample_rate)
    magnitude = 10 ** (_gain_curve(gains_db, grid) / 20)
    zero_phase = np.fft.irfft(magnitude, nfft)
    h = np.concatenate([zero_phase[-half:], zero_phase[: half + 1]])

    n = np.arange(-half, half + 1)
    basis = np.cos(2 * np.pi * np.outer(AUDIOGRAM_FREQUENCIES, n) / sample_rate)
    target = 10 ** (gains_db / 20)
    h = h + basis.T @ np.linalg.solve(basis @ basis.T, target - basis @ h)
    # enforce exact symmetry
    h = 0.5 * (h + h[::-1])
    return FirFilter(h)


def apply_fir(audio: AudioBuffer, filt: FirFilter) -> AudioBuffer:
    """Filter every channel, compensating the group delay (same-length output)."""
    return audio.with_samples(_filter(audio.samples, filt))


def _filter(samples: np.ndarray, filt: FirFilter) -> np.ndarray:
    n = samples.shape[-1]
    full = fftconvolve(samples, filt.coefficients[np.newaxis, :], axes=-1)
    return full[:, filt.group_delay : filt.group_delay + n]


def listener_filters(listener: ListenerProfile, sample_rate: int = SAMPLE_RATE, taps: int = DEFAULT_TAPS):
    return (
        design_fir(nalr_gains(listener.left), sample_rate, taps),
        design_fir(nalr_gains(listener.right), sample_rate, taps),
    )


def apply_nalr(audio: AudioBuffer, listener: ListenerProfile, taps: int = DEFAULT_TAPS) -> AudioBuffer:
    """Left channel through the left-ear prescription, right through the right.

    Mono input is treated as the left ear.
    """
    left, right = listener_filters(listener, audio.sample_rate, taps)
    out = [_filter(audio.samples[:1], left)]
    if audio.channels == 2:
        out.append(_filter(audio.samples[1:], right))
    return audio.with_samples(np.concatenate(out, axis=0))
