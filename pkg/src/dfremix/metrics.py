"""Signal-to-distortion ratio and mean absolute error."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audio import AudioBuffer
from .exceptions import InvalidInputError, UndefinedMetricError

SDR_CAP_DB = 300.0
SDR_VARIANT = "energy-ratio SDR: 10*log10(sum(ref^2) / sum((ref - est)^2)), no projection"


@dataclass
class MetricReport:
    sdr_db: list
    sdr_mean: float
    mae: list
    mae_mean: float
    variant: str = SDR_VARIANT
    per_frequency_residual: Optional[list] = None

    def to_dict(self) -> dict:
        d = {
            "sdr_db": list(self.sdr_db),
            "sdr_mean": self.sdr_mean,
            "mae": list(self.mae),
            "mae_mean": self.mae_mean,
            "variant": self.variant,
        }
        if self.per_frequency_residual is not None:
            d["per_frequency_residual"] = self.per_frequency_residual
        return d


def _pair(reference: AudioBuffer, estimate: AudioBuffer):
    if reference.samples.shape != estimate.samples.shape:
        raise InvalidInputError(
            f"reference {reference.samples.shape} and estimate "
            f"{estimate.samples.shape} shapes differ"
        )
    if reference.sample_rate != estimate.sample_rate:
        raise InvalidInputError(
            f"sample rates differ: {reference.sample_rate} vs {estimate.sample_rate}"
        )
    return reference.samples, estimate.samples


def sdr(reference: AudioBuffer, estimate: AudioBuffer) -> tuple[np.ndarray, float]:
    """Per-channel SDR in dB and the mean over channels.

    A channel whose error energy is below 1e-30 of its reference energy
    scores ``SDR_CAP_DB``.
    """
    ref, est = _pair(reference, estimate)
    signal = np.sum(ref**2, axis=1)
    if np.any(signal == 0.0):
        raise UndefinedMetricError("SDR is undefined for a silent reference channel")
    error = np.sum((ref - est) ** 2, axis=1)
    capped = error < 1e-30 * signal
    with np.errstate(divide="ignore"):
        values = 10 * np.log10(signal / np.where(capped, 1.0, error))
    values = np.where(capped, SDR_CAP_DB, values)
    return values, float(np.mean(values))


def mae(reference: AudioBuffer, estimate: AudioBuffer) -> tuple[np.ndarray, float]:
    ref, est = _pair(reference, estimate)
    per_channel = np.mean(np.abs(ref - est), axis=1)
    return per_channel, float(np.mean(per_channel))


def evaluate(reference: AudioBuffer, estimate: AudioBuffer) -> MetricReport:
    sdr_values, sdr_mean = sdr(reference, estimate)
    mae_values, mae_mean = mae(reference, estimate)
    return MetricReport(
        sdr_db=[float(v) for v in sdr_values],
        sdr_mean=sdr_mean,
        mae=[float(v) for v in mae_values],
        mae_mean=mae_mean,
    )
