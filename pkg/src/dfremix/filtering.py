"""Complex ratio masking and deep filtering of spectrograms.

A complex ratio mask multiplies each time-frequency bin by one complex
coefficient. A deep filter of order N instead takes, for every bin, the
N temporally adjacent input bins of the same frequency and forms a plain
(non-conjugated) dot product with N complex coefficients. Order 1 with
no lookback or lookahead is exactly the mask.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import InvalidInputError
from .stft import Spectrogram, StftParams


@dataclass(frozen=True)
class FilterOrder:
    """Filter length and its split into past and future frames.

    By default all taps look back (``lookback = order - 1``).
    """

    order: int = 5
    lookback: Optional[int] = None
    lookahead: int = 0

    def __post_init__(self):
        if self.order < 1:
            raise InvalidInputError(f"filter order must be >= 1, got {self.order}")
        if self.lookback is None:
            object.__setattr__(self, "lookback", self.order - 1 - self.lookahead)
        if self.lookback < 0 or self.lookahead < 0:
            raise InvalidInputError("lookback and lookahead must be non-negative")
        if self.lookback + self.lookahead + 1 != self.order:
            raise InvalidInputError(
                f"lookback ({self.lookback}) + lookahead ({self.lookahead}) + 1 "
                f"must equal order ({self.order})"
            )


@dataclass(frozen=True)
class ComplexMask:
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", np.asarray(self.data, dtype=np.complex128))


@dataclass(frozen=True)
class UnfoldedSpectrogram:
    """``data[c, t, f, k]`` holds frame ``t - lookback + k`` of channel ``c``."""

    data: np.ndarray
    order: FilterOrder
    params: StftParams
    source_length: int
    sample_rate: int


@dataclass(frozen=True)
class DeepFilterTensor:
    """Filter coefficients laid out as ``data[c, k, t, f]``."""

    data: np.ndarray
    order: FilterOrder

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 4 or data.shape[1] != self.order.order:
            raise InvalidInputError(
                f"deep filter must be (channels, {self.order.order}, T, F), "
                f"got shape {data.shape}"
            )
        object.__setattr__(self, "data", data)


def unfold_time(spec: Spectrogram, order: FilterOrder) -> UnfoldedSpectrogram:
    n_frames = spec.n_frames
    padded = np.pad(spec.data, ((0, 0), (order.lookback, order.lookahead), (0, 0)))
    data = np.stack(
        [padded[:, k : k + n_frames] for k in range(order.order)], axis=-1
    )
    return UnfoldedSpectrogram(
        data, order, spec.params, spec.source_length, spec.sample_rate
    )


def apply_crm(spec: Spectrogram, mask: ComplexMask) -> Spectrogram:
    if mask.data.shape != spec.shape:
        raise InvalidInputError(
            f"mask shape {mask.data.shape} does not match spectrogram {spec.shape}"
        )
    return spec.with_data(spec.data * mask.data)


def apply_deep_filter(
    unfolded: UnfoldedSpectrogram, filt: DeepFilterTensor
) -> Spectrogram:
    if unfolded.order != filt.order:
        raise InvalidInputError(
            f"filter order {filt.order} does not match unfolded order {unfolded.order}"
        )
    c, t, f, n = unfolded.data.shape
    if filt.data.shape != (c, n, t, f):
        raise InvalidInputError(
            f"filter shape {filt.data.shape} incompatible with unfolded "
            f"spectrogram {unfolded.data.shape}"
        )
    out = unfolded.data[..., 0] * filt.data[:, 0]
    for k in range(1, n):
        out = out + unfolded.data[..., k] * filt.data[:, k]
    return Spectrogram(out, unfolded.params, unfolded.source_length, unfolded.sample_rate)
