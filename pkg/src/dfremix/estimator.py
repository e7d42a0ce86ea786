"""Closed-form (oracle) estimation of masks and deep filters.

Given the input spectrogram and a reference spectrogram, these estimators
compute the coefficients a perfectly trained network could at best emit
under a given structural constraint:

* ``oracle_crm``: one mask value per bin (always achievable, up to ``eps``).
* ``fit_per_frequency_df``: one order-N filter per frequency and time
  block, fitted by (ridge-regularised) least squares. Order 1 gives a
  block-constant complex gain per frequency.

Comparing order 1 against order N under the same constraint measures the
extra modelling capacity of the deep filter over the mask.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .exceptions import InvalidInputError
from .filtering import (
    ComplexMask,
    DeepFilterTensor,
    FilterOrder,
    apply_crm,
    apply_deep_filter,
    unfold_time,
)
from .stft import Spectrogram

logger = logging.getLogger(__name__)

# Gram matrices with eigenvalue spread beyond this are solved in the
# minimum-norm sense instead of by Cholesky.
SINGULAR_RCOND = 1e-12


@dataclass(frozen=True)
class EstimatorConfig:
    """Settings for the least-squares filter fit.

    ``ridge`` is relative: the penalty added to each normal-equation system
    is ``ridge * trace(A^H A) / N``. ``block_len=None`` fits one filter
    over the whole signal.
    """

    order: FilterOrder = field(default_factory=FilterOrder)
    ridge: float = 1e-8
    block_len: Optional[int] = None
    eps: float = 1e-12

    def __post_init__(self):
        if self.ridge < 0:
            raise InvalidInputError(f"ridge must be >= 0, got {self.ridge}")
        if self.eps < 0:
            raise InvalidInputError(f"eps must be >= 0, got {self.eps}")
        if self.block_len is not None and self.block_len < self.order.order:
            raise InvalidInputError(
                f"block_len ({self.block_len}) must be >= order ({self.order.order})"
            )


@dataclass
class FitReport:
    """Diagnostics of a per-frequency fit.

    Residual arrays are ``(channels, F)`` energies summed over blocks;
    ``residual_before`` is the error of passing the input through
    unchanged. ``condition`` and ``degenerate`` are ``(channels, blocks, F)``.
    """

    residual_before: np.ndarray
    residual_after: np.ndarray
    reference_energy: np.ndarray
    condition: np.ndarray
    degenerate: np.ndarray
    blocks: list

    @property
    def relative_residual(self) -> float:
        total = float(self.reference_energy.sum())
        if total == 0.0:
            return 0.0
        return float(self.residual_after.sum()) / total

    @property
    def relative_residual_before(self) -> float:
        total = float(self.reference_energy.sum())
        if total == 0.0:
            return 0.0
        return float(self.residual_before.sum()) / total


def _check_pair(degraded: Spectrogram, target: Spectrogram):
    if degraded.shape != target.shape:
        raise InvalidInputError(
            f"degraded {degraded.shape} and target {target.shape} shapes differ"
        )


def oracle_crm(degraded: Spectrogram, target: Spectrogram, eps: float = 1e-12) -> ComplexMask:
    """Per-bin mask mapping ``degraded`` onto ``target`` (Wiener-stabilised)."""
    _check_pair(degraded, target)
    x = degraded.data
    power = x.real**2 + x.imag**2
    num = target.data * np.conj(x)
    den = power + eps
    mask = np.zeros_like(num)
    np.divide(num, den, out=mask, where=den > 0)
    return ComplexMask(mask)


def _block_bounds(n_frames: int, block_len: Optional[int], order: int) -> list:
    if block_len is None or block_len >= n_frames:
        return [(0, n_frames)]
    starts = list(range(0, n_frames, block_len))
    bounds = [(s, min(s + block_len, n_frames)) for s in starts]
    # a short trailing block cannot support an order-N fit
    if len(bounds) > 1 and bounds[-1][1] - bounds[-1][0] < order:
        bounds[-2] = (bounds[-2][0], n_frames)
        bounds.pop()
    return bounds


def _solve_frequency(a, b, gram, rhs, lam):
    """Solve one ``(A^H A + lam I) w = A^H b`` system; returns (w, cond, degenerate)."""
    n = gram.shape[0]
    trace = float(np.real(np.trace(gram)))
    if trace == 0.0:
        return np.zeros(n, dtype=np.complex128), np.inf, True
    system = gram + lam * np.eye(n)
    eig = np.linalg.eigvalsh(system)
    cond = eig[-1] / eig[0] if eig[0] > 0 else np.inf
    if eig[0] > SINGULAR_RCOND * eig[-1]:
        try:
            factor = scipy.linalg.cho_factor(system, lower=True, check_finite=False)
            return scipy.linalg.cho_solve(factor, rhs, check_finite=False), cond, False
        except np.linalg.LinAlgError:
            pass
    if lam > 0:
        w = np.linalg.pinv(system, rcond=SINGULAR_RCOND, hermitian=True) @ rhs
    else:
        w = np.linalg.lstsq(a, b, rcond=None)[0]
    return w, cond, True


def fit_per_frequency_df(
    degraded: Spectrogram, target: Spectrogram, cfg: EstimatorConfig | None = None
) -> tuple[DeepFilterTensor, FitReport]:
    """Least-squares deep filter per channel, frequency and time block.

    For every (channel, frequency, block) the rows of ``A`` are the
    unfolded input vectors and ``b`` the target bins; the returned filter
    minimises ``|A w - b|^2 + lam |w|^2`` and is held constant over the
    block's frames.
    """
    cfg = cfg or EstimatorConfig()
    _check_pair(degraded, target)
    order = cfg.order
    n = order.order
    n_ch, n_frames, n_bins = degraded.shape
    if n_frames < n:
        raise InvalidInputError(f"{n_frames} frames cannot support an order-{n} fit")

    unfolded = unfold_time(degraded, order)
    bounds = _block_bounds(n_frames, cfg.block_len, n)
    weights = np.zeros((n_ch, len(bounds), n_bins, n), dtype=np.complex128)
    condition = np.zeros((n_ch, len(bounds), n_bins))
    degenerate = np.zeros((n_ch, len(bounds), n_bins), dtype=bool)
    residual_after = np.zeros((n_ch, n_bins))

    for c in range(n_ch):
        for j, (t0, t1) in enumerate(bounds):
            a_blk = unfolded.data[c, t0:t1]  # (Tb, F, N)
            b_blk = target.data[c, t0:t1]  # (Tb, F)
            gram = np.einsum("tfk,tfl->fkl", a_blk.conj(), a_blk)
            rhs = np.einsum("tfk,tf->fk", a_blk.conj(), b_blk)
            traces = np.real(np.einsum("fkk->f", gram))
            for f in range(n_bins):
                lam = cfg.ridge * traces[f] / n
                w, cond, degen = _solve_frequency(
                    a_blk[:, f], b_blk[:, f], gram[f], rhs[f], lam
                )
                weights[c, j, f] = w
                condition[c, j, f] = cond
                degenerate[c, j, f] = degen
            err = np.einsum("tfk,fk->tf", a_blk, weights[c, j]) - b_blk
            residual_after[c] += np.sum(err.real**2 + err.imag**2, axis=0)

    n_degen = int(degenerate.sum())
    if n_degen:
        logger.debug("%d frequency systems solved as degenerate", n_degen)

    diff = degraded.data - target.data
    residual_before = np.sum(diff.real**2 + diff.imag**2, axis=1)
    reference_energy = np.sum(target.data.real**2 + target.data.imag**2, axis=1)

    lengths = [t1 - t0 for t0, t1 in bounds]
    if len(bounds) == 1:
        coeffs = np.broadcast_to(
            weights[:, 0].transpose(0, 2, 1)[:, :, np.newaxis, :],
            (n_ch, n, n_frames, n_bins),
        )
    else:
        # (C, blocks, F, N) -> (C, N, T, F)
        coeffs = np.repeat(weights.transpose(0, 3, 1, 2), lengths, axis=2)
    report = FitReport(
        residual_before=residual_before,
        residual_after=residual_after,
        reference_energy=reference_energy,
        condition=condition,
        degenerate=degenerate,
        blocks=bounds,
    )
    return DeepFilterTensor(coeffs, order), report


def enhance_spectrogram(
    degraded: Spectrogram,
    target: Spectrogram,
    mode: str = "df",
    cfg: EstimatorConfig | None = None,
) -> tuple[Spectrogram, FitReport]:
    """Fit against ``target`` and filter ``degraded``.

    ``mode="df"`` uses a deep filter of ``cfg.order``; ``mode="crm"`` fits
    an order-1 block-constant mask per frequency and applies it as a
    complex ratio mask.
    """
    cfg = cfg or EstimatorConfig()
    if mode == "df":
        filt, report = fit_per_frequency_df(degraded, target, cfg)
        return apply_deep_filter(unfold_time(degraded, cfg.order), filt), report
    if mode == "crm":
        mask_cfg = EstimatorConfig(
            order=FilterOrder(1), ridge=cfg.ridge, block_len=cfg.block_len, eps=cfg.eps
        )
        filt, report = fit_per_frequency_df(degraded, target, mask_cfg)
        return apply_crm(degraded, ComplexMask(filt.data[:, 0])), report
    raise InvalidInputError(f"unknown enhancement mode {mode!r}; use 'crm' or 'df'")
