"""Oracle complex-mask and deep-filter enhancement for hearing-aid music remixes."""

__version__ = "0.1.0"

from .audio import AudioBuffer, read_wav, write_wav
from .estimator import EstimatorConfig, FitReport, enhance_spectrogram, fit_per_frequency_df, oracle_crm
from .exceptions import InvalidInputError, UndefinedMetricError
from .filtering import (
    ComplexMask,
    DeepFilterTensor,
    FilterOrder,
    UnfoldedSpectrogram,
    apply_crm,
    apply_deep_filter,
    unfold_time,
)
from .metrics import MetricReport, evaluate, mae, sdr
from .nalr import Audiogram, FirFilter, ListenerProfile, apply_fir, apply_nalr, design_fir, nalr_gains
from .pipeline import (
    DegradationSpec,
    RemixGains,
    SignalStack,
    StemSet,
    apply_gains,
    degrade,
    mix,
    run_pipeline,
)
from .stft import Spectrogram, StftParams, istft, stft
