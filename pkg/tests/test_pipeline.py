import numpy as np
import pytest

from dfremix.audio import AudioBuffer
from dfremix.estimator import EstimatorConfig, fit_per_frequency_df
from dfremix.exceptions import InvalidInputError
from dfremix.filtering import FilterOrder
from dfremix.metrics import sdr
from dfremix.nalr import apply_nalr
from dfremix.pipeline import (
    STEM_NAMES,
    DegradationSpec,
    RemixGains,
    StemSet,
    apply_gains,
    build_stack,
    degrade,
    mix,
    run_pipeline,
)
from dfremix.scene import RemixScene
from dfremix.stft import stft


def scene_for(listener, **kwargs):
    stems = {name: f"{name}.wav" for name in STEM_NAMES}
    return RemixScene(stems=stems, listener=listener, **kwargs)


def test_zero_gains_identity(short_stems):
    out = apply_gains(short_stems, RemixGains())
    for name in STEM_NAMES:
        np.testing.assert_array_equal(out[name].samples, short_stems[name].samples)


def test_gain_decibel_arithmetic(short_stems):
    out = apply_gains(short_stems, RemixGains(vocal=-6.0206, drums=20.0))
    np.testing.assert_allclose(out["vocal"].samples, 0.5 * short_stems["vocal"].samples, rtol=1e-5)
    np.testing.assert_allclose(out["drums"].samples, 10 * short_stems["drums"].samples, rtol=1e-12)
    np.testing.assert_array_equal(out["bass"].samples, short_stems["bass"].samples)
    assert 10 ** (-6.0206 / 20) == pytest.approx(0.5, abs=1e-5)


def test_gain_validation():
    with pytest.raises(InvalidInputError):
        RemixGains(bass=61.0)
    with pytest.raises(InvalidInputError):
        RemixGains(vocal=float("nan"))


def test_mix_single_active_stem(short_stems):
    silent = AudioBuffer(np.zeros_like(short_stems["bass"].samples))
    stems = StemSet({name: (short_stems["bass"] if name == "bass" else silent) for name in STEM_NAMES})
    np.testing.assert_array_equal(mix(stems).samples, short_stems["bass"].samples)


def test_mix_permutation_invariant(short_stems):
    perm = dict(zip(STEM_NAMES, [short_stems[n] for n in reversed(STEM_NAMES)]))
    np.testing.assert_allclose(mix(StemSet(perm)).samples, mix(short_stems).samples, atol=1e-15)
    np.testing.assert_array_equal(mix(apply_gains(short_stems, RemixGains())).samples, mix(short_stems).samples)


def test_gain_mix_linearity(short_stems):
    gains = RemixGains(drums=3.0, bass=-4.5, other=12.0, vocal=-20.0)
    expected = sum(10 ** (getattr(gains, n) / 20) * short_stems[n].samples for n in STEM_NAMES)
    np.testing.assert_allclose(mix(apply_gains(short_stems, gains)).samples, expected, rtol=1e-12, atol=1e-15)


def test_stemset_validation(short_stems):
    stems = dict(short_stems.stems)
    with pytest.raises(InvalidInputError):
        StemSet({k: v for k, v in stems.items() if k != "vocal"})
    with pytest.raises(InvalidInputError):
        StemSet({**stems, "vocal": AudioBuffer(np.zeros((2, 10)))})
    with pytest.raises(InvalidInputError):
        StemSet({**stems, "vocal": AudioBuffer(np.zeros(short_stems.n_samples))})


def test_identity_degradation(rng):
    x = AudioBuffer(rng.standard_normal((2, 20000)))
    assert DegradationSpec().is_identity
    np.testing.assert_array_equal(degrade(x, DegradationSpec()).samples, x.samples)


def test_noise_only_snr(rng):
    x = AudioBuffer(rng.standard_normal((2, 44100)))
    y = degrade(x, DegradationSpec(snr_db=20.0, seed=5))
    assert sdr(x, y)[1] == pytest.approx(20.0, abs=0.2)


def test_degradation_deterministic(rng):
    x = AudioBuffer(rng.standard_normal((2, 20000)))
    spec = DegradationSpec(fir_length=16, shift=-441, magnitude_jitter_db=3, phase_jitter_rad=0.5, snr_db=25, seed=9)
    a, b = degrade(x, spec), degrade(x, spec)
    assert a.samples.tobytes() == b.samples.tobytes()
    c = degrade(x, DegradationSpec(**{**spec.to_dict(), "seed": 10}))
    assert not np.array_equal(a.samples, c.samples)


def test_shift_stage(rng):
    x = rng.standard_normal((1, 3000))
    delayed = degrade(AudioBuffer(x), DegradationSpec(shift=10)).samples
    advanced = degrade(AudioBuffer(x), DegradationSpec(shift=-10)).samples
    np.testing.assert_array_equal(delayed[:, 10:], x[:, :-10])
    np.testing.assert_array_equal(advanced[:, :-10], x[:, 10:])


def test_pipeline_without_degradation_recovers_reference(short_stems, listener):
    stack, enhanced, report = run_pipeline(scene_for(listener), stems=short_stems)
    assert stack.degraded_nalred is None
    assert sdr(stack.nalred_remix, enhanced)[1] > 80
    assert min(report.sdr_after) > 80


def test_stack_contents(short_stems, listener):
    gains = RemixGains(vocal=6.0)
    stack = build_stack(short_stems, gains, listener)
    np.testing.assert_array_equal(stack.mixture_at_mic.samples, mix(short_stems).samples)
    np.testing.assert_array_equal(stack.pre_nalr_remix.samples, mix(apply_gains(short_stems, gains)).samples)
    np.testing.assert_array_equal(stack.nalred_remix.samples, apply_nalr(stack.pre_nalr_remix, listener).samples)


def test_frame_shift_needs_deep_filter(short_stems, listener):
    deg = DegradationSpec(shift=-441, seed=2)
    _, _, df = run_pipeline(scene_for(listener, degradation=deg, order=5), stems=short_stems)
    _, _, n1 = run_pipeline(scene_for(listener, degradation=deg, order=1), stems=short_stems)
    assert df.sdr_after_mean - n1.sdr_after_mean >= 20


def test_df_residual_dominates_crm(short_stems, listener):
    stack = build_stack(short_stems, RemixGains(), listener, DegradationSpec(fir_length=16, phase_jitter_rad=0.4, snr_db=30))
    noisy, ref = stft(stack.degraded_nalred), stft(stack.nalred_remix)
    _, r5 = fit_per_frequency_df(noisy, ref, EstimatorConfig(FilterOrder(5), ridge=0.0))
    _, r1 = fit_per_frequency_df(noisy, ref, EstimatorConfig(FilterOrder(1), ridge=0.0))
    assert np.all(r5.residual_after <= r1.residual_after * (1 + 1e-9))


def test_pipeline_deterministic(short_stems, listener):
    deg = DegradationSpec(fir_length=8, magnitude_jitter_db=2, snr_db=30, seed=4)
    _, a, _ = run_pipeline(scene_for(listener, degradation=deg), stems=short_stems)
    _, b, _ = run_pipeline(scene_for(listener, degradation=deg), stems=short_stems)
    assert a.samples.tobytes() == b.samples.tobytes()


def test_pipeline_rejects_wrong_sample_rate(listener):
    stems = StemSet({name: AudioBuffer(np.zeros((2, 100)), 48000) for name in STEM_NAMES})
    with pytest.raises(InvalidInputError, match="44100"):
        run_pipeline(scene_for(listener), stems=stems)


def test_pipeline_missing_stems(tmp_path, listener):
    scene = scene_for(listener, base_dir=tmp_path)
    with pytest.raises(FileNotFoundError, match="drums.wav"):
        run_pipeline(scene)
