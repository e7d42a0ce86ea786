"""Exit criteria for the toolkit, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest
terminal summary under "acceptance criteria".
"""
import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS
from dfremix.audio import AudioBuffer
from dfremix.demo import demo_listener, make_demo_stems
from dfremix.estimator import EstimatorConfig, fit_per_frequency_df
from dfremix.filtering import ComplexMask, DeepFilterTensor, FilterOrder, apply_crm, apply_deep_filter, unfold_time
from dfremix.metrics import SDR_CAP_DB, sdr
from dfremix.nalr import AUDIOGRAM_FREQUENCIES, Audiogram, apply_fir, design_fir, nalr_gains
from dfremix.pipeline import DegradationSpec, RemixGains, build_stack, enhance
from dfremix.stft import Spectrogram, StftParams, istft, stft


def record(number, ok, text):
    ACCEPTANCE_RESULTS.append((number, bool(ok), text))
    assert ok, text


@pytest.fixture(scope="module")
def demo_stems():
    return make_demo_stems()


def test_1_stft_round_trip():
    x = AudioBuffer(np.random.default_rng(1).standard_normal((2, 88200)))
    start = time.perf_counter()
    y = istft(stft(x, StftParams(2048, 2048, 441)))
    elapsed = time.perf_counter() - start
    rel = np.sqrt(np.mean((y.samples - x.samples) ** 2) / np.mean(x.samples**2))
    record(1, rel < 1e-8 and elapsed < 1.0,
           f"STFT round trip: RMS rel error {rel:.2e} (< 1e-8), {elapsed:.3f} s (< 1 s)")


def test_2_degeneration():
    rng = np.random.default_rng(2)
    worst = 0.0
    order = FilterOrder(1)
    for _ in range(100):
        c, t, f = rng.integers(1, 3), rng.integers(1, 20), rng.integers(2, 40)
        params = StftParams(2 * (f - 1), 2 * (f - 1), 1)
        spec = Spectrogram(rng.standard_normal((c, t, f)) + 1j * rng.standard_normal((c, t, f)), params, t - 1)
        coeffs = rng.standard_normal((c, 1, t, f)) + 1j * rng.standard_normal((c, 1, t, f))
        df = apply_deep_filter(unfold_time(spec, order), DeepFilterTensor(coeffs, order))
        crm = apply_crm(spec, ComplexMask(coeffs[:, 0]))
        worst = max(worst, float(np.max(np.abs(df.data - crm.data))))
    record(2, worst < 1e-12, f"deep filter N=1 vs cRM on 100 random spectrograms: max |diff| {worst:.1e} (< 1e-12)")


def test_3_loop_oracles():
    rng = np.random.default_rng(3)
    c_n, t_n, f_n = 2, 8, 8
    params = StftParams(2 * (f_n - 1), 2 * (f_n - 1), 1)
    spec = Spectrogram(rng.standard_normal((c_n, t_n, f_n)) + 1j * rng.standard_normal((c_n, t_n, f_n)), params, t_n - 1)
    worst = 0.0
    for lookback, lookahead in [(4, 0), (2, 2), (0, 4), (1, 0)]:
        order = FilterOrder(lookback + lookahead + 1, lookback, lookahead)
        n = order.order
        u = unfold_time(spec, order)
        m = rng.standard_normal((c_n, n, t_n, f_n)) + 1j * rng.standard_normal((c_n, n, t_n, f_n))
        out = apply_deep_filter(u, DeepFilterTensor(m, order)).data
        for c in range(c_n):
            for t in range(t_n):
                for f in range(f_n):
                    acc = 0j
                    for k in range(n):
                        src = t - lookback + k
                        x = spec.data[c, src, f] if 0 <= src < t_n else 0j
                        worst = max(worst, abs(u.data[c, t, f, k] - x))
                        acc += x * m[c, k, t, f]
                    worst = max(worst, abs(out[c, t, f] - acc))
    record(3, worst < 1e-13, f"unfold and dot product vs loop oracles (2x8x8x5): max |diff| {worst:.1e} (< 1e-13)")


def test_4_exact_recovery():
    rng = np.random.default_rng(4)
    clean = AudioBuffer(rng.standard_normal((2, 88200)))
    spec = stft(clean)
    c, t, f = spec.shape
    order3 = FilterOrder(3)
    kernel = rng.standard_normal((c, 3, 1, f)) + 1j * rng.standard_normal((c, 3, 1, f))
    reference = apply_deep_filter(unfold_time(spec, order3), DeepFilterTensor(np.broadcast_to(kernel, (c, 3, t, f)), order3))
    order5 = FilterOrder(5)
    filt, report = fit_per_frequency_df(spec, reference, EstimatorConfig(order5, ridge=0.0))
    enhanced = istft(apply_deep_filter(unfold_time(spec, order5), filt))
    _, sdr_mean = sdr(istft(reference), enhanced)
    record(4, report.relative_residual < 1e-10 and sdr_mean > 80,
           f"exact recovery of causal order-3 filter with N=5: STFT rel residual {report.relative_residual:.1e} "
           f"(< 1e-10), time-domain SDR {sdr_mean:.1f} dB (> 80)")


def test_5_residual_monotonicity():
    stems = make_demo_stems(duration=2.0, seed=5)
    scenarios = {
        "frame delay": DegradationSpec(shift=-441, seed=5),
        "FIR": DegradationSpec(fir_length=32, seed=5),
        "noise": DegradationSpec(snr_db=10.0, seed=5),
    }
    worst = -np.inf
    for spec in scenarios.values():
        stack = build_stack(stems, RemixGains(), demo_listener(), spec)
        noisy, ref = stft(stack.degraded_nalred), stft(stack.nalred_remix)
        floor = 1e-12 * np.sum(np.abs(ref.data) ** 2, axis=1)
        previous = None
        for n in range(1, 9):
            _, rep = fit_per_frequency_df(noisy, ref, EstimatorConfig(FilterOrder(n), ridge=0.0))
            if previous is not None:
                excess = (rep.residual_after - previous * (1 + 1e-9) - floor) / np.maximum(previous, 1e-300)
                worst = max(worst, float(np.max(excess)))
            previous = rep.residual_after
    record(5, worst <= 0,
           "per-frequency residual non-increasing for N=1..8 (frame delay, FIR, noise)"
           f"; max relative excess {max(worst, 0):.1e}")


def test_6_df_vs_crm_gap(demo_stems):
    start = time.perf_counter()
    degradation = DegradationSpec(shift=-441, phase_jitter_rad=0.5, seed=0)
    stack = build_stack(demo_stems, RemixGains(), demo_listener(), degradation)
    reference = stack.nalred_remix
    df, _ = enhance(stack.degraded_nalred, reference, "df", EstimatorConfig(FilterOrder(5)))
    n1, _ = enhance(stack.degraded_nalred, reference, "df", EstimatorConfig(FilterOrder(1)))
    gap = sdr(reference, df)[1] - sdr(reference, n1)[1]
    elapsed = time.perf_counter() - start
    record(6, gap >= 20 and elapsed < 30,
           f"frame shift + phase jitter: SDR(order 5) - SDR(order 1) = {gap:.1f} dB (>= 20), {elapsed:.1f} s (< 30 s)")


def test_7_nalr():
    gains = nalr_gains(Audiogram.flat(40))
    filt = design_fir(gains, 44100, 221)
    sr = 44100
    t = np.arange(sr) / sr
    measured = []
    for freq in AUDIOGRAM_FREQUENCIES:
        x = np.sin(2 * np.pi * freq * t)
        y = apply_fir(AudioBuffer(x), filt).samples[0]
        mid = slice(sr // 4, 3 * sr // 4)
        measured.append(10 * np.log10(np.sum(y[mid] ** 2) / np.sum(x[mid] ** 2)))
    deviation = float(np.max(np.abs(np.array(measured) - gains)))
    record(7, abs(gains[2] - 19.4) < 1e-12 and deviation <= 0.5,
           f"NAL-R flat-40: IG(1 kHz) = {gains[2]:.2f} dB (19.4), 221-tap measured deviation {deviation:.3f} dB (<= 0.5)")


def test_8_sdr_units():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((2, 44100))
    half = sdr(AudioBuffer(x), AudioBuffer(0.5 * x))[1]
    noise = rng.standard_normal(x.shape)
    noise *= np.sqrt(np.sum(x**2, axis=1, keepdims=True) / (100 * np.sum(noise**2, axis=1, keepdims=True)))
    snr20 = sdr(AudioBuffer(x), AudioBuffer(x + noise))[1]
    same = sdr(AudioBuffer(x), AudioBuffer(x))[1]
    ok = abs(half - 6.0206) <= 1e-4 and abs(snr20 - 20) <= 0.2 and same == SDR_CAP_DB
    record(8, ok, f"SDR: half amplitude {half:.4f} dB, 20 dB noise {snr20:.3f} dB, identical {same:.0f} dB (cap)")


def _cli(*args):
    env = dict(os.environ)
    return subprocess.run([sys.executable, "-m", "dfremix", *args], capture_output=True, text=True, env=env)


def test_9_end_to_end_cli(tmp_path):
    start = time.perf_counter()
    scene = str(tmp_path / "scene.json")
    steps = [
        ("gen-demo", "--out", str(tmp_path)),
        ("remix", "--scene", scene),
        ("degrade", "--scene", scene),
        ("enhance", "--scene", scene, "--mode", "df", "--order", "5", "--seed", "0"),
        ("eval", str(tmp_path / "out" / "nalred_remix.wav"), str(tmp_path / "out" / "enhanced.wav"),
         "--out", str(tmp_path / "out" / "eval.json")),
    ]
    codes = [_cli(*step).returncode for step in steps]
    report_bytes = (tmp_path / "out" / "report.json").read_bytes()
    eval_bytes = (tmp_path / "out" / "eval.json").read_bytes()
    rerun = [_cli(*steps[3]).returncode, _cli(*steps[4]).returncode]
    identical = (
        report_bytes == (tmp_path / "out" / "report.json").read_bytes()
        and eval_bytes == (tmp_path / "out" / "eval.json").read_bytes()
    )
    report = json.loads(report_bytes)
    gain = report["sdr_after_mean"] - report["sdr_before_mean"]
    elapsed = time.perf_counter() - start
    ok = all(code == 0 for code in codes + rerun) and gain >= 10 and identical and elapsed < 120
    record(9, ok,
           f"CLI gen-demo/remix/degrade/enhance/eval: exit codes {codes + rerun}, SDR gain {gain:.1f} dB (>= 10), "
           f"reruns byte-identical {identical}, {elapsed:.1f} s (< 120 s)")
