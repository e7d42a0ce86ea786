"""
Deep filter versus complex ratio mask
=====================================

A one-frame misalignment between input and reference cannot be undone by
one complex gain per frequency, but a causal deep filter of order >= 2
absorbs it. We fit both with the oracle least-squares estimator and
watch the residual fall with filter order.
"""
import matplotlib.pyplot as plt

from dfremix import DegradationSpec, EstimatorConfig, FilterOrder, RemixGains, fit_per_frequency_df, stft
from dfremix.demo import demo_listener, make_demo_stems
from dfremix.pipeline import build_stack

stems = make_demo_stems(duration=3.0)
stack = build_stack(
    stems, RemixGains(), demo_listener(), DegradationSpec(shift=-441, phase_jitter_rad=0.5)
)
noisy = stft(stack.degraded_nalred)
reference = stft(stack.nalred_remix)

orders = range(1, 9)
residuals = []
for n in orders:
    _, report = fit_per_frequency_df(noisy, reference, EstimatorConfig(FilterOrder(n), ridge=0.0))
    residuals.append(report.relative_residual)
    print(f"order {n}: relative residual {report.relative_residual:.3e}")

plt.semilogy(list(orders), residuals, "o-")
plt.xlabel("filter order N")
plt.ylabel("relative STFT residual")
plt.savefig("residual_vs_order.png")
