"""
STFT analysis and exact resynthesis
===================================

Hop 441 against a 2048-sample Hann window is not a constant-overlap-add
setting, so plain overlap-add would modulate the signal. Dividing by the
summed squared window restores it exactly.
"""
import matplotlib.pyplot as plt
import numpy as np

from dfremix import AudioBuffer, StftParams, istft, stft

rng = np.random.default_rng(0)
x = AudioBuffer(rng.standard_normal((2, 2 * 44100)))
spec = stft(x)
print("spectrogram shape (channels, frames, bins):", spec.shape)

y = istft(spec)
print("max reconstruction error:", np.max(np.abs(y.samples - x.samples)))

# The envelope that plain overlap-add would leave behind
params = StftParams()
w2 = params.analysis_window() ** 2
envelope = np.zeros(20 * params.hop + params.fft_size)
for t in range(20):
    envelope[t * params.hop : t * params.hop + params.fft_size] += w2

plt.plot(envelope)
plt.title("summed squared Hann window, hop 441")
plt.xlabel("sample")
plt.savefig("stft_envelope.png")
